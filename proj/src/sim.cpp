#include "msq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msq/error.hpp"
#include "msq/rng.hpp"

namespace msq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* policy_name(Policy p) {
    switch (p) {
    case Policy::Fcfs: return "fcfs";
    case Policy::Bgp: return "bgp";
    case Policy::Mgp: return "mgp";
    }
    return "?";
}

Policy parse_policy(std::string_view name) {
    if (name == "fcfs") return Policy::Fcfs;
    if (name == "bgp") return Policy::Bgp;
    if (name == "mgp") return Policy::Mgp;
    fail(ErrorCode::InvalidArgument,
         "unknown policy '" + std::string(name) + "' (expected fcfs, bgp or mgp)");
}

PolicyContext::PolicyContext(const JobType& job, Policy policy) : job_(&job), policy_(policy) {
    switch (policy) {
    case Policy::Fcfs: break;
    case Policy::Bgp: total_ = total_size_pmf(job); break;
    case Policy::Mgp: sjp_.emplace(job); break;
    }
}

double PolicyContext::priority(JobState s, double total_age, double arrival_time) const {
    switch (policy_) {
    case Policy::Fcfs: return -arrival_time;
    case Policy::Bgp:
        // Totals merged within 1e-9 can leave a sliver of age beyond the
        // last support point; the job is then as good as done.
        if (total_age >= total_->max_size()) return kInf;
        return 1.0 / single_stage_fair_at(*total_, total_age);
    case Policy::Mgp: return 1.0 / sjp_->fair_at(s);
    }
    return 0.0;
}

namespace {

struct PathStep {
    int stage;
    double size;
    std::size_t size_idx;  // index of `size` in the stage's support
};

struct Live {
    std::int64_t id;
    double arrival;
    std::vector<PathStep> path;
    double size;  // sampled total, summed in path order
    std::size_t k = 0;
    double served_stage = 0.0;
    double done_prefix = 0.0;
    std::size_t cross_idx = 0;     // next boundary (per policy)
    std::size_t cross_end = 0;     // boundaries strictly below completion
    double age_floor = 0.0;        // last crossed total-age boundary (Bgp)
    double priority = 0.0;
};

class Run {
public:
    Run(const JobType& job, Policy policy, double lambda, std::int64_t jobs, std::uint64_t seed)
        : job_(job), ctx_(job, policy), policy_(policy), lambda_(lambda), jobs_(jobs),
          arr_rng_(seed, 0), path_rng_(seed, 1) {}

    std::vector<JobRecord> operator()(double* time_avg_jobs) {
        out_.reserve(static_cast<std::size_t>(jobs_));
        next_arrival_ = arr_rng_.exponential(lambda_);
        while (!live_.empty() || arrived_ < jobs_) {
            if (live_.empty()) {
                now_ = next_arrival_;
                admit();
                continue;
            }
            step();
        }
        if (time_avg_jobs != nullptr) *time_avg_jobs = now_ > 0.0 ? area_ / now_ : 0.0;
        return std::move(out_);
    }

private:
    int pick_transition(const Stage& st) {
        double u = path_rng_.uniform01();
        double cum = 0.0;
        for (std::size_t k = 0; k + 1 < st.next.size(); ++k) {
            cum += st.next[k].second;
            if (u < cum) return st.next[k].first;
        }
        return st.next.back().first;
    }

    void admit() {
        Live j;
        j.id = arrived_++;
        j.arrival = now_;
        int s = job_.initial();
        while (s != job_.final_stage()) {
            const Stage& st = job_.stage(s);
            if (st.kind == StageKind::Dist) {
                std::size_t k = path_rng_.pick(st.dist->probs());
                j.path.push_back({s, st.dist->sizes()[k], k});
            }
            s = pick_transition(st);
        }
        j.size = 0.0;
        for (const PathStep& ps : j.path) j.size += ps.size;
        next_arrival_ = now_ + arr_rng_.exponential(lambda_);

        if (j.path.empty()) {
            // Nothing to serve: completes on arrival.
            out_.push_back({j.arrival, now_, 0.0});
            return;
        }
        set_boundaries(j);
        j.priority = priority(j);
        live_.push_back(std::move(j));
    }

    // Decision epochs between which the served job cannot lose the server:
    // support points it has yet to cross (its index only rises until one).
    void set_boundaries(Live& j) const {
        switch (policy_) {
        case Policy::Fcfs:
            j.cross_idx = j.cross_end = 0;
            break;
        case Policy::Mgp:
            j.cross_idx = 0;
            j.cross_end = j.path[j.k].size_idx;
            break;
        case Policy::Bgp: {
            const auto& sizes = ctx_.total_pmf().sizes();
            j.cross_idx = 0;
            j.cross_end = static_cast<std::size_t>(
                std::lower_bound(sizes.begin(), sizes.end(), j.size - 1e-7) - sizes.begin());
            break;
        }
        }
    }

    double priority(const Live& j) const {
        double total_age = std::max(j.done_prefix + j.served_stage, j.age_floor);
        return ctx_.priority(JobState{j.path[j.k].stage, j.served_stage}, total_age, j.arrival);
    }

    // Next boundary for the served job, as (time until it, snapped stage age
    // at it, snapped total-age floor).  Boundaries already at or behind the
    // job's age (exact landings from other events) are consumed silently.
    void next_crossing(Live& j, double& dt, double& snap_served, double& snap_floor) {
        dt = kInf;
        if (policy_ == Policy::Mgp) {
            const Stage& st = job_.stage(j.path[j.k].stage);
            while (j.cross_idx < j.cross_end) {
                double x = st.dist->sizes()[j.cross_idx];
                if (x > j.served_stage) {
                    dt = x - j.served_stage;
                    snap_served = x;
                    snap_floor = j.age_floor;
                    return;
                }
                ++j.cross_idx;
            }
        } else if (policy_ == Policy::Bgp) {
            const double total_age = j.done_prefix + j.served_stage;
            while (j.cross_idx < j.cross_end) {
                double t = ctx_.total_pmf().sizes()[j.cross_idx];
                if (t > total_age) {
                    dt = t - total_age;
                    snap_served = t - j.done_prefix;
                    snap_floor = t;
                    return;
                }
                ++j.cross_idx;
            }
        }
    }

    void step() {
        // Select the served job: highest priority, ties to earliest arrival.
        std::size_t ci = 0;
        for (std::size_t i = 1; i < live_.size(); ++i) {
            if (live_[i].priority > live_[ci].priority ||
                (live_[i].priority == live_[ci].priority && live_[i].id < live_[ci].id))
                ci = i;
        }
        Live& cur = live_[ci];
        const PathStep& ps = cur.path[cur.k];

        const double dt_arr = arrived_ < jobs_ ? next_arrival_ - now_ : kInf;
        const double dt_done = ps.size - cur.served_stage;
        double dt_cross, snap_served = 0.0, snap_floor = 0.0;
        next_crossing(cur, dt_cross, snap_served, snap_floor);

        const double dt = std::min(dt_done, std::min(dt_cross, dt_arr));
        // Work conservation: with jobs present the served job's completion is
        // finitely far, so the server always progresses.
        if (!(dt >= 0.0) || !std::isfinite(dt))
            fail(ErrorCode::InvalidState, "simulator would idle with jobs present");
        now_ += dt;
        area_ += static_cast<double>(live_.size()) * dt;
        cur.served_stage += dt;

        if (dt_done <= dt_cross && dt_done <= dt_arr) {
            cur.done_prefix += ps.size;  // exact: same order as the admit sum
            cur.served_stage = 0.0;
            ++cur.k;
            if (cur.k == cur.path.size()) {
                if (cur.done_prefix != cur.size)
                    fail(ErrorCode::InvalidState,
                         "preempt-resume accounting drifted from the sampled total size");
                out_.push_back({cur.arrival, now_, cur.size});
                live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(ci));
                return;
            }
            if (policy_ == Policy::Mgp) set_boundaries(cur);
            cur.priority = priority(cur);
            return;
        }
        if (dt_cross <= dt_arr) {
            cur.served_stage = snap_served;
            cur.age_floor = snap_floor;
            ++cur.cross_idx;
            cur.priority = priority(cur);
            return;
        }
        cur.priority = priority(cur);
        admit();
    }

    const JobType& job_;
    PolicyContext ctx_;
    Policy policy_;
    double lambda_;
    std::int64_t jobs_;
    RngStream arr_rng_, path_rng_;

    std::vector<Live> live_;
    std::vector<JobRecord> out_;
    double now_ = 0.0;
    double area_ = 0.0;
    double next_arrival_ = 0.0;
    std::int64_t arrived_ = 0;
};

double t_quantile_975(int df) {
    static const double table[] = {12.706, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646,
                                   2.3060, 2.2622, 2.2281, 2.2010, 2.1788, 2.1604, 2.1448,
                                   2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860, 2.0796,
                                   2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484,
                                   2.0452, 2.0423};
    if (df < 1) return 0.0;
    if (df <= 30) return table[df - 1];
    return 1.96;
}

double ci_half_width(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return t_quantile_975(static_cast<int>(n) - 1) * sd / std::sqrt(static_cast<double>(n));
}

}  // namespace

std::vector<JobRecord> simulate_rep(const JobType& job, Policy policy, double lambda,
                                    std::int64_t jobs, std::uint64_t seed,
                                    double* time_avg_jobs) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        fail(ErrorCode::InvalidArgument, "arrival rate must be strictly positive");
    if (jobs < 1) fail(ErrorCode::InvalidArgument, "need at least one job");
    return Run(job, policy, lambda, jobs, seed)(time_avg_jobs);
}

SimResult simulate(const JobType& job, Policy policy, const SimConfig& cfg) {
    if (cfg.replications < 1)
        fail(ErrorCode::InvalidArgument, "need at least one replication");
    const std::int64_t warmup = cfg.warmup < 0 ? cfg.jobs / 5 : cfg.warmup;
    if (warmup >= cfg.jobs)
        fail(ErrorCode::InvalidArgument, "warmup must leave jobs to measure");

    SimResult res;
    double sum_size = 0.0, sum_tavg = 0.0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
        double tavg = 0.0;
        std::vector<JobRecord> records =
            simulate_rep(job, policy, cfg.lambda, cfg.jobs, cfg.seed + static_cast<std::uint64_t>(rep), &tavg);
        double sum_t = 0.0, sum_s = 0.0;
        std::int64_t n = 0;
        for (std::size_t i = static_cast<std::size_t>(warmup); i < records.size(); ++i) {
            sum_t += records[i].completion - records[i].arrival;
            sum_s += records[i].size;
            ++n;
        }
        const double mean_t = sum_t / static_cast<double>(n);
        const double mean_s = sum_s / static_cast<double>(n);
        res.rep_mean_t.push_back(mean_t);
        res.rep_mean_tq.push_back(mean_t - mean_s);
        sum_size += mean_s;
        sum_tavg += tavg;
    }
    const double reps = static_cast<double>(cfg.replications);
    for (double x : res.rep_mean_t) res.mean_t += x;
    for (double x : res.rep_mean_tq) res.mean_tq += x;
    res.mean_t /= reps;
    res.mean_tq /= reps;
    res.mean_size = sum_size / reps;
    res.time_avg_jobs = sum_tavg / reps;
    res.ci95_t = ci_half_width(res.rep_mean_t);
    res.ci95_tq = ci_half_width(res.rep_mean_tq);
    return res;
}

std::vector<SweepRow> sweep(const JobType& job, const std::vector<double>& rhos,
                            const std::vector<Policy>& policies, const SimConfig& base,
                            const QuadratureSpec& quad) {
    const double mean_size = expected_total_size(job, JobState{job.initial(), 0.0});
    std::vector<SweepRow> rows;
    rows.reserve(rhos.size() * policies.size());
    for (double rho : rhos) {
        if (!(rho > 0.0 && rho < 1.0))
            fail(ErrorCode::InvalidArgument, "sweep loads must lie in (0, 1)");
        SimConfig cfg = base;
        cfg.lambda = rho / mean_size;
        double analytic = std::numeric_limits<double>::quiet_NaN();
        for (Policy p : policies) {
            SweepRow row;
            row.rho = rho;
            row.lambda = cfg.lambda;
            row.policy = p;
            SimResult r = simulate(job, p, cfg);
            row.mean_t = r.mean_t;
            row.mean_tq = r.mean_tq;
            row.ci95 = r.ci95_tq;
            if (p == Policy::Mgp) {
                if (std::isnan(analytic)) analytic = mean_queueing_time(job, cfg.lambda, quad);
                row.analytic_tq = analytic;
            } else {
                row.analytic_tq = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace msq

// End-to-end acceptance suite.  Each criterion prints one PASS/FAIL line;
// the exit status is the number of failed criteria.  Every randomized check
// uses a fixed seed so reruns are bit-identical.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "msq/analysis.hpp"
#include "msq/job_type.hpp"
#include "msq/pmf.hpp"
#include "msq/pwl.hpp"
#include "msq/sim.hpp"
#include "msq/sjp.hpp"
#include "msq/spec_io.hpp"

using namespace msq;

namespace {

std::string spec(const std::string& file) { return std::string(MSQ_SPEC_DIR) + "/" + file; }

std::string fmt(double x) {
    std::ostringstream ss;
    ss.precision(12);
    ss << x;
    return ss.str();
}

// Runs one criterion; `body` returns "" on success or a failure note.
class Runner {
public:
    explicit Runner(int total) : total_(total) {}

    void run(const std::string& name, double time_limit_s,
             const std::function<std::string()>& body) {
        ++index_;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        try {
            detail = body();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (detail.empty() && time_limit_s > 0.0 && secs >= time_limit_s)
            detail = "exceeded the " + fmt(time_limit_s) + " s time limit";
        std::printf("[%d/%d] %s  %s (%.2f s)\n", index_, total_,
                    detail.empty() ? "PASS" : "FAIL", name.c_str(), secs);
        if (!detail.empty()) {
            std::printf("      %s\n", detail.c_str());
            ++failures_;
        }
        std::fflush(stdout);
    }

    int failures() const { return failures_; }

private:
    int total_;
    int index_ = 0;
    int failures_ = 0;
};

JobType det_job(double size) { return testutil::make_single_stage_job("det", Pmf::point(size)); }

double fresh_mean(const JobType& job) {
    return expected_total_size(job, JobState{job.initial(), 0.0});
}

// ---- criterion bodies ----------------------------------------------------

std::string check_single_stage_oracle() {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 500; ++t) {
        const Pmf dist = testutil::random_pmf(rng, 8);
        const PwlFunction v = sjp_single_stage(dist);
        const double hi = 1.1 * dist.sizes().back();
        for (int k = 0; k < 1000; ++k) {
            const double r = hi * k / 999.0;
            const double want = testutil::single_stage_envelope_oracle(dist, r);
            if (std::fabs(v.eval(r) - want) > 1e-9)
                return "pmf #" + fmt(t) + " deviates from the envelope at r=" + fmt(r);
        }
    }
    return "";
}

std::string check_composition_law() {
    std::mt19937_64 rng(2025);
    std::uniform_int_distribution<int> stages_d(1, 5);
    for (int t = 0; t < 200; ++t) {
        const JobType j = testutil::random_dag_job(rng, stages_d(rng), 4);
        const JobType k = testutil::random_dag_job(rng, stages_d(rng), 4);
        const PwlFunction direct = sjp_of_job(sequential_compose(j, k));
        const PwlFunction composed = pwl_compose(sjp_of_job(j), sjp_of_job(k));
        const double gap = testutil::max_abs_curve_gap(direct, composed, 500);
        if (gap > 1e-9)
            return "pair #" + fmt(t) + " disagrees by " + fmt(gap);
    }
    return "";
}

std::string check_chain_solver() {
    std::mt19937_64 rng(2026);
    std::uniform_int_distribution<int> len_d(1, 12);
    std::uniform_int_distribution<int> sup_d(1, 6);
    for (int t = 0; t < 100; ++t) {
        std::vector<Pmf> dists;
        int total_support = 0;
        const int len = len_d(rng);
        for (int i = 0; i < len && total_support < 64; ++i) {
            const Pmf d = testutil::random_pmf(rng, std::min(sup_d(rng), 64 - total_support));
            total_support += static_cast<int>(d.sizes().size());
            dists.push_back(d);
        }
        const PwlFunction fast = sjp_chain(dists);
        const PwlFunction ref = sjp_of_job(testutil::make_chain_job("chain", dists));
        const double gap = testutil::max_abs_curve_gap(fast, ref, 400);
        if (gap > 1e-9) return "chain #" + fmt(t) + " disagrees by " + fmt(gap);
    }

    // Segment-operation growth: measure work at n and 8n stages and ask
    // which cost model extrapolates back down correctly.
    auto ops_for = [&rng](int n) {
        std::uniform_real_distribution<double> size_d(0.5, 20.0);
        std::vector<Pmf> dists;
        for (int i = 0; i < n; ++i) {
            const double a = size_d(rng);
            dists.push_back(Pmf({a, a + size_d(rng)}, {0.5, 0.5}));
        }
        pwl_op_count_reset();
        sjp_chain(dists);
        return static_cast<double>(pwl_op_count());
    };
    const double ops64 = ops_for(64);
    const double ops512 = ops_for(512);
    const double pred_sq = ops512 / (512.0 * 512.0) * 64.0 * 64.0;
    const double pred_nl =
        ops512 / (512.0 * std::log2(512.0)) * 64.0 * std::log2(64.0);
    if (pred_sq > 0.5 * ops64 && pred_sq < 2.0 * ops64)
        return "a quadratic cost model fits the measured work (" + fmt(ops64) + " at 64, " +
               fmt(ops512) + " at 512)";
    if (pred_nl < 0.5 * ops64 || pred_nl > 2.0 * ops64)
        return "an n log n cost model does not fit (" + fmt(ops64) + " at 64, " + fmt(ops512) +
               " at 512)";
    return "";
}

std::string check_deterministic_tail_shift() {
    std::mt19937_64 rng(2027);
    std::uniform_int_distribution<int> stages_d(1, 4);
    std::uniform_real_distribution<double> d_dist(0.1, 15.0);
    for (int t = 0; t < 200; ++t) {
        const JobType j = testutil::random_dag_job(rng, stages_d(rng), 4);
        const double d = d_dist(rng);
        const JobType tail = det_job(d);
        const double fair_j = fair_index(sjp_of_job(j)).fair;
        const double fair_jd = fair_index(sjp_of_job(sequential_compose(j, tail))).fair;
        const double fair_dj = fair_index(sjp_of_job(sequential_compose(tail, j))).fair;
        if (std::fabs(fair_jd - (fair_j + d)) > 1e-12)
            return "job #" + fmt(t) + ": fair with tail " + fmt(fair_jd) + " vs expected " +
                   fmt(fair_j + d);
        if (fair_jd > fair_dj + 1e-12)
            return "job #" + fmt(t) + ": tail-last price " + fmt(fair_jd) +
                   " exceeds tail-first price " + fmt(fair_dj);
    }
    return "";
}

std::string check_worked_values() {
    const double fair_a = fair_index(sjp_of_job(load_job_spec(spec("jobA.json")))).fair;
    const double fair_b = fair_index(sjp_of_job(load_job_spec(spec("jobB.json")))).fair;
    const double fair_c = fair_index(sjp_of_job(load_job_spec(spec("jobC.json")))).fair;
    if (fair_b != 6.0 || fair_c != 8.0 || fair_a != 10.0)
        return "three-chain prices (" + fmt(fair_b) + ", " + fmt(fair_c) + ", " + fmt(fair_a) +
               ") differ from (6, 8, 10)";
    if (!(fair_b < fair_c && fair_c < fair_a)) return "three-chain ordering broken";
    const JobType repair = load_job_spec(spec("repair.json"));
    const double fair_r = fair_index(sjp_of_job(repair)).fair;
    if (fair_r != 5.5) return "repair price " + fmt(fair_r) + " differs from 5.5";
    const double blind = single_stage_fair_at(total_size_pmf(repair), 0.0);
    if (blind != 7.5) return "size-only repair price " + fmt(blind) + " differs from 7.5";
    return "";
}

std::string check_md1() {
    const JobType det1 = det_job(1.0);
    for (double rho : {0.2, 0.5, 0.8}) {
        const double pk = rho / (2.0 * (1.0 - rho));
        const double analytic = mean_queueing_time(det1, rho);
        if (std::fabs(analytic - pk) > 1e-3 * pk)
            return "analytic " + fmt(analytic) + " vs closed form " + fmt(pk) + " at rho=" +
                   fmt(rho);
        SimConfig cfg;
        cfg.lambda = rho;
        cfg.jobs = 100'000;
        cfg.warmup = 50'000;  // start-empty bias dies out before measuring
        cfg.replications = 10;
        cfg.seed = 5;
        const SimResult res = simulate(det1, Policy::Mgp, cfg);
        if (std::fabs(res.mean_tq - pk) > res.ci95_tq)
            return "simulation CI " + fmt(res.mean_tq) + " +- " + fmt(res.ci95_tq) +
                   " misses the closed form " + fmt(pk) + " at rho=" + fmt(rho);
    }
    return "";
}

std::string check_analytic_vs_simulation() {
    for (const char* file : {"fig4_mixture.json", "repair.json"}) {
        const JobType job = load_job_spec(spec(file));
        const double mean = fresh_mean(job);
        for (double rho : {0.3, 0.6, 0.8, 0.9}) {
            const double lambda = rho / mean;
            const double analytic = mean_queueing_time(job, lambda);
            SimConfig cfg;
            cfg.lambda = lambda;
            cfg.jobs = 100'000;
            cfg.warmup = 50'000;
            cfg.replications = 10;
            cfg.seed = 5;
            const SimResult res = simulate(job, Policy::Mgp, cfg);
            if (std::fabs(res.mean_tq - analytic) > res.ci95_tq)
                return std::string(file) + " at rho=" + fmt(rho) + ": analytic " + fmt(analytic) +
                       " outside " + fmt(res.mean_tq) + " +- " + fmt(res.ci95_tq);
        }
    }
    return "";
}

std::string check_policy_sweep() {
    const struct {
        const char* file;
        double min_reduction;
    } systems[] = {{"fig4_mixture.json", 0.15}, {"repair.json", 0.20}};
    std::vector<double> rhos;
    for (int k = 0; k <= 9; ++k) rhos.push_back(0.5 + 0.05 * k);
    for (const auto& sys : systems) {
        const JobType job = load_job_spec(spec(sys.file));
        // Replication count and length grow with load so every CI stays
        // below 1% of its mean; variance scales roughly like 1/(1 - rho)^4.
        std::vector<SweepRow> rows;
        for (double rho : rhos) {
            SimConfig base;
            base.jobs = rho > 0.925 ? 10'000'000 : rho > 0.875 ? 3'000'000 : 1'000'000;
            base.replications = rho > 0.875 ? 20 : 10;
            const auto part = sweep(job, {rho}, {Policy::Bgp, Policy::Mgp}, base);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        double best = 0.0;
        for (std::size_t k = 0; k < rows.size(); k += 2) {
            const SweepRow& bgp = rows[k];
            const SweepRow& mgp = rows[k + 1];
            if (!(mgp.mean_t < bgp.mean_t))
                return std::string(sys.file) + " at rho=" + fmt(bgp.rho) +
                       ": stage-aware mean response " + fmt(mgp.mean_t) +
                       " not below size-only " + fmt(bgp.mean_t);
            for (const SweepRow* row : {&bgp, &mgp})
                if (row->ci95 >= 0.01 * row->mean_tq)
                    return std::string(sys.file) + " at rho=" + fmt(row->rho) + " (" +
                           policy_name(row->policy) + "): CI half-width " + fmt(row->ci95) +
                           " is not below 1% of " + fmt(row->mean_tq);
            best = std::max(best, (bgp.mean_t - mgp.mean_t) / bgp.mean_t);
        }
        if (best < sys.min_reduction)
            return std::string(sys.file) + ": best response-time reduction " + fmt(best) +
                   " below " + fmt(sys.min_reduction);
    }
    return "";
}

std::string check_invariants() {
    std::mt19937_64 rng(2028);
    std::uniform_int_distribution<int> stages_d(1, 5);

    // Value-curve bounds and the tail they induce.
    for (int t = 0; t < 50; ++t) {
        const JobType job = testutil::random_dag_job(rng, stages_d(rng), 4);
        const PwlFunction v = sjp_of_job(job);
        const double mean = fresh_mean(job);
        if (std::fabs(v.asymptotic_gap() - mean) > 1e-9)
            return "curve gap " + fmt(v.asymptotic_gap()) + " differs from mean size " + fmt(mean);
        double tail_prev = 1.0, tail_integral = 0.0, lo = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            tail_integral +=
                (v.breakpoints()[k] - lo) * (1.0 - (k == 0 ? 0.0 : v.slopes()[k - 1]));
            lo = v.breakpoints()[k];
        }
        if (std::fabs(tail_integral - mean) > 1e-9)
            return "tail integrates to " + fmt(tail_integral) + ", mean size is " + fmt(mean);
        for (double r : testutil::value_grid(v.last_breakpoint(), 200)) {
            const double val = v.eval(r);
            if (val < -1e-12 || val > r + 1e-12 || val < r - mean - 1e-9)
                return "value " + fmt(val) + " violates its bounds at r=" + fmt(r);
            const double tail = prevailing_tail(v, r);
            if (tail < 0.0 || tail > tail_prev + 1e-15)
                return "prevailing tail is not a tail at r=" + fmt(r);
            tail_prev = tail;
        }
    }

    // Interference: worked values, symmetry, bounds.
    {
        const PwlFunction det2 = sjp_single_stage(Pmf::point(2.0));
        const PwlFunction det3 = sjp_single_stage(Pmf::point(3.0));
        const PwlFunction s = sjp_single_stage(Pmf({1.0, 12.0}, {0.5, 0.5}));
        if (interference_alone(det2, det3) != 2.0 || interference_alone(s, s) != 4.25 ||
            interference_alone(det2, s) != 2.0)
            return "worked interference values differ from (2, 4.25, 2)";
        for (int t = 0; t < 30; ++t) {
            const PwlFunction a = testutil::random_pwl(rng), b = testutil::random_pwl(rng);
            const double ab = interference_alone(a, b);
            if (ab != interference_alone(b, a)) return "interference is not symmetric";
            if (ab < 0.0 || ab > std::min(a.asymptotic_gap(), b.asymptotic_gap()) + 1e-12)
                return "interference violates its bounds";
        }
    }

    // Busy-period cost derivative over clock stretch stays a valid tail.
    for (int t = 0; t < 20; ++t) {
        const PwlFunction fresh = testutil::random_pwl(rng);
        CostCurves cc(fresh, 0.8 / fresh.asymptotic_gap());
        const PwlFunction state = testutil::random_pwl(rng);
        std::vector<double> cuts{0.0};
        for (double b : fresh.breakpoints()) cuts.push_back(b);
        for (double b : state.breakpoints()) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        double prev = 1.0 + 1e-12;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            if (cuts[k + 1] <= cuts[k]) continue;
            for (double frac : {1e-6, 0.5, 1.0 - 1e-6}) {
                const double r = cuts[k] + frac * (cuts[k + 1] - cuts[k]);
                const double ratio = cc.cost_busy_prime(r, state) / cc.w_prime(r);
                if (ratio < -1e-12 || ratio > prev + 1e-9)
                    return "busy-cost ratio is not a nonincreasing tail at r=" + fmt(r);
                prev = ratio;
            }
        }
    }

    const JobType repair = load_job_spec(spec("repair.json"));

    // Little's law on the simulator's own occupancy average.
    {
        SimConfig cfg;
        cfg.lambda = 0.08;
        cfg.jobs = 50'000;
        cfg.replications = 5;
        const SimResult res = simulate(repair, Policy::Mgp, cfg);
        const double want = cfg.lambda * res.mean_t;
        if (std::fabs(res.time_avg_jobs - want) >
            want * (3.0 * res.ci95_t / res.mean_t + 0.01))
            return "occupancy " + fmt(res.time_avg_jobs) + " far from rate times response " +
                   fmt(want);
    }

    // Work conservation: the final busy period ends at the same instant no
    // matter which policy ordered the work.
    {
        double last[3] = {0.0, 0.0, 0.0};
        int k = 0;
        for (Policy p : {Policy::Fcfs, Policy::Bgp, Policy::Mgp}) {
            double horizon = 0.0;
            for (const JobRecord& rec : simulate_rep(repair, p, 0.1, 3000, 7))
                horizon = std::max(horizon, rec.completion);
            last[k++] = horizon;
        }
        if (std::fabs(last[0] - last[1]) > 1e-6 * last[0] ||
            std::fabs(last[0] - last[2]) > 1e-6 * last[0])
            return "policies drain the same workload at different instants (" + fmt(last[0]) +
                   ", " + fmt(last[1]) + ", " + fmt(last[2]) + ")";
    }

    // Bit-identical seeded reruns.
    {
        SimConfig cfg;
        cfg.lambda = 0.07;
        cfg.jobs = 4000;
        cfg.replications = 3;
        cfg.seed = 11;
        const SimResult a = simulate(repair, Policy::Bgp, cfg);
        const SimResult b = simulate(repair, Policy::Bgp, cfg);
        if (a.rep_mean_t != b.rep_mean_t || a.rep_mean_tq != b.rep_mean_tq)
            return "the same seed produced different replication means";
    }

    // Single-stage jobs: size-only and stage-aware scheduling coincide.
    {
        const JobType svar = testutil::make_single_stage_job("svar", Pmf({1.0, 12.0}, {0.5, 0.5}));
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            const auto a = simulate_rep(svar, Policy::Bgp, 0.1, 5000, seed);
            const auto b = simulate_rep(svar, Policy::Mgp, 0.1, 5000, seed);
            for (std::size_t j = 0; j < a.size(); ++j)
                if (a[j].arrival != b[j].arrival || a[j].completion != b[j].completion)
                    return "size-only and stage-aware runs diverge on a single-stage job";
        }
    }

    // Deterministic jobs: stage-aware scheduling reduces to arrival order.
    {
        const JobType det2 = det_job(2.0);
        const auto a = simulate_rep(det2, Policy::Fcfs, 0.3, 5000, 9);
        const auto b = simulate_rep(det2, Policy::Mgp, 0.3, 5000, 9);
        for (std::size_t j = 0; j < a.size(); ++j)
            if (a[j].arrival != b[j].arrival || a[j].completion != b[j].completion)
                return "stage-aware order differs from arrival order on deterministic jobs";
    }

    return "";
}

}  // namespace

int main() {
    Runner runner(9);
    runner.run("single-stage value curves match a brute-force policy envelope", 5.0,
               check_single_stage_oracle);
    runner.run("value curves of sequential jobs compose", 10.0, check_composition_law);
    runner.run("chain solver matches the general solver with near-linear cost", 0.0,
               check_chain_solver);
    runner.run("deterministic tail work shifts the fair price by exactly its size", 0.0,
               check_deterministic_tail_shift);
    runner.run("worked repair and three-chain systems price exactly as derived", 0.0,
               check_worked_values);
    runner.run("M/D/1 queueing time matches the closed form and simulation", 120.0, check_md1);
    runner.run("analytic queueing times sit inside simulation confidence intervals", 600.0,
               check_analytic_vs_simulation);
    runner.run("stage-aware beats size-only scheduling across the load sweep", 0.0,
               check_policy_sweep);
    runner.run("structural and simulation invariants hold", 0.0, check_invariants);

    if (runner.failures() == 0)
        std::printf("all 9 acceptance criteria passed\n");
    else
        std::printf("%d of 9 acceptance criteria FAILED\n", runner.failures());
    return runner.failures();
}

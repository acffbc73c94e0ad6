#pragma once

// Shared generators and reference oracles for the test binaries.  The
// oracles deliberately take the slow, obviously-correct route (exhaustive
// policy enumeration, dense grids) so the fast library code has something
// independent to be checked against.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "msq/error.hpp"
#include "msq/job_type.hpp"
#include "msq/pmf.hpp"
#include "msq/pwl.hpp"

namespace testutil {

inline void check_error_code(msq::ErrorCode want, const std::function<void()>& f,
                             std::string* message_out = nullptr) {
    try {
        f();
    } catch (const msq::Error& e) {
        if (message_out != nullptr) *message_out = e.what();
        if (e.code() == want) return;
        throw;
    }
    msq::fail(msq::ErrorCode::InvalidArgument, "expected an error, none was thrown");
}

// Random PMF with up to max_support points, sizes in (0, 20].
inline msq::Pmf random_pmf(std::mt19937_64& rng, int max_support = 8) {
    std::uniform_int_distribution<int> nd(1, max_support);
    std::uniform_real_distribution<double> size_d(1e-3, 20.0);
    std::uniform_real_distribution<double> weight_d(0.05, 1.0);
    const int n = nd(rng);
    std::vector<double> sizes(static_cast<std::size_t>(n));
    std::vector<double> probs(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        sizes[static_cast<std::size_t>(i)] = size_d(rng);
        probs[static_cast<std::size_t>(i)] = weight_d(rng);
        total += probs[static_cast<std::size_t>(i)];
    }
    for (double& p : probs) p /= total;
    return msq::Pmf(std::move(sizes), std::move(probs));
}

// Random curve in canonical stopping-value form: slopes strictly increasing
// to exactly 1, breakpoints strictly increasing from > 0.
inline msq::PwlFunction random_pwl(std::mt19937_64& rng, int max_segments = 6) {
    std::uniform_int_distribution<int> nd(1, max_segments);
    std::uniform_real_distribution<double> gap_d(0.1, 5.0);
    const int n = nd(rng);
    std::vector<msq::PwlFunction::Segment> segs;
    double b = 0.0;
    for (int k = 0; k < n; ++k) {
        b += gap_d(rng);
        const double slope = static_cast<double>(k + 1) / n;
        segs.push_back({b, slope});
    }
    return msq::PwlFunction::from_segments(std::move(segs));
}

// Brute-force single-stage stopping envelope: max over stopping points m of
//   P(X <= x_m) * r - E[min(X, x_m)]
// together with the zero line ("never start").
inline double single_stage_envelope_oracle(const msq::Pmf& dist, double r) {
    const auto& x = dist.sizes();
    const auto& p = dist.probs();
    double best = 0.0;
    double cum = 0.0, cumx = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
        cum += p[m];
        cumx += p[m] * x[m];
        const double emin = cumx + (1.0 - cum) * x[m];
        best = std::max(best, cum * r - emin);
    }
    return best;
}

// Random acyclic multistage job with `stages` service stages in a fixed
// topological order; every stage can reach the final one.
inline msq::JobType random_dag_job(std::mt19937_64& rng, int stages, int max_support = 4,
                                   bool allow_zero_head = false) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    msq::JobDesc d;
    d.name = "random";
    const bool zero_head = allow_zero_head && stages >= 2 && u01(rng) < 0.3;
    for (int i = 0; i < stages; ++i) {
        msq::StageDesc sd;
        sd.name = "s" + std::to_string(i);
        const bool head_is_zero = zero_head && i == 0;
        if (!head_is_zero) sd.dist = random_pmf(rng, max_support);

        // Targets drawn from the later stages plus the final one.  A zero
        // head must lead to real work, never straight to the final stage.
        std::vector<int> pool;
        for (int j = i + 1; j < stages; ++j) pool.push_back(j);
        std::uniform_int_distribution<int> fanout_d(1, 2);
        int fanout = std::min<int>(fanout_d(rng), static_cast<int>(pool.size()));
        if (head_is_zero) fanout = std::max(fanout, 1);
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<std::string> targets;
        for (int k = 0; k < fanout; ++k)
            targets.push_back("s" + std::to_string(pool[static_cast<std::size_t>(k)]));
        if (targets.empty() || (!head_is_zero && u01(rng) < 0.4))
            targets.emplace_back(msq::kFinalName);

        double total = 0.0;
        std::vector<double> w(targets.size());
        for (double& x : w) {
            x = 0.05 + u01(rng);
            total += x;
        }
        for (std::size_t k = 0; k < targets.size(); ++k)
            sd.transitions.emplace_back(targets[k], w[k] / total);
        d.stages.push_back(std::move(sd));
    }
    d.initial = "s0";
    return msq::JobType(std::move(d));
}

inline msq::JobType make_single_stage_job(std::string name, msq::Pmf dist) {
    msq::JobDesc d;
    d.name = std::move(name);
    d.initial = "work";
    msq::StageDesc sd;
    sd.name = "work";
    sd.dist = std::move(dist);
    sd.transitions.emplace_back(msq::kFinalName, 1.0);
    d.stages.push_back(std::move(sd));
    return msq::JobType(std::move(d));
}

// Fixed sequence of stages served in order.
inline msq::JobType make_chain_job(std::string name, const std::vector<msq::Pmf>& dists) {
    msq::JobDesc d;
    d.name = std::move(name);
    d.initial = "c0";
    for (std::size_t i = 0; i < dists.size(); ++i) {
        msq::StageDesc sd;
        sd.name = "c" + std::to_string(i);
        sd.dist = dists[i];
        sd.transitions.emplace_back(
            i + 1 < dists.size() ? "c" + std::to_string(i + 1) : std::string(msq::kFinalName),
            1.0);
        d.stages.push_back(std::move(sd));
    }
    return msq::JobType(std::move(d));
}

// Diagnose (size 1), then easy (4) w.p. 2/3 or hard (12) w.p. 1/3.
inline msq::JobType make_repair_job() {
    msq::JobDesc d;
    d.name = "repair";
    d.initial = "diagnose";
    auto add = [&d](std::string name, double size,
                    std::vector<std::pair<std::string, double>> tr) {
        msq::StageDesc sd;
        sd.name = std::move(name);
        sd.dist = msq::Pmf::point(size);
        sd.transitions = std::move(tr);
        d.stages.push_back(std::move(sd));
    };
    add("diagnose", 1.0, {{"easy", 2.0 / 3.0}, {"hard", 1.0 / 3.0}});
    add("easy", 4.0, {{"DONE", 1.0}});
    add("hard", 12.0, {{"DONE", 1.0}});
    return msq::JobType(std::move(d));
}

// Exhaustive stopping-policy value of a whole job: a policy fixes one
// stopping point per stage (0 = give up on entry); success probability and
// expected served time follow by backward recursion over the DAG; the value
// at r is the max over all policies.  Exponential in the stage count, fine
// for <= 5 stages x 4 support points.
class JobEnvelopeOracle {
public:
    explicit JobEnvelopeOracle(const msq::JobType& job) {
        const int n = job.stage_count();
        std::vector<std::vector<double>> choices;  // stopping points per stage
        for (int i = 0; i < n; ++i) {
            const msq::Stage& st = job.stage(i);
            if (st.kind == msq::StageKind::Dist) {
                std::vector<double> c{0.0};
                for (double x : st.dist->sizes()) c.push_back(x);
                choices.push_back(std::move(c));
            } else {
                choices.push_back({0.0});  // unused placeholder
            }
        }

        std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
        std::vector<double> succ(static_cast<std::size_t>(n)), cost(static_cast<std::size_t>(n));
        const auto& topo = job.topo_order();
        for (;;) {
            for (auto rit = topo.rbegin(); rit != topo.rend(); ++rit) {
                const int i = *rit;
                const msq::Stage& st = job.stage(i);
                const auto si = static_cast<std::size_t>(i);
                if (st.kind == msq::StageKind::Final) {
                    succ[si] = 1.0;
                    cost[si] = 0.0;
                    continue;
                }
                double down_succ = 0.0, down_cost = 0.0;
                for (const auto& [j, p] : st.next) {
                    down_succ += p * succ[static_cast<std::size_t>(j)];
                    down_cost += p * cost[static_cast<std::size_t>(j)];
                }
                if (st.kind == msq::StageKind::Zero) {
                    succ[si] = down_succ;
                    cost[si] = down_cost;
                    continue;
                }
                const double y = choices[si][pick[si]];
                const double done = 1.0 - st.dist->tail(y);
                succ[si] = done * down_succ;
                cost[si] = st.dist->expected_min(y) + done * down_cost;
            }
            policies_.emplace_back(succ[static_cast<std::size_t>(job.initial())],
                                   cost[static_cast<std::size_t>(job.initial())]);

            int i = 0;
            while (i < n && (job.stage(i).kind != msq::StageKind::Dist ||
                             ++pick[static_cast<std::size_t>(i)] ==
                                 choices[static_cast<std::size_t>(i)].size())) {
                if (job.stage(i).kind == msq::StageKind::Dist) pick[static_cast<std::size_t>(i)] = 0;
                ++i;
            }
            if (i == n) break;
        }
    }

    double value(double r) const {
        double best = 0.0;
        for (const auto& [succ, cost] : policies_) best = std::max(best, succ * r - cost);
        return best;
    }

private:
    std::vector<std::pair<double, double>> policies_;  // (success prob, expected time)
};

// Evaluation grid covering [0, hi] plus a stretch beyond it.
inline std::vector<double> value_grid(double hi, int points) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k)
        g.push_back(1.25 * hi * static_cast<double>(k) / (points - 1));
    return g;
}

inline double max_abs_curve_gap(const msq::PwlFunction& a, const msq::PwlFunction& b,
                                int points = 400) {
    const double hi = std::max(a.last_breakpoint(), b.last_breakpoint());
    double worst = 0.0;
    for (double r : value_grid(hi, points))
        worst = std::max(worst, std::fabs(a.eval(r) - b.eval(r)));
    return worst;
}

}  // namespace testutil

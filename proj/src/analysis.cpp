#include "msq/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "msq/error.hpp"
#include "msq/fmt.hpp"
#include "msq/quadrature.hpp"

namespace msq {

double cost_alone(const PwlFunction& v, double r) {
    if (!(r >= 0.0) || !std::isfinite(r))
        fail(ErrorCode::NegativeReward, "reward level must be a nonnegative real");
    return r - v.eval(r);
}

double prevailing_tail(const PwlFunction& v, double r) {
    if (!(r >= 0.0) || !std::isfinite(r))
        fail(ErrorCode::NegativeReward, "reward level must be a nonnegative real");
    return 1.0 - v.slope_right(r);
}

double interference_alone(const PwlFunction& a, const PwlFunction& b) {
    // Piecewise-constant integrand; walk the union of breakpoints.
    const auto& ba = a.breakpoints();
    const auto& bb = b.breakpoints();
    std::vector<double> cuts;
    cuts.reserve(ba.size() + bb.size() + 1);
    cuts.push_back(0.0);
    std::merge(ba.begin(), ba.end(), bb.begin(), bb.end(), std::back_inserter(cuts));
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double len = cuts[k + 1] - cuts[k];
        if (len <= 0.0) continue;
        // Tails multiply first so the result is bit-identical under swap.
        acc += len * ((1.0 - a.slope_right(cuts[k])) * (1.0 - b.slope_right(cuts[k])));
    }
    return acc;
}

CostCurves::CostCurves(PwlFunction fresh_value, double lambda)
    : fresh_(std::move(fresh_value)), lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        fail(ErrorCode::InvalidArgument, "arrival rate must be strictly positive");
    load_ = lambda_ * fresh_.asymptotic_gap();
    if (load_ >= 1.0)
        fail(ErrorCode::Unstable,
             "offered load " + fmt_g(load_) + " is at or above 1; the queue has no steady state");
}

double CostCurves::w_prime(double r) const {
    const double one_minus = 1.0 - rho(r);
    return (one_minus + r * rho_prime(r)) / (one_minus * one_minus);
}

double CostCurves::cost_busy(double r, const PwlFunction& v) const {
    return (r - v.eval(r)) / (1.0 - rho(r));
}

double CostCurves::cost_busy_prime(double r, const PwlFunction& v) const {
    const double one_minus = 1.0 - rho(r);
    const double num =
        (1.0 - v.slope_right(r)) * one_minus + (r - v.eval(r)) * rho_prime(r);
    return num / (one_minus * one_minus);
}

namespace {

// Reward-level integral of
//   cost_busy_prime(r; state) * cost_busy_prime(r; fresh) / w_prime(r).
// The fresh factor vanishes once the fresh curve's slope hits 1, so the
// domain ends at its last breakpoint.  Integration runs piecewise between
// the merged breakpoints of the two curves, where the integrand is a smooth
// rational function.
double reward_integral(const CostCurves& cc, const PwlFunction& state_curve, int r_nodes,
                       std::uint64_t& evals_left) {
    const double r_max = cc.fresh().last_breakpoint();
    std::vector<double> cuts;
    cuts.push_back(0.0);
    for (double b : cc.fresh().breakpoints())
        if (b > 0.0 && b < r_max) cuts.push_back(b);
    for (double b : state_curve.breakpoints())
        if (b > 0.0 && b < r_max) cuts.push_back(b);
    cuts.push_back(r_max);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (evals_left < static_cast<std::uint64_t>(r_nodes))
            fail(ErrorCode::QuadratureBudgetExceeded,
                 "quadrature evaluation budget exhausted; raise max_evals or lower node counts");
        evals_left -= static_cast<std::uint64_t>(r_nodes);
        acc += gauss_integrate(r_nodes, cuts[k], cuts[k + 1], [&](double r) {
            return cc.cost_busy_prime(r, state_curve) * cc.cost_busy_prime(r, cc.fresh()) /
                   cc.w_prime(r);
        });
    }
    return acc;
}

}  // namespace

std::vector<double> mean_queueing_time_by_stage(const JobType& job, double lambda,
                                                const QuadratureSpec& q) {
    JobSjp sjp(job);
    CostCurves cc(sjp.value(), lambda);
    if (cc.load() > 0.999)
        fail(ErrorCode::Unstable, "offered load " + fmt_g(cc.load()) +
                                      " exceeds 0.999; results there are numerically meaningless");

    const std::vector<double> reach = reach_probs(job);
    std::uint64_t evals_left = q.max_evals;

    std::vector<double> contrib(static_cast<std::size_t>(job.stage_count()), 0.0);
    for (int i = 0; i < job.stage_count(); ++i) {
        const Stage& st = job.stage(i);
        // Zero-service and final stages hold no job for any positive time.
        if (st.kind != StageKind::Dist) continue;
        const double qi = reach[static_cast<std::size_t>(i)];
        if (qi == 0.0) continue;

        const auto& x = st.dist->sizes();
        const auto& p = st.dist->probs();
        double stage_acc = 0.0;
        double tail = 1.0;
        double lo = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            // On (lo, x[k]) the age tail is constant and the conditioned
            // stage keeps the same surviving support.
            stage_acc += gauss_integrate(q.x_nodes, lo, x[k], [&](double age) {
                PwlFunction v = sjp.value_at(JobState{i, age});
                return reward_integral(cc, v, q.r_nodes, evals_left);
            }) * tail;
            tail -= p[k];
            lo = x[k];
        }
        contrib[static_cast<std::size_t>(i)] = lambda * qi * stage_acc;
    }
    return contrib;
}

double mean_queueing_time(const JobType& job, double lambda, const QuadratureSpec& q) {
    const std::vector<double> contrib = mean_queueing_time_by_stage(job, lambda, q);
    double total = 0.0;
    for (double c : contrib) total += c;
    return total;
}

double mean_response_time(const JobType& job, double lambda, const QuadratureSpec& q) {
    return mean_queueing_time(job, lambda, q) +
           expected_total_size(job, JobState{job.initial(), 0.0});
}

}  // namespace msq

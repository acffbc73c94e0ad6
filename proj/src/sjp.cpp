#include "msq/sjp.hpp"

#include <cmath>
#include <limits>

#include "msq/error.hpp"

namespace msq {

PwlFunction sjp_single_stage(const Pmf& dist) {
    const auto& x = dist.sizes();
    const auto& p = dist.probs();
    const std::size_t n = x.size();

    // Monotone stack over lines in increasing-slope order; start[k] is where
    // line k takes over the envelope.  The zero line sits at the bottom and
    // never pops.
    std::vector<double> slope{0.0}, icept{0.0};
    std::vector<double> start{-std::numeric_limits<double>::infinity()};
    double cum = 0.0, cumx = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        cum += p[m];
        cumx += p[m] * x[m];
        const double c = cum;                          // P(X <= x_m)
        const double e = cumx + (1.0 - cum) * x[m];    // E[min(X, x_m)]
        double takeover;
        for (;;) {
            takeover = (icept.back() + e) / (c - slope.back());
            if (takeover > start.back()) break;
            slope.pop_back();
            icept.pop_back();
            start.pop_back();
        }
        slope.push_back(c);
        icept.push_back(-e);
        start.push_back(takeover);
    }

    std::vector<PwlFunction::Segment> segments;
    segments.reserve(slope.size() - 1);
    for (std::size_t k = 1; k < slope.size(); ++k) segments.push_back({start[k], slope[k]});
    return PwlFunction::from_segments(std::move(segments));
}

double single_stage_fair_at(const Pmf& dist, double age) {
    if (!(age >= 0.0) || age >= dist.max_size())
        fail(ErrorCode::AgeBeyondSupport, "age must lie in [0, largest support point)");
    const auto& x = dist.sizes();
    const auto& p = dist.probs();
    const std::size_t n = x.size();

    // The normalizing P(X > age) cancels between numerator and denominator,
    // so everything can stay unconditioned.
    double tail = 0.0;
    for (std::size_t m = 0; m < n; ++m)
        if (x[m] > age) tail += p[m];

    double cum = 0.0, cumx = 0.0;
    double best = std::numeric_limits<double>::infinity();
    double remaining_tail = tail;
    for (std::size_t m = 0; m < n; ++m) {
        if (x[m] <= age) continue;
        cum += p[m];
        cumx += p[m] * (x[m] - age);
        remaining_tail -= p[m];
        const double e = cumx + remaining_tail * (x[m] - age);
        best = std::min(best, e / cum);
    }
    return best;
}

IndexValue fair_index(const PwlFunction& value) {
    double fair = value.first_breakpoint();
    if (fair <= 0.0)
        fail(ErrorCode::DegenerateJob,
             "job completes instantly with positive probability; its index is unbounded");
    return IndexValue{fair, 1.0 / fair};
}

JobSjp::JobSjp(const JobType& job) : job_(&job) {
    const auto n = static_cast<std::size_t>(job.stage_count());
    value_.resize(n);
    down_.resize(n);
    const auto& topo = job.topo_order();
    for (auto rit = topo.rbegin(); rit != topo.rend(); ++rit) {
        const std::size_t i = static_cast<std::size_t>(*rit);
        const Stage& st = job.stage(*rit);
        if (st.kind == StageKind::Final) {
            value_[i] = PwlFunction::identity();
            continue;
        }
        std::vector<std::pair<double, const PwlFunction*>> parts;
        parts.reserve(st.next.size());
        for (const auto& [j, p] : st.next)
            parts.emplace_back(p, &*value_[static_cast<std::size_t>(j)]);
        down_[i] = pwl_mix(parts);
        value_[i] = st.kind == StageKind::Zero
                        ? *down_[i]
                        : pwl_compose(sjp_single_stage(*st.dist), *down_[i]);
    }
}

const PwlFunction& JobSjp::downstream(int stage) const {
    const auto& d = down_[static_cast<std::size_t>(stage)];
    if (!d) fail(ErrorCode::InvalidState, "the final stage has nothing downstream");
    return *d;
}

PwlFunction JobSjp::value_at(JobState s) const {
    job_->check_state(s);
    const Stage& st = job_->stage(s.stage);
    const PwlFunction& down = *down_[static_cast<std::size_t>(s.stage)];
    if (st.kind == StageKind::Zero) return down;
    return pwl_compose(sjp_single_stage(st.dist->conditioned(s.age)), down);
}

double JobSjp::fair_at(JobState s) const {
    job_->check_state(s);
    const Stage& st = job_->stage(s.stage);
    const PwlFunction& down = *down_[static_cast<std::size_t>(s.stage)];
    if (st.kind == StageKind::Zero) return down.first_breakpoint();
    return down.inverse(single_stage_fair_at(*st.dist, s.age));
}

PwlFunction sjp_of_job(const JobType& job) { return JobSjp(job).value(); }

namespace {

PwlFunction chain_range(const std::vector<Pmf>& stages, const std::vector<std::size_t>& prefix,
                        std::size_t lo, std::size_t hi) {
    if (lo == hi) return PwlFunction::identity();
    if (hi - lo == 1) return sjp_single_stage(stages[lo]);
    // Pivot on the stage straddling the support midpoint; both sides then
    // hold at most half of the support points.
    const std::size_t mid = prefix[lo] + (prefix[hi] - prefix[lo]) / 2;
    std::size_t piv = lo;
    while (prefix[piv + 1] <= mid) ++piv;
    PwlFunction left = chain_range(stages, prefix, lo, piv);
    PwlFunction right = chain_range(stages, prefix, piv + 1, hi);
    return pwl_compose(pwl_compose(left, sjp_single_stage(stages[piv])), right);
}

}  // namespace

PwlFunction sjp_chain(const std::vector<Pmf>& stages) {
    std::vector<std::size_t> prefix(stages.size() + 1, 0);
    for (std::size_t i = 0; i < stages.size(); ++i)
        prefix[i + 1] = prefix[i] + stages[i].support_size();
    return chain_range(stages, prefix, 0, stages.size());
}

}  // namespace msq

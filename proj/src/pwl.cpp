#include "msq/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "msq/error.hpp"

namespace msq {

namespace {

constexpr double kMergeTol = 1e-12;    // breakpoint / slope coincidence
constexpr double kFinalSlopeTol = 1e-9;  // allowed drift before snapping to 1

thread_local std::uint64_t g_ops = 0;

}  // namespace

std::uint64_t pwl_op_count() { return g_ops; }
void pwl_op_count_reset() { g_ops = 0; }

PwlFunction PwlFunction::from_segments(std::vector<Segment> segments) {
    if (segments.empty())
        fail(ErrorCode::InvalidArgument, "piecewise-linear curve needs at least one segment");

    PwlFunction f;
    auto& b = f.breakpoints_;
    auto& s = f.slopes_;
    b.reserve(segments.size());
    s.reserve(segments.size());

    auto merge_tail = [&] {
        // Collapse trailing segments whose slopes coincide; the earlier
        // breakpoint stands.
        while (s.size() >= 2 && s[s.size() - 1] - s[s.size() - 2] < kMergeTol) {
            if (s[s.size() - 1] < s[s.size() - 2] - kMergeTol)
                fail(ErrorCode::InvalidArgument, "segment slopes must be nondecreasing");
            s[s.size() - 2] = std::max(s[s.size() - 2], s[s.size() - 1]);
            s.pop_back();
            b.pop_back();
        }
    };

    for (const Segment& seg : segments) {
        ++g_ops;
        double bp = seg.breakpoint;
        double sl = seg.slope;
        if (!std::isfinite(bp) || !std::isfinite(sl) || !(sl > 0.0))
            fail(ErrorCode::InvalidArgument, "segment slopes must be finite and positive");
        if (b.empty()) {
            if (bp < -kMergeTol)
                fail(ErrorCode::InvalidArgument, "breakpoints must be nonnegative");
            b.push_back(std::max(bp, 0.0));
            s.push_back(sl);
            continue;
        }
        if (bp < b.back() - kMergeTol)
            fail(ErrorCode::InvalidArgument, "breakpoints must be nondecreasing");
        if (bp - b.back() < kMergeTol) {
            // Coinciding breakpoints: the rightmost slope applies.
            s.back() = sl;
        } else if (sl - s.back() < kMergeTol) {
            if (sl < s.back() - kMergeTol)
                fail(ErrorCode::InvalidArgument, "segment slopes must be nondecreasing");
            s.back() = std::max(s.back(), sl);
        } else {
            b.push_back(bp);
            s.push_back(sl);
        }
        merge_tail();
    }

    if (std::fabs(s.back() - 1.0) > kFinalSlopeTol)
        fail(ErrorCode::InvalidArgument,
             "final slope is " + std::to_string(s.back()) + ", expected 1");
    s.back() = 1.0;
    merge_tail();

    auto& v = f.values_;
    v.resize(b.size());
    v[0] = 0.0;
    for (std::size_t k = 1; k < b.size(); ++k)
        v[k] = v[k - 1] + s[k - 1] * (b[k] - b[k - 1]);
    return f;
}

double PwlFunction::eval(double r) const {
    if (!(r >= 0.0))
        fail(ErrorCode::InvalidArgument, "curve evaluated at negative reward");
    if (r <= breakpoints_.front()) return 0.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
    std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return values_[k] + slopes_[k] * (r - breakpoints_[k]);
}

double PwlFunction::slope_right(double r) const {
    if (!(r >= 0.0))
        fail(ErrorCode::InvalidArgument, "curve evaluated at negative reward");
    if (r < breakpoints_.front()) return 0.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
    return slopes_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double PwlFunction::inverse(double u) const {
    if (!(u >= 0.0))
        fail(ErrorCode::InvalidArgument, "inverse of negative value");
    if (u == 0.0) return breakpoints_.front();
    auto it = std::lower_bound(values_.begin(), values_.end(), u);
    if (it != values_.end() && *it == u)
        return breakpoints_[static_cast<std::size_t>(it - values_.begin())];
    std::size_t k =
        (it == values_.end() ? values_.size() : static_cast<std::size_t>(it - values_.begin())) - 1;
    return breakpoints_[k] + (u - values_[k]) / slopes_[k];
}

PwlFunction pwl_compose(const PwlFunction& outer, const PwlFunction& inner) {
    const auto& bo = outer.breakpoints();
    const auto& so = outer.slopes();
    const auto& bi = inner.breakpoints();
    const auto& si = inner.slopes();
    const auto& vi = inner.values();
    const std::size_t m = bo.size(), n = bi.size();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // The composite's slope changes where outer's slope changes (at
    // u = bo[k], i.e. r = inner.inverse(bo[k])) or where inner's does (at
    // r = bi[j], i.e. u = vi[j]).  Both lists are sorted in u, so one merge
    // pass suffices.  Segments while outer's slope is still 0 are not
    // emitted; they lie below the composite's first breakpoint.
    std::vector<PwlFunction::Segment> out;
    out.reserve(m + n);
    std::size_t ko = 0, ji = 0;
    double sigma_out = 0.0, sigma_in = 0.0;
    double r_base = bi[0], u_base = 0.0;
    while (ko < m || ji < n) {
        ++g_ops;
        double u_out = ko < m ? bo[ko] : inf;
        double u_in = ji < n ? vi[ji] : inf;
        double r_event;
        if (u_in <= u_out) {
            r_event = bi[ji];
            r_base = bi[ji];
            u_base = vi[ji];
            sigma_in = si[ji];
            ++ji;
            if (ko < m && bo[ko] == u_in) {
                sigma_out = so[ko];
                ++ko;
            }
        } else {
            // Strictly between inner events, so sigma_in > 0 (vi[0] = 0 is
            // always consumed first).
            r_event = r_base + (u_out - u_base) / sigma_in;
            sigma_out = so[ko];
            ++ko;
        }
        if (sigma_out > 0.0) out.push_back({r_event, sigma_out * sigma_in});
    }
    return PwlFunction::from_segments(std::move(out));
}

PwlFunction pwl_mix(const std::vector<std::pair<double, const PwlFunction*>>& parts) {
    if (parts.empty())
        fail(ErrorCode::InvalidArgument, "mixture needs at least one part");
    double total = 0.0;
    for (const auto& [q, f] : parts) {
        if (!(q > 0.0) || !std::isfinite(q))
            fail(ErrorCode::ProbabilityMismatch, "mixture weights must be strictly positive");
        if (f == nullptr)
            fail(ErrorCode::InvalidArgument, "mixture part is null");
        total += q;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        fail(ErrorCode::ProbabilityMismatch,
             "mixture weights sum to " + std::to_string(total) + ", expected 1");

    // Slope-change events: at each part's breakpoint its weighted slope
    // increment joins the running total.
    std::vector<std::pair<double, double>> events;
    for (const auto& [q, f] : parts) {
        const auto& b = f->breakpoints();
        const auto& s = f->slopes();
        double prev = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            events.emplace_back(b[k], q * (s[k] - prev));
            prev = s[k];
        }
    }
    std::sort(events.begin(), events.end());

    std::vector<PwlFunction::Segment> out;
    out.reserve(events.size());
    double sigma = 0.0;
    for (std::size_t i = 0; i < events.size();) {
        ++g_ops;
        double bp = events[i].first;
        do {
            sigma += events[i].second;
            ++i;
        } while (i < events.size() && events[i].first == bp);
        out.push_back({bp, sigma});
    }
    return PwlFunction::from_segments(std::move(out));
}

}  // namespace msq

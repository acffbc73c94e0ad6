#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace msq {

// Canonical convex piecewise-linear curve of the kind produced by optimal
// stopping values: V(0) = 0, slope 0 up to the first breakpoint, then a
// strictly increasing sequence of slopes in (0, 1] with the last slope
// exactly 1.  The slope on [b_k, b_{k+1}) is slopes()[k] (right-continuous).
//
// The identity V(r) = r is the single segment (0, 1).
class PwlFunction {
public:
    struct Segment {
        double breakpoint;
        double slope;
    };

    // Canonicalizes: merges breakpoints closer than 1e-12 (later slope wins)
    // and slopes closer than 1e-12 (earlier breakpoint wins); snaps the final
    // slope to exactly 1.  Input must already be ordered up to those
    // tolerances with positive slopes.
    static PwlFunction from_segments(std::vector<Segment> segments);

    static PwlFunction identity() { return from_segments({{0.0, 1.0}}); }

    std::size_t size() const { return breakpoints_.size(); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& slopes() const { return slopes_; }
    // values()[k] = eval(breakpoints()[k]); values()[0] == 0.
    const std::vector<double>& values() const { return values_; }

    double first_breakpoint() const { return breakpoints_.front(); }
    double last_breakpoint() const { return breakpoints_.back(); }

    double eval(double r) const;

    // Right-continuous slope at r: 0 below the first breakpoint, 1 at and
    // beyond the last.
    double slope_right(double r) const;

    // Unique r >= 0 with eval(r) = u for u > 0; by convention returns the
    // first breakpoint for u = 0 (the set {eval = 0} is [0, b_0]).
    double inverse(double u) const;

    // r - eval(r) for r at and beyond the last breakpoint.  For a job's
    // value curve this equals the job's expected total size.
    double asymptotic_gap() const { return breakpoints_.back() - values_.back(); }

    bool operator==(const PwlFunction&) const = default;

private:
    PwlFunction() = default;

    std::vector<double> breakpoints_;
    std::vector<double> slopes_;
    std::vector<double> values_;
};

// outer(inner(r)) in canonical form, built by a linear merge of the two
// segment lists.  Result breakpoints are inner's breakpoints where the
// composite slope is positive plus inner.inverse(b) for each breakpoint b of
// outer; slopes multiply.
PwlFunction pwl_compose(const PwlFunction& outer, const PwlFunction& inner);

// sum_l weight_l * part_l with weights positive and summing to 1 within
// 1e-12.
PwlFunction pwl_mix(const std::vector<std::pair<double, const PwlFunction*>>& parts);

// Count of elementary segment operations spent inside from_segments,
// pwl_compose and pwl_mix since the last reset.  Used to check asymptotic
// costs in tests; not needed for normal use.
std::uint64_t pwl_op_count();
void pwl_op_count_reset();

}  // namespace msq

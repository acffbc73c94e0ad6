#pragma once

#include <optional>
#include <vector>

#include "msq/job_type.hpp"
#include "msq/pmf.hpp"
#include "msq/pwl.hpp"

namespace msq {

// Value of serving a single stage with size distribution `dist` under the
// best stopping rule: the upper envelope of the lines
//   L_m(r) = P(X <= x_m) * r - E[min(X, x_m)]
// over the stopping points x_m (together with the zero line for quitting
// immediately).  O(support) because the lines arrive sorted by slope.
PwlFunction sjp_single_stage(const Pmf& dist);

// First breakpoint of sjp_single_stage(dist.conditioned(age)) without
// building the curve:
//   min over x_m > age of E[min(X - age, x_m - age); X > age] / P(age < X <= x_m).
// This is the hot path of index-based scheduling.
double single_stage_fair_at(const Pmf& dist, double age = 0.0);

struct IndexValue {
    double fair;     // smallest reward at which starting the job breaks even
    double gittins;  // 1 / fair
};

// fair = first breakpoint of the curve; DegenerateJob when that is 0 (the
// job completes instantly with positive probability, so its index is
// unbounded).
IndexValue fair_index(const PwlFunction& value);

// Stopping-value curves for every stage of one job type, built in one
// reverse-topological pass:
//   value(final)  = identity
//   down(i)       = mixture of successors' values weighted by transition
//                   probabilities
//   value(i)      = sjp_single_stage(X_i) composed with down(i)
//                   (just down(i) for a zero-service stage)
// Holds a pointer to the job type; keep the JobType alive alongside.
class JobSjp {
public:
    explicit JobSjp(const JobType& job);

    const JobType& job() const { return *job_; }

    // Curve of the whole job from a fresh arrival.
    const PwlFunction& value() const { return stage_value(job_->initial()); }
    // Curve of the job conditioned on sitting at (stage, 0).
    const PwlFunction& stage_value(int stage) const {
        return *value_[static_cast<std::size_t>(stage)];
    }
    // Curve of what remains once `stage` completes.
    const PwlFunction& downstream(int stage) const;

    // Curve of the job conditioned on state s (fresh compose per call).
    PwlFunction value_at(JobState s) const;

    // fair index at state s, via the composition identity
    // fair(stage |> rest) = rest_value^{-1}(fair(stage)); equals
    // fair_index(value_at(s)).fair without building the composite.
    double fair_at(JobState s) const;

private:
    const JobType* job_;
    std::vector<std::optional<PwlFunction>> value_;
    std::vector<std::optional<PwlFunction>> down_;
};

// Whole-job curve; convenience over JobSjp.
PwlFunction sjp_of_job(const JobType& job);

// Curve of a fixed sequence of single stages, built divide-and-conquer
// around a pivot stage so no support point enters more than O(log n)
// compositions: left |> pivot |> right with both sides at most half the
// support points.
PwlFunction sjp_chain(const std::vector<Pmf>& stages);

}  // namespace msq

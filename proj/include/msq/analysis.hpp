#pragma once

#include <cstdint>
#include <vector>

#include "msq/job_type.hpp"
#include "msq/pwl.hpp"
#include "msq/sjp.hpp"

namespace msq {

// Cost of walking a job with value curve `v` from its current state down to
// reward level r with the server to itself: r - v(r).  Nonnegative,
// nondecreasing, and flat (at the expected remaining size) beyond the last
// breakpoint.
double cost_alone(const PwlFunction& v, double r);

// Tail P{final reward level > r} of the index sweep for the same walk:
// 1 - right slope.  A proper tail function; integrates to the expected
// remaining size.
double prevailing_tail(const PwlFunction& v, double r);

// Expected overlap integral of two independent jobs served by one server
// with nothing else arriving: integral of
// prevailing_tail(a, r) * prevailing_tail(b, r) dr, evaluated exactly
// piecewise.
double interference_alone(const PwlFunction& a, const PwlFunction& b);

// Transforms of a fresh-arrival value curve under Poisson arrivals at rate
// lambda.  rho(r) counts only work at reward levels below r, so it rises
// from 0 to the total load.
class CostCurves {
public:
    // Throws Unstable when lambda * E[S] >= 1.
    CostCurves(PwlFunction fresh_value, double lambda);

    double lambda() const { return lambda_; }
    double load() const { return load_; }  // lambda * E[S]
    const PwlFunction& fresh() const { return fresh_; }

    double rho(double r) const { return lambda_ * (r - fresh_.eval(r)); }
    double rho_prime(double r) const { return lambda_ * (1.0 - fresh_.slope_right(r)); }

    // Busy-period stretch of the reward clock and its derivative.
    double w(double r) const { return r / (1.0 - rho(r)); }
    double w_prime(double r) const;

    // Cost to reach reward level r from the state behind curve `v` while
    // fresh arrivals keep interrupting, and its derivative in r.
    double cost_busy(double r, const PwlFunction& v) const;
    double cost_busy_prime(double r, const PwlFunction& v) const;

private:
    PwlFunction fresh_;
    double lambda_;
    double load_;
};

struct QuadratureSpec {
    int r_nodes = 16;   // per merged breakpoint piece of the reward integral
    int x_nodes = 32;   // per support interval of the age integral
    std::uint64_t max_evals = 50'000'000;
};

// Mean queueing time of index-based scheduling in an M/G/1 queue with job
// type `job` and arrival rate lambda: for every stage, the expected
// interference cost is integrated over the stage's age and the reward
// level, weighted by the reach probability and the age tail.  Refuses loads
// above 0.999.
double mean_queueing_time(const JobType& job, double lambda, const QuadratureSpec& q = {});

// Same integral split by the stage the waiting work sits in; one entry per
// stage index (zero for zero-service, final, and unreachable stages).
std::vector<double> mean_queueing_time_by_stage(const JobType& job, double lambda,
                                                const QuadratureSpec& q = {});

// mean_queueing_time plus the job's expected total size.
double mean_response_time(const JobType& job, double lambda, const QuadratureSpec& q = {});

}  // namespace msq

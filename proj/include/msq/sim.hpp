#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "msq/analysis.hpp"
#include "msq/job_type.hpp"
#include "msq/pmf.hpp"
#include "msq/sjp.hpp"

namespace msq {

enum class Policy {
    Fcfs,  // run jobs in arrival order
    Bgp,   // index from the total-size distribution at the job's total age
    Mgp,   // index from the job's current stage and age within it
};

const char* policy_name(Policy p);
Policy parse_policy(std::string_view name);

// Priority evaluation for one (job type, policy) pair.  Construction builds
// whatever the policy needs: the per-stage curves for Mgp, the total-size
// distribution for Bgp (BudgetExceeded if that is unavailable).
class PolicyContext {
public:
    PolicyContext(const JobType& job, Policy policy);

    Policy policy() const { return policy_; }
    const JobType& job() const { return *job_; }
    const Pmf& total_pmf() const { return *total_; }
    const JobSjp& sjp() const { return *sjp_; }

    // Higher runs first; ties go to the earlier arrival.
    double priority(JobState s, double total_age, double arrival_time) const;

private:
    const JobType* job_;
    Policy policy_;
    std::optional<JobSjp> sjp_;
    std::optional<Pmf> total_;
};

struct SimConfig {
    double lambda = 0.0;
    std::int64_t jobs = 100'000;  // arrivals per replication
    std::int64_t warmup = -1;     // completions to discard; -1 means jobs / 5
    int replications = 10;
    std::uint64_t seed = 1;
};

struct JobRecord {
    double arrival;
    double completion;
    double size;  // sampled total service
};

// One replication of a preempt-resume M/G/1 queue under `policy`: Poisson
// arrivals, each job's stage path and sizes drawn once on arrival (hidden
// from the policies), the highest-priority live job served between decision
// epochs.  Returns per-job records in completion order, warmup included.
// Replication r of a run uses seed `seed`; arrival times and job
// realizations depend only on (seed, lambda), never on the policy, so
// policies face identical workloads.
std::vector<JobRecord> simulate_rep(const JobType& job, Policy policy, double lambda,
                                    std::int64_t jobs, std::uint64_t seed,
                                    double* time_avg_jobs = nullptr);

struct SimResult {
    double mean_t = 0.0;   // response time
    double mean_tq = 0.0;  // queueing (waiting) time
    double ci95_t = 0.0;   // 95% half-widths across replications
    double ci95_tq = 0.0;
    double mean_size = 0.0;
    double time_avg_jobs = 0.0;
    std::vector<double> rep_mean_t;
    std::vector<double> rep_mean_tq;
};

// Replications with seeds seed, seed+1, ...; means are averaged across
// replications and the confidence intervals are Student-t over the
// replication means.
SimResult simulate(const JobType& job, Policy policy, const SimConfig& cfg);

struct SweepRow {
    double rho = 0.0;
    double lambda = 0.0;
    Policy policy = Policy::Fcfs;
    double mean_t = 0.0;
    double mean_tq = 0.0;
    double ci95 = 0.0;        // half-width on mean_tq
    double analytic_tq = 0.0; // NaN on rows where it is not computed
};

// Simulates every (rho, policy) cell with lambda = rho / E[total size] and
// common seeds, attaching the closed-form queueing time to Mgp rows.
std::vector<SweepRow> sweep(const JobType& job, const std::vector<double>& rhos,
                            const std::vector<Policy>& policies, const SimConfig& base,
                            const QuadratureSpec& quad = {});

}  // namespace msq

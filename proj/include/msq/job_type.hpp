#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msq/pmf.hpp"

namespace msq {

// Name used in descriptions for the synthesized final stage.
inline constexpr std::string_view kFinalName = "DONE";

enum class StageKind { Dist, Zero, Final };

struct Stage {
    std::string name;
    StageKind kind = StageKind::Dist;
    std::optional<Pmf> dist;                    // present iff kind == Dist
    std::vector<std::pair<int, double>> next;   // (stage index, probability); empty iff final
};

// A stage index plus the service already received in that stage.
struct JobState {
    int stage = 0;
    double age = 0.0;
};

struct StageDesc {
    std::string name;
    std::optional<Pmf> dist;  // empty means the stage needs zero service
    std::vector<std::pair<std::string, double>> transitions;  // target name or kFinalName
};

struct JobDesc {
    std::string name;
    std::string initial;
    std::vector<StageDesc> stages;
};

// A multistage job type: a finite acyclic stage graph with one initial stage
// and one final (absorbing, zero-work) stage reachable from every stage.
// Each non-final stage carries a finite service distribution; at most the
// initial stage may need zero service (the head of a mixture).  Immutable
// after construction, so shared use across threads is safe.
class JobType {
public:
    explicit JobType(JobDesc desc);

    const std::string& name() const { return name_; }
    const std::vector<Stage>& stages() const { return stages_; }
    const Stage& stage(int i) const { return stages_[static_cast<std::size_t>(i)]; }
    int stage_count() const { return static_cast<int>(stages_.size()); }
    int initial() const { return initial_; }
    int final_stage() const { return final_; }
    // Topological order over stage indices (predecessors first, final last).
    const std::vector<int>& topo_order() const { return topo_; }

    int find_stage(std::string_view name) const;  // throws UnknownStage

    // Validates that (stage, age) is a live state: the stage is not final,
    // age >= 0, and age is below the stage's largest support point (exactly
    // 0 for a zero-service stage).
    void check_state(JobState s) const;

    JobDesc to_desc() const;

private:
    std::string name_;
    std::vector<Stage> stages_;
    int initial_ = 0;
    int final_ = 0;
    std::vector<int> topo_;
};

// Job seen from state s onward: s.stage becomes the initial stage with its
// service distribution conditioned on the age; stages no longer reachable
// are dropped.
JobType condition_job(const JobType& job, JobState s);

// Serve all of `first`, then all of `then`.
JobType sequential_compose(const JobType& first, const JobType& then);

// With probability weights[l], the job is branches[l].  The result gets a
// fresh zero-service initial stage that fans out to the branches.
JobType mixture_compose(std::string name,
                        const std::vector<std::pair<double, const JobType*>>& branches);

// Probability that a fresh job ever visits each stage; 1 for the initial
// stage and, by flow conservation, for the final one.
std::vector<double> reach_probs(const JobType& job);

// Expected remaining service over the whole rest of the job from state s.
double expected_total_size(const JobType& job, JobState s);

// Exact distribution of a fresh job's total service.  Outcomes within 1e-9
// of each other are merged.  The work is capped by `budget` convolution
// terms (BudgetExceeded beyond it).
Pmf total_size_pmf(const JobType& job, std::size_t budget = 1'000'000);

}  // namespace msq

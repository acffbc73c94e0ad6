#include "msq/job_type.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "msq/error.hpp"
#include "msq/fmt.hpp"

namespace msq {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kSizeMergeTol = 1e-9;

std::string stage_ref(const std::string& job, const std::string& stage) {
    return "stage '" + stage + "' of job '" + job + "'";
}

}  // namespace

JobType::JobType(JobDesc desc) : name_(std::move(desc.name)) {
    if (desc.stages.empty())
        fail(ErrorCode::InvalidArgument, "job '" + name_ + "' needs at least one stage");

    std::unordered_map<std::string, int> index;
    stages_.reserve(desc.stages.size() + 1);
    for (StageDesc& sd : desc.stages) {
        if (sd.name == kFinalName)
            fail(ErrorCode::DuplicateStage,
                 "stage name '" + std::string(kFinalName) + "' is reserved in job '" + name_ + "'");
        if (!index.emplace(sd.name, static_cast<int>(stages_.size())).second)
            fail(ErrorCode::DuplicateStage, stage_ref(name_, sd.name) + " is defined twice");
        Stage st;
        st.name = sd.name;
        st.kind = sd.dist ? StageKind::Dist : StageKind::Zero;
        st.dist = std::move(sd.dist);
        stages_.push_back(std::move(st));
    }
    final_ = static_cast<int>(stages_.size());
    stages_.push_back(Stage{std::string(kFinalName), StageKind::Final, std::nullopt, {}});

    auto it = index.find(desc.initial);
    if (it == index.end())
        fail(ErrorCode::UnknownStage,
             "initial stage '" + desc.initial + "' of job '" + name_ + "' is not defined");
    initial_ = it->second;

    for (int i = 0; i < final_; ++i) {
        Stage& st = stages_[static_cast<std::size_t>(i)];
        if (st.kind == StageKind::Zero && i != initial_)
            fail(ErrorCode::InvalidState,
                 stage_ref(name_, st.name) + " needs zero service but is not the initial stage");
        const StageDesc& sd = desc.stages[static_cast<std::size_t>(i)];
        if (sd.transitions.empty())
            fail(ErrorCode::ProbabilityMismatch, stage_ref(name_, st.name) + " has no transitions");
        double total = 0.0;
        for (const auto& [target, p] : sd.transitions) {
            if (!(p > 0.0) || !std::isfinite(p))
                fail(ErrorCode::ProbabilityMismatch,
                     "transition probability out of " + stage_ref(name_, st.name) +
                         " is not strictly positive");
            int j;
            if (target == kFinalName) {
                j = final_;
            } else {
                auto jt = index.find(target);
                if (jt == index.end())
                    fail(ErrorCode::UnknownStage, "transition target '" + target + "' out of " +
                                                      stage_ref(name_, st.name) + " is not defined");
                j = jt->second;
            }
            total += p;
            auto found = std::find_if(st.next.begin(), st.next.end(),
                                      [j](const auto& e) { return e.first == j; });
            if (found == st.next.end())
                st.next.emplace_back(j, p);
            else
                found->second += p;
        }
        if (std::fabs(total - 1.0) > kProbTol)
            fail(ErrorCode::ProbabilityMismatch,
                 "transition probabilities out of " + stage_ref(name_, st.name) + " sum to " +
                     fmt_g(total, 17) + ", expected 1");
    }

    // Kahn's algorithm; ready stages taken in index order so the result is
    // deterministic.
    std::vector<int> indeg(stages_.size(), 0);
    for (const Stage& st : stages_)
        for (const auto& [j, p] : st.next) ++indeg[static_cast<std::size_t>(j)];
    std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
    for (int i = 0; i <= final_; ++i)
        if (indeg[static_cast<std::size_t>(i)] == 0) ready.push(i);
    topo_.reserve(stages_.size());
    while (!ready.empty()) {
        int i = ready.top();
        ready.pop();
        topo_.push_back(i);
        for (const auto& [j, p] : stages_[static_cast<std::size_t>(i)].next)
            if (--indeg[static_cast<std::size_t>(j)] == 0) ready.push(j);
    }
    if (topo_.size() != stages_.size())
        fail(ErrorCode::CyclicGraph, "transition graph of job '" + name_ + "' has a cycle");

    // Every stage must be able to finish: walk the reversed edges from the
    // final stage.
    std::vector<char> reaches(stages_.size(), 0);
    reaches[static_cast<std::size_t>(final_)] = 1;
    for (auto rit = topo_.rbegin(); rit != topo_.rend(); ++rit) {
        const Stage& st = stages_[static_cast<std::size_t>(*rit)];
        for (const auto& [j, p] : st.next)
            if (reaches[static_cast<std::size_t>(j)]) reaches[static_cast<std::size_t>(*rit)] = 1;
    }
    for (int i = 0; i <= final_; ++i)
        if (!reaches[static_cast<std::size_t>(i)])
            fail(ErrorCode::UnreachableFinal,
                 stage_ref(name_, stages_[static_cast<std::size_t>(i)].name) +
                     " cannot reach the final stage");
}

int JobType::find_stage(std::string_view name) const {
    for (int i = 0; i < static_cast<int>(stages_.size()); ++i)
        if (stages_[static_cast<std::size_t>(i)].name == name) return i;
    fail(ErrorCode::UnknownStage,
         "job '" + name_ + "' has no stage named '" + std::string(name) + "'");
}

void JobType::check_state(JobState s) const {
    if (s.stage < 0 || s.stage >= stage_count())
        fail(ErrorCode::InvalidState, "stage index out of range");
    const Stage& st = stage(s.stage);
    if (st.kind == StageKind::Final)
        fail(ErrorCode::InvalidState, "a live state cannot sit in the final stage");
    if (!(s.age >= 0.0) || !std::isfinite(s.age))
        fail(ErrorCode::InvalidState, "age must be a nonnegative real");
    if (st.kind == StageKind::Zero) {
        if (s.age != 0.0)
            fail(ErrorCode::InvalidState, stage_ref(name_, st.name) + " only admits age 0");
    } else if (s.age >= st.dist->max_size()) {
        fail(ErrorCode::AgeBeyondSupport,
             "age " + fmt_g(s.age, 17) + " in " + stage_ref(name_, st.name) +
                 " is not below the largest support point " + fmt_g(st.dist->max_size(), 17));
    }
}

JobDesc JobType::to_desc() const {
    JobDesc d;
    d.name = name_;
    d.initial = stages_[static_cast<std::size_t>(initial_)].name;
    for (int i = 0; i <= final_; ++i) {
        if (i == final_) continue;
        const Stage& st = stages_[static_cast<std::size_t>(i)];
        StageDesc sd;
        sd.name = st.name;
        sd.dist = st.dist;
        for (const auto& [j, p] : st.next)
            sd.transitions.emplace_back(stages_[static_cast<std::size_t>(j)].name, p);
        d.stages.push_back(std::move(sd));
    }
    return d;
}

JobType condition_job(const JobType& job, JobState s) {
    job.check_state(s);

    std::vector<char> reachable(static_cast<std::size_t>(job.stage_count()), 0);
    std::vector<int> frontier{s.stage};
    reachable[static_cast<std::size_t>(s.stage)] = 1;
    while (!frontier.empty()) {
        int i = frontier.back();
        frontier.pop_back();
        for (const auto& [j, p] : job.stage(i).next)
            if (!reachable[static_cast<std::size_t>(j)]) {
                reachable[static_cast<std::size_t>(j)] = 1;
                frontier.push_back(j);
            }
    }

    JobDesc d;
    const Stage& origin = job.stage(s.stage);
    d.name = job.name() + "[" + origin.name + "@" + fmt_g(s.age) + "]";
    d.initial = origin.name;
    for (int i = 0; i < job.stage_count(); ++i) {
        if (!reachable[static_cast<std::size_t>(i)] || i == job.final_stage()) continue;
        const Stage& st = job.stage(i);
        StageDesc sd;
        sd.name = st.name;
        if (st.kind == StageKind::Dist)
            sd.dist = (i == s.stage) ? st.dist->conditioned(s.age) : *st.dist;
        for (const auto& [j, p] : st.next)
            sd.transitions.emplace_back(job.stage(j).name, p);
        d.stages.push_back(std::move(sd));
    }
    return JobType(std::move(d));
}

namespace {

// Allocates stage names for composed jobs: originals when free, otherwise
// primed until unique.
class NamePool {
public:
    std::string claim(std::string base) {
        while (!used_.insert(base).second) base += "'";
        return base;
    }

private:
    std::unordered_set<std::string> used_;
};

// Where transitions land when entering `job`: its initial stage, or, if
// that stage needs zero service, directly its successors (the zero stage is
// spliced out so it never becomes an interior stage of the composite).
std::vector<std::pair<std::string, double>> entry_points(
    const JobType& job, const std::vector<std::string>& new_names) {
    const Stage& init = job.stage(job.initial());
    std::vector<std::pair<std::string, double>> entry;
    if (init.kind == StageKind::Zero) {
        for (const auto& [j, p] : init.next)
            entry.emplace_back(j == job.final_stage()
                                   ? std::string(kFinalName)
                                   : new_names[static_cast<std::size_t>(j)],
                               p);
    } else {
        entry.emplace_back(new_names[static_cast<std::size_t>(job.initial())], 1.0);
    }
    return entry;
}

void append_stages(JobDesc& d, const JobType& job, const std::vector<std::string>& new_names,
                   const std::vector<std::pair<std::string, double>>* final_redirect,
                   bool skip_zero_head) {
    bool spliced = skip_zero_head && job.stage(job.initial()).kind == StageKind::Zero;
    for (int i = 0; i < job.stage_count(); ++i) {
        if (i == job.final_stage() || (spliced && i == job.initial())) continue;
        const Stage& st = job.stage(i);
        StageDesc sd;
        sd.name = new_names[static_cast<std::size_t>(i)];
        sd.dist = st.dist;
        for (const auto& [j, p] : st.next) {
            if (j == job.final_stage()) {
                if (final_redirect == nullptr) {
                    sd.transitions.emplace_back(std::string(kFinalName), p);
                } else {
                    for (const auto& [tn, tp] : *final_redirect)
                        sd.transitions.emplace_back(tn, p * tp);
                }
            } else {
                sd.transitions.emplace_back(new_names[static_cast<std::size_t>(j)], p);
            }
        }
        d.stages.push_back(std::move(sd));
    }
}

std::vector<std::string> claim_names(NamePool& pool, const JobType& job) {
    std::vector<std::string> names(static_cast<std::size_t>(job.stage_count()));
    for (int i = 0; i < job.stage_count(); ++i)
        if (i != job.final_stage()) names[static_cast<std::size_t>(i)] = pool.claim(job.stage(i).name);
    return names;
}

}  // namespace

JobType sequential_compose(const JobType& first, const JobType& then) {
    NamePool pool;
    std::vector<std::string> first_names = claim_names(pool, first);
    std::vector<std::string> then_names = claim_names(pool, then);

    // `then`'s zero-service head, if any, is spliced out so it never turns
    // into an interior zero stage; transitions into `first`'s final land on
    // its successors directly.
    std::vector<std::pair<std::string, double>> entry = entry_points(then, then_names);

    JobDesc d;
    d.name = first.name() + ">" + then.name();
    d.initial = first_names[static_cast<std::size_t>(first.initial())];
    append_stages(d, first, first_names, &entry, false);
    append_stages(d, then, then_names, nullptr, true);
    return JobType(std::move(d));
}

JobType mixture_compose(std::string name,
                        const std::vector<std::pair<double, const JobType*>>& branches) {
    if (branches.empty())
        fail(ErrorCode::InvalidArgument, "mixture needs at least one branch");
    double total = 0.0;
    for (const auto& [q, jt] : branches) {
        if (jt == nullptr) fail(ErrorCode::InvalidArgument, "mixture branch is null");
        if (!(q > 0.0) || !std::isfinite(q))
            fail(ErrorCode::ProbabilityMismatch, "branch weights must be strictly positive");
        total += q;
    }
    if (std::fabs(total - 1.0) > kProbTol)
        fail(ErrorCode::ProbabilityMismatch,
             "branch weights sum to " + fmt_g(total, 17) + ", expected 1");

    NamePool pool;
    std::string head = pool.claim("start");
    JobDesc d;
    d.name = std::move(name);
    d.initial = head;

    StageDesc head_stage;
    head_stage.name = head;
    std::vector<std::vector<std::string>> names;
    names.reserve(branches.size());
    for (const auto& [q, jt] : branches) {
        names.push_back(claim_names(pool, *jt));
        for (const auto& [tn, tp] : entry_points(*jt, names.back()))
            head_stage.transitions.emplace_back(tn, q * tp);
    }
    d.stages.push_back(std::move(head_stage));

    for (std::size_t l = 0; l < branches.size(); ++l)
        append_stages(d, *branches[l].second, names[l], nullptr, true);
    return JobType(std::move(d));
}

std::vector<double> reach_probs(const JobType& job) {
    std::vector<double> q(static_cast<std::size_t>(job.stage_count()), 0.0);
    q[static_cast<std::size_t>(job.initial())] = 1.0;
    for (int i : job.topo_order())
        for (const auto& [j, p] : job.stage(i).next)
            q[static_cast<std::size_t>(j)] += q[static_cast<std::size_t>(i)] * p;
    return q;
}

double expected_total_size(const JobType& job, JobState s) {
    job.check_state(s);
    std::vector<double> rem(static_cast<std::size_t>(job.stage_count()), 0.0);
    const auto& topo = job.topo_order();
    for (auto rit = topo.rbegin(); rit != topo.rend(); ++rit) {
        const Stage& st = job.stage(*rit);
        if (st.kind == StageKind::Final) continue;
        double m = st.kind == StageKind::Dist ? st.dist->mean() : 0.0;
        for (const auto& [j, p] : st.next) m += p * rem[static_cast<std::size_t>(j)];
        rem[static_cast<std::size_t>(*rit)] = m;
    }
    const Stage& st = job.stage(s.stage);
    double m = st.kind == StageKind::Dist ? st.dist->conditioned(s.age).mean() : 0.0;
    for (const auto& [j, p] : st.next) m += p * rem[static_cast<std::size_t>(j)];
    return m;
}

namespace {

void consolidate(std::vector<std::pair<double, double>>& v) {
    std::sort(v.begin(), v.end());
    std::size_t out = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (out > 0 && v[i].first - v[out - 1].first <= kSizeMergeTol)
            v[out - 1].second += v[i].second;
        else
            v[out++] = v[i];
    }
    v.resize(out);
}

}  // namespace

Pmf total_size_pmf(const JobType& job, std::size_t budget) {
    std::vector<std::vector<std::pair<double, double>>> incoming(
        static_cast<std::size_t>(job.stage_count()));
    incoming[static_cast<std::size_t>(job.initial())] = {{0.0, 1.0}};

    std::size_t work = 0;
    for (int i : job.topo_order()) {
        auto& in = incoming[static_cast<std::size_t>(i)];
        if (in.empty()) continue;
        consolidate(in);
        const Stage& st = job.stage(i);
        if (st.kind == StageKind::Final) continue;

        std::vector<std::pair<double, double>> out;
        if (st.kind == StageKind::Zero) {
            out = std::move(in);
        } else {
            const auto& sizes = st.dist->sizes();
            const auto& probs = st.dist->probs();
            work += in.size() * sizes.size();
            if (work > budget)
                fail(ErrorCode::BudgetExceeded,
                     "total-size distribution of job '" + job.name() + "' exceeds the outcome budget of " +
                         std::to_string(budget));
            out.reserve(in.size() * sizes.size());
            for (const auto& [base, bp] : in)
                for (std::size_t k = 0; k < sizes.size(); ++k)
                    out.emplace_back(base + sizes[k], bp * probs[k]);
            consolidate(out);
        }
        for (const auto& [j, p] : st.next) {
            auto& dst = incoming[static_cast<std::size_t>(j)];
            for (const auto& [x, px] : out) dst.emplace_back(x, px * p);
        }
        in.clear();
        in.shrink_to_fit();
    }

    const auto& res = incoming[static_cast<std::size_t>(job.final_stage())];
    std::vector<double> sizes, probs;
    sizes.reserve(res.size());
    probs.reserve(res.size());
    for (const auto& [x, p] : res) {
        if (x <= 0.0)
            fail(ErrorCode::DegenerateJob, "job '" + job.name() +
                                               "' completes with zero total service with "
                                               "positive probability");
        sizes.push_back(x);
        probs.push_back(p);
    }
    return Pmf(std::move(sizes), std::move(probs));
}

}  // namespace msq

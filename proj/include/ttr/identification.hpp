#pragma once

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "ttr/elimination.hpp"
#include "ttr/environment.hpp"
#include "ttr/task_set.hpp"

namespace ttr {

struct SamplingResult {
    std::vector<Index> samples;  // next-state indices
    Index episodes_used = 0;
    std::vector<Index> episode_policies;  // pool handle per episode
};

/// Deploys hitting policies against the live task and records next states of
/// `pair`. Handles are cached per (task, pair) so repeated calls reuse the
/// same pool entries.
class SamplingContext {
public:
    SamplingContext(SimulatedEnvironment& env, const TaskSet& ts) : env_(&env), ts_(&ts), hitting_(ts) {}

    /// Cycles over `candidates`, two episodes per candidate, deploying the
    /// candidate's min-hitting policy for pair.state with pair.action forced
    /// there. At most one sample per episode; stops as soon as n samples are
    /// held. Propagates BudgetExhausted.
    SamplingResult sample(const std::vector<Index>& candidates, StateAction pair, Index n);

    Index handle_for(Index task, StateAction pair);

    SimulatedEnvironment& env() { return *env_; }
    const TaskSet& task_set() const { return *ts_; }
    HittingPolicyCache& hitting() { return hitting_; }

private:
    SimulatedEnvironment* env_;
    const TaskSet* ts_;
    HittingPolicyCache hitting_;
    std::map<std::tuple<Index, Index, Index>, Index> handles_;
};

SamplingResult sampling_routine(SimulatedEnvironment& env, const TaskSet& ts, const std::vector<Index>& candidates,
                                StateAction pair, Index n);

/// Pairwise elimination over `candidates` followed by commit. Truncates and
/// commits to the lowest surviving index if the budget runs out mid-test.
AlgorithmRun identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, Index n, Rng& rng);
AlgorithmRun identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, const std::vector<Index>& candidates,
                                  Index n, Rng& rng);

AlgorithmRun double_identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, const ClusterStructure& cs,
                                         Index n_cluster, Index n_inner, Rng& rng);

/// Throws NoValidSplit when some candidate set admits no valid split.
AlgorithmRun tree_identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, double lambda, double beta,
                                       Index n, Rng& rng);

/// Samples harvested at revealing pairs, keyed by pair.
using PairSamples = std::map<StateAction, std::vector<Index>>;

/// Records the next state of the first visit to each listed pair in `traj`.
void harvest(const Trajectory& traj, const std::vector<StateAction>& pairs, PairSamples& out);

/// Offline pairwise elimination on pre-collected samples. Returns the survivor.
Index offline_elimination(const TaskSet& ts, const std::vector<StateAction>& revealing_set, const PairSamples& samples,
                          Rng& rng, Index* tests = nullptr);

/// Explore stage with the given revealing policies, offline identify, commit.
/// An empty `revealing_set` means the greedy set of the task set.
AlgorithmRun explore_identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts,
                                          const std::vector<Policy>& policies, Index n, Rng& rng,
                                          std::vector<StateAction> revealing_set = {});

}  // namespace ttr

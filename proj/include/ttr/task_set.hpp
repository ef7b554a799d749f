#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ttr/mdp.hpp"

namespace ttr {

/// The known finite set of tasks. All tasks share S, A, T and the initial
/// state; pairwise separation data is computed once at construction.
class TaskSet {
public:
    explicit TaskSet(std::vector<TabularMdp> tasks);

    Index size() const { return tasks_.size(); }
    const TabularMdp& task(Index i) const { return tasks_.at(i); }
    const std::vector<TabularMdp>& tasks() const { return tasks_; }

    Index num_states() const { return tasks_.front().num_states(); }
    Index num_actions() const { return tasks_.front().num_actions(); }
    Index horizon() const { return tasks_.front().horizon(); }
    Index initial_state() const { return tasks_.front().initial_state(); }

    double l1(Index i, Index j, StateAction sa) const;
    /// max over (s, a) of the l1 distance between the rows of tasks i and j.
    double max_l1(Index i, Index j) const { return best_[i * size() + j].second; }
    /// Lowest-index (s, a) attaining max_l1(i, j).
    StateAction best_pair(Index i, Index j) const { return best_[i * size() + j].first; }

private:
    std::vector<TabularMdp> tasks_;
    std::vector<std::pair<StateAction, double>> best_;
};

struct PairSeparation {
    StateAction pair;
    double l1 = 0.0;
};

struct SeparationReport {
    double lambda = 0.0;
    std::map<std::pair<Index, Index>, PairSeparation> revealing_pair;  // keys (i, j) with i < j
    std::vector<StateAction> revealing_set;
};

/// Exact brute force over all task pairs and all (s, a). Throws on a singleton set.
SeparationReport separation_report(const TaskSet& ts);

/// Greedy covering set of (s, a) pairs that separate every task pair at `level`.
/// Pairs are ranked by how many task pairs they separate (ties: lowest index)
/// and kept only when they cover something new.
std::vector<StateAction> greedy_revealing_set(const TaskSet& ts, double level);

/// Memoised min-hitting policies per (task, target).
class HittingPolicyCache {
public:
    explicit HittingPolicyCache(const TaskSet& ts) : ts_(&ts) {}
    const HittingPlan& get(Index task, HittingTarget target);

private:
    const TaskSet* ts_;
    std::map<std::tuple<Index, Index, Index>, HittingPlan> plans_;
};

struct ReachabilityReport {
    bool ok = true;
    Index worst_state = 0;
    double worst_value = 0.0;
    std::vector<double> per_state;
};

ReachabilityReport check_reachability(const TabularMdp& mdp);

class ClusterStructure {
public:
    ClusterStructure() = default;
    /// Throws std::invalid_argument unless `partition` partitions {0, ..., num_tasks - 1}.
    /// `size_bound` declares the cluster-size bound N; it is raised to the
    /// largest cluster when smaller.
    ClusterStructure(std::vector<std::vector<Index>> partition, Index num_tasks, Index size_bound = 0);

    const std::vector<std::vector<Index>>& partition() const { return partition_; }
    Index K() const { return partition_.size(); }
    Index N() const { return std::max(max_size_, size_bound_); }
    Index max_cluster_size() const { return max_size_; }
    Index cluster_of(Index task) const { return owner_.at(task); }

private:
    std::vector<std::vector<Index>> partition_;
    std::vector<Index> owner_;
    Index max_size_ = 0;
    Index size_bound_ = 0;
};

struct ClusterReport {
    bool applicable = true;  // false when K = 1 (no outside task to separate from)
    bool separation_ok = false;
    bool size_ok = false;  // N > K
    bool reachability_ok = false;
    /// Per cluster: the (s, a) maximising the worst cross-cluster l1, and that l1.
    std::vector<PairSeparation> cluster_pairs;
    std::string detail;

    bool ok() const { return applicable && separation_ok && size_ok && reachability_ok; }
};

ClusterReport check_cluster_structure(const TaskSet& ts, const ClusterStructure& cs, double lambda);

/// The pair maximising min_{i in cluster, j outside} l1; `outside` lists the
/// competing tasks.
PairSeparation cluster_revealing_pair(const TaskSet& ts, const std::vector<Index>& cluster,
                                      const std::vector<Index>& outside);

bool check_strong_reachability(const TaskSet& ts, const std::vector<Index>& subset, StateAction pair,
                               HittingPolicyCache* cache = nullptr);

struct TreeSplit {
    std::vector<Index> d_plus;
    std::vector<Index> d_minus;
    StateAction pair;
    double gap = 0.0;
    Index rep_plus = 0;   // closest cross pair at `pair`: rep_plus in d_plus,
    Index rep_minus = 0;  // rep_minus in d_minus
};

class NoValidSplit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Searches every strongly reachable (s, a) for a beta-balanced bipartition whose
/// cross pairs are all lambda-separated; returns the one with the largest
/// minimum cross gap. Throws NoValidSplit when none exists.
TreeSplit find_tree_split(const TaskSet& ts, const std::vector<Index>& subset, double lambda, double beta,
                          HittingPolicyCache* cache = nullptr);

/// Checks the partition, gap, balance and strong-reachability invariants.
bool validate_tree_split(const TaskSet& ts, const std::vector<Index>& subset, const TreeSplit& split,
                         double lambda, double beta);

struct RevealingCoverage {
    Index best_policy = 0;
    double min_reach_probability = 0.0;  // min over revealing pairs, for the best policy
};

struct RevealingPolicyReport {
    bool ok = false;
    std::vector<StateAction> revealing_set;
    std::vector<RevealingCoverage> per_task;
};

/// Exact check that every task has a policy reaching every revealing pair
/// within the episode with probability at least 1/2.
RevealingPolicyReport check_revealing_policy_set(const TaskSet& ts, const std::vector<Policy>& policies);
RevealingPolicyReport check_revealing_policy_set(const TaskSet& ts, const std::vector<Policy>& policies,
                                                 const std::vector<StateAction>& revealing_set);

}  // namespace ttr

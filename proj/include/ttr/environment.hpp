#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ttr/mdp.hpp"

namespace ttr {

/// Policy over the coverage-augmented state (s, mask): augmented index
/// s + S * mask, where bit k of mask records that pairs[k] was already visited
/// during the current episode.
struct CoveragePolicy {
    Policy policy;
    std::vector<StateAction> pairs;
    Index base_states = 0;

    Index augmented(Index s, std::uint32_t mask) const { return s + base_states * mask; }
    std::uint32_t advance(std::uint32_t mask, Index s, Index a) const;
};

using DeployedPolicy = std::variant<Policy, CoveragePolicy>;

double evaluate_deployed(const TabularMdp& mdp, const DeployedPolicy& policy);
Trajectory simulate_deployed(const TabularMdp& mdp, const DeployedPolicy& policy, Rng& rng);

enum class Phase { identify, commit, truncated };

const char* phase_name(Phase p);
Phase phase_from_name(const std::string& name);

struct TraceRow {
    Index episode = 0;  // 1-based
    Phase phase = Phase::identify;
    double instant_regret = 0.0;
    double cumulative_regret = 0.0;
};

struct RegretTrace {
    std::vector<TraceRow> rows;

    Index size() const { return rows.size(); }
    double total() const { return rows.empty() ? 0.0 : rows.back().cumulative_regret; }
    Index count(Phase p) const;
};

class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Live access to the true test task. Owns the environment random stream and
/// the H-episode budget; every deployed policy is kept in a pool so the
/// regret of each episode can be evaluated exactly afterwards.
class SimulatedEnvironment {
public:
    SimulatedEnvironment(const TabularMdp& truth, std::uint64_t seed, Index budget);

    Index add_policy(DeployedPolicy policy);
    const DeployedPolicy& policy(Index handle) const { return pool_.at(handle); }
    const std::vector<DeployedPolicy>& pool() const { return pool_; }

    /// Throws BudgetExhausted when all H episodes have been used.
    Trajectory run_episode(Index handle, Phase phase = Phase::identify);
    /// Deploys `handle` for every remaining episode without simulating them.
    void commit(Index handle);

    Index budget() const { return budget_; }
    Index used() const { return handles_.size(); }
    Index remaining() const { return budget_ - handles_.size(); }
    const std::vector<Index>& episode_handles() const { return handles_; }
    const std::vector<Phase>& episode_phases() const { return phases_; }
    const TabularMdp& truth() const { return *truth_; }

    /// Retags every identify episode as truncated.
    void mark_truncated();

    RegretTrace trace() const;

private:
    const TabularMdp* truth_;
    Rng rng_;
    Index budget_;
    std::vector<DeployedPolicy> pool_;
    std::vector<Index> handles_;
    std::vector<Phase> phases_;
};

struct RunStats {
    Index tests = 0;
    Index split_rounds = 0;
    Index explore_episodes = 0;
    Index identify_stage_episodes = 0;
    Index coverage_iterations = 0;
};

struct AlgorithmRun {
    Index identified_task = 0;
    Index episodes_identify = 0;
    Policy committed_policy;
    std::vector<Index> per_episode_policies;  // pool handle per episode
    std::vector<DeployedPolicy> policy_pool;
    RegretTrace trace;
    bool truncated = false;
    RunStats stats;
};

/// Commits to the optimal policy of `survivor` for the remaining episodes and
/// packages the run.
AlgorithmRun finish_run(SimulatedEnvironment& env, const TabularMdp& survivor_model, Index survivor, bool truncated,
                        const RunStats& stats);

}  // namespace ttr

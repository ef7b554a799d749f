#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace ttr {

using Index = std::size_t;
using Rng = std::mt19937_64;

struct StateAction {
    Index state = 0;
    Index action = 0;
    auto operator<=>(const StateAction&) const = default;
};

class InvalidModel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Finite-horizon tabular MDP. Transitions are stored row-major as
/// p[(s * A + a) * S + s'] and rewards as r[s * A + a]. Immutable.
class TabularMdp {
public:
    TabularMdp(Index num_states, Index num_actions, Index horizon, Index initial_state,
               std::vector<double> transitions, std::vector<double> rewards);

    Index num_states() const { return states_; }
    Index num_actions() const { return actions_; }
    Index horizon() const { return horizon_; }
    Index initial_state() const { return initial_; }

    std::span<const double> row(Index s, Index a) const {
        return {transitions_.data() + (s * actions_ + a) * states_, states_};
    }
    std::span<const double> row(StateAction sa) const { return row(sa.state, sa.action); }
    double prob(Index s, Index a, Index next) const { return transitions_[(s * actions_ + a) * states_ + next]; }
    double reward(Index s, Index a) const { return rewards_[s * actions_ + a]; }

    const std::vector<double>& transitions() const { return transitions_; }
    const std::vector<double>& rewards() const { return rewards_; }

    bool same_shape(const TabularMdp& other) const;

    /// Nonzero successors of (s, a); built once at construction.
    std::span<const Index> successors(Index s, Index a) const {
        const auto k = s * actions_ + a;
        return {succ_index_.data() + succ_offset_[k], succ_offset_[k + 1] - succ_offset_[k]};
    }

private:
    Index states_;
    Index actions_;
    Index horizon_;
    Index initial_;
    std::vector<double> transitions_;
    std::vector<double> rewards_;
    std::vector<Index> succ_offset_;
    std::vector<Index> succ_index_;
};

/// Non-stationary Markov policy: one action distribution per (step, state).
/// Steps are 0-based; step t is the (t + 1)-th step of an episode.
class Policy {
public:
    Policy() = default;
    Policy(Index horizon, Index num_states, Index num_actions, std::vector<double> probs);

    static Policy uniform(Index horizon, Index num_states, Index num_actions);
    /// actions[t * S + s] is the action taken at step t in state s.
    static Policy deterministic(Index horizon, Index num_states, Index num_actions,
                                std::span<const Index> actions);

    Index horizon() const { return horizon_; }
    Index num_states() const { return states_; }
    Index num_actions() const { return actions_; }

    std::span<const double> rule(Index t, Index s) const {
        return {probs_.data() + (t * states_ + s) * actions_, actions_};
    }
    double prob(Index t, Index s, Index a) const { return probs_[(t * states_ + s) * actions_ + a]; }
    void set_action(Index t, Index s, Index a);

    bool is_deterministic() const;
    /// Action of a deterministic rule; throws if the rule is stochastic.
    Index action(Index t, Index s) const;

    const std::vector<double>& probabilities() const { return probs_; }
    bool matches(const TabularMdp& mdp) const;

    bool operator==(const Policy&) const = default;

private:
    Index horizon_ = 0;
    Index states_ = 0;
    Index actions_ = 0;
    std::vector<double> probs_;
};

struct Step {
    Index state = 0;
    Index action = 0;
    Index next_state = 0;
    double reward = 0.0;
};

struct Trajectory {
    std::vector<Step> steps;
    Index episode_index = 0;
};

struct OptimalPlan {
    Policy policy;
    double value = 0.0;
};

/// Target of a first-hitting query: a state, or a state-action pair.
struct HittingTarget {
    Index state = 0;
    std::optional<Index> action;

    static HittingTarget of_state(Index s) { return {s, std::nullopt}; }
    static HittingTarget of_pair(StateAction sa) { return {sa.state, sa.action}; }
};

struct HittingPlan {
    Policy policy;
    double expected_hitting_time = 0.0;
};

/// Draws an index from a probability vector. Falls back to the last index with
/// positive mass when rounding leaves the uniform draw above the cumulative sum.
Index sample_index(std::span<const double> probs, Rng& rng);

/// Backward induction; ties broken by lowest action index.
OptimalPlan optimal_policy(const TabularMdp& mdp);

/// Exact V(pi) at (step 0, initial state).
double evaluate_policy(const TabularMdp& mdp, const Policy& policy);

Trajectory simulate_episode(const TabularMdp& mdp, const Policy& policy, Rng& rng);

/// Policy minimising the expected first-hitting time of `target`. Hitting times
/// count from 1 (the initial state is reached at time 1); an episode that never
/// reaches the target contributes T + 1.
HittingPlan min_hitting_policy(const TabularMdp& mdp, HittingTarget target);

/// Truncated expected hitting time of `target` under `policy` (same convention).
double expected_hitting_time(const TabularMdp& mdp, const Policy& policy, HittingTarget target);

/// P(X(target) <= T) under `policy`, by forward dynamic programming.
double reach_probability(const TabularMdp& mdp, const Policy& policy, HittingTarget target);

/// Occupancy measure: result[(t * S + s) * A + a] = P(s_t = s, a_t = a).
std::vector<double> occupancy_measure(const TabularMdp& mdp, const Policy& policy);

/// Copy of `policy` that plays `sa.action` whenever `sa.state` is visited.
Policy with_forced_action(Policy policy, StateAction sa);

}  // namespace ttr

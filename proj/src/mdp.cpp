#include "ttr/mdp.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ttr/distribution.hpp"

namespace ttr {

namespace {

constexpr double kTieTolerance = 1e-12;

void normalize_or_throw(std::span<double> row, const char* what) {
    double sum = 0.0;
    for (double v : row) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidModel(std::string(what) + ": negative or non-finite entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance)
        throw InvalidModel(std::string(what) + ": row sums to " + std::to_string(sum));
    if (std::abs(sum - 1.0) > 1e-14)
        for (double& v : row) v /= sum;
}

}  // namespace

TabularMdp::TabularMdp(Index num_states, Index num_actions, Index horizon, Index initial_state,
                       std::vector<double> transitions, std::vector<double> rewards)
    : states_(num_states),
      actions_(num_actions),
      horizon_(horizon),
      initial_(initial_state),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)) {
    if (states_ == 0 || actions_ == 0) throw InvalidModel("TabularMdp: empty state or action space");
    if (horizon_ < 1) throw InvalidModel("TabularMdp: horizon must be >= 1");
    if (initial_ >= states_) throw InvalidModel("TabularMdp: initial state out of range");
    if (transitions_.size() != states_ * actions_ * states_)
        throw InvalidModel("TabularMdp: transition tensor has wrong size");
    if (rewards_.size() != states_ * actions_) throw InvalidModel("TabularMdp: reward table has wrong size");
    for (Index k = 0; k < states_ * actions_; ++k)
        normalize_or_throw({transitions_.data() + k * states_, states_}, "TabularMdp transitions");
    for (double r : rewards_)
        if (!(r >= 0.0 && r <= 1.0)) throw InvalidModel("TabularMdp: reward outside [0, 1]");

    succ_offset_.reserve(states_ * actions_ + 1);
    succ_offset_.push_back(0);
    for (Index k = 0; k < states_ * actions_; ++k) {
        for (Index n = 0; n < states_; ++n)
            if (transitions_[k * states_ + n] > 0.0) succ_index_.push_back(n);
        succ_offset_.push_back(succ_index_.size());
    }
}

bool TabularMdp::same_shape(const TabularMdp& other) const {
    return states_ == other.states_ && actions_ == other.actions_ && horizon_ == other.horizon_ &&
           initial_ == other.initial_;
}

Policy::Policy(Index horizon, Index num_states, Index num_actions, std::vector<double> probs)
    : horizon_(horizon), states_(num_states), actions_(num_actions), probs_(std::move(probs)) {
    if (probs_.size() != horizon_ * states_ * actions_) throw InvalidModel("Policy: wrong number of entries");
    for (Index k = 0; k < horizon_ * states_; ++k)
        normalize_or_throw({probs_.data() + k * actions_, actions_}, "Policy rule");
}

Policy Policy::uniform(Index horizon, Index num_states, Index num_actions) {
    return Policy(horizon, num_states, num_actions,
                  std::vector<double>(horizon * num_states * num_actions, 1.0 / static_cast<double>(num_actions)));
}

Policy Policy::deterministic(Index horizon, Index num_states, Index num_actions, std::span<const Index> actions) {
    if (actions.size() != horizon * num_states) throw InvalidModel("Policy::deterministic: wrong number of actions");
    std::vector<double> probs(horizon * num_states * num_actions, 0.0);
    for (Index k = 0; k < actions.size(); ++k) {
        if (actions[k] >= num_actions) throw InvalidModel("Policy::deterministic: action out of range");
        probs[k * num_actions + actions[k]] = 1.0;
    }
    return Policy(horizon, num_states, num_actions, std::move(probs));
}

void Policy::set_action(Index t, Index s, Index a) {
    auto* rule = probs_.data() + (t * states_ + s) * actions_;
    std::fill(rule, rule + actions_, 0.0);
    rule[a] = 1.0;
}

bool Policy::is_deterministic() const {
    for (double v : probs_)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

Index Policy::action(Index t, Index s) const {
    const auto r = rule(t, s);
    for (Index a = 0; a < actions_; ++a)
        if (r[a] == 1.0) return a;
    throw std::logic_error("Policy::action: rule is not deterministic");
}

bool Policy::matches(const TabularMdp& mdp) const {
    return horizon_ == mdp.horizon() && states_ == mdp.num_states() && actions_ == mdp.num_actions();
}

Index sample_index(std::span<const double> probs, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double cum = 0.0;
    Index last = 0;
    for (Index i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cum += probs[i];
        last = i;
        if (u < cum) return i;
    }
    return last;
}

OptimalPlan optimal_policy(const TabularMdp& mdp) {
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    std::vector<double> next(S, 0.0), cur(S, 0.0);
    std::vector<Index> actions(T * S, 0);
    for (Index t = T; t-- > 0;) {
        for (Index s = 0; s < S; ++s) {
            double best = -1.0;
            Index best_a = 0;
            for (Index a = 0; a < A; ++a) {
                double q = mdp.reward(s, a);
                const auto row = mdp.row(s, a);
                for (Index n : mdp.successors(s, a)) q += row[n] * next[n];
                if (q > best + kTieTolerance) {
                    best = q;
                    best_a = a;
                }
            }
            cur[s] = best;
            actions[t * S + s] = best_a;
        }
        std::swap(cur, next);
    }
    return {Policy::deterministic(T, S, A, actions), next[mdp.initial_state()]};
}

double evaluate_policy(const TabularMdp& mdp, const Policy& policy) {
    if (!policy.matches(mdp)) throw InvalidModel("evaluate_policy: policy shape does not match the MDP");
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    std::vector<double> next(S, 0.0), cur(S, 0.0);
    for (Index t = T; t-- > 0;) {
        for (Index s = 0; s < S; ++s) {
            const auto rule = policy.rule(t, s);
            double v = 0.0;
            for (Index a = 0; a < A; ++a) {
                if (rule[a] == 0.0) continue;
                double q = mdp.reward(s, a);
                const auto row = mdp.row(s, a);
                for (Index n : mdp.successors(s, a)) q += row[n] * next[n];
                v += rule[a] * q;
            }
            cur[s] = v;
        }
        std::swap(cur, next);
    }
    return next[mdp.initial_state()];
}

Trajectory simulate_episode(const TabularMdp& mdp, const Policy& policy, Rng& rng) {
    if (!policy.matches(mdp)) throw InvalidModel("simulate_episode: policy shape does not match the MDP");
    Trajectory traj;
    traj.steps.reserve(mdp.horizon());
    Index s = mdp.initial_state();
    for (Index t = 0; t < mdp.horizon(); ++t) {
        const Index a = sample_index(policy.rule(t, s), rng);
        const Index next = sample_index(mdp.row(s, a), rng);
        traj.steps.push_back({s, a, next, mdp.reward(s, a)});
        s = next;
    }
    return traj;
}

namespace {

void check_target(const TabularMdp& mdp, HittingTarget target) {
    if (target.state >= mdp.num_states()) throw std::out_of_range("hitting target state out of range");
    if (target.action && *target.action >= mdp.num_actions())
        throw std::out_of_range("hitting target action out of range");
}

bool hits(HittingTarget target, Index s, Index a) {
    return s == target.state && (!target.action || *target.action == a);
}

}  // namespace

HittingPlan min_hitting_policy(const TabularMdp& mdp, HittingTarget target) {
    check_target(mdp, target);
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    // cost[s] at step t: expected hitting time given s_t = s and no hit before t
    std::vector<double> next(S, static_cast<double>(T + 1)), cur(S, 0.0);
    std::vector<Index> actions(T * S, 0);
    for (Index t = T; t-- > 0;) {
        const double now = static_cast<double>(t + 1);
        for (Index s = 0; s < S; ++s) {
            if (s == target.state) {
                cur[s] = now;
                actions[t * S + s] = target.action.value_or(0);
                continue;
            }
            double best = 0.0;
            Index best_a = 0;
            for (Index a = 0; a < A; ++a) {
                double q = 0.0;
                const auto row = mdp.row(s, a);
                for (Index n : mdp.successors(s, a)) q += row[n] * next[n];
                if (a == 0 || q < best - kTieTolerance) {
                    best = q;
                    best_a = a;
                }
            }
            cur[s] = best;
            actions[t * S + s] = best_a;
        }
        std::swap(cur, next);
    }
    return {Policy::deterministic(T, S, A, actions), next[mdp.initial_state()]};
}

double expected_hitting_time(const TabularMdp& mdp, const Policy& policy, HittingTarget target) {
    check_target(mdp, target);
    if (!policy.matches(mdp)) throw InvalidModel("expected_hitting_time: policy shape does not match the MDP");
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    std::vector<double> next(S, static_cast<double>(T + 1)), cur(S, 0.0);
    for (Index t = T; t-- > 0;) {
        const double now = static_cast<double>(t + 1);
        for (Index s = 0; s < S; ++s) {
            const auto rule = policy.rule(t, s);
            double v = 0.0;
            for (Index a = 0; a < A; ++a) {
                if (rule[a] == 0.0) continue;
                double q;
                if (hits(target, s, a)) {
                    q = now;
                } else {
                    q = 0.0;
                    const auto row = mdp.row(s, a);
                    for (Index n : mdp.successors(s, a)) q += row[n] * next[n];
                }
                v += rule[a] * q;
            }
            cur[s] = v;
        }
        std::swap(cur, next);
    }
    return next[mdp.initial_state()];
}

double reach_probability(const TabularMdp& mdp, const Policy& policy, HittingTarget target) {
    check_target(mdp, target);
    if (!policy.matches(mdp)) throw InvalidModel("reach_probability: policy shape does not match the MDP");
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    // mass[s]: probability of being in s at step t without having hit the target
    std::vector<double> mass(S, 0.0), next(S, 0.0);
    mass[mdp.initial_state()] = 1.0;
    double reached = 0.0;
    for (Index t = 0; t < T; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (Index s = 0; s < S; ++s) {
            if (mass[s] == 0.0) continue;
            const auto rule = policy.rule(t, s);
            for (Index a = 0; a < A; ++a) {
                const double w = mass[s] * rule[a];
                if (w == 0.0) continue;
                if (hits(target, s, a)) {
                    reached += w;
                    continue;
                }
                const auto row = mdp.row(s, a);
                for (Index n : mdp.successors(s, a)) next[n] += w * row[n];
            }
        }
        std::swap(mass, next);
    }
    return std::min(reached, 1.0);
}

std::vector<double> occupancy_measure(const TabularMdp& mdp, const Policy& policy) {
    if (!policy.matches(mdp)) throw InvalidModel("occupancy_measure: policy shape does not match the MDP");
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    std::vector<double> occ(T * S * A, 0.0);
    std::vector<double> mass(S, 0.0), next(S, 0.0);
    mass[mdp.initial_state()] = 1.0;
    for (Index t = 0; t < T; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (Index s = 0; s < S; ++s) {
            if (mass[s] == 0.0) continue;
            const auto rule = policy.rule(t, s);
            for (Index a = 0; a < A; ++a) {
                const double w = mass[s] * rule[a];
                if (w == 0.0) continue;
                occ[(t * S + s) * A + a] = w;
                const auto row = mdp.row(s, a);
                for (Index n : mdp.successors(s, a)) next[n] += w * row[n];
            }
        }
        std::swap(mass, next);
    }
    return occ;
}

Policy with_forced_action(Policy policy, StateAction sa) {
    for (Index t = 0; t < policy.horizon(); ++t) policy.set_action(t, sa.state, sa.action);
    return policy;
}

}  // namespace ttr

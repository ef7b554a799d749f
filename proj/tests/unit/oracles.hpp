#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "ttr/instances.hpp"
#include "ttr/mdp.hpp"

namespace oracle {

using ttr::Index;

/// Dirichlet(1) rows and uniform rewards.
inline ttr::TabularMdp random_mdp(Index S, Index A, Index T, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> p(S * A * S), r(S * A);
    for (Index k = 0; k < S * A; ++k) {
        double sum = 0.0;
        for (Index s = 0; s < S; ++s) sum += p[k * S + s] = expo(rng);
        for (Index s = 0; s < S; ++s) p[k * S + s] /= sum;
        r[k] = unit(rng);
    }
    return ttr::TabularMdp(S, A, T, 0, p, r);
}

/// Exact value of a deterministic policy by summing over the state distribution.
inline double value_of(const ttr::TabularMdp& m, const std::vector<Index>& actions) {
    const Index S = m.num_states();
    std::vector<double> mu(S, 0.0), next(S);
    mu[m.initial_state()] = 1.0;
    double v = 0.0;
    for (Index t = 0; t < m.horizon(); ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (Index s = 0; s < S; ++s) {
            if (mu[s] == 0.0) continue;
            const Index a = actions[t * S + s];
            v += mu[s] * m.reward(s, a);
            for (Index s2 = 0; s2 < S; ++s2) next[s2] += mu[s] * m.prob(s, a, s2);
        }
        mu.swap(next);
    }
    return v;
}

/// Calls fn on every deterministic non-stationary policy (A^(S*T) of them).
inline void for_each_policy(Index S, Index A, Index T, const std::function<void(const std::vector<Index>&)>& fn) {
    std::vector<Index> actions(S * T, 0);
    while (true) {
        fn(actions);
        Index k = 0;
        while (k < actions.size() && ++actions[k] == A) actions[k++] = 0;
        if (k == actions.size()) return;
    }
}

inline double brute_force_optimum(const ttr::TabularMdp& m) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_policy(m.num_states(), m.num_actions(), m.horizon(),
                    [&](const std::vector<Index>& a) { best = std::max(best, value_of(m, a)); });
    return best;
}

/// Deterministic-transition MDP from a successor table next[s * A + a].
inline ttr::TabularMdp deterministic_mdp(Index S, Index A, Index T, const std::vector<Index>& next,
                                         std::vector<double> rewards = {}) {
    std::vector<double> p(S * A * S, 0.0);
    for (Index k = 0; k < S * A; ++k) p[k * S + next[k]] = 1.0;
    if (rewards.empty()) rewards.assign(S * A, 0.0);
    return ttr::TabularMdp(S, A, T, 0, p, rewards);
}

/// Occupancy omega_t[(t * S + s) * A + a] of a deterministic Markov policy.
inline std::vector<double> occupancy_of(const ttr::TabularMdp& m, const std::vector<Index>& actions) {
    const Index S = m.num_states(), A = m.num_actions(), T = m.horizon();
    std::vector<double> occ(T * S * A, 0.0), mu(S, 0.0), next(S);
    mu[m.initial_state()] = 1.0;
    for (Index t = 0; t < T; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (Index s = 0; s < S; ++s) {
            const Index a = actions[t * S + s];
            occ[(t * S + s) * A + a] = mu[s];
            for (Index s2 = 0; s2 < S; ++s2) next[s2] += mu[s] * m.prob(s, a, s2);
        }
        mu.swap(next);
    }
    return occ;
}

/// The hand-built right-chain allocation on a lower-bound task: all mass takes
/// a2 into the right chain, 1/M of it leaves through a1 at each position, and
/// the absorbing states pass their mass on with a1.
inline std::vector<double> right_chain_allocation(const ttr::TabularMdp& m, Index M) {
    const ttr::LowerBoundLayout L{M};
    const Index S = m.num_states(), A = 2, T = m.horizon();
    std::vector<double> w(T * S * A, 0.0);
    auto at = [&](Index t, Index s, Index a) -> double& { return w[(t * S + s) * A + a]; };
    at(0, L.s_in(), L.a2) = 1.0;
    for (Index t = 1; t < T; ++t) {
        if (t <= M) {
            at(t, L.right(t), L.a1) = 1.0 / static_cast<double>(M);
            at(t, L.right(t), L.a2) = static_cast<double>(M - t) / static_cast<double>(M);
        }
        for (Index s : {L.s_high(), L.s_low()}) {
            double in = 0.0;
            for (Index s2 = 0; s2 < S; ++s2)
                for (Index a = 0; a < A; ++a) in += at(t - 1, s2, a) * m.prob(s2, a, s);
            at(t, s, L.a1) = in;
        }
    }
    return w;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
    const double m = mean(v);
    double sq = 0.0;
    for (double x : v) sq += (x - m) * (x - m);
    return std::sqrt(sq / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace oracle

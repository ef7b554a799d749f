#pragma once

#include <vector>

#include "ttr/task_set.hpp"

namespace ttr {

/// Infinite symmetric-KL entries are replaced by this value inside the LP.
inline constexpr double kKlCap = 1e6;

struct KlMatrix {
    Index task = 0;
    std::vector<Index> alternatives;          // every j != task
    std::vector<std::vector<double>> values;  // values[k][s * A + a], may be +inf
    bool has_infinite = false;
};

KlMatrix kl_matrix(const TaskSet& ts, Index i);

/// Per-step state-action occupancy: omega_t[(t * S + s) * A + a].
struct Allocation {
    Index T = 0;
    Index S = 0;
    Index A = 0;
    std::vector<double> omega_t;

    double at(Index t, Index s, Index a) const { return omega_t[(t * S + s) * A + a]; }
    /// Time average (1/T) sum_t omega_t, indexed s * A + a.
    std::vector<double> omega() const;

    static Allocation from_occupancy(const TabularMdp& mdp, const Policy& policy);
};

/// Initial-step mass on s1 only, nonnegativity and flow balance, all to `tol`.
bool verify_allocation(const Allocation& a, const TabularMdp& mdp, double tol = 1e-7);

/// min over alternatives of sum omega(s, a) KL_j(s, a), with KL capped at kKlCap.
double allocation_objective(const Allocation& a, const KlMatrix& kl);

struct BpiBound {
    double t_star = 0.0;
    Allocation optimal_allocation;
    bool kl_capped = false;  // an infinite KL entry was capped; the true value is at least t_star

    /// log(1 / (2.4 delta)) / t_star; +inf when t_star is 0.
    double tau_lower(double delta) const;
};

/// Max-min over the flow polytope solved as a linear program. Throws
/// std::invalid_argument on a singleton task set.
BpiBound t_star(const TaskSet& ts, Index i);

/// True if some state reached by the optimal policy has two actions whose
/// optimal Q-values agree within `tol`.
bool has_optimal_policy_ties(const TabularMdp& mdp, double tol = 1e-9);

}  // namespace ttr

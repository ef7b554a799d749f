#include "ttr/bpi_bound.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ttr/distribution.hpp"
#include "ttr/simplex.hpp"

namespace ttr {

KlMatrix kl_matrix(const TaskSet& ts, Index i) {
    if (i >= ts.size()) throw std::out_of_range("kl_matrix: task index out of range");
    const Index S = ts.num_states(), A = ts.num_actions();
    KlMatrix out;
    out.task = i;
    for (Index j = 0; j < ts.size(); ++j) {
        if (j == i) continue;
        out.alternatives.push_back(j);
        std::vector<double> row(S * A, 0.0);
        for (Index s = 0; s < S; ++s)
            for (Index a = 0; a < A; ++a) {
                const double v = symmetric_kl(ts.task(i).row(s, a), ts.task(j).row(s, a));
                row[s * A + a] = v;
                if (std::isinf(v)) out.has_infinite = true;
            }
        out.values.push_back(std::move(row));
    }
    return out;
}

std::vector<double> Allocation::omega() const {
    std::vector<double> w(S * A, 0.0);
    for (Index t = 0; t < T; ++t)
        for (Index k = 0; k < S * A; ++k) w[k] += omega_t[t * S * A + k];
    for (auto& x : w) x /= static_cast<double>(T);
    return w;
}

Allocation Allocation::from_occupancy(const TabularMdp& mdp, const Policy& policy) {
    return {mdp.horizon(), mdp.num_states(), mdp.num_actions(), occupancy_measure(mdp, policy)};
}

bool verify_allocation(const Allocation& a, const TabularMdp& mdp, double tol) {
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    if (a.T != T || a.S != S || a.A != A || a.omega_t.size() != T * S * A)
        throw std::invalid_argument("verify_allocation: allocation shape does not match the MDP");
    for (double v : a.omega_t)
        if (!(v >= -tol) || !std::isfinite(v)) return false;
    for (Index s = 0; s < S; ++s) {
        double mass = 0.0;
        for (Index x = 0; x < A; ++x) mass += a.at(0, s, x);
        if (std::abs(mass - (s == mdp.initial_state() ? 1.0 : 0.0)) > tol) return false;
    }
    std::vector<double> inflow(S);
    for (Index t = 1; t < T; ++t) {
        std::fill(inflow.begin(), inflow.end(), 0.0);
        for (Index s = 0; s < S; ++s)
            for (Index x = 0; x < A; ++x) {
                const double w = a.at(t - 1, s, x);
                if (w == 0.0) continue;
                const auto row = mdp.row(s, x);
                for (Index n : mdp.successors(s, x)) inflow[n] += row[n] * w;
            }
        for (Index s = 0; s < S; ++s) {
            double mass = 0.0;
            for (Index x = 0; x < A; ++x) mass += a.at(t, s, x);
            if (std::abs(mass - inflow[s]) > tol) return false;
        }
    }
    return true;
}

double allocation_objective(const Allocation& a, const KlMatrix& kl) {
    const auto w = a.omega();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : kl.values) {
        double v = 0.0;
        for (Index k = 0; k < w.size(); ++k) v += w[k] * std::min(row[k], kKlCap);
        best = std::min(best, v);
    }
    return best;
}

double BpiBound::tau_lower(double delta) const {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("tau_lower: delta must lie in (0, 1)");
    if (t_star <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log(1.0 / (2.4 * delta)) / t_star;
}

BpiBound t_star(const TaskSet& ts, Index i) {
    if (ts.size() < 2) throw std::invalid_argument("t_star: needs at least one alternative task");
    const auto kl = kl_matrix(ts, i);
    const TabularMdp& mdp = ts.task(i);
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    const Index nw = T * S * A, z = nw;

    LinearProgram lp;
    lp.num_vars = nw + 1;
    lp.objective.assign(lp.num_vars, 0.0);
    lp.objective[z] = 1.0;
    for (Index s = 0; s < S; ++s) {
        std::vector<double> row(lp.num_vars, 0.0);
        for (Index a = 0; a < A; ++a) row[s * A + a] = 1.0;
        lp.eq_rows.push_back(std::move(row));
        lp.eq_rhs.push_back(s == mdp.initial_state() ? 1.0 : 0.0);
    }
    for (Index t = 1; t < T; ++t) {
        for (Index s = 0; s < S; ++s) {
            std::vector<double> row(lp.num_vars, 0.0);
            for (Index a = 0; a < A; ++a) row[(t * S + s) * A + a] = 1.0;
            for (Index sp = 0; sp < S; ++sp)
                for (Index ap = 0; ap < A; ++ap) {
                    const double p = mdp.prob(sp, ap, s);
                    if (p != 0.0) row[((t - 1) * S + sp) * A + ap] -= p;
                }
            lp.eq_rows.push_back(std::move(row));
            lp.eq_rhs.push_back(0.0);
        }
    }
    for (const auto& vals : kl.values) {
        std::vector<double> row(lp.num_vars, 0.0);
        row[z] = 1.0;
        for (Index t = 0; t < T; ++t)
            for (Index k = 0; k < S * A; ++k) row[t * S * A + k] = -std::min(vals[k], kKlCap) / static_cast<double>(T);
        lp.le_rows.push_back(std::move(row));
        lp.le_rhs.push_back(0.0);
    }
    const auto sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal) throw std::runtime_error("t_star: linear program did not reach optimality");

    BpiBound out;
    out.kl_capped = kl.has_infinite;
    out.optimal_allocation = {T, S, A, std::vector<double>(sol.x.begin(), sol.x.begin() + nw)};
    for (auto& v : out.optimal_allocation.omega_t)
        if (v < 0.0) v = 0.0;
    out.t_star = std::max(0.0, allocation_objective(out.optimal_allocation, kl));
    return out;
}

bool has_optimal_policy_ties(const TabularMdp& mdp, double tol) {
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    const auto plan = optimal_policy(mdp);
    const auto occ = occupancy_measure(mdp, plan.policy);
    std::vector<double> next(S, 0.0), cur(S, 0.0);
    bool tie = false;
    for (Index t = T; t-- > 0;) {
        for (Index s = 0; s < S; ++s) {
            double best = -1.0, second = -1.0;
            for (Index a = 0; a < A; ++a) {
                double q = mdp.reward(s, a);
                const auto row = mdp.row(s, a);
                for (Index n : mdp.successors(s, a)) q += row[n] * next[n];
                if (q > best) {
                    second = best;
                    best = q;
                } else if (q > second) {
                    second = q;
                }
            }
            cur[s] = best;
            double reached = 0.0;
            for (Index a = 0; a < A; ++a) reached += occ[(t * S + s) * A + a];
            if (A > 1 && reached > 0.0 && best - second <= tol) tie = true;
        }
        std::swap(cur, next);
    }
    return tie;
}

}  // namespace ttr

#pragma once

#include <cstddef>
#include <vector>

namespace ttr {

/// maximize c'x  s.t.  eq_rows x = eq_rhs,  le_rows x <= le_rhs,  x >= 0.
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    std::size_t iterations = 0;
};

/// Dense two-phase tableau simplex. Dantzig pricing, switching to Bland's rule
/// after a run of degenerate pivots.
LpSolution solve_lp(const LinearProgram& lp, double tol = 1e-10, std::size_t max_iterations = 200000);

}  // namespace ttr

#include "ttr/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ttr {

namespace {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (n_ + 1) + c]; }
    double& rhs(std::size_t r) { return a_[r * (n_ + 1) + n_]; }
    double& obj(std::size_t c) { return a_[m_ * (n_ + 1) + c]; }
    double& value() { return a_[m_ * (n_ + 1) + n_]; }
    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t r, std::size_t c) {
        double* pr = &a_[r * (n_ + 1)];
        const double inv = 1.0 / pr[c];
        for (std::size_t j = 0; j <= n_; ++j) pr[j] *= inv;
        pr[c] = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            double* pi = &a_[i * (n_ + 1)];
            const double f = pi[c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= n_; ++j) pi[j] -= f * pr[j];
            pi[c] = 0.0;
        }
        basis_[r] = c;
    }

    /// Maximises the objective row over columns with allowed[c]; returns status.
    LpStatus optimise(const std::vector<char>& allowed, double tol, std::size_t max_iter, std::size_t& iterations) {
        std::size_t degenerate = 0;
        while (true) {
            if (iterations >= max_iter) return LpStatus::iteration_limit;
            const bool bland = degenerate > 50;
            std::size_t enter = n_;
            double best = -tol;
            for (std::size_t c = 0; c < n_; ++c) {
                if (!allowed[c]) continue;
                const double d = obj(c);
                if (d < best) {
                    best = d;
                    enter = c;
                    if (bland) break;
                }
            }
            if (enter == n_) return LpStatus::optimal;
            std::size_t leave = m_;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double p = at(r, enter);
                if (p <= tol) continue;
                const double q = rhs(r) / p;
                if (q < ratio - 1e-12 || (q <= ratio + 1e-12 && leave < m_ && basis_[r] < basis_[leave])) {
                    ratio = q;
                    leave = r;
                }
            }
            if (leave == m_) return LpStatus::unbounded;
            degenerate = ratio <= tol ? degenerate + 1 : 0;
            pivot(leave, enter);
            ++iterations;
        }
    }

private:
    std::size_t m_, n_;
    std::vector<double> a_;
    std::vector<std::size_t> basis_;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, double tol, std::size_t max_iterations) {
    const std::size_t n = lp.num_vars;
    if (lp.objective.size() != n) throw std::invalid_argument("solve_lp: objective length mismatch");
    if (lp.eq_rows.size() != lp.eq_rhs.size() || lp.le_rows.size() != lp.le_rhs.size())
        throw std::invalid_argument("solve_lp: row/rhs count mismatch");
    for (const auto& r : lp.eq_rows)
        if (r.size() != n) throw std::invalid_argument("solve_lp: equality row length mismatch");
    for (const auto& r : lp.le_rows)
        if (r.size() != n) throw std::invalid_argument("solve_lp: inequality row length mismatch");

    struct Row {
        const std::vector<double>* coeffs;
        double sign;
        double rhs;
        int kind;  // 0 = le (slack), 1 = ge (surplus + artificial), 2 = eq (artificial)
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < lp.le_rows.size(); ++i) {
        const double b = lp.le_rhs[i];
        rows.push_back({&lp.le_rows[i], b < 0 ? -1.0 : 1.0, std::abs(b), b < 0 ? 1 : 0});
    }
    for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) {
        const double b = lp.eq_rhs[i];
        rows.push_back({&lp.eq_rows[i], b < 0 ? -1.0 : 1.0, std::abs(b), 2});
    }
    const std::size_t m = rows.size();
    std::size_t slack_count = 0, art_count = 0;
    for (const auto& r : rows) {
        if (r.kind != 2) ++slack_count;
        if (r.kind != 0) ++art_count;
    }
    const std::size_t slack0 = n, art0 = n + slack_count, total = n + slack_count + art_count;
    Tableau tab(m, total);
    std::vector<char> is_art(total, 0);
    std::size_t next_slack = slack0, next_art = art0;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = rows[r];
        for (std::size_t j = 0; j < n; ++j) tab.at(r, j) = row.sign * (*row.coeffs)[j];
        tab.rhs(r) = row.rhs;
        if (row.kind == 0) {
            tab.at(r, next_slack) = 1.0;
            tab.basis()[r] = next_slack++;
        } else {
            if (row.kind == 1) tab.at(r, next_slack++) = -1.0;
            tab.at(r, next_art) = 1.0;
            is_art[next_art] = 1;
            tab.basis()[r] = next_art++;
        }
    }

    LpSolution sol;
    if (art_count > 0) {
        for (std::size_t c = art0; c < total; ++c) tab.obj(c) = 1.0;
        double scale = 1.0;
        for (std::size_t r = 0; r < m; ++r) {
            if (!is_art[tab.basis()[r]]) continue;
            scale += tab.rhs(r);
            for (std::size_t c = 0; c <= total; ++c) tab.obj(c) -= tab.at(r, c);
        }
        std::vector<char> allowed(total, 1);
        const auto status = tab.optimise(allowed, tol, max_iterations, sol.iterations);
        if (status == LpStatus::iteration_limit) {
            sol.status = status;
            return sol;
        }
        if (tab.value() < -1e-8 * scale) {
            sol.status = LpStatus::infeasible;
            return sol;
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (!is_art[tab.basis()[r]]) continue;
            for (std::size_t c = 0; c < art0; ++c)
                if (std::abs(tab.at(r, c)) > 1e-9) {
                    tab.pivot(r, c);
                    break;
                }
        }
    }

    for (std::size_t c = 0; c <= total; ++c) tab.obj(c) = 0.0;
    for (std::size_t j = 0; j < n; ++j) tab.obj(j) = -lp.objective[j];
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t b = tab.basis()[r];
        if (b < n && lp.objective[b] != 0.0) {
            const double cb = lp.objective[b];
            for (std::size_t c = 0; c <= total; ++c) tab.obj(c) += cb * tab.at(r, c);
        }
    }
    std::vector<char> allowed(total, 1);
    for (std::size_t c = art0; c < total; ++c) allowed[c] = 0;
    sol.status = tab.optimise(allowed, tol, max_iterations, sol.iterations);
    sol.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (tab.basis()[r] < n) sol.x[tab.basis()[r]] = tab.rhs(r);
    sol.objective = 0.0;
    for (std::size_t j = 0; j < n; ++j) sol.objective += lp.objective[j] * sol.x[j];
    return sol;
}

}  // namespace ttr

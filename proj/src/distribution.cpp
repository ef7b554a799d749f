#include "ttr/distribution.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ttr {

bool is_probability_vector(std::span<const double> p, double tol) {
    if (p.empty()) return false;
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

double l1_distance(std::span<const double> p, std::span<const double> q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) d += std::abs(p[i] - q[i]);
    return d;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    // rounding can push an exact-zero divergence slightly negative
    return kl < 0.0 ? 0.0 : kl;
}

double symmetric_kl(std::span<const double> p, std::span<const double> q) {
    return kl_divergence(p, q) + kl_divergence(q, p);
}

DistributionMetrics distribution_metrics(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("distribution_metrics: length mismatch");
    if (!is_probability_vector(p) || !is_probability_vector(q))
        throw std::invalid_argument("distribution_metrics: input is not a probability vector");
    DistributionMetrics m;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::abs(p[i] - q[i]);
        m.l1 += d;
        if (d > m.tv) m.tv = d;
    }
    m.kl = kl_divergence(p, q);
    m.kl_sym = m.kl + kl_divergence(q, p);
    return m;
}

}  // namespace ttr

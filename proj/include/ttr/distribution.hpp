#pragma once

#include <span>

namespace ttr {

/// Absolute tolerance on the sum of a probability vector.
inline constexpr double kSimplexTolerance = 1e-9;

/// Slack applied to every "l1 >= lambda" comparison so that separations planted
/// at exactly lambda survive floating-point rounding.
inline constexpr double kSeparationSlack = 1e-9;

struct DistributionMetrics {
    double l1 = 0.0;
    double tv = 0.0;      // max_i |p_i - q_i|
    double kl = 0.0;      // KL(p, q); +inf when p puts mass where q has none
    double kl_sym = 0.0;  // KL(p, q) + KL(q, p)
};

/// Throws std::invalid_argument on length mismatch or non-simplex input.
DistributionMetrics distribution_metrics(std::span<const double> p, std::span<const double> q);

/// Unchecked fast paths used in inner loops.
double l1_distance(std::span<const double> p, std::span<const double> q);
double kl_divergence(std::span<const double> p, std::span<const double> q);
double symmetric_kl(std::span<const double> p, std::span<const double> q);

bool is_probability_vector(std::span<const double> p, double tol = kSimplexTolerance);

}  // namespace ttr

#include "ttr/elimination.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ttr {

EliminationVerdict likelihood_ratio_test(std::span<const double> p1, std::span<const double> p2,
                                         std::span<const Index> samples) {
    if (p1.size() != p2.size()) throw std::invalid_argument("likelihood_ratio_test: length mismatch");
    for (Index x : samples)
        if (x >= p1.size()) throw std::out_of_range("likelihood_ratio_test: sample index out of range");
    for (Index x : samples)
        if (p2[x] == 0.0) return {Keep::first, VerdictReason::zero_probability, 0.0};
    for (Index x : samples)
        if (p1[x] == 0.0) return {Keep::second, VerdictReason::zero_probability, 0.0};
    double sum = 0.0;
    for (Index x : samples) sum += std::log(p1[x]) - std::log(p2[x]);
    return {sum >= 0.0 ? Keep::first : Keep::second, VerdictReason::log_likelihood, sum};
}

Index identification_sample_count(Index S, double M, Index H, double lambda, double c) {
    if (!(lambda > 0.0 && lambda <= 2.0)) throw std::invalid_argument("identification_sample_count: lambda must be in (0, 2]");
    if (!(c > 0.0)) throw std::invalid_argument("identification_sample_count: c must be positive");
    if (S == 0 || !(M > 0.0) || H == 0) throw std::invalid_argument("identification_sample_count: S, M, H must be positive");
    const double mh = M * static_cast<double>(H);
    const double l = std::log(static_cast<double>(S) * mh / lambda);
    const double n = c * l * l * std::log(mh) / std::pow(lambda, 4);
    return std::max<Index>(1, static_cast<Index>(std::ceil(n)));
}

Index bandit_sample_count(Index M, Index H, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("bandit_sample_count: lambda must be positive");
    const double n = 2.0 * std::log(2.0 * static_cast<double>(M) * static_cast<double>(H)) / std::pow(lambda, 4);
    return std::max<Index>(1, static_cast<Index>(std::ceil(n)));
}

}  // namespace ttr

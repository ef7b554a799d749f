#pragma once

#include <span>

#include "ttr/mdp.hpp"

namespace ttr {

enum class Keep { first, second };
enum class VerdictReason { zero_probability, log_likelihood };

struct EliminationVerdict {
    Keep keep = Keep::first;
    VerdictReason reason = VerdictReason::log_likelihood;
    double log_ratio = 0.0;  // sum of log(p1 / p2); meaningful only for log_likelihood
};

/// Pairwise elimination on next-state samples, computed in log space. A sample
/// impossible under p2 keeps the first model; otherwise a sample impossible
/// under p1 keeps the second; otherwise the first is kept iff the log-ratio
/// sum is >= 0. Throws std::out_of_range on a bad sample index.
EliminationVerdict likelihood_ratio_test(std::span<const double> p1, std::span<const double> p2,
                                         std::span<const Index> samples);

/// ceil(c * log^2(S * M * H / lambda) * log(M * H) / lambda^4), at least 1. M may be
/// fractional (a tree depth).
Index identification_sample_count(Index S, double M, Index H, double lambda, double c = 1.0);

/// ceil(2 * log(2 * M * H) / lambda^4).
Index bandit_sample_count(Index M, Index H, double lambda);

}  // namespace ttr

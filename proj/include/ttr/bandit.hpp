#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ttr/environment.hpp"
#include "ttr/mdp.hpp"

namespace ttr {

/// Gaussian-arm task with unit variance.
struct BanditTask {
    std::vector<double> means;

    Index num_arms() const { return means.size(); }
    double best_mean() const;
    Index best_arm() const;  // lowest index on ties
};

/// Throws std::invalid_argument unless the list is non-empty, arm counts agree
/// and every mean lies in [0, 1].
void validate_bandit_tasks(const std::vector<BanditTask>& tasks);

double normal_cdf(double x);

/// l1 distance between N(mu1, 1) and N(mu2, 1): 2 * (2 * Phi(|mu1 - mu2| / 2) - 1).
double gaussian_l1(double mu1, double mu2);

/// Mean gap g with gaussian_l1(0, g) = l1, for l1 in (0, 2).
double gaussian_gap_for_l1(double l1);

/// Log of prod N(x; mu1, 1) / N(x; mu2, 1).
double gaussian_log_density_ratio(double mu1, double mu2, std::span<const double> samples);

struct BanditInstanceParams {
    Index M = 0;
    Index H = 0;
    double lambda = 0.0;
    double mu_star = 1.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double gap = 0.0;  // extra mean gap of the second-group identifying arms
};

struct BanditInstance {
    std::vector<BanditTask> tasks;
    BanditInstanceParams params;
};

/// 2M arms per task: first block one optimal arm and M - 1 arms at 1/sqrt(H)
/// below it; second block floor(M/2) arms at log(H)/sqrt(H) below (cyclic from
/// M + i) and the rest a further Gaussian gap lower, l1-separated by lambda.
BanditInstance make_bandit_lower_bound_instance(Index M, Index H, double lambda);

class BanditEnvironment {
public:
    BanditEnvironment(const BanditTask& truth, std::uint64_t seed, Index budget);

    /// Throws BudgetExhausted past the budget.
    double pull(Index arm, Phase phase = Phase::identify);
    void commit(Index arm);
    void mark_truncated();

    Index budget() const { return budget_; }
    Index used() const { return arms_.size(); }
    Index remaining() const { return budget_ - arms_.size(); }

    RegretTrace trace() const;

private:
    const BanditTask* truth_;
    Rng rng_;
    Index budget_;
    std::vector<Index> arms_;
    std::vector<Phase> phases_;
};

struct BanditRun {
    Index identified_task = 0;
    Index pulls_identify = 0;
    Index committed_arm = 0;
    bool truncated = false;
    Index tests = 0;
    RegretTrace trace;
};

/// n defaults to ceil(2 log(2 M H) / lambda^4) when 0.
BanditRun bandit_identify_then_commit(BanditEnvironment& env, const std::vector<BanditTask>& tasks, double lambda,
                                      Rng& rng, Index n = 0);

}  // namespace ttr

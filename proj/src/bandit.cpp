#include "ttr/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ttr/elimination.hpp"
#include "ttr/instances.hpp"

namespace ttr {

double BanditTask::best_mean() const { return *std::max_element(means.begin(), means.end()); }

Index BanditTask::best_arm() const {
    return static_cast<Index>(std::max_element(means.begin(), means.end()) - means.begin());
}

void validate_bandit_tasks(const std::vector<BanditTask>& tasks) {
    if (tasks.empty()) throw std::invalid_argument("bandit: empty task list");
    for (const auto& t : tasks) {
        if (t.means.empty() || t.means.size() != tasks.front().means.size())
            throw std::invalid_argument("bandit: tasks must share a non-zero arm count");
        for (double m : t.means)
            if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("bandit: arm mean outside [0, 1]");
    }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double gaussian_l1(double mu1, double mu2) { return 2.0 * (2.0 * normal_cdf(std::abs(mu1 - mu2) / 2.0) - 1.0); }

double gaussian_gap_for_l1(double l1) {
    if (!(l1 > 0.0 && l1 < 2.0)) throw std::invalid_argument("gaussian_gap_for_l1: l1 must lie in (0, 2)");
    double lo = 0.0, hi = 80.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gaussian_l1(0.0, mid) < l1 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double gaussian_log_density_ratio(double mu1, double mu2, std::span<const double> samples) {
    double s = 0.0;
    for (double x : samples) s += ((x - mu2) * (x - mu2) - (x - mu1) * (x - mu1)) / 2.0;
    return s;
}

BanditInstance make_bandit_lower_bound_instance(Index M, Index H, double lambda) {
    if (M < 2) throw InfeasibleInstance("make_bandit_lower_bound_instance: M must be >= 2");
    if (H < 1) throw InfeasibleInstance("make_bandit_lower_bound_instance: H must be >= 1");
    BanditInstanceParams p;
    p.M = M;
    p.H = H;
    p.lambda = lambda;
    p.delta1 = 1.0 / std::sqrt(static_cast<double>(H));
    p.delta2 = std::log(static_cast<double>(H)) / std::sqrt(static_cast<double>(H));
    if (!(lambda > 0.0) || lambda + p.delta2 > 1.0)
        throw InfeasibleInstance("make_bandit_lower_bound_instance: need lambda > 0 and lambda + log(H)/sqrt(H) <= 1");
    p.gap = gaussian_gap_for_l1(lambda);
    const double low = p.mu_star - p.delta2 - p.gap;
    if (low < 0.0) throw InfeasibleInstance("make_bandit_lower_bound_instance: identifying arm mean falls below 0");

    BanditInstance out;
    out.params = p;
    for (Index i = 1; i <= M; ++i) {
        BanditTask t;
        t.means.assign(2 * M, 0.0);
        for (Index j = 1; j <= M; ++j) t.means[j - 1] = j == i ? p.mu_star : p.mu_star - p.delta1;
        std::vector<char> g1(M + 1, 0);
        for (Index x : lower_bound_group_one(M, i)) g1[x] = 1;
        for (Index x = 1; x <= M; ++x) t.means[M + x - 1] = g1[x] ? p.mu_star - p.delta2 : low;
        out.tasks.push_back(std::move(t));
    }
    return out;
}

BanditEnvironment::BanditEnvironment(const BanditTask& truth, std::uint64_t seed, Index budget)
    : truth_(&truth), rng_(seed), budget_(budget) {
    if (budget_ < 1) throw std::invalid_argument("BanditEnvironment: budget H must be >= 1");
}

double BanditEnvironment::pull(Index arm, Phase phase) {
    if (arm >= truth_->num_arms()) throw std::out_of_range("pull: arm out of range");
    if (remaining() == 0) throw BudgetExhausted("pull budget exhausted");
    std::normal_distribution<double> noise(truth_->means[arm], 1.0);
    arms_.push_back(arm);
    phases_.push_back(phase);
    return noise(rng_);
}

void BanditEnvironment::commit(Index arm) {
    if (arm >= truth_->num_arms()) throw std::out_of_range("commit: arm out of range");
    while (arms_.size() < budget_) {
        arms_.push_back(arm);
        phases_.push_back(Phase::commit);
    }
}

void BanditEnvironment::mark_truncated() {
    for (auto& p : phases_)
        if (p == Phase::identify) p = Phase::truncated;
}

RegretTrace BanditEnvironment::trace() const {
    const double best = truth_->best_mean();
    RegretTrace out;
    double cumulative = 0.0;
    for (Index h = 0; h < arms_.size(); ++h) {
        const double r = best - truth_->means[arms_[h]];
        cumulative += r;
        out.rows.push_back({h + 1, phases_[h], r, cumulative});
    }
    return out;
}

BanditRun bandit_identify_then_commit(BanditEnvironment& env, const std::vector<BanditTask>& tasks, double lambda,
                                      Rng& rng, Index n) {
    validate_bandit_tasks(tasks);
    const Index M = tasks.size();
    if (n == 0) n = bandit_sample_count(M, env.budget(), lambda);
    std::vector<Index> D(M);
    std::iota(D.begin(), D.end(), Index{0});
    BanditRun run;
    std::vector<double> xs;
    while (D.size() > 1) {
        std::uniform_int_distribution<Index> first(0, D.size() - 1), second(0, D.size() - 2);
        const Index u = first(rng);
        Index v = second(rng);
        if (v >= u) ++v;
        const Index m1 = D[u], m2 = D[v];
        Index arm = 0;
        double best = -1.0;
        for (Index a = 0; a < tasks[m1].num_arms(); ++a) {
            const double d = gaussian_l1(tasks[m1].means[a], tasks[m2].means[a]);
            if (d > best) {
                best = d;
                arm = a;
            }
        }
        xs.clear();
        try {
            for (Index k = 0; k < n; ++k) xs.push_back(env.pull(arm));
        } catch (const BudgetExhausted&) {
            run.truncated = true;
            break;
        }
        const double ratio = gaussian_log_density_ratio(tasks[m1].means[arm], tasks[m2].means[arm], xs);
        const Index loser = ratio >= 0.0 ? m2 : m1;
        D.erase(std::remove(D.begin(), D.end(), loser), D.end());
        ++run.tests;
    }
    run.identified_task = *std::min_element(D.begin(), D.end());
    run.pulls_identify = env.used();
    run.committed_arm = tasks[run.identified_task].best_arm();
    if (run.truncated) env.mark_truncated();
    env.commit(run.committed_arm);
    run.trace = env.trace();
    return run;
}

}  // namespace ttr

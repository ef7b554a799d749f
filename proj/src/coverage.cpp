#include "ttr/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ttr {

namespace {

class CoverageModel {
public:
    CoverageModel(const TaskSet& ts, std::vector<StateAction> pairs)
        : ts_(ts),
          pairs_(std::move(pairs)),
          S_(ts.num_states()),
          A_(ts.num_actions()),
          T_(ts.horizon()),
          masks_(Index{1} << pairs_.size()),
          X_(S_ * masks_) {
        next_.resize(X_ * A_);
        gain_.resize(X_ * A_);
        for (Index m = 0; m < masks_; ++m)
            for (Index s = 0; s < S_; ++s)
                for (Index a = 0; a < A_; ++a) {
                    std::uint32_t nm = static_cast<std::uint32_t>(m);
                    for (Index k = 0; k < pairs_.size(); ++k)
                        if (pairs_[k].state == s && pairs_[k].action == a) nm |= (std::uint32_t{1} << k);
                    next_[(s + S_ * m) * A_ + a] = nm;
                    gain_[(s + S_ * m) * A_ + a] = nm != m ? 1.0 : 0.0;
                }
    }

    Index X() const { return X_; }
    Index T() const { return T_; }
    Index A() const { return A_; }

    double q(const TabularMdp& mdp, Index x, Index a, const std::vector<double>& vnext) const {
        const Index s = x % S_;
        const Index nm = next_[x * A_ + a];
        double v = gain_[x * A_ + a];
        const auto row = mdp.row(s, a);
        for (Index n : mdp.successors(s, a)) v += row[n] * vnext[n + S_ * nm];
        return v;
    }

    double value(const TabularMdp& mdp, const std::vector<double>& probs) const {
        std::vector<double> next(X_, 0.0), cur(X_, 0.0);
        for (Index t = T_; t-- > 0;) {
            for (Index x = 0; x < X_; ++x) {
                const double* rule = probs.data() + (t * X_ + x) * A_;
                double v = 0.0;
                for (Index a = 0; a < A_; ++a)
                    if (rule[a] > 0.0) v += rule[a] * q(mdp, x, a, next);
                cur[x] = v;
            }
            std::swap(cur, next);
        }
        return next[ts_.initial_state()];
    }

    std::vector<double> occupancy(const TabularMdp& mdp, const std::vector<double>& probs) const {
        std::vector<double> rho(T_ * X_, 0.0);
        rho[ts_.initial_state()] = 1.0;
        for (Index t = 0; t + 1 < T_; ++t) {
            for (Index x = 0; x < X_; ++x) {
                const double mass = rho[t * X_ + x];
                if (mass == 0.0) continue;
                const Index s = x % S_;
                const double* rule = probs.data() + (t * X_ + x) * A_;
                for (Index a = 0; a < A_; ++a) {
                    if (rule[a] == 0.0) continue;
                    const Index nm = next_[x * A_ + a];
                    const auto row = mdp.row(s, a);
                    for (Index n : mdp.successors(s, a)) rho[(t + 1) * X_ + n + S_ * nm] += mass * rule[a] * row[n];
                }
            }
        }
        return rho;
    }

    std::vector<double> uniform() const {
        return std::vector<double>(T_ * X_ * A_, 1.0 / static_cast<double>(A_));
    }

    /// Coordinate-ascent best response to the task mixture `w`, warm-started
    /// from `probs`. Returns a deterministic policy.
    std::vector<double> best_response(const std::vector<double>& w, std::vector<double> probs,
                                      const std::vector<std::vector<double>>& fallback, Index passes) const {
        const Index M = ts_.size();
        for (Index pass = 0; pass < passes; ++pass) {
            std::vector<std::vector<double>> rho(M);
            for (Index i = 0; i < M; ++i) rho[i] = occupancy(ts_.task(i), probs);
            std::vector<std::vector<double>> next(M, std::vector<double>(X_, 0.0)), cur = next;
            std::vector<double> out(probs.size(), 0.0);
            std::vector<double> qs(M * A_);
            for (Index t = T_; t-- > 0;) {
                for (Index x = 0; x < X_; ++x) {
                    double total = 0.0, total_fb = 0.0;
                    for (Index i = 0; i < M; ++i) {
                        total += w[i] * rho[i][t * X_ + x];
                        total_fb += w[i] * fallback[i][t * X_ + x];
                    }
                    for (Index i = 0; i < M; ++i)
                        for (Index a = 0; a < A_; ++a) qs[i * A_ + a] = q(ts_.task(i), x, a, next[i]);
                    Index best_a = 0;
                    double best = -std::numeric_limits<double>::infinity();
                    for (Index a = 0; a < A_; ++a) {
                        double score = 0.0;
                        for (Index i = 0; i < M; ++i) {
                            const double weight = total > 0.0      ? w[i] * rho[i][t * X_ + x]
                                                  : total_fb > 0.0 ? w[i] * fallback[i][t * X_ + x]
                                                                   : w[i];
                            score += weight * qs[i * A_ + a];
                        }
                        if (score > best + 1e-12) {
                            best = score;
                            best_a = a;
                        }
                    }
                    out[(t * X_ + x) * A_ + best_a] = 1.0;
                    for (Index i = 0; i < M; ++i) cur[i][x] = qs[i * A_ + best_a];
                }
                std::swap(cur, next);
            }
            const bool same = out == probs;
            probs = std::move(out);
            if (same) break;
        }
        return probs;
    }

    CoveragePolicy wrap(std::vector<double> probs) const {
        return {Policy(T_, X_, A_, std::move(probs)), pairs_, S_};
    }

private:
    const TaskSet& ts_;
    std::vector<StateAction> pairs_;
    Index S_, A_, T_, masks_, X_;
    std::vector<std::uint32_t> next_;
    std::vector<double> gain_;
};

}  // namespace

CoverageGameResult solve_coverage_game(const TaskSet& ts, const std::vector<StateAction>& uncovered,
                                       const CoverageGameOptions& opts) {
    if (uncovered.size() > kMaxCoveragePairs)
        throw std::invalid_argument("coverage_game_policy: at most 12 uncovered pairs are supported");
    for (const auto& sa : uncovered)
        if (sa.state >= ts.num_states() || sa.action >= ts.num_actions())
            throw std::out_of_range("coverage_game_policy: pair out of range");
    const CoverageModel model(ts, uncovered);
    CoverageGameResult result;
    if (uncovered.empty()) {
        result.policy = model.wrap(model.uniform());
        return result;
    }
    const Index M = ts.size();
    const double K = static_cast<double>(uncovered.size());
    const Index X = model.X(), A = model.A(), T = model.T();

    auto min_value = [&](const std::vector<double>& probs) {
        double v = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < M; ++i) v = std::min(v, model.value(ts.task(i), probs));
        return v;
    };

    const auto uniform = model.uniform();
    std::vector<std::vector<double>> fallback(M);
    for (Index i = 0; i < M; ++i) fallback[i] = model.occupancy(ts.task(i), uniform);

    std::vector<double> w(M, 1.0 / static_cast<double>(M));
    std::vector<double> num(T * X * A, 0.0), den(T * X, 0.0);
    std::vector<double> current = uniform;
    std::vector<double> best_probs = uniform;
    double best_value = min_value(uniform);
    double upper = std::numeric_limits<double>::infinity();

    auto averaged = [&] {
        std::vector<double> avg(T * X * A, 1.0 / static_cast<double>(A));
        for (Index k = 0; k < T * X; ++k) {
            if (den[k] <= 0.0) continue;
            for (Index a = 0; a < A; ++a) avg[k * A + a] = num[k * A + a] / den[k];
        }
        return avg;
    };

    Index it = 0;
    for (; it < opts.max_iterations; ++it) {
        current = model.best_response(w, current, fallback, opts.best_response_passes);
        std::vector<double> v(M);
        double mixture = 0.0, worst = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < M; ++i) {
            v[i] = model.value(ts.task(i), current);
            mixture += w[i] * v[i];
            worst = std::min(worst, v[i]);
        }
        upper = std::min(upper, mixture);
        if (worst > best_value) {
            best_value = worst;
            best_probs = current;
        }
        for (Index i = 0; i < M; ++i) {
            const auto rho = model.occupancy(ts.task(i), current);
            for (Index k = 0; k < T * X; ++k) {
                if (rho[k] == 0.0) continue;
                const double c = rho[k] / static_cast<double>(M);
                den[k] += c;
                for (Index a = 0; a < A; ++a) num[k * A + a] += c * current[k * A + a];
            }
        }
        double z = 0.0;
        for (Index i = 0; i < M; ++i) {
            w[i] *= std::exp(-opts.step * v[i] / K);
            z += w[i];
        }
        for (auto& x : w) x /= z;

        if ((it + 1) % 10 == 0 || it + 1 == opts.max_iterations) {
            auto avg = averaged();
            const double av = min_value(avg);
            if (av > best_value) {
                best_value = av;
                best_probs = std::move(avg);
            }
        }
        if (upper - best_value <= opts.target_gap) {
            ++it;
            break;
        }
    }
    result.policy = model.wrap(std::move(best_probs));
    result.value = best_value;
    result.upper_bound = upper;
    result.iterations = it;
    return result;
}

CoveragePolicy coverage_game_policy(const TaskSet& ts, const std::vector<StateAction>& uncovered) {
    return solve_coverage_game(ts, uncovered).policy;
}

double expected_coverage(const TabularMdp& mdp, const CoveragePolicy& cp) {
    std::vector<TabularMdp> one{mdp};
    const TaskSet single(std::move(one));
    const CoverageModel model(single, cp.pairs);
    if (cp.policy.num_states() != model.X() || cp.policy.horizon() != mdp.horizon() ||
        cp.policy.num_actions() != mdp.num_actions())
        throw InvalidModel("expected_coverage: policy shape mismatch");
    return model.value(mdp, cp.policy.probabilities());
}

RevealingSamplingResult revealing_policies_sampling(SimulatedEnvironment& env, const TaskSet& ts, Index n,
                                                    std::vector<StateAction> revealing_set) {
    if (n < 1) throw std::invalid_argument("revealing_policies_sampling: n must be >= 1");
    if (revealing_set.empty()) revealing_set = separation_report(ts).revealing_set;
    RevealingSamplingResult out;
    for (const auto& sa : revealing_set) out.samples[sa];
    std::map<std::vector<StateAction>, Index> handles;
    std::vector<StateAction> uncovered;
    auto short_pairs = [&] {
        std::vector<StateAction> v;
        for (const auto& sa : revealing_set)
            if (out.samples[sa].size() < n) v.push_back(sa);
        return v;
    };
    bool first_round = true;
    while (true) {
        if (uncovered.empty()) {
            if (out.rounds > 0 && first_round) {
                first_round = false;
                out.first_cover_episodes = out.episodes;
            }
            uncovered = short_pairs();
            if (uncovered.empty()) break;
            ++out.rounds;
        }
        auto it = handles.find(uncovered);
        if (it == handles.end()) it = handles.emplace(uncovered, env.add_policy(coverage_game_policy(ts, uncovered))).first;
        const auto traj = env.run_episode(it->second, Phase::identify);
        ++out.episodes;
        harvest(traj, revealing_set, out.samples);
        std::erase_if(uncovered, [&](const StateAction& sa) {
            return std::any_of(traj.steps.begin(), traj.steps.end(),
                               [&](const Step& st) { return st.state == sa.state && st.action == sa.action; });
        });
    }
    if (first_round) out.first_cover_episodes = out.episodes;
    return out;
}

AlgorithmRun explore_identify_then_commit_adaptive(SimulatedEnvironment& env, const TaskSet& ts, Index n, Rng& rng) {
    RunStats stats;
    if (ts.size() == 1) return finish_run(env, ts.task(0), 0, false, stats);
    const auto revealing = separation_report(ts).revealing_set;
    RevealingSamplingResult sampled;
    try {
        sampled = revealing_policies_sampling(env, ts, n, revealing);
    } catch (const BudgetExhausted&) {
        stats.explore_episodes = env.used();
        return finish_run(env, ts.task(0), 0, true, stats);
    }
    stats.explore_episodes = sampled.episodes;
    stats.coverage_iterations = sampled.rounds;
    const Index before = env.used();
    const Index survivor = offline_elimination(ts, revealing, sampled.samples, rng, &stats.tests);
    stats.identify_stage_episodes = env.used() - before;
    return finish_run(env, ts.task(survivor), survivor, false, stats);
}

}  // namespace ttr

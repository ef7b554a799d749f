#include "ttr/environment.hpp"

#include <algorithm>

namespace ttr {

std::uint32_t CoveragePolicy::advance(std::uint32_t mask, Index s, Index a) const {
    for (Index k = 0; k < pairs.size(); ++k)
        if (pairs[k].state == s && pairs[k].action == a) mask |= (std::uint32_t{1} << k);
    return mask;
}

namespace {

double evaluate_coverage(const TabularMdp& mdp, const CoveragePolicy& cp) {
    const Index S = mdp.num_states(), A = mdp.num_actions(), T = mdp.horizon();
    const Index masks = Index{1} << cp.pairs.size();
    if (cp.base_states != S || cp.policy.num_states() != S * masks || cp.policy.num_actions() != A ||
        cp.policy.horizon() != T)
        throw InvalidModel("evaluate_deployed: coverage policy shape does not match the MDP");
    std::vector<double> next(S * masks, 0.0), cur(S * masks, 0.0);
    for (Index t = T; t-- > 0;) {
        for (Index m = 0; m < masks; ++m) {
            for (Index s = 0; s < S; ++s) {
                const auto rule = cp.policy.rule(t, cp.augmented(s, static_cast<std::uint32_t>(m)));
                double v = 0.0;
                for (Index a = 0; a < A; ++a) {
                    if (rule[a] == 0.0) continue;
                    const Index m2 = cp.advance(static_cast<std::uint32_t>(m), s, a);
                    double q = mdp.reward(s, a);
                    const auto row = mdp.row(s, a);
                    for (Index n : mdp.successors(s, a)) q += row[n] * next[n + S * m2];
                    v += rule[a] * q;
                }
                cur[s + S * m] = v;
            }
        }
        std::swap(cur, next);
    }
    return next[mdp.initial_state()];
}

}  // namespace

double evaluate_deployed(const TabularMdp& mdp, const DeployedPolicy& policy) {
    if (const auto* p = std::get_if<Policy>(&policy)) return evaluate_policy(mdp, *p);
    return evaluate_coverage(mdp, std::get<CoveragePolicy>(policy));
}

Trajectory simulate_deployed(const TabularMdp& mdp, const DeployedPolicy& policy, Rng& rng) {
    if (const auto* p = std::get_if<Policy>(&policy)) return simulate_episode(mdp, *p, rng);
    const auto& cp = std::get<CoveragePolicy>(policy);
    Trajectory traj;
    traj.steps.reserve(mdp.horizon());
    Index s = mdp.initial_state();
    std::uint32_t mask = 0;
    for (Index t = 0; t < mdp.horizon(); ++t) {
        const Index a = sample_index(cp.policy.rule(t, cp.augmented(s, mask)), rng);
        const Index next = sample_index(mdp.row(s, a), rng);
        traj.steps.push_back({s, a, next, mdp.reward(s, a)});
        mask = cp.advance(mask, s, a);
        s = next;
    }
    return traj;
}

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::identify: return "identify";
        case Phase::commit: return "commit";
        case Phase::truncated: return "truncated";
    }
    return "?";
}

Phase phase_from_name(const std::string& name) {
    if (name == "identify") return Phase::identify;
    if (name == "commit") return Phase::commit;
    if (name == "truncated") return Phase::truncated;
    throw std::invalid_argument("unknown phase tag: " + name);
}

Index RegretTrace::count(Phase p) const {
    return static_cast<Index>(std::count_if(rows.begin(), rows.end(), [p](const TraceRow& r) { return r.phase == p; }));
}

SimulatedEnvironment::SimulatedEnvironment(const TabularMdp& truth, std::uint64_t seed, Index budget)
    : truth_(&truth), rng_(seed), budget_(budget) {
    if (budget_ < 1) throw std::invalid_argument("SimulatedEnvironment: budget H must be >= 1");
}

Index SimulatedEnvironment::add_policy(DeployedPolicy policy) {
    pool_.push_back(std::move(policy));
    return pool_.size() - 1;
}

Trajectory SimulatedEnvironment::run_episode(Index handle, Phase phase) {
    if (handle >= pool_.size()) throw std::out_of_range("run_episode: unknown policy handle");
    if (remaining() == 0) throw BudgetExhausted("episode budget exhausted");
    auto traj = simulate_deployed(*truth_, pool_[handle], rng_);
    traj.episode_index = handles_.size() + 1;
    handles_.push_back(handle);
    phases_.push_back(phase);
    return traj;
}

void SimulatedEnvironment::commit(Index handle) {
    if (handle >= pool_.size()) throw std::out_of_range("commit: unknown policy handle");
    while (handles_.size() < budget_) {
        handles_.push_back(handle);
        phases_.push_back(Phase::commit);
    }
}

void SimulatedEnvironment::mark_truncated() {
    for (auto& p : phases_)
        if (p == Phase::identify) p = Phase::truncated;
}

RegretTrace SimulatedEnvironment::trace() const {
    const double v_star = optimal_policy(*truth_).value;
    std::vector<double> regret(pool_.size(), -1.0);
    RegretTrace out;
    out.rows.reserve(handles_.size());
    double cumulative = 0.0;
    for (Index h = 0; h < handles_.size(); ++h) {
        const Index k = handles_[h];
        if (regret[k] < 0.0) regret[k] = std::max(0.0, v_star - evaluate_deployed(*truth_, pool_[k]));
        cumulative += regret[k];
        out.rows.push_back({h + 1, phases_[h], regret[k], cumulative});
    }
    return out;
}

AlgorithmRun finish_run(SimulatedEnvironment& env, const TabularMdp& survivor_model, Index survivor, bool truncated,
                        const RunStats& stats) {
    AlgorithmRun run;
    run.identified_task = survivor;
    run.truncated = truncated;
    run.stats = stats;
    run.committed_policy = optimal_policy(survivor_model).policy;
    if (truncated) env.mark_truncated();
    run.episodes_identify = env.used();
    env.commit(env.add_policy(run.committed_policy));
    run.per_episode_policies = env.episode_handles();
    run.policy_pool = env.pool();
    run.trace = env.trace();
    return run;
}

}  // namespace ttr

#include "ttr/identification.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace ttr {

namespace {

std::pair<Index, Index> draw_pair(const std::vector<Index>& D, Rng& rng) {
    std::uniform_int_distribution<Index> first(0, D.size() - 1);
    std::uniform_int_distribution<Index> second(0, D.size() - 2);
    const Index u = first(rng);
    Index v = second(rng);
    if (v >= u) ++v;
    return {D[u], D[v]};
}

void erase_value(std::vector<Index>& v, Index x) { v.erase(std::remove(v.begin(), v.end(), x), v.end()); }

std::vector<Index> all_tasks(const TaskSet& ts) {
    std::vector<Index> v(ts.size());
    std::iota(v.begin(), v.end(), Index{0});
    return v;
}

struct EliminationOutcome {
    Index survivor = 0;
    bool truncated = false;
};

EliminationOutcome eliminate(SamplingContext& ctx, std::vector<Index> D, Index n, Rng& rng, RunStats& stats) {
    const TaskSet& ts = ctx.task_set();
    std::sort(D.begin(), D.end());
    while (D.size() > 1) {
        const auto [m1, m2] = draw_pair(D, rng);
        const StateAction sa = ts.best_pair(m1, m2);
        SamplingResult res;
        try {
            res = ctx.sample(D, sa, n);
        } catch (const BudgetExhausted&) {
            return {D.front(), true};
        }
        const auto verdict = likelihood_ratio_test(ts.task(m1).row(sa), ts.task(m2).row(sa), res.samples);
        erase_value(D, verdict.keep == Keep::first ? m2 : m1);
        ++stats.tests;
    }
    return {D.front(), false};
}

}  // namespace

Index SamplingContext::handle_for(Index task, StateAction pair) {
    const auto key = std::make_tuple(task, pair.state, pair.action);
    auto it = handles_.find(key);
    if (it != handles_.end()) return it->second;
    const auto& plan = hitting_.get(task, HittingTarget::of_state(pair.state));
    const Index h = env_->add_policy(with_forced_action(plan.policy, pair));
    handles_.emplace(key, h);
    return h;
}

SamplingResult SamplingContext::sample(const std::vector<Index>& candidates, StateAction pair, Index n) {
    if (n < 1) throw std::invalid_argument("sampling_routine: n must be >= 1");
    if (candidates.empty()) throw std::invalid_argument("sampling_routine: empty candidate set");
    if (pair.state >= ts_->num_states() || pair.action >= ts_->num_actions())
        throw std::out_of_range("sampling_routine: pair out of range");
    SamplingResult out;
    out.samples.reserve(n);
    while (out.samples.size() < n) {
        for (Index task : candidates) {
            const Index h = handle_for(task, pair);
            for (int rep = 0; rep < 2 && out.samples.size() < n; ++rep) {
                const auto traj = env_->run_episode(h, Phase::identify);
                ++out.episodes_used;
                out.episode_policies.push_back(h);
                for (const auto& st : traj.steps)
                    if (st.state == pair.state && st.action == pair.action) {
                        out.samples.push_back(st.next_state);
                        break;
                    }
            }
            if (out.samples.size() >= n) break;
        }
    }
    return out;
}

SamplingResult sampling_routine(SimulatedEnvironment& env, const TaskSet& ts, const std::vector<Index>& candidates,
                                StateAction pair, Index n) {
    SamplingContext ctx(env, ts);
    return ctx.sample(candidates, pair, n);
}

AlgorithmRun identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, Index n, Rng& rng) {
    return identify_then_commit(env, ts, all_tasks(ts), n, rng);
}

AlgorithmRun identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, const std::vector<Index>& candidates,
                                  Index n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("identify_then_commit: n must be >= 1");
    if (candidates.empty()) throw std::invalid_argument("identify_then_commit: empty candidate set");
    for (Index c : candidates)
        if (c >= ts.size()) throw std::out_of_range("identify_then_commit: candidate out of range");
    SamplingContext ctx(env, ts);
    RunStats stats;
    const auto out = eliminate(ctx, candidates, n, rng, stats);
    return finish_run(env, ts.task(out.survivor), out.survivor, out.truncated, stats);
}

AlgorithmRun double_identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, const ClusterStructure& cs,
                                         Index n_cluster, Index n_inner, Rng& rng) {
    if (n_cluster < 1 || n_inner < 1) throw std::invalid_argument("double_identify_then_commit: n must be >= 1");
    Index covered = 0;
    for (const auto& c : cs.partition()) covered += c.size();
    if (covered != ts.size() || cs.K() == 0)
        throw std::invalid_argument("double_identify_then_commit: clusters do not partition the task set");

    SamplingContext ctx(env, ts);
    RunStats stats;
    std::vector<Index> reps;
    for (const auto& c : cs.partition()) {
        std::uniform_int_distribution<Index> pick(0, c.size() - 1);
        reps.push_back(c[pick(rng)]);
    }
    std::vector<Index> alive(cs.K());
    std::iota(alive.begin(), alive.end(), Index{0});
    auto first_task = [&](Index k) { return *std::min_element(cs.partition()[k].begin(), cs.partition()[k].end()); };

    while (alive.size() > 1) {
        std::uniform_int_distribution<Index> pick(0, alive.size() - 1);
        const Index k = alive[pick(rng)];
        const auto& inside = cs.partition()[k];
        std::vector<Index> outside;
        for (Index t = 0; t < ts.size(); ++t)
            if (cs.cluster_of(t) != k) outside.push_back(t);
        const StateAction sa = cluster_revealing_pair(ts, inside, outside).pair;
        Index m1 = inside.front(), m2 = outside.front();
        double closest = std::numeric_limits<double>::infinity();
        for (Index i : inside)
            for (Index j : outside) {
                const double d = ts.l1(i, j, sa);
                if (d < closest) {
                    closest = d;
                    m1 = i;
                    m2 = j;
                }
            }
        SamplingResult res;
        try {
            res = ctx.sample(reps, sa, n_cluster);
        } catch (const BudgetExhausted&) {
            const Index survivor = first_task(*std::min_element(alive.begin(), alive.end()));
            return finish_run(env, ts.task(survivor), survivor, true, stats);
        }
        const auto verdict = likelihood_ratio_test(ts.task(m1).row(sa), ts.task(m2).row(sa), res.samples);
        if (verdict.keep == Keep::first)
            alive = {k};
        else
            erase_value(alive, k);
        ++stats.tests;
    }
    const auto out = eliminate(ctx, cs.partition()[alive.front()], n_inner, rng, stats);
    return finish_run(env, ts.task(out.survivor), out.survivor, out.truncated, stats);
}

AlgorithmRun tree_identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts, double lambda, double beta,
                                       Index n, Rng& /*rng*/) {
    if (n < 1) throw std::invalid_argument("tree_identify_then_commit: n must be >= 1");
    SamplingContext ctx(env, ts);
    RunStats stats;
    std::vector<Index> D = all_tasks(ts);
    while (D.size() > 1) {
        const TreeSplit split = find_tree_split(ts, D, lambda, beta, &ctx.hitting());
        ++stats.split_rounds;
        SamplingResult res;
        try {
            res = ctx.sample({split.rep_plus}, split.pair, n);
        } catch (const BudgetExhausted&) {
            const Index survivor = *std::min_element(D.begin(), D.end());
            return finish_run(env, ts.task(survivor), survivor, true, stats);
        }
        const auto verdict = likelihood_ratio_test(ts.task(split.rep_plus).row(split.pair),
                                                   ts.task(split.rep_minus).row(split.pair), res.samples);
        D = verdict.keep == Keep::first ? split.d_plus : split.d_minus;
        ++stats.tests;
    }
    return finish_run(env, ts.task(D.front()), D.front(), false, stats);
}

void harvest(const Trajectory& traj, const std::vector<StateAction>& pairs, PairSamples& out) {
    std::vector<char> seen(pairs.size(), 0);
    for (const auto& st : traj.steps)
        for (Index k = 0; k < pairs.size(); ++k)
            if (!seen[k] && pairs[k].state == st.state && pairs[k].action == st.action) {
                seen[k] = 1;
                out[pairs[k]].push_back(st.next_state);
            }
}

Index offline_elimination(const TaskSet& ts, const std::vector<StateAction>& revealing_set, const PairSamples& samples,
                          Rng& rng, Index* tests) {
    if (revealing_set.empty() && ts.size() > 1)
        throw std::invalid_argument("offline_elimination: empty revealing set");
    std::vector<Index> D = all_tasks(ts);
    static const std::vector<Index> kNone;
    while (D.size() > 1) {
        const auto [m1, m2] = draw_pair(D, rng);
        StateAction best = revealing_set.front();
        double best_l1 = -1.0;
        for (const auto& sa : revealing_set) {
            const double d = ts.l1(m1, m2, sa);
            if (d > best_l1) {
                best_l1 = d;
                best = sa;
            }
        }
        const auto it = samples.find(best);
        const auto& xs = it == samples.end() ? kNone : it->second;
        const auto verdict = likelihood_ratio_test(ts.task(m1).row(best), ts.task(m2).row(best), xs);
        erase_value(D, verdict.keep == Keep::first ? m2 : m1);
        if (tests) ++*tests;
    }
    return D.front();
}

AlgorithmRun explore_identify_then_commit(SimulatedEnvironment& env, const TaskSet& ts,
                                          const std::vector<Policy>& policies, Index n, Rng& rng,
                                          std::vector<StateAction> revealing_set) {
    if (n < 1) throw std::invalid_argument("explore_identify_then_commit: n must be >= 1");
    if (policies.empty()) throw std::invalid_argument("explore_identify_then_commit: empty policy set");
    RunStats stats;
    if (ts.size() == 1) return finish_run(env, ts.task(0), 0, false, stats);
    if (revealing_set.empty()) revealing_set = separation_report(ts).revealing_set;

    std::vector<Index> handles;
    for (const auto& p : policies) {
        if (!p.matches(ts.task(0))) throw InvalidModel("explore_identify_then_commit: policy shape mismatch");
        handles.push_back(env.add_policy(p));
    }
    PairSamples samples;
    for (const auto& sa : revealing_set) samples[sa];
    auto done = [&] {
        for (const auto& [sa, xs] : samples)
            if (xs.size() < n) return false;
        return true;
    };
    try {
        while (!done()) {
            for (Index h : handles) {
                for (int rep = 0; rep < 2 && !done(); ++rep) {
                    harvest(env.run_episode(h, Phase::identify), revealing_set, samples);
                    ++stats.explore_episodes;
                }
                if (done()) break;
            }
        }
    } catch (const BudgetExhausted&) {
        return finish_run(env, ts.task(0), 0, true, stats);
    }
    const Index before = env.used();
    const Index survivor = offline_elimination(ts, revealing_set, samples, rng, &stats.tests);
    stats.identify_stage_episodes = env.used() - before;
    return finish_run(env, ts.task(survivor), survivor, false, stats);
}

}  // namespace ttr

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ttr/elimination.hpp"
#include "ttr/identification.hpp"
#include "ttr/instances.hpp"

using namespace ttr;

namespace {

std::vector<Index> draw(std::span<const double> p, Index n, Rng& rng) {
    std::discrete_distribution<Index> d(p.begin(), p.end());
    std::vector<Index> out(n);
    for (auto& x : out) x = d(rng);
    return out;
}

void check_trace_invariants(const RegretTrace& trace, Index H, double T) {
    REQUIRE(trace.size() == H);
    double prev = 0.0;
    for (Index h = 0; h < H; ++h) {
        const auto& row = trace.rows[h];
        CHECK(row.episode == h + 1);
        CHECK(row.instant_regret >= 0.0);
        CHECK(row.instant_regret <= T + 1e-12);
        CHECK(row.cumulative_regret >= prev - 1e-12);
        prev = row.cumulative_regret;
    }
    CHECK(trace.count(Phase::identify) + trace.count(Phase::truncated) + trace.count(Phase::commit) == H);
}

}  // namespace

TEST_CASE("likelihood ratio test edge cases") {
    const std::vector<double> p1 = {0.5, 0.5, 0.0}, p2 = {0.25, 0.25, 0.5};
    const std::vector<Index> none;
    CHECK(likelihood_ratio_test(p1, p2, none).keep == Keep::first);

    const std::vector<double> q = {0.5, 0.0, 0.5};
    auto v = likelihood_ratio_test(p1, q, std::vector<Index>{1, 2});
    CHECK(v.keep == Keep::first);
    CHECK(v.reason == VerdictReason::zero_probability);

    v = likelihood_ratio_test(p1, p2, std::vector<Index>{2});
    CHECK(v.keep == Keep::second);
    CHECK(v.reason == VerdictReason::zero_probability);

    v = likelihood_ratio_test(p1, p2, std::vector<Index>{0, 1});
    CHECK(v.keep == Keep::first);
    CHECK(v.log_ratio == doctest::Approx(2.0 * std::log(2.0)));

    v = likelihood_ratio_test(p1, p1, std::vector<Index>{0, 1, 1, 0});
    CHECK(v.keep == Keep::first);

    CHECK_THROWS_AS(likelihood_ratio_test(p1, p2, std::vector<Index>{3}), std::out_of_range);
}

TEST_CASE("sample counts") {
    // ceil(2 log(8000) / 0.5^4)
    CHECK(bandit_sample_count(4, 1000, 0.5) == 288);
    const double expect = std::log(11.0 * 4 * 4096 / 0.4);
    const double n = expect * expect * std::log(4.0 * 4096) / std::pow(0.4, 4);
    CHECK(identification_sample_count(11, 4, 4096, 0.4) == static_cast<Index>(std::ceil(n)));
    CHECK(identification_sample_count(11, 4, 4096, 0.4, 0.5) == static_cast<Index>(std::ceil(0.5 * n)));
}

TEST_CASE("elimination rarely removes the sampled model") {
    const std::vector<double> p1 = {0.5, 0.25, 0.25}, p2 = {0.25, 0.5, 0.25};
    const Index n = bandit_sample_count(4, 1000, 0.5);
    Rng rng(1);
    int wrong = 0;
    const int reps = 20000;
    for (int k = 0; k < reps; ++k) wrong += likelihood_ratio_test(p1, p2, draw(p1, n, rng)).keep != Keep::first;
    CHECK(static_cast<double>(wrong) / reps <= 1.0 / 4000.0);
}

TEST_CASE("sampling routine on a pair visited every episode") {
    // 0 -> 1 -> {2, 3}: (1, 0) is visited once per episode.
    std::vector<double> p(4 * 1 * 4, 0.0);
    p[0 * 4 + 1] = 1.0;
    p[1 * 4 + 2] = 0.3;
    p[1 * 4 + 3] = 0.7;
    p[2 * 4 + 2] = 1.0;
    p[3 * 4 + 3] = 1.0;
    const TabularMdp m(4, 1, 3, 0, p, std::vector<double>(4, 0.0));
    const TaskSet ts({m, m});
    SimulatedEnvironment env(m, 9, 100);
    const auto res = sampling_routine(env, ts, {0, 1}, {1, 0}, 17);
    CHECK(res.samples.size() == 17);
    CHECK(res.episodes_used == 17);
    CHECK(res.episode_policies.size() == 17);
    for (Index x : res.samples) CHECK((x == 2 || x == 3));
}

TEST_CASE("sampling routine on an unreachable pair exhausts the budget") {
    const auto m = oracle::deterministic_mdp(3, 1, 3, {1, 1, 2});
    const TaskSet ts({m});
    SimulatedEnvironment env(m, 1, 20);
    CHECK_THROWS_AS(sampling_routine(env, ts, {0}, {2, 0}, 1), BudgetExhausted);
    CHECK(env.used() == 20);
}

TEST_CASE("sampling routine episode bound on the lower-bound instance") {
    const Index M = 6, n = 30;
    const auto gen = make_lower_bound_instance(M, 4096, 0.4, 16);
    const LowerBoundLayout L{M};
    std::vector<Index> all(M);
    std::iota(all.begin(), all.end(), Index{0});
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        SimulatedEnvironment env(gen.task_set.task(seed % M), seed, 100000);
        total += static_cast<double>(sampling_routine(env, gen.task_set, all, {L.right(3), L.a1}, n).episodes_used);
    }
    CHECK(total / 100.0 <= 2.0 * M * n);
}

TEST_CASE("identify then commit") {
    std::mt19937_64 g(3);
    const auto m = oracle::random_mdp(3, 2, 4, g);
    {
        const TaskSet one({m});
        SimulatedEnvironment env(m, 1, 50);
        Rng rng(1);
        const auto run = identify_then_commit(env, one, 10, rng);
        CHECK(run.identified_task == 0);
        CHECK(run.episodes_identify == 0);
        CHECK(run.trace.total() == doctest::Approx(0.0).epsilon(1e-12));
        check_trace_invariants(run.trace, 50, 4.0);
    }
    const auto gen = make_lower_bound_instance(4, 4096, 0.4);
    const auto& ts = gen.task_set;
    int success = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Index truth = seed % 4;
        SimulatedEnvironment env(ts.task(truth), seed, 4096);
        Rng rng(seed + 100);
        const auto run = identify_then_commit(env, ts, 300, rng);
        check_trace_invariants(run.trace, 4096, static_cast<double>(ts.horizon()));
        CHECK_FALSE(run.truncated);
        CHECK(run.stats.tests == 3);
        if (run.identified_task == truth) {
            ++success;
            for (Index h = run.episodes_identify; h < 4096; ++h) CHECK(run.trace.rows[h].instant_regret == 0.0);
        }
    }
    CHECK(success >= 38);
}

TEST_CASE("truncation commits to the lowest survivor and tags the identify episodes") {
    const auto gen = make_lower_bound_instance(4, 100, 0.4);
    SimulatedEnvironment env(gen.task_set.task(2), 1, 100);
    Rng rng(1);
    const auto run = identify_then_commit(env, gen.task_set, 1000, rng);
    CHECK(run.truncated);
    CHECK(run.identified_task == 0);
    CHECK(run.trace.count(Phase::truncated) == 100);
    CHECK(run.trace.count(Phase::identify) == 0);
    check_trace_invariants(run.trace, 100, static_cast<double>(gen.task_set.horizon()));
}

TEST_CASE("pair order does not change the survivor on noise-free instances") {
    // Deterministic next states: any single sample decides a test.
    const Index M = 5;
    std::vector<TabularMdp> tasks;
    for (Index i = 0; i < M; ++i) {
        std::vector<Index> next(2 + M, 0);
        next[0] = 1;  // state 0 -> 1
        for (Index s = 1; s < 2 + M; ++s) next[s] = s;
        next[1] = 2 + i;  // the revealing pair (1, 0)
        tasks.push_back(oracle::deterministic_mdp(2 + M, 1, 3, next));
    }
    const TaskSet ts(tasks);
    for (Index truth = 0; truth < M; ++truth)
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            SimulatedEnvironment env(ts.task(truth), seed, 200);
            Rng rng(seed);
            CHECK(identify_then_commit(env, ts, 1, rng).identified_task == truth);
        }
}

TEST_CASE("identify-phase policies are min-hitting policies with the pair action forced") {
    const auto gen = make_lower_bound_instance(4, 1000, 0.4);
    const auto& ts = gen.task_set;
    SimulatedEnvironment env(ts.task(1), 5, 1000);
    Rng rng(5);
    const auto run = identify_then_commit(env, ts, 20, rng);
    std::vector<Policy> expected;
    for (Index t = 0; t < ts.size(); ++t)
        for (Index u = 0; u < ts.size(); ++u) {
            if (t == u) continue;
            const auto sa = ts.best_pair(t, u);
            for (Index c = 0; c < ts.size(); ++c)
                expected.push_back(with_forced_action(
                    min_hitting_policy(ts.task(c), HittingTarget::of_state(sa.state)).policy, sa));
        }
    for (Index h = 0; h < run.episodes_identify; ++h) {
        const auto& dp = run.policy_pool[run.per_episode_policies[h]];
        REQUIRE(std::holds_alternative<Policy>(dp));
        CHECK(std::find(expected.begin(), expected.end(), std::get<Policy>(dp)) != expected.end());
    }
}

TEST_CASE("double identify then commit") {
    const auto gen = make_clustered_instance(4, 5, 0.4, 0, 0, 3);
    const auto& ts = gen.task_set;
    const auto& cs = *gen.metadata.clusters;
    int success = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Index truth = (seed * 7) % ts.size();
        SimulatedEnvironment env(ts.task(truth), seed, 20000);
        Rng rng(seed);
        const auto run = double_identify_then_commit(env, ts, cs, 300, 300, rng);
        check_trace_invariants(run.trace, 20000, static_cast<double>(ts.horizon()));
        success += run.identified_task == truth;
    }
    CHECK(success >= 19);

    // One cluster: phase one is skipped and the result equals plain elimination.
    std::vector<Index> all(ts.size());
    std::iota(all.begin(), all.end(), Index{0});
    const ClusterStructure one({all}, ts.size());
    SimulatedEnvironment a(ts.task(6), 4, 5000), b(ts.task(6), 4, 5000);
    Rng ra(8), rb(8);
    std::uniform_int_distribution<Index> pick(0, all.size() - 1);
    pick(rb);  // the representative draw
    const auto d = double_identify_then_commit(a, ts, one, 100, 100, ra);
    const auto f = identify_then_commit(b, ts, 100, rb);
    CHECK(d.identified_task == f.identified_task);
    CHECK(d.episodes_identify == f.episodes_identify);
}

TEST_CASE("phase-one tests rarely drop the true cluster") {
    const auto gen = make_clustered_instance(2, 3, 0.4, 0, 0, 1);
    const auto& ts = gen.task_set;
    const auto& cs = *gen.metadata.clusters;
    const Index H = 200;
    const Index n = bandit_sample_count(2, H, 0.4);
    int wrong = 0;
    const int reps = 2000;
    for (int k = 0; k < reps; ++k) {
        const Index truth = k % ts.size();
        SimulatedEnvironment env(ts.task(truth), k, 100000);
        Rng rng(k);
        // One inner sample each keeps the cost in phase one.
        const auto run = double_identify_then_commit(env, ts, cs, n, 1, rng);
        wrong += cs.cluster_of(run.identified_task) != cs.cluster_of(truth);
    }
    CHECK(static_cast<double>(wrong) / reps <= 1.0 / (2.0 * H));
}

TEST_CASE("tree identify then commit") {
    {
        std::vector<Index> next = {1, 2, 2};
        auto a = oracle::deterministic_mdp(3, 1, 4, next);
        auto bp = a.transitions();
        bp[1 * 3 + 2] = 0.0;
        bp[1 * 3 + 0] = 1.0;
        const TaskSet two({a, TabularMdp(3, 1, 4, 0, bp, a.rewards())});
        SimulatedEnvironment env(two.task(1), 1, 100);
        Rng rng(1);
        const auto run = tree_identify_then_commit(env, two, 1.0, 0.5, 5, rng);
        CHECK(run.stats.split_rounds == 1);
        CHECK(run.identified_task == 1);
    }
    const auto gen = make_tree_instance(16, 0.5, 0.4, 0, 2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Index truth = seed % 16;
        SimulatedEnvironment env(gen.task_set.task(truth), seed, 20000);
        Rng rng(seed);
        const auto run = tree_identify_then_commit(env, gen.task_set, 0.4, 0.5, 1000, rng);
        CHECK(run.stats.split_rounds <= 4);
        CHECK(run.identified_task == truth);
        check_trace_invariants(run.trace, 20000, static_cast<double>(gen.task_set.horizon()));
    }
}

TEST_CASE("tree depth grows by one round when M doubles") {
    double rounds8 = 0, rounds16 = 0, ep8 = 0, ep16 = 0;
    const Index n = 100;
    const auto g8 = make_tree_instance(8, 0.5, 0.4, 0, 1), g16 = make_tree_instance(16, 0.5, 0.4, 0, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SimulatedEnvironment e8(g8.task_set.task(seed % 8), seed, 10000), e16(g16.task_set.task(seed % 16), seed, 10000);
        Rng r8(seed), r16(seed);
        const auto a = tree_identify_then_commit(e8, g8.task_set, 0.4, 0.5, n, r8);
        const auto b = tree_identify_then_commit(e16, g16.task_set, 0.4, 0.5, n, r16);
        rounds8 += a.stats.split_rounds;
        rounds16 += b.stats.split_rounds;
        ep8 += a.episodes_identify;
        ep16 += b.episodes_identify;
    }
    CHECK((rounds16 - rounds8) / 20.0 == doctest::Approx(1.0));
    CHECK((ep16 - ep8) / 20.0 <= 2.0 * n);
}

TEST_CASE("explore identify then commit") {
    const auto gen = make_revealing_instance(16, 2, 0.4, 0, 5);
    const auto& ts = gen.task_set;
    const Index n = 1000;
    double explore = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Index truth = (seed * 5) % 16;
        SimulatedEnvironment env(ts.task(truth), seed, 20000);
        Rng rng(seed);
        const auto run =
            explore_identify_then_commit(env, ts, gen.metadata.revealing_policies, n, rng, gen.metadata.revealing_pairs);
        CHECK(run.stats.identify_stage_episodes == 0);
        CHECK(run.episodes_identify == run.stats.explore_episodes);
        CHECK(run.identified_task == truth);
        explore += static_cast<double>(run.stats.explore_episodes);
    }
    CHECK(explore / 20.0 <= 2.0 * 2.0 * n);
}

TEST_CASE("a single policy covering every pair needs about two n episodes") {
    // Every pair lies on the one corridor, so each episode yields one sample per pair.
    const std::vector<double> p = {0, 1, 0, 0, 0, 0, 0.5, 0.5, 0, 0, 1, 0, 0, 0, 0, 1};
    std::vector<double> q = p;
    q[1 * 4 + 2] = 0.1;
    q[1 * 4 + 3] = 0.9;
    const TaskSet ts({TabularMdp(4, 1, 4, 0, p, std::vector<double>(4, 0.0)),
                      TabularMdp(4, 1, 4, 0, q, std::vector<double>(4, 0.0))});
    SimulatedEnvironment env(ts.task(1), 3, 1000);
    Rng rng(3);
    const auto run = explore_identify_then_commit(env, ts, {Policy::uniform(4, 4, 1)}, 50, rng);
    CHECK(run.stats.explore_episodes == 50);
    CHECK(run.identified_task == 1);
}

#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "ttr/experiment.hpp"

using namespace ttr;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.instance.family = "lower_bound";
    cfg.instance.M = 4;
    cfg.algorithm.name = "itc";
    cfg.algorithm.n = 60;
    cfg.H = 1500;
    cfg.seeds = {1, 2, 3, 4, 5, 6};
    return cfg;
}

RegretTrace flat_trace(std::vector<double> cumulative) {
    RegretTrace t;
    double prev = 0.0;
    for (Index h = 0; h < cumulative.size(); ++h) {
        t.rows.push_back({h + 1, Phase::identify, cumulative[h] - prev, cumulative[h]});
        prev = cumulative[h];
    }
    return t;
}

}  // namespace

TEST_CASE("config parsing") {
    const json ok = {{"instance", {{"family", "lower_bound"}, {"M", 6}}},
                     {"algorithm", {{"name", "itc"}, {"c", 0.5}}},
                     {"H", 2000},
                     {"test_task", 3},
                     {"seeds", {1, 2}}};
    const auto cfg = config_from_json(ok);
    CHECK(cfg.instance.M == 6);
    CHECK(cfg.algorithm.c == 0.5);
    CHECK(cfg.test_mode == TestTaskMode::fixed);
    CHECK(cfg.test_index == 3);
    const auto back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));

    auto bad = ok;
    bad["horizon"] = 5;
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = ok;
    bad["instance"]["lambada"] = 0.4;
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = ok;
    bad["test_task"] = "worst";
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = ok;
    bad["seeds"] = json::array();
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = ok;
    bad["algorithm"]["name"] = "bandit_itc";
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    bad = ok;
    bad["instance"]["lambda"] = 2.5;
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
}

TEST_CASE("aggregate") {
    const auto one = aggregate({flat_trace({0, 1, 3})});
    CHECK(one.mean == std::vector<double>{0, 1, 3});
    CHECK(one.stddev == std::vector<double>{0, 0, 0});
    const auto same = aggregate({flat_trace({1, 2}), flat_trace({1, 2})});
    CHECK(same.stddev == std::vector<double>{0, 0});
    const auto two = aggregate({flat_trace({0, 2}), flat_trace({2, 4})});
    CHECK(two.mean == std::vector<double>{1, 3});
    CHECK(two.stddev == std::vector<double>{1, 1});
    CHECK_THROWS_AS(aggregate({flat_trace({0, 1}), flat_trace({0})}), std::invalid_argument);
}

TEST_CASE("assumption checks") {
    const auto lb = make_lower_bound_instance(4, 1000, 0.4);
    CHECK_NOTHROW(check_assumptions("itc", lb.task_set, lb.metadata, 0.4, 0.5));
    CHECK_THROWS_AS(check_assumptions("itc", lb.task_set, lb.metadata, 0.6, 0.5), AssumptionViolation);
    CHECK_THROWS_AS(check_assumptions("ditc", lb.task_set, lb.metadata, 0.4, 0.5), AssumptionViolation);
    const auto cl = make_clustered_instance(2, 3, 0.4, 0, 0, 1);
    CHECK_NOTHROW(check_assumptions("ditc", cl.task_set, cl.metadata, 0.4, 0.5));
    const auto rv = make_revealing_instance(8, 2, 0.4, 0, 1);
    CHECK_NOTHROW(check_assumptions("eitc", rv.task_set, rv.metadata, 0.4, 0.5));
}

TEST_CASE("experiment runs account for every episode") {
    const auto cfg = small_config();
    const auto res = run_experiment(cfg);
    REQUIRE(res.runs.size() == cfg.seeds.size());
    for (const auto& r : res.runs) {
        CHECK(r.trace.size() == cfg.H);
        CHECK(r.identify_episodes + r.commit_episodes == cfg.H);
        CHECK(r.final_regret == doctest::Approx(r.trace.total()));
        if (r.success)
            for (const auto& row : r.trace.rows)
                if (row.phase == Phase::commit) CHECK(row.instant_regret == 0.0);
    }
    CHECK(res.summary.runs == cfg.seeds.size());
    CHECK(res.summary.curves.mean.size() == cfg.H);
    CHECK(res.summary.regret_q10 <= res.summary.regret_q50);
    CHECK(res.summary.regret_q50 <= res.summary.regret_q90);
}

TEST_CASE("experiments are reproducible") {
    auto cfg = small_config();
    const auto a = trace_csv(run_experiment(cfg).runs);
    cfg.workers = 3;
    const auto b = trace_csv(run_experiment(cfg).runs);
    CHECK(a == b);
    cfg.seeds = {7, 8};
    CHECK(trace_csv(run_experiment(cfg).runs) != a);
}

TEST_CASE("failed assumptions stop the run unless forced") {
    auto cfg = small_config();
    cfg.instance.lambda = 0.4;
    cfg.algorithm.name = "ditc";
    CHECK_THROWS_AS(run_experiment(cfg), AssumptionViolation);
}

TEST_CASE("identification regret does not grow with the horizon for a fixed sample count") {
    auto cfg = small_config();
    cfg.instance.family = "revealing";
    const auto short_run = run_experiment(cfg);
    cfg.H *= 2;
    const auto long_run = run_experiment(cfg);
    for (Index k = 0; k < cfg.seeds.size(); ++k)
        if (short_run.runs[k].success && long_run.runs[k].success)
            CHECK(long_run.runs[k].final_regret == doctest::Approx(short_run.runs[k].final_regret));
    CHECK(long_run.summary.mean_regret <= 1.05 * short_run.summary.mean_regret + 1e-9);
}

TEST_CASE("monte carlo returns match exact evaluation") {
    std::mt19937_64 g(21);
    const auto m = oracle::random_mdp(4, 3, 5, g);
    const auto pi = Policy::uniform(5, 4, 3);
    Rng rng(4);
    std::vector<double> returns;
    for (int k = 0; k < 20000; ++k) {
        double r = 0.0;
        for (const auto& st : simulate_episode(m, pi, rng).steps) r += st.reward;
        returns.push_back(r);
    }
    CHECK(std::abs(oracle::mean(returns) - evaluate_policy(m, pi)) <= 3 * oracle::standard_error(returns));
}

TEST_CASE("experiment output files") {
    const auto dir = std::filesystem::temp_directory_path() / "ttr_experiment_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    auto cfg = small_config();
    cfg.seeds = {1, 2};
    cfg.output = (dir / "out.csv").string();
    run_experiment(cfg);
    CHECK(std::filesystem::exists(dir / "out.csv"));
    const auto summary = read_json_file(dir / "out.summary.json");
    CHECK(summary.contains("config"));
    std::filesystem::remove_all(dir);
}

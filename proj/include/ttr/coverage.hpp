#pragma once

#include <vector>

#include "ttr/environment.hpp"
#include "ttr/identification.hpp"
#include "ttr/task_set.hpp"

namespace ttr {

inline constexpr Index kMaxCoveragePairs = 12;

struct CoverageGameOptions {
    Index max_iterations = 500;
    double step = 0.1;        // multiplicative-weights step on normalised losses
    double target_gap = 0.05;
    Index best_response_passes = 4;
};

struct CoverageGameResult {
    CoveragePolicy policy;
    double value = 0.0;        // exact min over tasks of expected pairs covered
    double upper_bound = 0.0;  // best mixture best-response value seen
    Index iterations = 0;
};

/// Approximate max-min policy for the number of `uncovered` pairs visited in
/// one episode: best responses over (step, state, coverage mask) against a
/// multiplicative-weights mixture over tasks. Throws std::invalid_argument when
/// more than kMaxCoveragePairs pairs are given.
CoverageGameResult solve_coverage_game(const TaskSet& ts, const std::vector<StateAction>& uncovered,
                                       const CoverageGameOptions& opts = {});

CoveragePolicy coverage_game_policy(const TaskSet& ts, const std::vector<StateAction>& uncovered);

/// Exact expected number of `cp.pairs` visited in one episode of `mdp`.
double expected_coverage(const TabularMdp& mdp, const CoveragePolicy& cp);

struct RevealingSamplingResult {
    PairSamples samples;
    Index episodes = 0;
    Index first_cover_episodes = 0;  // episodes until every pair was seen once
    Index rounds = 0;
};

/// Deploys coverage-game policies against the live task, shrinking the
/// uncovered set after each trajectory, and repeats rounds until every pair
/// holds at least n samples. Propagates BudgetExhausted.
RevealingSamplingResult revealing_policies_sampling(SimulatedEnvironment& env, const TaskSet& ts, Index n,
                                                    std::vector<StateAction> revealing_set = {});

/// Explore stage driven by revealing_policies_sampling instead of given policies.
AlgorithmRun explore_identify_then_commit_adaptive(SimulatedEnvironment& env, const TaskSet& ts, Index n, Rng& rng);

}  // namespace ttr

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttr/bandit.hpp"
#include "ttr/environment.hpp"
#include "ttr/instances.hpp"
#include "ttr/serialization.hpp"

namespace ttr {

/// Raised when an instance fails the structural checks its algorithm needs.
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct InstanceSpec {
    std::string family = "lower_bound";  // lower_bound | clustered | tree | revealing | random | bandit
    Index M = 4;
    Index K = 2;
    Index N = 3;
    Index I = 2;
    Index S = 4;
    Index A = 2;
    Index T = 0;  // 0: the family default
    Index S_extra = 0;
    double lambda = 0.4;
    double beta = 0.5;
    std::optional<std::uint64_t> seed;  // fixed instance seed; otherwise derived per run seed
};

struct AlgorithmSpec {
    std::string name = "itc";  // itc | ditc | tree_itc | eitc | eitc_adaptive | bandit_itc
    double c = 1.0;
    Index n = 0;  // 0: from the sample-count formula
    Index n_cluster = 0;
    Index n_inner = 0;
};

enum class TestTaskMode { fixed, random, sweep };

struct ExperimentConfig {
    std::string name = "run";
    InstanceSpec instance;
    AlgorithmSpec algorithm;
    Index H = 1000;
    TestTaskMode test_mode = TestTaskMode::random;
    Index test_index = 0;
    std::vector<std::uint64_t> seeds;
    std::string output;  // trace CSV path; empty: no file
    bool force = false;
    Index workers = 1;
};

/// Structural checks an algorithm needs; throws AssumptionViolation naming the
/// first failure. `algorithm` is one of the MDP algorithm names.
void check_assumptions(const std::string& algorithm, const TaskSet& ts, const InstanceMetadata& meta, double lambda,
                       double beta);
void check_bandit_assumptions(const std::vector<BanditTask>& tasks, double lambda);

/// Rejects unknown keys and out-of-range values with ConfigError.
ExperimentConfig config_from_json(const json& j);
json config_to_json(const ExperimentConfig& cfg);

struct RunRecord {
    std::string run_id;
    std::uint64_t seed = 0;
    Index test_task = 0;
    Index identified_task = 0;
    bool success = false;
    Index identify_episodes = 0;
    Index commit_episodes = 0;
    double final_regret = 0.0;
    bool truncated = false;
    RunStats stats;
    RegretTrace trace;
};

struct Curves {
    std::vector<double> mean;
    std::vector<double> stddev;
};

/// Pointwise mean and standard deviation of cumulative regret. Throws on
/// ragged traces.
Curves aggregate(const std::vector<RegretTrace>& traces);

struct Summary {
    Index runs = 0;
    double mean_regret = 0.0;
    double std_regret = 0.0;
    double regret_q10 = 0.0;  // per-seed quantiles of cumulative regret
    double regret_q50 = 0.0;
    double regret_q90 = 0.0;
    double success_rate = 0.0;
    double mean_identify_episodes = 0.0;
    Index truncated_runs = 0;
    Index n = 0;        // samples per test (phase-1 count for ditc)
    Index n_inner = 0;  // ditc only
    Curves curves;
    std::vector<RunRecord> per_seed;  // one row per seed; the worst test task in sweep mode
};

Summary summarize(const std::vector<RunRecord>& per_seed, std::vector<RegretTrace> traces, Index n, Index n_inner);

struct ExperimentResult {
    Summary summary;
    std::vector<RunRecord> runs;  // every (seed, test task) run, in seed order
};

/// Builds each seed's instance, checks assumptions (unless cfg.force), runs the
/// algorithm against a simulated test task and evaluates regret exactly.
/// Writes the trace CSV and a summary JSON beside it when cfg.output is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string trace_csv(const std::vector<RunRecord>& runs);
json summary_to_json(const ExperimentConfig& cfg, const Summary& s);

struct SweepGrid {
    std::vector<Index> M;
    std::vector<Index> H;
    std::vector<double> lambda;
    std::vector<std::string> algorithm;
};

struct SweepEntry {
    ExperimentConfig config;
    Summary summary;
};

/// Cartesian product over the non-empty grid axes; each cell writes its own
/// trace CSV into `out_dir` and a combined sweep.csv is written there too.
std::vector<SweepEntry> run_sweep(const ExperimentConfig& base, const SweepGrid& grid, const std::string& out_dir);

}  // namespace ttr

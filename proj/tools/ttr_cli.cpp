#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ttr/bpi_bound.hpp"
#include "ttr/experiment.hpp"
#include "ttr/report.hpp"
#include "ttr/serialization.hpp"

namespace fs = std::filesystem;
using namespace ttr;

namespace {

constexpr int kExitAssumption = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitTruncated = 3;

fs::path sidecar_path(const fs::path& task_set) {
    auto p = task_set;
    p.replace_extension(".meta.json");
    return p;
}

int cmd_gen(const InstanceSpec& spec, Index H, const std::string& out) {
    const std::uint64_t seed = spec.seed.value_or(0);
    json meta;
    std::string body;
    if (spec.family == "bandit") {
        const auto inst = make_bandit_lower_bound_instance(spec.M, H, spec.lambda);
        body = bandit_tasks_to_json(inst.tasks).dump(2);
        const auto& p = inst.params;
        meta = {{"family", "bandit"}, {"lambda", p.lambda}, {"M", p.M}, {"H", p.H}, {"mu_star", p.mu_star},
                {"delta1", p.delta1}, {"delta2", p.delta2}, {"gap", p.gap}};
    } else {
        GeneratorOutput g = [&] {
            if (spec.family == "lower_bound") return make_lower_bound_instance(spec.M, H, spec.lambda, spec.T);
            if (spec.family == "clustered")
                return make_clustered_instance(spec.K, spec.N, spec.lambda, spec.S_extra, spec.T, seed);
            if (spec.family == "tree") return make_tree_instance(spec.M, spec.beta, spec.lambda, spec.T, seed);
            if (spec.family == "revealing") return make_revealing_instance(spec.M, spec.I, spec.lambda, spec.T, seed);
            if (spec.family == "random")
                return make_random_separated_instance(spec.M, spec.S, spec.A, spec.T, spec.lambda, seed);
            throw ConfigError("unknown family '" + spec.family + "'");
        }();
        body = task_set_to_json(g.task_set).dump(2);
        meta = metadata_to_json(g.metadata);
    }
    write_file_atomic(out, body + "\n");
    write_file_atomic(sidecar_path(out), meta.dump(2) + "\n");
    std::cout << "wrote " << out << " and " << sidecar_path(out).string() << "\n";
    return 0;
}

int cmd_validate(const std::string& path, std::string meta_path, const std::string& algorithm,
                 std::optional<double> lambda_opt, double beta) {
    const json doc = read_json_file(path);
    if (meta_path.empty() && fs::exists(sidecar_path(path))) meta_path = sidecar_path(path).string();

    if (doc.contains("means")) {
        const auto tasks = bandit_tasks_from_json(doc);
        double lambda = lambda_opt.value_or(0.0);
        if (!lambda_opt && !meta_path.empty()) lambda = read_json_file(meta_path).at("lambda").get<double>();
        std::cout << "bandit tasks: " << tasks.size() << "\n";
        check_bandit_assumptions(tasks, lambda);
        std::cout << "separation at lambda=" << lambda << ": ok\n";
        return 0;
    }

    const TaskSet ts = task_set_from_json(doc);
    InstanceMetadata meta;
    if (!meta_path.empty()) meta = metadata_from_json(read_json_file(meta_path), ts.size());
    std::cout << "tasks: " << ts.size() << "  S=" << ts.num_states() << " A=" << ts.num_actions()
              << " T=" << ts.horizon() << "\n";
    if (ts.size() > 1) {
        const auto sep = separation_report(ts);
        std::cout << "separation lambda: " << format_double(sep.lambda) << "\n";
        std::cout << "revealing set size: " << sep.revealing_set.size() << "\n";
    }
    for (Index i = 0; i < ts.size(); ++i) {
        const auto r = check_reachability(ts.task(i));
        if (!r.ok)
            std::cout << "task " << i << ": reachability fails at state " << r.worst_state << " (expected hitting time "
                      << format_double(r.worst_value) << ")\n";
    }
    const double lambda = lambda_opt.value_or(meta_path.empty() ? 0.0 : meta.lambda);
    check_assumptions(algorithm, ts, meta, lambda, beta);
    std::cout << algorithm << " assumptions at lambda=" << lambda << ": ok\n";
    return 0;
}

int cmd_run(ExperimentConfig cfg, bool strict) {
    const auto res = run_experiment(cfg);
    const auto& s = res.summary;
    std::cout << "runs=" << s.runs << " n=" << s.n << " mean_regret=" << format_double(s.mean_regret)
              << " std_regret=" << format_double(s.std_regret) << " success_rate=" << format_double(s.success_rate)
              << " mean_identify_episodes=" << format_double(s.mean_identify_episodes)
              << " truncated_runs=" << s.truncated_runs << "\n";
    if (!cfg.output.empty()) std::cout << "trace: " << cfg.output << "\n";
    if (strict && s.truncated_runs > 0) {
        std::cerr << "budget truncation in " << s.truncated_runs << " run(s)\n";
        return kExitTruncated;
    }
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const SweepGrid& grid, const std::string& out_dir, bool strict) {
    const auto entries = run_sweep(cfg, grid, out_dir);
    Index truncated = 0;
    for (const auto& e : entries) {
        std::cout << e.config.name << ": mean_regret=" << format_double(e.summary.mean_regret)
                  << " success_rate=" << format_double(e.summary.success_rate)
                  << " mean_identify_episodes=" << format_double(e.summary.mean_identify_episodes) << "\n";
        truncated += e.summary.truncated_runs;
    }
    if (!out_dir.empty()) std::cout << "summary: " << (fs::path(out_dir) / "sweep.csv").string() << "\n";
    return strict && truncated > 0 ? kExitTruncated : 0;
}

int cmd_bound(const std::string& path, Index test_index, double delta) {
    const TaskSet ts = task_set_from_json(read_json_file(path));
    if (test_index >= ts.size()) throw ConfigError("--test-index out of range");
    if (has_optimal_policy_ties(ts.task(test_index)))
        std::cerr << "warning: the optimal policy of task " << test_index
                  << " is not unique; the bound assumes a unique optimum\n";
    const auto b = t_star(ts, test_index);
    std::cout << "t_star=" << format_double(b.t_star) << "\n";
    std::cout << "tau_lower(delta=" << delta << ")=" << format_double(b.tau_lower(delta)) << "\n";
    if (b.kl_capped)
        std::cout << "note: some KL divergences are infinite and were capped at " << kKlCap
                  << "; the true value is at least this large\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& files, const std::string& md_out, const std::string& svg_out) {
    std::vector<ReportGroup> groups;
    for (const auto& f : files) groups.push_back(summarize_group(fs::path(f).stem().string(), read_trace_csv(f)));
    const std::string table = markdown_table(groups);
    if (md_out.empty())
        std::cout << table;
    else
        write_file_atomic(md_out, table);
    if (!svg_out.empty()) write_file_atomic(svg_out, regret_svg(groups));
    return 0;
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_json_file(path)); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Test-time regret minimisation laboratory"};
    app.require_subcommand(1);

    InstanceSpec spec;
    Index gen_H = 1000;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Generate an instance and its metadata sidecar");
    gen->add_option("--family", spec.family, "lower_bound|clustered|tree|revealing|random|bandit")
        ->check(CLI::IsMember({"lower_bound", "clustered", "tree", "revealing", "random", "bandit"}));
    gen->add_option("-M,--tasks", spec.M, "Number of tasks");
    gen->add_option("-K,--clusters", spec.K, "Clusters (clustered)");
    gen->add_option("-N,--cluster-size", spec.N, "Tasks per cluster (clustered)");
    gen->add_option("-I,--groups", spec.I, "Revealing policy groups (revealing)");
    gen->add_option("-S,--states", spec.S, "States (random)");
    gen->add_option("-A,--actions", spec.A, "Actions (random)");
    gen->add_option("-T,--horizon", spec.T, "Horizon; 0 picks the family default");
    gen->add_option("--extra-states", spec.S_extra, "Filler states per branch (clustered)");
    gen->add_option("--lambda", spec.lambda, "Separation level");
    gen->add_option("--beta", spec.beta, "Split balance (tree)");
    gen->add_option("-H,--episodes", gen_H, "Test-time budget (lower_bound, bandit)");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("-o,--out", gen_out, "Output task-set JSON")->required();

    std::string val_path, val_meta, val_algo = "itc", val_config;
    double val_lambda = 0.0, val_beta = 0.5;
    auto* validate = app.add_subcommand("validate", "Check a task set or config against an algorithm's assumptions");
    validate->add_option("--task-set", val_path, "Task-set JSON");
    validate->add_option("--meta", val_meta, "Metadata JSON (default: the .meta.json sidecar)");
    validate->add_option("--algorithm", val_algo, "itc|ditc|tree_itc|eitc|eitc_adaptive");
    auto* val_lambda_opt = validate->add_option("--lambda", val_lambda, "Separation level (default: from metadata)");
    validate->add_option("--beta", val_beta, "Split balance for tree_itc");
    validate->add_option("--config", val_config, "Experiment config; validates it and its first seed's instance");

    std::string run_config, run_output;
    Index run_workers = 0;
    bool run_force = false, run_strict = false;
    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("-c,--config", run_config, "Experiment config JSON")->required();
    run->add_option("-o,--output", run_output, "Trace CSV path (overrides the config)");
    run->add_option("-j,--workers", run_workers, "Worker threads (overrides the config)");
    run->add_flag("--force", run_force, "Skip assumption checks");
    run->add_flag("--strict", run_strict, "Exit 3 if any run hit the budget during identification");

    std::string sweep_config, sweep_dir;
    SweepGrid grid;
    Index sweep_workers = 0;
    bool sweep_force = false, sweep_strict = false;
    auto* sweep = app.add_subcommand("sweep", "Grid over M, H, lambda and algorithm");
    sweep->add_option("-c,--config", sweep_config, "Base experiment config JSON")->required();
    sweep->add_option("--M", grid.M, "Task counts")->delimiter(',');
    sweep->add_option("--H", grid.H, "Budgets")->delimiter(',');
    sweep->add_option("--lambda", grid.lambda, "Separation levels")->delimiter(',');
    sweep->add_option("--algorithm", grid.algorithm, "Algorithms")->delimiter(',');
    sweep->add_option("-d,--out-dir", sweep_dir, "Directory for traces and sweep.csv")->required();
    sweep->add_option("-j,--workers", sweep_workers, "Worker threads (overrides the config)");
    sweep->add_flag("--force", sweep_force, "Skip assumption checks");
    sweep->add_flag("--strict", sweep_strict, "Exit 3 if any run hit the budget during identification");

    std::string bound_path;
    Index bound_index = 0;
    double bound_delta = 0.05;
    auto* bound = app.add_subcommand("bound", "Best-policy-identification lower bound for one test task");
    bound->add_option("--task-set", bound_path, "Task-set JSON")->required();
    bound->add_option("--test-index", bound_index, "Test task index");
    bound->add_option("--delta", bound_delta, "Confidence level")->check(CLI::Range(1e-300, 0.41));

    std::vector<std::string> report_files;
    std::string report_md, report_svg;
    auto* report = app.add_subcommand("report", "Summarise trace CSVs as a markdown table and SVG curves");
    report->add_option("traces", report_files, "Trace CSV files")->required();
    report->add_option("--markdown", report_md, "Markdown output (default: stdout)");
    report->add_option("--svg", report_svg, "SVG output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*gen) {
            if (gen->count("--seed")) spec.seed = gen_seed;
            return cmd_gen(spec, gen_H, gen_out);
        }
        if (*validate) {
            if (!val_config.empty()) {
                auto cfg = load_config(val_config);
                cfg.seeds.resize(1);
                cfg.H = std::max<Index>(cfg.H, 1);
                cfg.output.clear();
                // A one-seed dry run builds the instance and applies the checks.
                cfg.force = false;
                if (cfg.test_mode == TestTaskMode::sweep) cfg.test_mode = TestTaskMode::random;
                run_experiment(cfg);
                std::cout << "config ok\n";
                return 0;
            }
            if (val_path.empty()) throw ConfigError("validate needs --task-set or --config");
            return cmd_validate(val_path, val_meta, val_algo,
                                val_lambda_opt->count() ? std::optional<double>(val_lambda) : std::nullopt, val_beta);
        }
        if (*run) {
            auto cfg = load_config(run_config);
            if (!run_output.empty()) cfg.output = run_output;
            if (run_workers > 0) cfg.workers = run_workers;
            cfg.force = cfg.force || run_force;
            return cmd_run(cfg, run_strict);
        }
        if (*sweep) {
            auto cfg = load_config(sweep_config);
            if (sweep_workers > 0) cfg.workers = sweep_workers;
            cfg.force = cfg.force || sweep_force;
            return cmd_sweep(cfg, grid, sweep_dir, sweep_strict);
        }
        if (*bound) return cmd_bound(bound_path, bound_index, bound_delta);
        if (*report) return cmd_report(report_files, report_md, report_svg);
    } catch (const AssumptionViolation& e) {
        std::cerr << "assumption check failed: " << e.what() << "\n";
        return kExitAssumption;
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const FormatError& e) {
        std::cerr << "malformed input: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const InfeasibleInstance& e) {
        std::cerr << "infeasible instance: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return 0;
}

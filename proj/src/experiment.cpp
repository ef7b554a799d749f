#include "ttr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ttr/bandit.hpp"
#include "ttr/coverage.hpp"
#include "ttr/distribution.hpp"
#include "ttr/elimination.hpp"
#include "ttr/identification.hpp"
#include "ttr/instances.hpp"
#include "ttr/seeding.hpp"

namespace ttr {

namespace {

const std::set<std::string> kFamilies = {"lower_bound", "clustered", "tree", "revealing", "random", "bandit"};
const std::set<std::string> kAlgorithms = {"itc", "ditc", "tree_itc", "eitc", "eitc_adaptive", "bandit_itc"};

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

InstanceSpec instance_from_json(const json& j) {
    reject_unknown(j, {"family", "M", "K", "N", "I", "S", "A", "T", "S_extra", "lambda", "beta", "seed"}, "instance");
    InstanceSpec s;
    read(j, "family", s.family, "instance");
    read(j, "M", s.M, "instance");
    read(j, "K", s.K, "instance");
    read(j, "N", s.N, "instance");
    read(j, "I", s.I, "instance");
    read(j, "S", s.S, "instance");
    read(j, "A", s.A, "instance");
    read(j, "T", s.T, "instance");
    read(j, "S_extra", s.S_extra, "instance");
    read(j, "lambda", s.lambda, "instance");
    read(j, "beta", s.beta, "instance");
    if (j.contains("seed")) {
        std::uint64_t seed = 0;
        read(j, "seed", seed, "instance");
        s.seed = seed;
    }
    if (!kFamilies.count(s.family)) throw ConfigError("instance.family: unknown family '" + s.family + "'");
    if (!(s.lambda > 0.0 && s.lambda <= 2.0)) throw ConfigError("instance.lambda must lie in (0, 2]");
    if (!(s.beta >= 0.5 && s.beta < 1.0)) throw ConfigError("instance.beta must lie in [1/2, 1)");
    return s;
}

AlgorithmSpec algorithm_from_json(const json& j) {
    reject_unknown(j, {"name", "c", "n", "n_cluster", "n_inner"}, "algorithm");
    AlgorithmSpec a;
    read(j, "name", a.name, "algorithm");
    read(j, "c", a.c, "algorithm");
    read(j, "n", a.n, "algorithm");
    read(j, "n_cluster", a.n_cluster, "algorithm");
    read(j, "n_inner", a.n_inner, "algorithm");
    if (!kAlgorithms.count(a.name)) throw ConfigError("algorithm.name: unknown algorithm '" + a.name + "'");
    if (!(a.c > 0.0)) throw ConfigError("algorithm.c must be positive");
    return a;
}

void check_pairing(const ExperimentConfig& cfg) {
    const bool bandit_family = cfg.instance.family == "bandit";
    const bool bandit_algo = cfg.algorithm.name == "bandit_itc";
    if (bandit_family != bandit_algo) throw ConfigError("bandit_itc runs exactly on the bandit family");
}

struct Instance {
    std::optional<GeneratorOutput> mdp;
    std::optional<BanditInstance> bandit;

    Index size() const { return mdp ? mdp->task_set.size() : bandit->tasks.size(); }
};

Instance build_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto& s = cfg.instance;
    Instance inst;
    if (s.family == "lower_bound")
        inst.mdp = make_lower_bound_instance(s.M, cfg.H, s.lambda, s.T);
    else if (s.family == "clustered")
        inst.mdp = make_clustered_instance(s.K, s.N, s.lambda, s.S_extra, s.T, seed);
    else if (s.family == "tree")
        inst.mdp = make_tree_instance(s.M, s.beta, s.lambda, s.T, seed);
    else if (s.family == "revealing")
        inst.mdp = make_revealing_instance(s.M, s.I, s.lambda, s.T, seed);
    else if (s.family == "random")
        inst.mdp = make_random_separated_instance(s.M, s.S, s.A, s.T, s.lambda, seed);
    else
        inst.bandit = make_bandit_lower_bound_instance(s.M, cfg.H, s.lambda);
    return inst;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw AssumptionViolation(what);
}

void check_separation_and_reachability(const TaskSet& ts, double lambda) {
    if (ts.size() < 2) return;
    const auto rep = separation_report(ts);
    require(rep.lambda >= lambda - kSeparationSlack,
            "task set is only " + format_double(rep.lambda) + "-separated, below lambda");
    for (Index i = 0; i < ts.size(); ++i)
        require(check_reachability(ts.task(i)).ok, "task " + std::to_string(i) + " fails the reachability check");
}

void check_instance(const ExperimentConfig& cfg, const Instance& inst) {
    if (inst.bandit)
        check_bandit_assumptions(inst.bandit->tasks, cfg.instance.lambda);
    else
        check_assumptions(cfg.algorithm.name, inst.mdp->task_set, inst.mdp->metadata, cfg.instance.lambda,
                          cfg.instance.beta);
}

struct SampleCounts {
    Index n = 0;
    Index n_inner = 0;
};

SampleCounts sample_counts(const ExperimentConfig& cfg, const Instance& inst) {
    const auto& a = cfg.algorithm;
    const auto& s = cfg.instance;
    const double lambda = s.lambda;
    const Index H = cfg.H;
    if (a.name == "bandit_itc") return {a.n ? a.n : bandit_sample_count(inst.size(), H, lambda), 0};
    const Index S = inst.mdp->task_set.num_states();
    const double M = static_cast<double>(inst.size());
    if (a.name == "ditc") {
        const auto& cs = inst.mdp->metadata.clusters;
        const double K = cs ? static_cast<double>(cs->K()) : M;
        const double N = cs ? static_cast<double>(cs->N()) : M;
        return {a.n_cluster ? a.n_cluster : identification_sample_count(S, K, H, lambda, a.c),
                a.n_inner ? a.n_inner : identification_sample_count(S, N, H, lambda, a.c)};
    }
    if (a.name == "tree_itc") {
        const double depth = std::max(1.0, std::log(M) / std::log(1.0 / s.beta));
        return {a.n ? a.n : identification_sample_count(S, depth, H, lambda, a.c), 0};
    }
    return {a.n ? a.n : identification_sample_count(S, M, H, lambda, a.c), 0};
}

RunRecord run_one(const ExperimentConfig& cfg, const Instance& inst, const SampleCounts& counts, std::uint64_t seed,
                  Index test_task) {
    RunRecord rec;
    rec.run_id = cfg.name + "-s" + std::to_string(seed) + "-t" + std::to_string(test_task);
    rec.seed = seed;
    rec.test_task = test_task;
    const std::uint64_t env_seed = derive_seed(seed, Stream::environment, test_task);
    Rng rng(derive_seed(seed, Stream::algorithm, 0));
    const auto& name = cfg.algorithm.name;

    if (name == "bandit_itc") {
        BanditEnvironment env(inst.bandit->tasks[test_task], env_seed, cfg.H);
        const auto run = bandit_identify_then_commit(env, inst.bandit->tasks, cfg.instance.lambda, rng, counts.n);
        rec.identified_task = run.identified_task;
        rec.identify_episodes = run.pulls_identify;
        rec.truncated = run.truncated;
        rec.stats.tests = run.tests;
        rec.trace = run.trace;
    } else {
        const TaskSet& ts = inst.mdp->task_set;
        const auto& meta = inst.mdp->metadata;
        SimulatedEnvironment env(ts.task(test_task), env_seed, cfg.H);
        AlgorithmRun run;
        if (name == "itc")
            run = identify_then_commit(env, ts, counts.n, rng);
        else if (name == "ditc")
            run = double_identify_then_commit(env, ts, *meta.clusters, counts.n, counts.n_inner, rng);
        else if (name == "tree_itc")
            run = tree_identify_then_commit(env, ts, cfg.instance.lambda, cfg.instance.beta, counts.n, rng);
        else if (name == "eitc")
            run = explore_identify_then_commit(env, ts, meta.revealing_policies, counts.n, rng, meta.revealing_pairs);
        else
            run = explore_identify_then_commit_adaptive(env, ts, counts.n, rng);
        rec.identified_task = run.identified_task;
        rec.identify_episodes = run.episodes_identify;
        rec.truncated = run.truncated;
        rec.stats = run.stats;
        rec.trace = std::move(run.trace);
    }
    rec.success = rec.identified_task == test_task;
    rec.commit_episodes = rec.trace.count(Phase::commit);
    rec.final_regret = rec.trace.total();
    return rec;
}

template <typename Fn>
void parallel_for(Index count, Index workers, Fn fn) {
    workers = std::max<Index>(1, std::min(workers, count));
    if (workers == 1) {
        for (Index i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<Index> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (Index i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<Index>(std::floor(pos));
    const Index hi = std::min(lo + 1, static_cast<Index>(v.size() - 1));
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::string format_lambda(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

void check_bandit_assumptions(const std::vector<BanditTask>& tasks, double lambda) {
    validate_bandit_tasks(tasks);
    for (Index i = 0; i < tasks.size(); ++i)
        for (Index j = i + 1; j < tasks.size(); ++j) {
            double best = 0.0;
            for (Index a = 0; a < tasks[i].num_arms(); ++a)
                best = std::max(best, gaussian_l1(tasks[i].means[a], tasks[j].means[a]));
            require(best >= lambda - kSeparationSlack,
                    "bandit tasks " + std::to_string(i) + " and " + std::to_string(j) + " are not lambda-separated");
        }
}

void check_assumptions(const std::string& algorithm, const TaskSet& ts, const InstanceMetadata& meta, double lambda,
                       double beta) {
    if (!kAlgorithms.count(algorithm) || algorithm == "bandit_itc")
        throw ConfigError("unknown MDP algorithm '" + algorithm + "'");
    if (algorithm == "itc" || algorithm == "eitc_adaptive") {
        check_separation_and_reachability(ts, lambda);
    } else if (algorithm == "ditc") {
        require(meta.clusters.has_value(), "ditc needs a cluster structure");
        const auto rep = check_cluster_structure(ts, *meta.clusters, lambda);
        require(rep.ok(), "cluster assumption fails: " + rep.detail);
    } else if (algorithm == "tree_itc") {
        if (ts.size() < 2) return;
        std::vector<Index> all(ts.size());
        for (Index i = 0; i < ts.size(); ++i) all[i] = i;
        try {
            find_tree_split(ts, all, lambda, beta);
        } catch (const NoValidSplit& e) {
            throw AssumptionViolation(std::string("tree assumption fails: ") + e.what());
        }
    } else {
        require(!meta.revealing_policies.empty(), "eitc needs revealing policies");
        const auto rep = meta.revealing_pairs.empty()
                             ? check_revealing_policy_set(ts, meta.revealing_policies)
                             : check_revealing_policy_set(ts, meta.revealing_policies, meta.revealing_pairs);
        require(rep.ok, "revealing policies do not reach every revealing pair with probability 1/2");
    }
}

ExperimentConfig config_from_json(const json& j) {
    reject_unknown(j, {"name", "instance", "algorithm", "H", "test_task", "seeds", "output", "force", "workers"},
                   "config");
    ExperimentConfig cfg;
    read(j, "name", cfg.name, "config");
    if (j.contains("instance")) cfg.instance = instance_from_json(j.at("instance"));
    if (j.contains("algorithm")) cfg.algorithm = algorithm_from_json(j.at("algorithm"));
    read(j, "H", cfg.H, "config");
    if (j.contains("test_task")) {
        const auto& t = j.at("test_task");
        if (t.is_number_integer() && t.get<long long>() >= 0) {
            cfg.test_mode = TestTaskMode::fixed;
            cfg.test_index = t.get<Index>();
        } else if (t == "random") {
            cfg.test_mode = TestTaskMode::random;
        } else if (t == "sweep") {
            cfg.test_mode = TestTaskMode::sweep;
        } else {
            throw ConfigError("config.test_task: expected a task index, \"random\" or \"sweep\"");
        }
    }
    read(j, "seeds", cfg.seeds, "config");
    read(j, "output", cfg.output, "config");
    read(j, "force", cfg.force, "config");
    read(j, "workers", cfg.workers, "config");
    if (cfg.H < 1) throw ConfigError("config.H must be >= 1");
    if (cfg.seeds.empty()) throw ConfigError("config.seeds must be non-empty");
    if (cfg.workers < 1) throw ConfigError("config.workers must be >= 1");
    check_pairing(cfg);
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    const auto& s = cfg.instance;
    json inst = {{"family", s.family}, {"M", s.M}, {"K", s.K}, {"N", s.N}, {"I", s.I}, {"S", s.S}, {"A", s.A},
                 {"T", s.T}, {"S_extra", s.S_extra}, {"lambda", s.lambda}, {"beta", s.beta}};
    if (s.seed) inst["seed"] = *s.seed;
    const auto& a = cfg.algorithm;
    json algo = {{"name", a.name}, {"c", a.c}, {"n", a.n}, {"n_cluster", a.n_cluster}, {"n_inner", a.n_inner}};
    json test = cfg.test_mode == TestTaskMode::fixed ? json(cfg.test_index)
                                                     : json(cfg.test_mode == TestTaskMode::sweep ? "sweep" : "random");
    return {{"name", cfg.name}, {"instance", inst}, {"algorithm", algo}, {"H", cfg.H}, {"test_task", test},
            {"seeds", cfg.seeds}, {"output", cfg.output}, {"force", cfg.force}, {"workers", cfg.workers}};
}

Curves aggregate(const std::vector<RegretTrace>& traces) {
    Curves c;
    if (traces.empty()) return c;
    const Index H = traces.front().size();
    for (const auto& t : traces)
        if (t.size() != H) throw std::invalid_argument("aggregate: traces have different lengths");
    c.mean.assign(H, 0.0);
    c.stddev.assign(H, 0.0);
    const double k = static_cast<double>(traces.size());
    for (Index h = 0; h < H; ++h) {
        double sum = 0.0;
        for (const auto& t : traces) sum += t.rows[h].cumulative_regret;
        const double mean = sum / k;
        double sq = 0.0;
        for (const auto& t : traces) sq += (t.rows[h].cumulative_regret - mean) * (t.rows[h].cumulative_regret - mean);
        c.mean[h] = mean;
        c.stddev[h] = std::sqrt(sq / k);
    }
    return c;
}

Summary summarize(const std::vector<RunRecord>& per_seed, std::vector<RegretTrace> traces, Index n, Index n_inner) {
    Summary s;
    s.runs = per_seed.size();
    s.n = n;
    s.n_inner = n_inner;
    s.curves = aggregate(traces);
    if (per_seed.empty()) return s;
    std::vector<double> finals;
    double successes = 0.0, identify = 0.0;
    for (const auto& r : per_seed) {
        finals.push_back(r.final_regret);
        successes += r.success ? 1.0 : 0.0;
        identify += static_cast<double>(r.identify_episodes);
        if (r.truncated) ++s.truncated_runs;
    }
    const double k = static_cast<double>(per_seed.size());
    double sum = 0.0;
    for (double f : finals) sum += f;
    s.mean_regret = sum / k;
    double sq = 0.0;
    for (double f : finals) sq += (f - s.mean_regret) * (f - s.mean_regret);
    s.std_regret = std::sqrt(sq / k);
    s.regret_q10 = quantile(finals, 0.1);
    s.regret_q50 = quantile(finals, 0.5);
    s.regret_q90 = quantile(finals, 0.9);
    s.success_rate = successes / k;
    s.mean_identify_episodes = identify / k;
    s.per_seed = per_seed;
    for (auto& r : s.per_seed) r.trace.rows.clear();
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    check_pairing(cfg);
    if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (cfg.H < 1) throw ConfigError("H must be >= 1");

    // One instance per distinct instance seed; deterministic families share one.
    const bool seeded_family = cfg.instance.family != "lower_bound" && cfg.instance.family != "bandit";
    auto instance_seed = [&](std::uint64_t seed) -> std::uint64_t {
        if (cfg.instance.seed) return *cfg.instance.seed;
        return seeded_family ? derive_seed(seed, Stream::instance, 0) : 0;
    };
    std::vector<std::uint64_t> keys;
    for (auto seed : cfg.seeds) keys.push_back(instance_seed(seed));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<Instance> instances(keys.size());
    std::vector<SampleCounts> counts(keys.size());
    parallel_for(keys.size(), cfg.workers, [&](Index k) {
        instances[k] = build_instance(cfg, keys[k]);
        if (!cfg.force) check_instance(cfg, instances[k]);
        counts[k] = sample_counts(cfg, instances[k]);
    });
    auto slot = [&](std::uint64_t seed) {
        return static_cast<Index>(std::lower_bound(keys.begin(), keys.end(), instance_seed(seed)) - keys.begin());
    };

    struct Job {
        Index seed_index;
        Index test_task;
    };
    std::vector<Job> jobs;
    for (Index i = 0; i < cfg.seeds.size(); ++i) {
        const Index M = instances[slot(cfg.seeds[i])].size();
        switch (cfg.test_mode) {
            case TestTaskMode::fixed:
                if (cfg.test_index >= M) throw ConfigError("test_task index out of range");
                jobs.push_back({i, cfg.test_index});
                break;
            case TestTaskMode::random:
                jobs.push_back({i, static_cast<Index>(derive_seed(cfg.seeds[i], Stream::test_task, 0) % M)});
                break;
            case TestTaskMode::sweep:
                for (Index t = 0; t < M; ++t) jobs.push_back({i, t});
                break;
        }
    }

    ExperimentResult result;
    result.runs.resize(jobs.size());
    parallel_for(jobs.size(), cfg.workers, [&](Index j) {
        const std::uint64_t seed = cfg.seeds[jobs[j].seed_index];
        const Index k = slot(seed);
        result.runs[j] = run_one(cfg, instances[k], counts[k], seed, jobs[j].test_task);
    });

    std::vector<RunRecord> per_seed;
    std::vector<RegretTrace> traces;
    for (Index i = 0, j = 0; i < cfg.seeds.size(); ++i) {
        Index worst = j;
        for (; j < jobs.size() && jobs[j].seed_index == i; ++j)
            if (result.runs[j].final_regret > result.runs[worst].final_regret) worst = j;
        per_seed.push_back(result.runs[worst]);
        traces.push_back(result.runs[worst].trace);
    }
    const auto& first_counts = counts[slot(cfg.seeds.front())];
    result.summary = summarize(per_seed, std::move(traces), first_counts.n, first_counts.n_inner);

    if (!cfg.output.empty()) {
        const std::filesystem::path out(cfg.output);
        write_file_atomic(out, trace_csv(result.runs));
        auto summary_path = out;
        summary_path.replace_extension(".summary.json");
        write_file_atomic(summary_path, summary_to_json(cfg, result.summary).dump(2) + "\n");
    }
    return result;
}

std::string trace_csv(const std::vector<RunRecord>& runs) {
    std::string out = "run_id,seed,test_task,episode,phase,instant_regret,cumulative_regret\n";
    for (const auto& r : runs) {
        const std::string prefix = r.run_id + "," + std::to_string(r.seed) + "," + std::to_string(r.test_task) + ",";
        for (const auto& row : r.trace.rows) {
            out += prefix;
            out += std::to_string(row.episode);
            out += ',';
            out += phase_name(row.phase);
            out += ',';
            out += format_double(row.instant_regret);
            out += ',';
            out += format_double(row.cumulative_regret);
            out += '\n';
        }
    }
    return out;
}

json summary_to_json(const ExperimentConfig& cfg, const Summary& s) {
    json rows = json::array();
    for (const auto& r : s.per_seed)
        rows.push_back({{"run_id", r.run_id},
                        {"seed", r.seed},
                        {"test_task", r.test_task},
                        {"identified_task", r.identified_task},
                        {"success", r.success},
                        {"identify_episodes", r.identify_episodes},
                        {"commit_episodes", r.commit_episodes},
                        {"cumulative_regret", r.final_regret},
                        {"truncated", r.truncated},
                        {"tests", r.stats.tests},
                        {"split_rounds", r.stats.split_rounds},
                        {"explore_episodes", r.stats.explore_episodes},
                        {"identify_stage_episodes", r.stats.identify_stage_episodes}});
    json j = {{"config", config_to_json(cfg)},
              {"runs", s.runs},
              {"n", s.n},
              {"mean_regret", s.mean_regret},
              {"std_regret", s.std_regret},
              {"regret_quantiles", {{"q10", s.regret_q10}, {"q50", s.regret_q50}, {"q90", s.regret_q90}}},
              {"success_rate", s.success_rate},
              {"mean_identify_episodes", s.mean_identify_episodes},
              {"truncated_runs", s.truncated_runs},
              {"per_seed", rows}};
    if (cfg.algorithm.name == "ditc") j["n_inner"] = s.n_inner;
    return j;
}

std::vector<SweepEntry> run_sweep(const ExperimentConfig& base, const SweepGrid& grid, const std::string& out_dir) {
    const std::vector<Index> Ms = grid.M.empty() ? std::vector<Index>{base.instance.M} : grid.M;
    const std::vector<Index> Hs = grid.H.empty() ? std::vector<Index>{base.H} : grid.H;
    const std::vector<double> lambdas = grid.lambda.empty() ? std::vector<double>{base.instance.lambda} : grid.lambda;
    const std::vector<std::string> algos =
        grid.algorithm.empty() ? std::vector<std::string>{base.algorithm.name} : grid.algorithm;
    for (const auto& a : algos)
        if (!kAlgorithms.count(a)) throw ConfigError("sweep: unknown algorithm '" + a + "'");

    std::vector<SweepEntry> entries;
    std::string csv = "name,algorithm,M,H,lambda,runs,n,mean_regret,std_regret,regret_q50,success_rate,"
                      "mean_identify_episodes,truncated_runs,trace\n";
    for (const auto& algo : algos)
        for (Index M : Ms)
            for (Index H : Hs)
                for (double lambda : lambdas) {
                    ExperimentConfig cfg = base;
                    cfg.algorithm.name = algo;
                    cfg.instance.M = M;
                    cfg.H = H;
                    cfg.instance.lambda = lambda;
                    cfg.name = base.name + "_" + algo + "_M" + std::to_string(M) + "_H" + std::to_string(H) + "_l" +
                               format_lambda(lambda);
                    const std::string trace_name = cfg.name + ".csv";
                    cfg.output = out_dir.empty() ? std::string() : (std::filesystem::path(out_dir) / trace_name).string();
                    auto res = run_experiment(cfg);
                    const auto& s = res.summary;
                    csv += cfg.name + "," + algo + "," + std::to_string(M) + "," + std::to_string(H) + "," +
                           format_double(lambda) + "," + std::to_string(s.runs) + "," + std::to_string(s.n) + "," +
                           format_double(s.mean_regret) + "," + format_double(s.std_regret) + "," +
                           format_double(s.regret_q50) + "," + format_double(s.success_rate) + "," +
                           format_double(s.mean_identify_episodes) + "," + std::to_string(s.truncated_runs) + "," +
                           trace_name + "\n";
                    entries.push_back({cfg, std::move(res.summary)});
                }
    if (!out_dir.empty()) write_file_atomic(std::filesystem::path(out_dir) / "sweep.csv", csv);
    return entries;
}

}  // namespace ttr

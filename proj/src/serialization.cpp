#include "ttr/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ttr {

namespace {

template <typename T>
T get(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("field '") + key + "': " + e.what());
    }
}

json pair_to_json(StateAction sa) { return json::array({sa.state, sa.action}); }

StateAction pair_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw FormatError("state-action pair must be [state, action]");
    return {j[0].get<Index>(), j[1].get<Index>()};
}

}  // namespace

json mdp_to_json(const TabularMdp& mdp) {
    const Index S = mdp.num_states(), A = mdp.num_actions();
    json p = json::array(), r = json::array();
    for (Index s = 0; s < S; ++s) {
        json ps = json::array(), rs = json::array();
        for (Index a = 0; a < A; ++a) {
            const auto row = mdp.row(s, a);
            ps.push_back(std::vector<double>(row.begin(), row.end()));
            rs.push_back(mdp.reward(s, a));
        }
        p.push_back(std::move(ps));
        r.push_back(std::move(rs));
    }
    return {{"S", S}, {"A", A}, {"T", mdp.horizon()}, {"s1", mdp.initial_state()}, {"p", p}, {"r", r}};
}

TabularMdp mdp_from_json(const json& j) {
    const auto S = get<Index>(j, "S"), A = get<Index>(j, "A"), T = get<Index>(j, "T"), s1 = get<Index>(j, "s1");
    const auto p = get<std::vector<std::vector<std::vector<double>>>>(j, "p");
    const auto r = get<std::vector<std::vector<double>>>(j, "r");
    if (p.size() != S || r.size() != S) throw FormatError("MDP document: p and r need S rows");
    std::vector<double> flat_p, flat_r;
    flat_p.reserve(S * A * S);
    for (Index s = 0; s < S; ++s) {
        if (p[s].size() != A || r[s].size() != A) throw FormatError("MDP document: every state needs A entries");
        for (Index a = 0; a < A; ++a) {
            if (p[s][a].size() != S) throw FormatError("MDP document: transition rows need S entries");
            flat_p.insert(flat_p.end(), p[s][a].begin(), p[s][a].end());
            flat_r.push_back(r[s][a]);
        }
    }
    return TabularMdp(S, A, T, s1, std::move(flat_p), std::move(flat_r));
}

json task_set_to_json(const TaskSet& ts) {
    json tasks = json::array();
    for (const auto& m : ts.tasks()) tasks.push_back(mdp_to_json(m));
    return {{"shape", {{"S", ts.num_states()}, {"A", ts.num_actions()}, {"T", ts.horizon()}, {"s1", ts.initial_state()}}},
            {"tasks", tasks}};
}

TaskSet task_set_from_json(const json& j) {
    const auto& shape = j.contains("shape") ? j.at("shape") : throw FormatError("missing field 'shape'");
    if (!j.contains("tasks") || !j.at("tasks").is_array()) throw FormatError("missing array 'tasks'");
    std::vector<TabularMdp> tasks;
    for (const auto& t : j.at("tasks")) tasks.push_back(mdp_from_json(t));
    TaskSet ts(std::move(tasks));
    if (get<Index>(shape, "S") != ts.num_states() || get<Index>(shape, "A") != ts.num_actions() ||
        get<Index>(shape, "T") != ts.horizon() || get<Index>(shape, "s1") != ts.initial_state())
        throw FormatError("task set document: shape disagrees with the tasks");
    return ts;
}

json policy_to_json(const Policy& p) {
    json j = {{"T", p.horizon()}, {"S", p.num_states()}, {"A", p.num_actions()}};
    if (p.is_deterministic()) {
        std::vector<Index> actions;
        for (Index t = 0; t < p.horizon(); ++t)
            for (Index s = 0; s < p.num_states(); ++s) actions.push_back(p.action(t, s));
        j["actions"] = actions;
    } else {
        j["probs"] = p.probabilities();
    }
    return j;
}

Policy policy_from_json(const json& j) {
    const auto T = get<Index>(j, "T"), S = get<Index>(j, "S"), A = get<Index>(j, "A");
    if (j.contains("actions")) return Policy::deterministic(T, S, A, get<std::vector<Index>>(j, "actions"));
    return Policy(T, S, A, get<std::vector<double>>(j, "probs"));
}

json metadata_to_json(const InstanceMetadata& m) {
    json j = {{"family", m.family}, {"lambda", m.lambda}, {"seed", m.seed}};
    if (m.lower_bound) {
        const auto& lb = *m.lower_bound;
        j["lower_bound"] = {{"M", lb.M}, {"H", lb.H}, {"lambda", lb.lambda}, {"delta1", lb.delta1},
                            {"delta2", lb.delta2}, {"T", lb.T}};
    }
    if (m.clusters) {
        j["clusters"] = m.clusters->partition();
        j["cluster_size_bound"] = m.clusters->N();
    }
    if (!m.tree.empty()) {
        json nodes = json::array();
        for (const auto& n : m.tree)
            nodes.push_back({{"tasks", n.tasks}, {"pair", pair_to_json(n.pair)}, {"d_plus", n.d_plus},
                             {"d_minus", n.d_minus}});
        j["tree"] = nodes;
        j["beta"] = m.beta;
        j["tree_depth"] = m.tree_depth;
    }
    if (!m.revealing_policies.empty()) {
        json ps = json::array();
        for (const auto& p : m.revealing_policies) ps.push_back(policy_to_json(p));
        j["revealing_policies"] = ps;
    }
    json pairs = json::array();
    for (const auto& sa : m.revealing_pairs) pairs.push_back(pair_to_json(sa));
    j["revealing_pairs"] = pairs;
    return j;
}

InstanceMetadata metadata_from_json(const json& j, Index num_tasks) {
    InstanceMetadata m;
    m.family = get<std::string>(j, "family");
    m.lambda = get<double>(j, "lambda");
    if (j.contains("seed")) m.seed = get<std::uint64_t>(j, "seed");
    if (j.contains("lower_bound")) {
        const auto& lb = j.at("lower_bound");
        m.lower_bound = LowerBoundParams{get<Index>(lb, "M"),         get<Index>(lb, "H"),
                                         get<double>(lb, "lambda"),   get<double>(lb, "delta1"),
                                         get<double>(lb, "delta2"),   get<Index>(lb, "T")};
    }
    if (j.contains("clusters"))
        m.clusters = ClusterStructure(get<std::vector<std::vector<Index>>>(j, "clusters"), num_tasks,
                                      j.value("cluster_size_bound", Index{0}));
    if (j.contains("tree")) {
        for (const auto& n : j.at("tree"))
            m.tree.push_back({get<std::vector<Index>>(n, "tasks"), pair_from_json(n.at("pair")),
                              get<std::vector<Index>>(n, "d_plus"), get<std::vector<Index>>(n, "d_minus")});
        m.beta = get<double>(j, "beta");
        m.tree_depth = get<Index>(j, "tree_depth");
    }
    if (j.contains("revealing_policies"))
        for (const auto& p : j.at("revealing_policies")) m.revealing_policies.push_back(policy_from_json(p));
    if (j.contains("revealing_pairs"))
        for (const auto& p : j.at("revealing_pairs")) m.revealing_pairs.push_back(pair_from_json(p));
    return m;
}

json bandit_tasks_to_json(const std::vector<BanditTask>& tasks) {
    json means = json::array();
    for (const auto& t : tasks) means.push_back(t.means);
    return {{"means", means}};
}

std::vector<BanditTask> bandit_tasks_from_json(const json& j) {
    std::vector<BanditTask> tasks;
    for (auto& m : get<std::vector<std::vector<double>>>(j, "means")) tasks.push_back({std::move(m)});
    validate_bandit_tasks(tasks);
    return tasks;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace ttr

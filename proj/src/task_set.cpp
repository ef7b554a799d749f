#include "ttr/task_set.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "ttr/distribution.hpp"

namespace ttr {

TaskSet::TaskSet(std::vector<TabularMdp> tasks) : tasks_(std::move(tasks)) {
    if (tasks_.empty()) throw InvalidModel("TaskSet: empty task list");
    for (const auto& m : tasks_)
        if (!m.same_shape(tasks_.front())) throw InvalidModel("TaskSet: tasks do not share S, A, T, s1");
    const Index M = tasks_.size(), S = num_states(), A = num_actions();
    best_.assign(M * M, {StateAction{}, 0.0});
    for (Index i = 0; i < M; ++i) {
        for (Index j = i + 1; j < M; ++j) {
            std::pair<StateAction, double> best{StateAction{}, -1.0};
            for (Index s = 0; s < S; ++s)
                for (Index a = 0; a < A; ++a) {
                    const double d = l1_distance(tasks_[i].row(s, a), tasks_[j].row(s, a));
                    if (d > best.second) best = {StateAction{s, a}, d};
                }
            best_[i * M + j] = best;
            best_[j * M + i] = best;
        }
    }
}

double TaskSet::l1(Index i, Index j, StateAction sa) const {
    return l1_distance(tasks_.at(i).row(sa), tasks_.at(j).row(sa));
}

std::vector<StateAction> greedy_revealing_set(const TaskSet& ts, double level) {
    const Index M = ts.size(), S = ts.num_states(), A = ts.num_actions();
    const double threshold = level - kSeparationSlack;
    struct Candidate {
        StateAction sa;
        std::vector<Index> covered;  // flat pair ids i * M + j
    };
    std::vector<Candidate> candidates;
    for (Index s = 0; s < S; ++s)
        for (Index a = 0; a < A; ++a) {
            Candidate c{{s, a}, {}};
            for (Index i = 0; i < M; ++i)
                for (Index j = i + 1; j < M; ++j)
                    if (ts.l1(i, j, c.sa) >= threshold) c.covered.push_back(i * M + j);
            if (!c.covered.empty()) candidates.push_back(std::move(c));
        }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& x, const Candidate& y) { return x.covered.size() > y.covered.size(); });
    std::vector<char> done(M * M, 0);
    Index remaining = M * (M - 1) / 2;
    std::vector<StateAction> chosen;
    for (const auto& c : candidates) {
        if (remaining == 0) break;
        Index fresh = 0;
        for (Index id : c.covered)
            if (!done[id]) {
                done[id] = 1;
                ++fresh;
            }
        if (fresh > 0) {
            chosen.push_back(c.sa);
            remaining -= fresh;
        }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

SeparationReport separation_report(const TaskSet& ts) {
    if (ts.size() < 2) throw std::invalid_argument("separation_report: needs at least two tasks");
    SeparationReport rep;
    rep.lambda = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ts.size(); ++i)
        for (Index j = i + 1; j < ts.size(); ++j) {
            rep.revealing_pair[{i, j}] = {ts.best_pair(i, j), ts.max_l1(i, j)};
            rep.lambda = std::min(rep.lambda, ts.max_l1(i, j));
        }
    rep.revealing_set = greedy_revealing_set(ts, rep.lambda);
    return rep;
}

const HittingPlan& HittingPolicyCache::get(Index task, HittingTarget target) {
    const Index action_key = target.action ? *target.action : std::numeric_limits<Index>::max();
    const auto key = std::make_tuple(task, target.state, action_key);
    auto it = plans_.find(key);
    if (it == plans_.end()) it = plans_.emplace(key, min_hitting_policy(ts_->task(task), target)).first;
    return it->second;
}

ReachabilityReport check_reachability(const TabularMdp& mdp) {
    ReachabilityReport rep;
    const double limit = static_cast<double>(mdp.horizon()) / 2.0;
    rep.per_state.resize(mdp.num_states());
    rep.worst_value = -1.0;
    for (Index s = 0; s < mdp.num_states(); ++s) {
        const double v = min_hitting_policy(mdp, HittingTarget::of_state(s)).expected_hitting_time;
        rep.per_state[s] = v;
        if (v > rep.worst_value) {
            rep.worst_value = v;
            rep.worst_state = s;
        }
    }
    rep.ok = rep.worst_value <= limit;
    return rep;
}

ClusterStructure::ClusterStructure(std::vector<std::vector<Index>> partition, Index num_tasks, Index size_bound)
    : partition_(std::move(partition)), owner_(num_tasks, std::numeric_limits<Index>::max()), size_bound_(size_bound) {
    for (Index k = 0; k < partition_.size(); ++k) {
        if (partition_[k].empty()) throw std::invalid_argument("ClusterStructure: empty cluster");
        for (Index t : partition_[k]) {
            if (t >= num_tasks) throw std::invalid_argument("ClusterStructure: task index out of range");
            if (owner_[t] != std::numeric_limits<Index>::max())
                throw std::invalid_argument("ClusterStructure: task listed in two clusters");
            owner_[t] = k;
        }
        max_size_ = std::max(max_size_, partition_[k].size());
    }
    for (Index o : owner_)
        if (o == std::numeric_limits<Index>::max()) throw std::invalid_argument("ClusterStructure: not a cover");
}

PairSeparation cluster_revealing_pair(const TaskSet& ts, const std::vector<Index>& cluster,
                                      const std::vector<Index>& outside) {
    PairSeparation best{{0, 0}, -1.0};
    for (Index s = 0; s < ts.num_states(); ++s)
        for (Index a = 0; a < ts.num_actions(); ++a) {
            double worst = std::numeric_limits<double>::infinity();
            for (Index i : cluster)
                for (Index j : outside) worst = std::min(worst, ts.l1(i, j, {s, a}));
            if (worst > best.l1) best = {{s, a}, worst};
        }
    return best;
}

ClusterReport check_cluster_structure(const TaskSet& ts, const ClusterStructure& cs, double lambda) {
    ClusterReport rep;
    if (cs.partition().empty() || cs.cluster_of(0) >= cs.K() || ts.size() != [&] {
            Index n = 0;
            for (const auto& c : cs.partition()) n += c.size();
            return n;
        }())
        throw std::invalid_argument("check_cluster_structure: cluster structure does not partition the task set");
    std::ostringstream detail;
    if (cs.K() < 2) {
        rep.applicable = false;
        rep.detail = "single cluster: cross-cluster separation not applicable";
        return rep;
    }
    rep.size_ok = cs.N() > cs.K();
    if (!rep.size_ok) detail << "N=" << cs.N() << " is not larger than K=" << cs.K() << "; ";

    rep.separation_ok = true;
    for (Index k = 0; k < cs.K(); ++k) {
        std::vector<Index> outside;
        for (Index t = 0; t < ts.size(); ++t)
            if (cs.cluster_of(t) != k) outside.push_back(t);
        const auto best = cluster_revealing_pair(ts, cs.partition()[k], outside);
        rep.cluster_pairs.push_back(best);
        if (best.l1 < lambda - kSeparationSlack) {
            rep.separation_ok = false;
            detail << "cluster " << k << " best cross-cluster l1 " << best.l1 << " < " << lambda << "; ";
        }
    }

    rep.reachability_ok = true;
    const double limit = static_cast<double>(ts.horizon()) / 2.0;
    for (Index k = 0; k < cs.K() && rep.reachability_ok; ++k) {
        for (Index i : cs.partition()[k]) {
            for (Index s = 0; s < ts.num_states(); ++s) {
                const auto target = HittingTarget::of_state(s);
                const auto plan = min_hitting_policy(ts.task(i), target);
                for (Index j : cs.partition()[k]) {
                    const double v = j == i ? plan.expected_hitting_time
                                            : expected_hitting_time(ts.task(j), plan.policy, target);
                    if (v > limit) {
                        rep.reachability_ok = false;
                        detail << "cluster " << k << ": hitting policy of task " << i << " for state " << s
                               << " needs " << v << " > T/2 on task " << j << "; ";
                        break;
                    }
                }
                if (!rep.reachability_ok) break;
            }
            if (!rep.reachability_ok) break;
        }
    }
    rep.detail = detail.str();
    return rep;
}

bool check_strong_reachability(const TaskSet& ts, const std::vector<Index>& subset, StateAction pair,
                               HittingPolicyCache* cache) {
    for (Index i : subset)
        if (i >= ts.size()) throw std::out_of_range("check_strong_reachability: task index out of range");
    if (pair.state >= ts.num_states() || pair.action >= ts.num_actions())
        throw std::out_of_range("check_strong_reachability: pair out of range");
    HittingPolicyCache local(ts);
    HittingPolicyCache& c = cache ? *cache : local;
    const double limit = static_cast<double>(ts.horizon()) / 2.0;
    const auto target = HittingTarget::of_pair(pair);
    for (Index i : subset) {
        const auto& plan = c.get(i, target);
        if (plan.expected_hitting_time > limit) return false;
        for (Index j : subset) {
            if (j == i) continue;
            if (expected_hitting_time(ts.task(j), plan.policy, target) > limit) return false;
        }
    }
    return true;
}

namespace {

struct UnionFind {
    std::vector<Index> parent;
    explicit UnionFind(Index n) : parent(n) { std::iota(parent.begin(), parent.end(), Index{0}); }
    Index find(Index x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

bool balanced(Index plus, Index minus, Index total, double beta) {
    if (plus == 0 || minus == 0) return false;
    return static_cast<double>(std::max(plus, minus)) <= beta * static_cast<double>(total) + 1e-12;
}

// Assigns components to sides; returns side flags per component or nothing.
std::optional<std::vector<char>> balanced_assignment(const std::vector<std::vector<Index>>& comps, Index total,
                                                     double beta) {
    const Index c = comps.size();
    std::vector<char> side(c, 0);
    Index plus = 0, minus = 0;
    for (Index k = 0; k < c; ++k) {
        if (plus <= minus) {
            side[k] = 1;
            plus += comps[k].size();
        } else {
            minus += comps[k].size();
        }
    }
    if (balanced(plus, minus, total, beta)) return side;
    if (c > 20) return std::nullopt;
    // exhaustive: most balanced feasible bipartition; component 0 fixed on the plus side
    std::optional<std::vector<char>> best;
    Index best_max = total + 1;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (c - 1)); ++mask) {
        Index p = comps[0].size(), m = 0;
        for (Index k = 1; k < c; ++k) ((mask >> (k - 1)) & 1 ? p : m) += comps[k].size();
        if (!balanced(p, m, total, beta) || std::max(p, m) >= best_max) continue;
        best_max = std::max(p, m);
        std::vector<char> s(c, 0);
        s[0] = 1;
        for (Index k = 1; k < c; ++k) s[k] = static_cast<char>((mask >> (k - 1)) & 1);
        best = std::move(s);
    }
    return best;
}

}  // namespace

TreeSplit find_tree_split(const TaskSet& ts, const std::vector<Index>& subset, double lambda, double beta,
                          HittingPolicyCache* cache) {
    if (subset.size() < 2) throw std::invalid_argument("find_tree_split: subset needs at least two tasks");
    if (!(beta >= 0.5 && beta < 1.0)) throw std::invalid_argument("find_tree_split: beta must lie in [1/2, 1)");
    HittingPolicyCache local(ts);
    HittingPolicyCache& hc = cache ? *cache : local;
    const Index D = subset.size();
    const double threshold = lambda - kSeparationSlack;

    std::optional<TreeSplit> best;
    for (Index s = 0; s < ts.num_states(); ++s) {
        for (Index a = 0; a < ts.num_actions(); ++a) {
            const StateAction sa{s, a};
            UnionFind uf(D);
            for (Index x = 0; x < D; ++x)
                for (Index y = x + 1; y < D; ++y)
                    if (ts.l1(subset[x], subset[y], sa) < threshold) uf.unite(x, y);
            std::map<Index, std::vector<Index>> groups;
            for (Index x = 0; x < D; ++x) groups[uf.find(x)].push_back(x);
            if (groups.size() < 2) continue;
            std::vector<std::vector<Index>> comps;
            for (auto& [root, members] : groups) comps.push_back(std::move(members));
            std::stable_sort(comps.begin(), comps.end(),
                             [](const auto& l, const auto& r) { return l.size() > r.size(); });
            const auto sides = balanced_assignment(comps, D, beta);
            if (!sides) continue;

            TreeSplit split;
            split.pair = sa;
            split.gap = std::numeric_limits<double>::infinity();
            for (Index k = 0; k < comps.size(); ++k)
                for (Index x : comps[k]) ((*sides)[k] ? split.d_plus : split.d_minus).push_back(subset[x]);
            std::sort(split.d_plus.begin(), split.d_plus.end());
            std::sort(split.d_minus.begin(), split.d_minus.end());
            for (Index i : split.d_plus)
                for (Index j : split.d_minus) {
                    const double d = ts.l1(i, j, sa);
                    if (d < split.gap) {
                        split.gap = d;
                        split.rep_plus = i;
                        split.rep_minus = j;
                    }
                }
            if (best && split.gap <= best->gap + 1e-12) continue;
            if (!check_strong_reachability(ts, subset, sa, &hc)) continue;
            best = std::move(split);
        }
    }
    if (!best) throw NoValidSplit("find_tree_split: no strongly reachable pair yields a balanced lambda-split");
    return *best;
}

bool validate_tree_split(const TaskSet& ts, const std::vector<Index>& subset, const TreeSplit& split,
                         double lambda, double beta) {
    std::set<Index> all(subset.begin(), subset.end());
    std::set<Index> plus(split.d_plus.begin(), split.d_plus.end());
    std::set<Index> minus(split.d_minus.begin(), split.d_minus.end());
    if (plus.size() != split.d_plus.size() || minus.size() != split.d_minus.size()) return false;
    for (Index i : plus)
        if (minus.count(i)) return false;
    std::set<Index> uni = plus;
    uni.insert(minus.begin(), minus.end());
    if (uni != all) return false;
    if (!balanced(plus.size(), minus.size(), all.size(), beta)) return false;
    if (split.gap < lambda - kSeparationSlack) return false;
    for (Index i : plus)
        for (Index j : minus)
            if (ts.l1(i, j, split.pair) < split.gap - 1e-12) return false;
    return check_strong_reachability(ts, subset, split.pair);
}

RevealingPolicyReport check_revealing_policy_set(const TaskSet& ts, const std::vector<Policy>& policies,
                                                 const std::vector<StateAction>& revealing_set) {
    if (policies.empty()) throw std::invalid_argument("check_revealing_policy_set: empty policy list");
    if (revealing_set.empty()) throw std::invalid_argument("check_revealing_policy_set: empty revealing set");
    RevealingPolicyReport rep;
    rep.revealing_set = revealing_set;
    rep.ok = true;
    for (Index i = 0; i < ts.size(); ++i) {
        RevealingCoverage cov{0, -1.0};
        for (Index k = 0; k < policies.size(); ++k) {
            double worst = 1.0;
            for (const auto& sa : revealing_set)
                worst = std::min(worst, reach_probability(ts.task(i), policies[k], HittingTarget::of_pair(sa)));
            if (worst > cov.min_reach_probability) cov = {k, worst};
        }
        rep.per_task.push_back(cov);
        if (cov.min_reach_probability < 0.5 - 1e-12) rep.ok = false;
    }
    return rep;
}

RevealingPolicyReport check_revealing_policy_set(const TaskSet& ts, const std::vector<Policy>& policies) {
    if (policies.empty()) throw std::invalid_argument("check_revealing_policy_set: empty policy list");
    return check_revealing_policy_set(ts, policies, separation_report(ts).revealing_set);
}

}  // namespace ttr

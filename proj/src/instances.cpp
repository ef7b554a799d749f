#include "ttr/instances.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "ttr/distribution.hpp"
#include "ttr/seeding.hpp"

namespace ttr {

namespace {

/// Dense builder for one task; all rows start empty and must be filled.
struct MdpBuilder {
    Index S, A;
    std::vector<double> p, r;

    MdpBuilder(Index S_, Index A_) : S(S_), A(A_), p(S_ * A_ * S_, 0.0), r(S_ * A_, 0.0) {}
    double& at(Index s, Index a, Index next) { return p[(s * A + a) * S + next]; }
    void go(Index s, Index a, Index next) { at(s, a, next) = 1.0; }
    void split(Index s, Index a, Index x, Index y, double q) {
        at(s, a, x) += q;
        at(s, a, y) += 1.0 - q;
    }
    void all_actions(Index s, Index next) {
        for (Index a = 0; a < A; ++a) go(s, a, next);
    }
    TabularMdp build(Index T, Index s1) { return TabularMdp(S, A, T, s1, std::move(p), std::move(r)); }
};

void random_rewards(MdpBuilder& b, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& x : b.r) x = u(rng);
}

void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda <= 2.0)) throw InfeasibleInstance("lambda must lie in (0, 2]");
}

Index ceil_log2(Index n) {
    Index b = 0;
    while ((Index{1} << b) < n) ++b;
    return b;
}

/// hub = 0, up = 1, down = 2, up fillers, down fillers, sink.
struct HubLayout {
    Index extra;
    Index hub() const { return 0; }
    Index up() const { return 1; }
    Index down() const { return 2; }
    Index up_filler(Index k) const { return 3 + k; }
    Index down_filler(Index k) const { return 3 + extra + k; }
    Index sink() const { return 3 + 2 * extra; }
    Index num_states() const { return 4 + 2 * extra; }
    Index min_horizon() const { return 2 * (extra + 3); }

    /// Fills every non-hub row plus the two deterministic hub actions.
    void wire(MdpBuilder& b, Index go_up, Index go_down) const {
        b.go(hub(), go_up, up());
        b.go(hub(), go_down, down());
        b.all_actions(up(), extra ? up_filler(0) : sink());
        b.all_actions(down(), extra ? down_filler(0) : sink());
        for (Index k = 0; k < extra; ++k) {
            b.all_actions(up_filler(k), k + 1 < extra ? up_filler(k + 1) : sink());
            b.all_actions(down_filler(k), k + 1 < extra ? down_filler(k + 1) : sink());
        }
        b.all_actions(sink(), sink());
    }
};

}  // namespace

LowerBoundParams LowerBoundParams::make(Index M, Index H, double lambda, Index T) {
    LowerBoundParams p;
    p.M = M;
    p.H = H;
    p.lambda = lambda;
    p.delta1 = H > 0 ? 1.0 / std::sqrt(static_cast<double>(H)) : 0.0;
    p.delta2 = H > 0 ? std::log(static_cast<double>(H)) / std::sqrt(static_cast<double>(H)) : 0.0;
    p.T = T == 0 ? 2 * (M + 2) + 1 : T;
    return p;
}

std::vector<Index> lower_bound_group_one(Index M, Index i) {
    std::vector<Index> g;
    for (Index k = 0; k < M / 2; ++k) g.push_back((i - 1 + k) % M + 1);
    std::sort(g.begin(), g.end());
    return g;
}

GeneratorOutput make_lower_bound_instance(Index M, Index H, double lambda, Index T) {
    if (M < 2) throw InfeasibleInstance("make_lower_bound_instance: M must be >= 2");
    if (H < 1 || H + 1 < M) throw InfeasibleInstance("make_lower_bound_instance: H must be >= max(1, M - 1)");
    check_lambda(lambda);
    const auto params = LowerBoundParams::make(M, H, lambda, T);
    if (params.T < M + 2) throw InfeasibleInstance("make_lower_bound_instance: T must be >= M + 2");
    if (lambda / 2.0 + params.delta2 > 1.0)
        throw InfeasibleInstance("make_lower_bound_instance: lambda / 2 + log(H) / sqrt(H) exceeds 1");

    const LowerBoundLayout L{M};
    std::vector<TabularMdp> tasks;
    for (Index i = 1; i <= M; ++i) {
        MdpBuilder b(L.num_states(), 2);
        b.go(L.s_in(), L.a1, L.left(1));
        b.go(L.s_in(), L.a2, L.right(1));
        std::vector<char> g1(M + 1, 0);
        for (Index x : lower_bound_group_one(M, i)) g1[x] = 1;
        for (Index j = 1; j <= M; ++j) {
            b.go(L.left(j), L.a2, L.left(std::min(j + 1, M)));
            b.split(L.left(j), L.a1, L.s_high(), L.s_low(), j == i ? 1.0 : 1.0 - params.delta1);
            b.go(L.right(j), L.a2, L.right(std::min(j + 1, M)));
            const double q = g1[j] ? 1.0 - params.delta2 : 1.0 - params.delta2 - lambda / 2.0;
            b.split(L.right(j), L.a1, L.s_high(), L.s_low(), q);
        }
        b.all_actions(L.s_high(), L.s_low());
        b.all_actions(L.s_low(), L.s_low());
        b.r[L.s_high() * 2 + L.a1] = 1.0;
        b.r[L.s_high() * 2 + L.a2] = 1.0;
        tasks.push_back(b.build(params.T, L.s_in()));
    }
    GeneratorOutput out{TaskSet(std::move(tasks)), {}};
    out.metadata.family = "lower_bound";
    out.metadata.lambda = lambda;
    out.metadata.lower_bound = params;
    for (Index x = 1; x <= M; ++x) out.metadata.revealing_pairs.push_back({L.right(x), L.a1});
    return out;
}

GeneratorOutput make_clustered_instance(Index K, Index N, double lambda, Index S_extra, Index T, std::uint64_t seed) {
    if (K < 2 || N < 2) throw InfeasibleInstance("make_clustered_instance: requires K >= 2 and N >= 2");
    check_lambda(lambda);
    const HubLayout hub{S_extra};
    if (T == 0) T = hub.min_horizon();
    if (T < hub.min_horizon()) throw InfeasibleInstance("make_clustered_instance: T too small for reachability");
    const Index bits = std::max<Index>(1, ceil_log2(N));
    const Index A = K + bits + 2;
    const Index go_up = K + bits, go_down = K + bits + 1;

    std::vector<TabularMdp> tasks;
    std::vector<std::vector<Index>> partition(K);
    for (Index k = 0; k < K; ++k) {
        for (Index m = 0; m < N; ++m) {
            const Index task = k * N + m;
            partition[k].push_back(task);
            MdpBuilder b(hub.num_states(), A);
            for (Index c = 0; c < K; ++c)
                b.split(hub.hub(), c, hub.up(), hub.down(), c == k ? 0.5 + lambda / 4.0 : 0.5 - lambda / 4.0);
            for (Index j = 0; j < bits; ++j)
                b.split(hub.hub(), K + j, hub.up(), hub.down(), (m >> j) & 1 ? 0.5 + lambda / 4.0 : 0.5 - lambda / 4.0);
            hub.wire(b, go_up, go_down);
            Rng rng(derive_seed(seed, Stream::instance, task));
            random_rewards(b, rng);
            tasks.push_back(b.build(T, hub.hub()));
        }
    }
    GeneratorOutput out{TaskSet(std::move(tasks)), {}};
    out.metadata.family = "clustered";
    out.metadata.lambda = lambda;
    out.metadata.seed = seed;
    out.metadata.clusters = ClusterStructure(std::move(partition), K * N, std::max(N, K + 1));
    for (Index a = 0; a < K + bits; ++a) out.metadata.revealing_pairs.push_back({hub.hub(), a});
    return out;
}

GeneratorOutput make_tree_instance(Index M, double beta, double lambda, Index T, std::uint64_t seed) {
    if (M < 2) throw InfeasibleInstance("make_tree_instance: M must be >= 2");
    if (!(beta >= 0.5 && beta < 1.0)) throw InfeasibleInstance("make_tree_instance: beta must lie in [1/2, 1)");
    check_lambda(lambda);
    const HubLayout hub{0};
    if (T == 0) T = hub.min_horizon();
    if (T < hub.min_horizon()) throw InfeasibleInstance("make_tree_instance: T too small for reachability");

    std::vector<TreeNodeMeta> nodes;
    Index depth = 0;
    std::function<void(Index, Index, Index)> grow = [&](Index lo, Index hi, Index level) {
        const Index size = hi - lo;
        if (size < 2) {
            depth = std::max(depth, level);
            return;
        }
        const Index mid = lo + (size + 1) / 2;
        if (static_cast<double>(mid - lo) > beta * static_cast<double>(size) + 1e-12)
            throw InfeasibleInstance("make_tree_instance: no split of size " + std::to_string(size) +
                                     " meets beta");
        TreeNodeMeta node;
        for (Index t = lo; t < hi; ++t) node.tasks.push_back(t);
        for (Index t = lo; t < mid; ++t) node.d_plus.push_back(t);
        for (Index t = mid; t < hi; ++t) node.d_minus.push_back(t);
        node.pair = {hub.hub(), nodes.size()};
        nodes.push_back(node);
        grow(lo, mid, level + 1);
        grow(mid, hi, level + 1);
    };
    grow(0, M, 0);

    const Index A = nodes.size() + 2;
    const Index go_up = nodes.size(), go_down = nodes.size() + 1;
    std::vector<TabularMdp> tasks;
    for (Index task = 0; task < M; ++task) {
        MdpBuilder b(hub.num_states(), A);
        for (const auto& node : nodes) {
            double q = 0.5;
            if (std::find(node.d_plus.begin(), node.d_plus.end(), task) != node.d_plus.end()) q += lambda / 4.0;
            if (std::find(node.d_minus.begin(), node.d_minus.end(), task) != node.d_minus.end()) q -= lambda / 4.0;
            b.split(hub.hub(), node.pair.action, hub.up(), hub.down(), q);
        }
        hub.wire(b, go_up, go_down);
        Rng rng(derive_seed(seed, Stream::instance, task));
        random_rewards(b, rng);
        tasks.push_back(b.build(T, hub.hub()));
    }
    GeneratorOutput out{TaskSet(std::move(tasks)), {}};
    out.metadata.family = "tree";
    out.metadata.lambda = lambda;
    out.metadata.seed = seed;
    out.metadata.beta = beta;
    out.metadata.tree_depth = depth;
    for (const auto& node : nodes) out.metadata.revealing_pairs.push_back(node.pair);
    out.metadata.tree = std::move(nodes);
    return out;
}

GeneratorOutput make_revealing_instance(Index M, Index I, double lambda, Index T, std::uint64_t seed) {
    if (M < 2) throw InfeasibleInstance("make_revealing_instance: M must be >= 2");
    if (I < 1 || I > M) throw InfeasibleInstance("make_revealing_instance: I must lie in [1, M]");
    check_lambda(lambda);
    const Index B = std::max<Index>(1, ceil_log2(M));
    const Index A = std::max<Index>(3, I);
    auto chain = [](Index j) { return 3 * j; };
    auto xs = [](Index j) { return 3 * j + 1; };
    auto ys = [](Index j) { return 3 * j + 2; };
    const Index end = 3 * B, dead = 3 * B + 1, root = 3 * B + 2, S = 3 * B + 3;
    const Index min_T = 4 * B + 4;
    if (T == 0) T = min_T;
    if (T < min_T) throw InfeasibleInstance("make_revealing_instance: T must be >= 4 * ceil(log2 M) + 4");

    std::vector<TabularMdp> tasks;
    for (Index task = 0; task < M; ++task) {
        const Index group = task % I;
        MdpBuilder b(S, A);
        for (Index a = 0; a < A; ++a) b.go(root, a, a == group ? chain(0) : dead);
        for (Index j = 0; j < B; ++j) {
            const double q = (task >> j) & 1 ? 0.5 + lambda / 4.0 : 0.5 - lambda / 4.0;
            b.split(chain(j), 0, xs(j), ys(j), q);
            b.go(chain(j), 2, ys(j));
            for (Index a = 1; a < A; ++a)
                if (a != 2) b.go(chain(j), a, xs(j));
            const Index next = j + 1 < B ? chain(j + 1) : end;
            b.all_actions(xs(j), next);
            b.all_actions(ys(j), next);
        }
        b.all_actions(end, end);
        b.all_actions(dead, dead);
        Rng rng(derive_seed(seed, Stream::instance, task));
        random_rewards(b, rng);
        tasks.push_back(b.build(T, root));
    }
    GeneratorOutput out{TaskSet(std::move(tasks)), {}};
    out.metadata.family = "revealing";
    out.metadata.lambda = lambda;
    out.metadata.seed = seed;
    for (Index g = 0; g < I; ++g) {
        std::vector<Index> actions(T * S, 0);
        for (Index t = 0; t < T; ++t) actions[t * S + root] = g;
        out.metadata.revealing_policies.push_back(Policy::deterministic(T, S, A, actions));
    }
    for (Index j = 0; j < B; ++j) out.metadata.revealing_pairs.push_back({chain(j), 0});
    return out;
}

GeneratorOutput make_random_separated_instance(Index M, Index S, Index A, Index T, double lambda, std::uint64_t seed) {
    if (M < 2) throw InfeasibleInstance("make_random_separated_instance: M must be >= 2");
    if (S < 2 || A < 1) throw InfeasibleInstance("make_random_separated_instance: need S >= 2 and A >= 1");
    if (T == 0) T = 4 * S;
    check_lambda(lambda);
    constexpr Index kMaxRepairs = 200;
    Rng rng(derive_seed(seed, Stream::instance, 0));
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<std::vector<double>> p(M, std::vector<double>(S * A * S));
    std::vector<std::vector<double>> r(M, std::vector<double>(S * A));
    for (Index i = 0; i < M; ++i) {
        for (Index k = 0; k < S * A; ++k) {
            double sum = 0.0;
            for (Index n = 0; n < S; ++n) sum += (p[i][k * S + n] = expo(rng));
            for (Index n = 0; n < S; ++n) p[i][k * S + n] /= sum;
        }
        for (auto& x : r[i]) x = unif(rng);
    }
    auto build = [&] {
        std::vector<TabularMdp> tasks;
        for (Index i = 0; i < M; ++i) tasks.emplace_back(S, A, T, 0, p[i], r[i]);
        return TaskSet(std::move(tasks));
    };

    for (Index attempt = 0;; ++attempt) {
        const TaskSet ts = build();
        Index wi = 0, wj = 1;
        double worst = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < M; ++i)
            for (Index j = i + 1; j < M; ++j)
                if (ts.max_l1(i, j) < worst) {
                    worst = ts.max_l1(i, j);
                    wi = i;
                    wj = j;
                }
        if (worst >= lambda - kSeparationSlack) break;
        if (attempt == kMaxRepairs)
            throw InfeasibleInstance("make_random_separated_instance: separation repair did not converge");
        const StateAction sa = ts.best_pair(wi, wj);
        const Index k = sa.state * A + sa.action;
        Index vertex = 0;
        double gap = -std::numeric_limits<double>::infinity();
        for (Index n = 0; n < S; ++n) {
            const double d = p[wi][k * S + n] - p[wj][k * S + n];
            if (d > gap) {
                gap = d;
                vertex = n;
            }
        }
        const double step = lambda / 2.0;
        double sum = 0.0;
        for (Index n = 0; n < S; ++n) {
            double& v = p[wi][k * S + n];
            v = (1.0 - step) * v + (n == vertex ? step : 0.0);
            sum += v;
        }
        for (Index n = 0; n < S; ++n) p[wi][k * S + n] /= sum;
    }

    GeneratorOutput out{build(), {}};
    for (Index i = 0; i < M; ++i)
        if (!check_reachability(out.task_set.task(i)).ok)
            throw InfeasibleInstance("make_random_separated_instance: task " + std::to_string(i) +
                                     " violates reachability; increase T");
    out.metadata.family = "random";
    out.metadata.lambda = lambda;
    out.metadata.seed = seed;
    out.metadata.revealing_pairs = greedy_revealing_set(out.task_set, lambda);
    return out;
}

}  // namespace ttr

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttr/task_set.hpp"

namespace ttr {

class InfeasibleInstance : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct LowerBoundParams {
    Index M = 0;
    Index H = 0;
    double lambda = 0.0;
    double delta1 = 0.0;  // 1 / sqrt(H)
    double delta2 = 0.0;  // log(H) / sqrt(H)
    Index T = 0;

    /// Fills delta1, delta2 and, when T == 0, the default horizon 2(M + 2) + 1.
    static LowerBoundParams make(Index M, Index H, double lambda, Index T = 0);
};

/// State and action indices of the lower-bound MDPs. Chain positions are 1-based.
struct LowerBoundLayout {
    Index M = 0;

    static constexpr Index a1 = 0;
    static constexpr Index a2 = 1;
    Index s_in() const { return 0; }
    Index left(Index j) const { return j; }       // s_j, j in [1, M]
    Index right(Index x) const { return M + x; }  // s_{M+x}, x in [1, M]
    Index s_high() const { return 2 * M + 1; }
    Index s_low() const { return 2 * M + 2; }
    Index num_states() const { return 2 * M + 3; }
};

/// Right-chain positions x in [1, M] forming the first group of task i (1-based).
std::vector<Index> lower_bound_group_one(Index M, Index i);

struct TreeNodeMeta {
    std::vector<Index> tasks;
    StateAction pair;
    std::vector<Index> d_plus;
    std::vector<Index> d_minus;
};

struct InstanceMetadata {
    std::string family;
    double lambda = 0.0;  // separation level the generator certifies
    std::optional<LowerBoundParams> lower_bound;
    std::optional<ClusterStructure> clusters;
    std::vector<TreeNodeMeta> tree;  // pre-order, root first
    double beta = 0.0;
    Index tree_depth = 0;
    std::vector<Policy> revealing_policies;
    std::vector<StateAction> revealing_pairs;
    std::uint64_t seed = 0;
};

struct GeneratorOutput {
    TaskSet task_set;
    InstanceMetadata metadata;
};

/// Throws InfeasibleInstance when T <= M + 1, H < M - 1 or lambda / 2 + delta2 > 1.
GeneratorOutput make_lower_bound_instance(Index M, Index H, double lambda, Index T = 0);

/// Hub layout: K signature probes and ceil(log2 N) bit probes at the initial
/// state, `S_extra` filler states on each branch. K clusters of N tasks; the
/// declared cluster-size bound is max(N, K + 1). Requires K, N >= 2.
GeneratorOutput make_clustered_instance(Index K, Index N, double lambda, Index S_extra, Index T, std::uint64_t seed);

/// Balanced halving tree with one probe action per internal node. Throws
/// InfeasibleInstance when a split cannot meet beta.
GeneratorOutput make_tree_instance(Index M, double beta, double lambda, Index T, std::uint64_t seed);

/// I groups of tasks behind root gates and one probe chain of bit pairs.
GeneratorOutput make_revealing_instance(Index M, Index I, double lambda, Index T, std::uint64_t seed);

/// Random MDPs repaired until lambda-separated; T = 0 means 4 S. Throws
/// InfeasibleInstance when a task fails reachability.
GeneratorOutput make_random_separated_instance(Index M, Index S, Index A, Index T, double lambda, std::uint64_t seed);

}  // namespace ttr

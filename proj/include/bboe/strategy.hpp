#pragma once

#include <optional>
#include <vector>

#include "bboe/bundle.hpp"
#include "bboe/types.hpp"
#include "bboe/world.hpp"

namespace bboe {

struct SelectionParams {
    double k_bias = 0.85;  ///< probability of popping the biased list
    int skip_n = 500;      ///< N: stride through the sorted neighborhood
    double theta = 0.5;    ///< neighborhood radius in the non-pose submetric
};

/// Neighborhood edges ordered ascending by the metric distance of their
/// transformed end state to a desired state; ties by edge id.
struct SortedNeighborhood {
    std::vector<int> ids;      ///< edge ids in sorted order
    std::vector<double> keys;  ///< the sort keys, parallel to ids
    State anchor;              ///< the x_near all edges were placed at
};

/// Positions selected by the skip rule: {0, N, 2N, ...} within [0, len),
/// plus the final index. Empty for len == 0.
std::vector<int> biased_indices(int len, int N);

SortedNeighborhood sort_by_goal_proximity(const EdgeBundle& bundle,
                                          const std::vector<int>& near_ids,
                                          const State& x_near,
                                          const State& x_des);

/// The skip-N subsample (edge ids in sorted order).
std::vector<int> biased_subset(const SortedNeighborhood& sorted, int N);

/// count distinct edges sampled uniformly from the full sorted list, in pick
/// order.
std::vector<int> random_subset(const SortedNeighborhood& sorted, int count,
                               Rng& rng);

struct PropOutcome {
    std::optional<EdgeInstance> instance;
    int attempts = 0;          ///< edges transformed and collision-checked
    bool random_branch = false;  ///< selection came from the randomized list
};

/// Reusable buffers for the propagation hot path.
struct PropScratch {
    std::vector<int> near;
    std::vector<double> keys;
    std::vector<int> order;
    std::vector<double> gx, gy, gh, ge, gs;
    EdgeInstance inst;
};

/// Selects the biased list with probability k_bias (else the randomized
/// list), pops it in order, and returns the first collision-free placement
/// of an edge at x_near; none once the list is exhausted or the
/// neighborhood is empty.
PropOutcome best_prop_using_edge_bundle(const EdgeBundle& bundle,
                                        const State& x_near,
                                        const State& x_des,
                                        const SelectionParams& params,
                                        const World& world, Rng& rng,
                                        PropScratch& scratch);

/// One uniformly chosen neighborhood edge, one collision check.
PropOutcome random_prop_using_edge_bundle(const EdgeBundle& bundle,
                                          const State& x_near, double theta,
                                          const World& world, Rng& rng,
                                          PropScratch& scratch);

}  // namespace bboe

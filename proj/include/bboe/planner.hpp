#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

#include "bboe/bundle.hpp"
#include "bboe/dynamics.hpp"
#include "bboe/spatial.hpp"
#include "bboe/strategy.hpp"
#include "bboe/types.hpp"
#include "bboe/world.hpp"

namespace bboe {

/// How a node was produced from its parent. Bundle edges re-materialize via
/// transform_edge; rollouts re-integrate (control, duration) at the parent —
/// either way instances are deterministic, so the tree stores only this
/// metadata instead of waypoint arrays.
struct IncomingEdge {
    enum class Kind { None, Bundle, Rollout };
    Kind kind = Kind::None;
    int bundle_edge_id = -1;
    Control control;
    double duration = 0.0;
};

struct TreeNode {
    State state;
    std::int32_t parent = -1;
    double cost_to_root = 0.0;
    IncomingEdge incoming;
};

enum class TreeDirection { Forward, Reverse };

class Tree {
public:
    Tree(const SystemSpec& spec, TreeDirection direction, const Interval& bx,
         const Interval& by, double cell_size = 1.0);

    int add_root(const State& s);
    int add_node(const State& s, int parent, const IncomingEdge& incoming,
                 double edge_cost);

    const TreeNode& node(int id) const {
        return nodes_[static_cast<std::size_t>(id)];
    }
    int size() const { return static_cast<int>(nodes_.size()); }
    TreeDirection direction() const { return direction_; }
    const GridIndex& index() const { return index_; }

private:
    std::vector<TreeNode> nodes_;
    GridIndex index_;
    TreeDirection direction_;
};

/// Min-priority queue over forward node ids keyed by g + d + h estimates.
/// Lazy deletion: stale heap entries are skipped at pop time; keys only ever
/// decrease while an id is live; popped ids may be re-inserted later.
/// Pop order is deterministic: (key, id) ascending.
class HeuristicQueue {
public:
    /// Inserts id, or lowers its key; larger keys are ignored. Returns
    /// whether the live key changed.
    bool insert_or_decrease(int id, double key);

    /// Smallest (key, id) live entry, removed from the queue.
    std::optional<std::pair<int, double>> pop();

    bool contains(int id) const { return live_.count(id) != 0; }
    std::optional<double> key_of(int id) const;
    std::size_t live_size() const { return live_.size(); }

private:
    struct Entry {
        double key;
        int id;
        std::uint64_t gen;
    };
    struct Order {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.key != b.key) return a.key > b.key;
            return a.id > b.id;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Order> heap_;
    std::unordered_map<int, std::pair<double, std::uint64_t>> live_;
    std::uint64_t gen_ = 0;
};

struct PlannerConfig {
    double delta_hr = 3.0;     ///< cap on the reverse-coupling radius
    double gamma = 8.0;        ///< shrinking-radius scale (scenario-specific;
                               ///< larger values pin r_k at delta_hr longer
                               ///< and cut stale-queue churn on small runs)
    double k_bias_exploit = 0.85;
    int skip_n = 500;
    double theta = 0.5;
    int exploit_ramp_iters = 500;
    double q_max = 0.9;
    long long max_iter = 2'000'000;
    double time_budget_s = 60.0;  ///< <= 0 disables the wall clock entirely
    std::uint64_t seed = 0;
    double grid_cell = 1.0;       ///< spatial-index cell size
};

/// r_k = min(gamma * (log(n_rev)/n_rev)^(1/(d+1)), delta_hr); n_rev <= 1
/// degenerates (log 1 = 0) and is clamped to delta_hr.
double shrinking_radius(int n_rev, int d, double gamma, double delta_hr);

/// Linear ramp: q_max * min(1, k / exploit_ramp_iters).
double exploitation_probability(long long k, const PlannerConfig& config);

/// Test instrumentation; all members optional.
struct PlannerHooks {
    std::function<void(int fwd_id, double key)> on_queue_set;  ///< accepted insert/decrease
    std::function<void(int fwd_id, double key)> on_pop;
    /// Fired with the materialized instance whenever a tree stores an edge.
    std::function<void(const EdgeInstance& inst)> on_forward_edge;
    std::function<void(const EdgeInstance& inst)> on_reverse_edge;
};

/// For every forward node within r_k of the new reverse node: offer key
/// g(x) + d_X(x, x_rev) + h(x_rev) (insert or decrease).
void update_priority_queue(const Tree& forward, const Tree& reverse,
                           int x_rev_id, double r_k, HeuristicQueue& queue,
                           std::vector<GridIndex::Hit>& scratch,
                           const PlannerHooks* hooks = nullptr);

/// Inserts the new forward node keyed by g + min over reverse nodes within
/// r_k of (d_X + h); no-op when none are in range.
void insert_to_priority_queue(const Tree& reverse, const Tree& forward,
                              int x_for_id, double r_k, HeuristicQueue& queue,
                              std::vector<GridIndex::Hit>& scratch,
                              const PlannerHooks* hooks = nullptr);

struct ReverseTarget {
    int id = -1;
    State state;
    double key = 0.0;  ///< g_pop + d_X + h at the argmin
};

/// Best exploitation target near x_pop: reverse node within r_k minimizing
/// g_pop + d_X + h; none when the neighborhood is empty.
std::optional<ReverseTarget> best_reverse_target(
    const Tree& reverse, const State& x_pop_state, double g_pop, double r_k,
    std::vector<GridIndex::Hit>& scratch);

struct Path {
    std::vector<EdgeInstance> instances;
    std::vector<State> states;  ///< node states, root first; instances + 1
    double total_cost = 0.0;
};

enum class Termination { Goal, MaxIterations, TimeBudget };

struct PlanStats {
    long long iterations = 0;
    long long prop_attempts = 0;
    int forward_nodes = 0;
    int reverse_nodes = 0;
    /// Randomized-list selections made by k_bias = 1 exploration calls
    /// (always 0; the biased branch is certain at k_bias = 1).
    long long exploration_random_branch_uses = 0;
    Termination termination = Termination::MaxIterations;
    double time_s = 0.0;
};

struct PlanResult {
    std::optional<Path> path;
    PlanStats stats;
    bool success() const { return path.has_value(); }
};

/// The bidirectional bundle search. Deterministic for a fixed seed when the
/// time budget is disabled. Throws std::invalid_argument if the start state
/// is in collision or its dimension does not match the bundle's system.
PlanResult plan_bboe(const PlannerConfig& config, const World& world,
                     const EdgeBundle& bundle,
                     const PlannerHooks* hooks = nullptr);

/// Root-to-goal walk with instances re-materialized from the stored edge
/// metadata. bundle may be null for trees built purely from rollouts.
Path extract_path(const SystemSpec& spec, const EdgeBundle* bundle, double dt,
                  const Tree& tree, int goal_id);

}  // namespace bboe

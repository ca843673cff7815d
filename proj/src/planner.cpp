#include "bboe/planner.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bboe {

Tree::Tree(const SystemSpec& spec, TreeDirection direction, const Interval& bx,
           const Interval& by, double cell_size)
    : index_(spec, bx, by, cell_size), direction_(direction) {}

int Tree::add_root(const State& s) {
    assert(nodes_.empty());
    nodes_.push_back(TreeNode{s, -1, 0.0, IncomingEdge{}});
    index_.insert(0, s);
    return 0;
}

int Tree::add_node(const State& s, int parent, const IncomingEdge& incoming,
                   double edge_cost) {
    assert(parent >= 0 && parent < size());
    const int id = size();
    nodes_.push_back(TreeNode{
        s, parent, node(parent).cost_to_root + edge_cost, incoming});
    index_.insert(id, s);
    return id;
}

bool HeuristicQueue::insert_or_decrease(int id, double key) {
    auto it = live_.find(id);
    if (it != live_.end() && key >= it->second.first) return false;
    const std::uint64_t gen = ++gen_;
    if (it != live_.end())
        it->second = {key, gen};
    else
        live_.emplace(id, std::make_pair(key, gen));
    heap_.push(Entry{key, id, gen});
    return true;
}

std::optional<std::pair<int, double>> HeuristicQueue::pop() {
    while (!heap_.empty()) {
        const Entry top = heap_.top();
        heap_.pop();
        auto it = live_.find(top.id);
        if (it == live_.end() || it->second.second != top.gen) continue;
        live_.erase(it);
        return std::make_pair(top.id, top.key);
    }
    return std::nullopt;
}

std::optional<double> HeuristicQueue::key_of(int id) const {
    auto it = live_.find(id);
    if (it == live_.end()) return std::nullopt;
    return it->second.first;
}

double shrinking_radius(int n_rev, int d, double gamma, double delta_hr) {
    assert(d >= 1);
    if (n_rev <= 1) return delta_hr;
    const double ratio = std::log(static_cast<double>(n_rev)) / n_rev;
    return std::min(gamma * std::pow(ratio, 1.0 / (d + 1)), delta_hr);
}

double exploitation_probability(long long k, const PlannerConfig& config) {
    const double frac =
        static_cast<double>(k) / static_cast<double>(config.exploit_ramp_iters);
    return config.q_max * std::min(1.0, frac);
}

void update_priority_queue(const Tree& forward, const Tree& reverse,
                           int x_rev_id, double r_k, HeuristicQueue& queue,
                           std::vector<GridIndex::Hit>& scratch,
                           const PlannerHooks* hooks) {
    const TreeNode& rev = reverse.node(x_rev_id);
    forward.index().radius(rev.state, r_k, scratch);
    for (const auto& hit : scratch) {
        const double key = forward.node(hit.id).cost_to_root + hit.dist +
                           rev.cost_to_root;
        if (queue.insert_or_decrease(hit.id, key) && hooks && hooks->on_queue_set)
            hooks->on_queue_set(hit.id, key);
    }
}

void insert_to_priority_queue(const Tree& reverse, const Tree& forward,
                              int x_for_id, double r_k, HeuristicQueue& queue,
                              std::vector<GridIndex::Hit>& scratch,
                              const PlannerHooks* hooks) {
    const TreeNode& fwd = forward.node(x_for_id);
    reverse.index().radius(fwd.state, r_k, scratch);
    if (scratch.empty()) return;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& hit : scratch)
        best = std::min(best, hit.dist + reverse.node(hit.id).cost_to_root);
    const double key = fwd.cost_to_root + best;
    if (queue.insert_or_decrease(x_for_id, key) && hooks && hooks->on_queue_set)
        hooks->on_queue_set(x_for_id, key);
}

std::optional<ReverseTarget> best_reverse_target(
    const Tree& reverse, const State& x_pop_state, double g_pop, double r_k,
    std::vector<GridIndex::Hit>& scratch) {
    reverse.index().radius(x_pop_state, r_k, scratch);
    if (scratch.empty()) return std::nullopt;
    ReverseTarget best;
    best.key = std::numeric_limits<double>::infinity();
    for (const auto& hit : scratch) {
        const double key = g_pop + hit.dist + reverse.node(hit.id).cost_to_root;
        if (key < best.key || (key == best.key && hit.id < best.id)) {
            best.key = key;
            best.id = hit.id;
        }
    }
    best.state = reverse.node(best.id).state;
    return best;
}

Path extract_path(const SystemSpec& spec, const EdgeBundle* bundle, double dt,
                  const Tree& tree, int goal_id) {
    std::vector<int> chain;
    for (int id = goal_id; id != -1; id = tree.node(id).parent)
        chain.push_back(id);
    std::reverse(chain.begin(), chain.end());

    Path path;
    path.states.reserve(chain.size());
    path.instances.reserve(chain.size() - 1);
    path.states.push_back(tree.node(chain.front()).state);
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const TreeNode& node = tree.node(chain[i]);
        const State& parent_state = tree.node(chain[i - 1]).state;
        EdgeInstance inst;
        if (node.incoming.kind == IncomingEdge::Kind::Bundle) {
            assert(bundle != nullptr);
            inst = transform_edge(
                spec,
                bundle->edges[static_cast<std::size_t>(node.incoming.bundle_edge_id)],
                parent_state);
        } else {
            assert(node.incoming.kind == IncomingEdge::Kind::Rollout);
            inst = make_instance(
                spec, integrate(spec, parent_state, node.incoming.control,
                                node.incoming.duration, dt));
        }
        path.total_cost += inst.arc_length;
        path.states.push_back(node.state);
        path.instances.push_back(std::move(inst));
    }
    return path;
}

PlanResult plan_bboe(const PlannerConfig& config, const World& world,
                     const EdgeBundle& bundle, const PlannerHooks* hooks) {
    const SystemSpec& spec = bundle.system;
    if (world.start.size() != spec.state_dim)
        throw std::invalid_argument(
            "start state dimension does not match the bundle's system");
    if (state_in_collision(world, world.start))
        throw std::invalid_argument("start state is in collision");

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(clock::now() - t0).count();
    };

    PlanResult res;
    if (goal_region_reached(world, world.start)) {
        res.path = Path{{}, {world.start}, 0.0};
        res.stats.termination = Termination::Goal;
        res.stats.forward_nodes = 1;
        res.stats.time_s = elapsed();
        return res;
    }

    Tree fwd(spec, TreeDirection::Forward, world.bx, world.by, config.grid_cell);
    fwd.add_root(world.start);
    Tree rev(spec, TreeDirection::Reverse, world.bx, world.by, config.grid_cell);
    State goal_state = State::zeros(spec.state_dim);
    goal_state[0] = world.goal_x;
    goal_state[1] = world.goal_y;
    rev.add_root(goal_state);

    HeuristicQueue queue;
    Rng rng(config.seed);
    PropScratch scratch;
    std::vector<GridIndex::Hit> hits;
    const SelectionParams explore{1.0, config.skip_n, config.theta};
    const SelectionParams exploit{config.k_bias_exploit, config.skip_n,
                                  config.theta};

    PlanStats& stats = res.stats;
    stats.termination = Termination::MaxIterations;
    long long k = 0;
    while (k < config.max_iter) {
        ++k;
        if (config.time_budget_s > 0.0 && (k & 15) == 0 &&
            elapsed() >= config.time_budget_s) {
            --k;  // this iteration did not run
            stats.termination = Termination::TimeBudget;
            break;
        }
        const double r_k = shrinking_radius(rev.size(), spec.state_dim,
                                            config.gamma, config.delta_hr);

        // Reverse tree explores toward a random state every iteration.
        {
            const State x_rand = sample_state(spec, world.bx, world.by, rng);
            const auto near = rev.index().nearest(x_rand);
            auto prop = best_prop_using_edge_bundle(
                bundle, rev.node(near.id).state, x_rand, explore, world, rng,
                scratch);
            stats.prop_attempts += prop.attempts;
            if (prop.random_branch) ++stats.exploration_random_branch_uses;
            if (prop.instance) {
                IncomingEdge ie;
                ie.kind = IncomingEdge::Kind::Bundle;
                ie.bundle_edge_id = prop.instance->source_edge_id;
                const int nid = rev.add_node(prop.instance->end_state(),
                                             near.id, ie,
                                             prop.instance->arc_length);
                if (hooks && hooks->on_reverse_edge)
                    hooks->on_reverse_edge(*prop.instance);
                update_priority_queue(fwd, rev, nid, r_k, queue, hits, hooks);
            }
        }

        // Forward tree: exploit the reverse tree with probability q, falling
        // back to exploration; a random propagation otherwise (or when every
        // guided attempt failed).
        const double q = exploitation_probability(k, config);
        const double c_rand = rng.uniform01();
        std::optional<EdgeInstance> eps_for;
        int parent = -1;
        if (c_rand < q) {
            if (auto popped = queue.pop()) {
                if (hooks && hooks->on_pop)
                    hooks->on_pop(popped->first, popped->second);
                const TreeNode& x_pop = fwd.node(popped->first);
                if (auto target = best_reverse_target(
                        rev, x_pop.state, x_pop.cost_to_root, r_k, hits)) {
                    auto prop = best_prop_using_edge_bundle(
                        bundle, x_pop.state, target->state, exploit, world,
                        rng, scratch);
                    stats.prop_attempts += prop.attempts;
                    if (prop.instance) {
                        eps_for = std::move(prop.instance);
                        parent = popped->first;
                    }
                }
            }
            if (!eps_for) {
                const State x_rand = sample_state(spec, world.bx, world.by, rng);
                const auto near = fwd.index().nearest(x_rand);
                auto prop = best_prop_using_edge_bundle(
                    bundle, fwd.node(near.id).state, x_rand, explore, world,
                    rng, scratch);
                stats.prop_attempts += prop.attempts;
                if (prop.random_branch) ++stats.exploration_random_branch_uses;
                if (prop.instance) {
                    eps_for = std::move(prop.instance);
                    parent = near.id;
                }
            }
        }
        if (!eps_for) {
            const State x_rand = sample_state(spec, world.bx, world.by, rng);
            const auto near = fwd.index().nearest(x_rand);
            auto prop = random_prop_using_edge_bundle(
                bundle, fwd.node(near.id).state, config.theta, world, rng,
                scratch);
            stats.prop_attempts += prop.attempts;
            if (prop.instance) {
                eps_for = std::move(prop.instance);
                parent = near.id;
            }
        }
        if (eps_for) {
            IncomingEdge ie;
            ie.kind = IncomingEdge::Kind::Bundle;
            ie.bundle_edge_id = eps_for->source_edge_id;
            const int nid =
                fwd.add_node(eps_for->end_state(), parent, ie,
                             eps_for->arc_length);
            if (hooks && hooks->on_forward_edge)
                hooks->on_forward_edge(*eps_for);
            if (goal_region_reached(world, fwd.node(nid).state)) {
                res.path = extract_path(spec, &bundle, bundle.dt, fwd, nid);
                stats.termination = Termination::Goal;
                break;
            }
            insert_to_priority_queue(rev, fwd, nid, r_k, queue, hits, hooks);
        }
    }

    stats.iterations = k;
    stats.forward_nodes = fwd.size();
    stats.reverse_nodes = rev.size();
    stats.time_s = elapsed();
    return res;
}

}  // namespace bboe

#include "bboe/baselines.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace bboe {
namespace {

using clock_type = std::chrono::steady_clock;

void validate_start(const World& world, const SystemSpec& spec) {
    if (world.start.size() != spec.state_dim)
        throw std::invalid_argument(
            "start state dimension does not match the system");
    if (state_in_collision(world, world.start))
        throw std::invalid_argument("start state is in collision");
}

State goal_state_of(const World& world, const SystemSpec& spec) {
    State g = State::zeros(spec.state_dim);
    g[0] = world.goal_x;
    g[1] = world.goal_y;
    return g;
}

PlanResult trivial_success(const World& world, double time_s) {
    PlanResult res;
    res.path = Path{{}, {world.start}, 0.0};
    res.stats.termination = Termination::Goal;
    res.stats.forward_nodes = 1;
    res.stats.time_s = time_s;
    return res;
}

struct Rollout {
    EdgeInstance instance;
    Control control;
    double duration = 0.0;
};

/// Best-of-k Monte-Carlo propagation: always rolls out exactly k pairs, then
/// keeps the collision-free one ending nearest x_des (first wins ties).
std::optional<Rollout> mc_prop(const SystemSpec& spec, const State& x_near,
                               const State& x_des, int k, double dt,
                               const World& world, Rng& rng,
                               long long& attempts) {
    std::optional<Rollout> best;
    double best_score = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
        const Control u = sample_control(spec, rng);
        const double duration = sample_duration(spec, rng);
        EdgeInstance inst =
            make_instance(spec, integrate(spec, x_near, u, duration, dt));
        ++attempts;
        if (!segment_collision_free(world, inst)) continue;
        const double score = distance(spec, inst.end_state(), x_des);
        if (score < best_score) {
            best_score = score;
            best = Rollout{std::move(inst), u, duration};
        }
    }
    return best;
}

/// No-strategy edge selection: transform and collision-check `candidates`
/// uniformly chosen neighborhood edges, keep the best collision-free one by
/// end-state distance to x_des.
std::optional<EdgeInstance> no_strategy_prop(const EdgeBundle& bundle,
                                             const State& x_near,
                                             const State& x_des,
                                             int candidates, double theta,
                                             const World& world, Rng& rng,
                                             PropScratch& scratch,
                                             long long& attempts) {
    const std::vector<int>& near =
        near_edges_ref(bundle, x_near, theta, scratch.near);
    const int len = static_cast<int>(near.size());
    if (len == 0) return std::nullopt;
    const int take = std::min(candidates, len);
    scratch.order.resize(static_cast<std::size_t>(len));
    std::iota(scratch.order.begin(), scratch.order.end(), 0);
    std::optional<EdgeInstance> best;
    double best_score = std::numeric_limits<double>::infinity();
    for (int i = 0; i < take; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_int(
                               static_cast<std::uint64_t>(len - i)));
        std::swap(scratch.order[static_cast<std::size_t>(i)],
                  scratch.order[static_cast<std::size_t>(j)]);
        const int pos = scratch.order[static_cast<std::size_t>(i)];
        transform_edge_into(bundle.system,
                            bundle.edges[static_cast<std::size_t>(
                                near[static_cast<std::size_t>(pos)])],
                            x_near, scratch.inst);
        ++attempts;
        if (!segment_collision_free(world, scratch.inst)) continue;
        const double score =
            distance(bundle.system, scratch.inst.end_state(), x_des);
        if (score < best_score) {
            best_score = score;
            best = scratch.inst;
        }
    }
    return best;
}

IncomingEdge rollout_edge(const Rollout& r) {
    IncomingEdge ie;
    ie.kind = IncomingEdge::Kind::Rollout;
    ie.control = r.control;
    ie.duration = r.duration;
    return ie;
}

IncomingEdge bundle_edge(const EdgeInstance& inst) {
    IncomingEdge ie;
    ie.kind = IncomingEdge::Kind::Bundle;
    ie.bundle_edge_id = inst.source_edge_id;
    return ie;
}

}  // namespace

PlanResult plan_rrt(const PlannerConfig& config, const World& world,
                    const SystemSpec& spec, double dt,
                    const MonteCarloParams& params) {
    assert(params.prop_attempts_per_expand >= 1);
    validate_start(world, spec);
    const auto t0 = clock_type::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(clock_type::now() - t0).count();
    };
    if (goal_region_reached(world, world.start))
        return trivial_success(world, elapsed());

    Tree tree(spec, TreeDirection::Forward, world.bx, world.by,
              config.grid_cell);
    tree.add_root(world.start);
    Rng rng(config.seed);
    const State goal = goal_state_of(world, spec);

    PlanResult res;
    PlanStats& stats = res.stats;
    stats.termination = Termination::MaxIterations;
    long long k = 0;
    while (k < config.max_iter) {
        ++k;
        if (config.time_budget_s > 0.0 && (k & 15) == 0 &&
            elapsed() >= config.time_budget_s) {
            --k;
            stats.termination = Termination::TimeBudget;
            break;
        }
        const State target = rng.uniform01() < params.goal_bias
                                 ? goal
                                 : sample_state(spec, world.bx, world.by, rng);
        const auto near = tree.index().nearest(target);
        auto best = mc_prop(spec, tree.node(near.id).state, target,
                            params.prop_attempts_per_expand, dt, world, rng,
                            stats.prop_attempts);
        if (!best) continue;
        const int nid =
            tree.add_node(best->instance.end_state(), near.id,
                          rollout_edge(*best), best->instance.arc_length);
        if (goal_region_reached(world, tree.node(nid).state)) {
            res.path = extract_path(spec, nullptr, dt, tree, nid);
            stats.termination = Termination::Goal;
            break;
        }
    }
    stats.iterations = k;
    stats.forward_nodes = tree.size();
    stats.time_s = elapsed();
    return res;
}

PlanResult plan_gbrrt(const PlannerConfig& config, const World& world,
                      const SystemSpec& spec, double dt,
                      const MonteCarloParams& params) {
    assert(params.prop_attempts_per_expand >= 1);
    validate_start(world, spec);
    const auto t0 = clock_type::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(clock_type::now() - t0).count();
    };
    if (goal_region_reached(world, world.start))
        return trivial_success(world, elapsed());

    Tree fwd(spec, TreeDirection::Forward, world.bx, world.by,
             config.grid_cell);
    fwd.add_root(world.start);
    Tree rev(spec, TreeDirection::Reverse, world.bx, world.by,
             config.grid_cell);
    rev.add_root(goal_state_of(world, spec));
    HeuristicQueue queue;
    Rng rng(config.seed);
    std::vector<GridIndex::Hit> hits;

    PlanResult res;
    PlanStats& stats = res.stats;
    stats.termination = Termination::MaxIterations;
    const int kProp = params.prop_attempts_per_expand;
    long long k = 0;
    while (k < config.max_iter) {
        ++k;
        if (config.time_budget_s > 0.0 && (k & 15) == 0 &&
            elapsed() >= config.time_budget_s) {
            --k;
            stats.termination = Termination::TimeBudget;
            break;
        }
        const double r_k = shrinking_radius(rev.size(), spec.state_dim,
                                            config.gamma, config.delta_hr);
        {
            const State x_rand = sample_state(spec, world.bx, world.by, rng);
            const auto near = rev.index().nearest(x_rand);
            auto best = mc_prop(spec, rev.node(near.id).state, x_rand, kProp,
                                dt, world, rng, stats.prop_attempts);
            if (best) {
                const int nid = rev.add_node(best->instance.end_state(),
                                             near.id, rollout_edge(*best),
                                             best->instance.arc_length);
                update_priority_queue(fwd, rev, nid, r_k, queue, hits);
            }
        }
        const double q = exploitation_probability(k, config);
        const double c_rand = rng.uniform01();
        std::optional<Rollout> eps_for;
        int parent = -1;
        if (c_rand < q) {
            if (auto popped = queue.pop()) {
                const TreeNode& x_pop = fwd.node(popped->first);
                if (auto target = best_reverse_target(
                        rev, x_pop.state, x_pop.cost_to_root, r_k, hits)) {
                    auto best = mc_prop(spec, x_pop.state, target->state,
                                        kProp, dt, world, rng,
                                        stats.prop_attempts);
                    if (best) {
                        eps_for = std::move(best);
                        parent = popped->first;
                    }
                }
            }
            if (!eps_for) {
                const State x_rand =
                    sample_state(spec, world.bx, world.by, rng);
                const auto near = fwd.index().nearest(x_rand);
                auto best = mc_prop(spec, fwd.node(near.id).state, x_rand,
                                    kProp, dt, world, rng,
                                    stats.prop_attempts);
                if (best) {
                    eps_for = std::move(best);
                    parent = near.id;
                }
            }
        }
        if (!eps_for) {
            const State x_rand = sample_state(spec, world.bx, world.by, rng);
            const auto near = fwd.index().nearest(x_rand);
            auto best = mc_prop(spec, fwd.node(near.id).state, x_rand, kProp,
                                dt, world, rng, stats.prop_attempts);
            if (best) {
                eps_for = std::move(best);
                parent = near.id;
            }
        }
        if (eps_for) {
            const int nid =
                fwd.add_node(eps_for->instance.end_state(), parent,
                             rollout_edge(*eps_for),
                             eps_for->instance.arc_length);
            if (goal_region_reached(world, fwd.node(nid).state)) {
                res.path = extract_path(spec, nullptr, dt, fwd, nid);
                stats.termination = Termination::Goal;
                break;
            }
            insert_to_priority_queue(rev, fwd, nid, r_k, queue, hits);
        }
    }
    stats.iterations = k;
    stats.forward_nodes = fwd.size();
    stats.reverse_nodes = rev.size();
    stats.time_s = elapsed();
    return res;
}

PlanResult plan_ablation(const AblationVariant& variant,
                         const PlannerConfig& config, const World& world,
                         const EdgeBundle& bundle) {
    const SystemSpec& spec = bundle.system;
    validate_start(world, spec);
    const auto t0 = clock_type::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(clock_type::now() - t0).count();
    };
    if (goal_region_reached(world, world.start))
        return trivial_success(world, elapsed());

    constexpr double kGoalBias = 0.05;
    Rng rng(config.seed);
    PropScratch scratch;
    std::vector<GridIndex::Hit> hits;
    const State goal = goal_state_of(world, spec);

    PlanResult res;
    PlanStats& stats = res.stats;
    stats.termination = Termination::MaxIterations;

    if (variant.kind == AblationKind::UniBBoEWithBias ||
        variant.kind == AblationKind::UniBBoENoStrategy) {
        Tree tree(spec, TreeDirection::Forward, world.bx, world.by,
                  config.grid_cell);
        tree.add_root(world.start);
        const SelectionParams sel{variant.k_bias, config.skip_n, config.theta};
        long long k = 0;
        while (k < config.max_iter) {
            ++k;
            if (config.time_budget_s > 0.0 && (k & 15) == 0 &&
                elapsed() >= config.time_budget_s) {
                --k;
                stats.termination = Termination::TimeBudget;
                break;
            }
            const State target =
                rng.uniform01() < kGoalBias
                    ? goal
                    : sample_state(spec, world.bx, world.by, rng);
            const auto near = tree.index().nearest(target);
            const State& x_near = tree.node(near.id).state;
            std::optional<EdgeInstance> inst;
            if (variant.kind == AblationKind::UniBBoEWithBias) {
                auto prop = best_prop_using_edge_bundle(
                    bundle, x_near, target, sel, world, rng, scratch);
                stats.prop_attempts += prop.attempts;
                inst = std::move(prop.instance);
            } else {
                inst = no_strategy_prop(bundle, x_near, target,
                                        variant.candidates, config.theta,
                                        world, rng, scratch,
                                        stats.prop_attempts);
            }
            if (!inst) continue;
            const int nid = tree.add_node(inst->end_state(), near.id,
                                          bundle_edge(*inst),
                                          inst->arc_length);
            if (goal_region_reached(world, tree.node(nid).state)) {
                res.path = extract_path(spec, &bundle, bundle.dt, tree, nid);
                stats.termination = Termination::Goal;
                break;
            }
        }
        stats.iterations = k;
        stats.forward_nodes = tree.size();
        stats.time_s = elapsed();
        return res;
    }

    // BiBBoENoStrategy: the bidirectional skeleton with the candidate rule
    // at every propagation site.
    Tree fwd(spec, TreeDirection::Forward, world.bx, world.by,
             config.grid_cell);
    fwd.add_root(world.start);
    Tree rev(spec, TreeDirection::Reverse, world.bx, world.by,
             config.grid_cell);
    rev.add_root(goal);
    HeuristicQueue queue;
    long long k = 0;
    while (k < config.max_iter) {
        ++k;
        if (config.time_budget_s > 0.0 && (k & 15) == 0 &&
            elapsed() >= config.time_budget_s) {
            --k;
            stats.termination = Termination::TimeBudget;
            break;
        }
        const double r_k = shrinking_radius(rev.size(), spec.state_dim,
                                            config.gamma, config.delta_hr);
        {
            const State x_rand = sample_state(spec, world.bx, world.by, rng);
            const auto near = rev.index().nearest(x_rand);
            auto inst = no_strategy_prop(
                bundle, rev.node(near.id).state, x_rand, variant.candidates,
                config.theta, world, rng, scratch, stats.prop_attempts);
            if (inst) {
                const int nid = rev.add_node(inst->end_state(), near.id,
                                             bundle_edge(*inst),
                                             inst->arc_length);
                update_priority_queue(fwd, rev, nid, r_k, queue, hits);
            }
        }
        const double q = exploitation_probability(k, config);
        const double c_rand = rng.uniform01();
        std::optional<EdgeInstance> eps_for;
        int parent = -1;
        if (c_rand < q) {
            if (auto popped = queue.pop()) {
                const TreeNode& x_pop = fwd.node(popped->first);
                if (auto target = best_reverse_target(
                        rev, x_pop.state, x_pop.cost_to_root, r_k, hits)) {
                    eps_for = no_strategy_prop(
                        bundle, x_pop.state, target->state, variant.candidates,
                        config.theta, world, rng, scratch,
                        stats.prop_attempts);
                    if (eps_for) parent = popped->first;
                }
            }
            if (!eps_for) {
                const State x_rand =
                    sample_state(spec, world.bx, world.by, rng);
                const auto near = fwd.index().nearest(x_rand);
                eps_for = no_strategy_prop(
                    bundle, fwd.node(near.id).state, x_rand,
                    variant.candidates, config.theta, world, rng, scratch,
                    stats.prop_attempts);
                if (eps_for) parent = near.id;
            }
        }
        if (!eps_for) {
            const State x_rand = sample_state(spec, world.bx, world.by, rng);
            const auto near = fwd.index().nearest(x_rand);
            eps_for = no_strategy_prop(bundle, fwd.node(near.id).state,
                                       x_rand, variant.candidates,
                                       config.theta, world, rng, scratch,
                                       stats.prop_attempts);
            if (eps_for) parent = near.id;
        }
        if (eps_for) {
            const int nid = fwd.add_node(eps_for->end_state(), parent,
                                         bundle_edge(*eps_for),
                                         eps_for->arc_length);
            if (goal_region_reached(world, fwd.node(nid).state)) {
                res.path = extract_path(spec, &bundle, bundle.dt, fwd, nid);
                stats.termination = Termination::Goal;
                break;
            }
            insert_to_priority_queue(rev, fwd, nid, r_k, queue, hits);
        }
    }
    stats.iterations = k;
    stats.forward_nodes = fwd.size();
    stats.reverse_nodes = rev.size();
    stats.time_s = elapsed();
    return res;
}

}  // namespace bboe

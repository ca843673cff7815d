#include "doctest.h"

#include <cmath>

#include "bboe/baselines.hpp"
#include "bboe/bundle.hpp"
#include "bboe/world.hpp"

using namespace bboe;

namespace {

World empty_world(const SystemSpec& spec) {
    World w;
    w.system_name = spec.name;
    w.start = State::zeros(spec.state_dim);
    w.start[0] = 1.5;
    w.start[1] = 1.5;
    w.start[2] = std::atan2(17.0, 17.0);
    w.goal_x = 18.5;
    w.goal_y = 18.5;
    return w;
}

PlannerConfig iteration_config(long long max_iter, std::uint64_t seed) {
    PlannerConfig c;
    c.time_budget_s = 0.0;  // deterministic: iteration-terminated
    c.max_iter = max_iter;
    c.seed = seed;
    return c;
}

// Shared post-conditions for any returned path: instances chain through the
// recorded states, respect the world, and sum to the reported cost.
void check_path(const PlanResult& res, const SystemSpec& spec,
                const World& world) {
    REQUIRE(res.success());
    const Path& path = *res.path;
    REQUIRE(path.states.size() == path.instances.size() + 1);
    for (int d = 0; d < spec.state_dim; ++d)
        CHECK(path.states.front()[d] == world.start[d]);
    CHECK(goal_region_reached(world, path.states.back()));
    double cost = 0.0;
    for (std::size_t i = 0; i < path.instances.size(); ++i) {
        const EdgeInstance& inst = path.instances[i];
        for (int d = 0; d < spec.state_dim; ++d) {
            CHECK(inst.first_state()[d] == path.states[i][d]);
            CHECK(inst.end_state()[d] == path.states[i + 1][d]);
        }
        CHECK(segment_collision_free(world, inst));
        cost += inst.arc_length;
    }
    CHECK(path.total_cost == doctest::Approx(cost).epsilon(1e-12));
}

}  // namespace

TEST_CASE("rrt: start inside the goal region is a trivial success") {
    const SystemSpec spec = make_diff_drive();
    World w = empty_world(spec);
    w.start[0] = 18.2;
    w.start[1] = 18.7;
    const auto res =
        plan_rrt(iteration_config(10, 1), w, spec, 0.05, MonteCarloParams{});
    REQUIRE(res.success());
    CHECK(res.path->total_cost == 0.0);
    CHECK(res.path->instances.empty());
    CHECK(res.stats.iterations == 0);
    CHECK(res.stats.termination == Termination::Goal);
}

TEST_CASE("rrt: empty world succeeds and the path checks out") {
    const SystemSpec spec = make_diff_drive();
    const World w = empty_world(spec);
    const auto res = plan_rrt(iteration_config(20000, 7), w, spec, 0.05,
                              MonteCarloParams{});
    REQUIRE(res.success());
    CHECK(res.stats.termination == Termination::Goal);
    check_path(res, spec, w);
}

TEST_CASE("rrt: every iteration rolls out exactly the configured attempts") {
    const SystemSpec spec = make_diff_drive();
    const World w = generate_scenario(
        spec, Difficulty::at(DifficultyLevel::Medium), 5);
    for (int k : {1, 3, 10}) {
        MonteCarloParams mc;
        mc.prop_attempts_per_expand = k;
        const auto res = plan_rrt(iteration_config(400, 11), w, spec, 0.05, mc);
        CHECK(res.stats.prop_attempts == res.stats.iterations * k);
    }
}

TEST_CASE("rrt: deterministic when iteration-terminated") {
    const SystemSpec spec = make_unicycle();
    const World w =
        generate_scenario(spec, Difficulty::at(DifficultyLevel::Easy), 3);
    const auto a =
        plan_rrt(iteration_config(3000, 42), w, spec, 0.05, MonteCarloParams{});
    const auto b =
        plan_rrt(iteration_config(3000, 42), w, spec, 0.05, MonteCarloParams{});
    CHECK(a.success() == b.success());
    CHECK(a.stats.iterations == b.stats.iterations);
    CHECK(a.stats.prop_attempts == b.stats.prop_attempts);
    CHECK(a.stats.forward_nodes == b.stats.forward_nodes);
    if (a.success()) CHECK(a.path->total_cost == b.path->total_cost);
}

TEST_CASE("rrt: rejects an invalid start") {
    const SystemSpec spec = make_diff_drive();
    World w = empty_world(spec);
    w.obstacles.push_back(Obstacle::circle(1.5, 1.5, 0.5));
    CHECK_THROWS_AS(
        plan_rrt(iteration_config(10, 0), w, spec, 0.05, MonteCarloParams{}),
        std::invalid_argument);

    World bad = empty_world(spec);
    bad.start = State::zeros(2);
    CHECK_THROWS_AS(
        plan_rrt(iteration_config(10, 0), bad, spec, 0.05, MonteCarloParams{}),
        std::invalid_argument);
}

TEST_CASE("gbrrt: trivial start-in-goal and empty-world run") {
    const SystemSpec spec = make_diff_drive();
    World trivial = empty_world(spec);
    trivial.start[0] = 18.5;
    trivial.start[1] = 18.5;
    const auto t = plan_gbrrt(iteration_config(10, 1), trivial, spec, 0.05,
                              MonteCarloParams{});
    REQUIRE(t.success());
    CHECK(t.path->total_cost == 0.0);

    const World w = empty_world(spec);
    const auto res = plan_gbrrt(iteration_config(20000, 4), w, spec, 0.05,
                                MonteCarloParams{});
    REQUIRE(res.success());
    CHECK(res.stats.reverse_nodes > 0);
    check_path(res, spec, w);
}

TEST_CASE("gbrrt: propagation counts come in whole expansions") {
    const SystemSpec spec = make_diff_drive();
    const World w = generate_scenario(
        spec, Difficulty::at(DifficultyLevel::Medium), 9);
    MonteCarloParams mc;
    mc.prop_attempts_per_expand = 7;  // odd, so divisibility is informative
    const auto res = plan_gbrrt(iteration_config(500, 13), w, spec, 0.05, mc);
    CHECK(res.stats.prop_attempts % 7 == 0);
    // Each iteration expands the reverse tree once and the forward side one
    // or two more times (a failed exploitation falls back to exploration).
    CHECK(res.stats.prop_attempts >= res.stats.iterations * 7);
    CHECK(res.stats.prop_attempts <= res.stats.iterations * 3 * 7);
}

TEST_CASE("gbrrt: deterministic when iteration-terminated") {
    const SystemSpec spec = make_diff_drive();
    const World w =
        generate_scenario(spec, Difficulty::at(DifficultyLevel::Hard), 2);
    const auto a = plan_gbrrt(iteration_config(2000, 21), w, spec, 0.05,
                              MonteCarloParams{});
    const auto b = plan_gbrrt(iteration_config(2000, 21), w, spec, 0.05,
                              MonteCarloParams{});
    CHECK(a.success() == b.success());
    CHECK(a.stats.iterations == b.stats.iterations);
    CHECK(a.stats.prop_attempts == b.stats.prop_attempts);
    CHECK(a.stats.forward_nodes == b.stats.forward_nodes);
    CHECK(a.stats.reverse_nodes == b.stats.reverse_nodes);
}

TEST_CASE("ablations: trivial start-in-goal for every variant") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle bundle = generate_bundle(spec, 50, 0.05, 3);
    World w = empty_world(spec);
    w.start[0] = 18.5;
    w.start[1] = 18.0;
    for (auto kind :
         {AblationKind::UniBBoEWithBias, AblationKind::UniBBoENoStrategy,
          AblationKind::BiBBoENoStrategy}) {
        AblationVariant v;
        v.kind = kind;
        const auto res =
            plan_ablation(v, iteration_config(10, 1), w, bundle);
        REQUIRE(res.success());
        CHECK(res.path->total_cost == 0.0);
        CHECK(res.stats.termination == Termination::Goal);
    }
}

TEST_CASE("uni-nostrategy: exactly min(candidates, neighborhood) props per "
          "expansion") {
    const SystemSpec spec = make_diff_drive();
    // Pose-only system: the neighborhood is the whole bundle, so the
    // propagation count per expansion is exactly min(candidates, bundle).
    const EdgeBundle bundle = generate_bundle(spec, 60, 0.05, 8);
    const World w = generate_scenario(
        spec, Difficulty::at(DifficultyLevel::Medium), 17);
    for (int candidates : {1, 25, 100}) {
        AblationVariant v;
        v.kind = AblationKind::UniBBoENoStrategy;
        v.candidates = candidates;
        const auto res =
            plan_ablation(v, iteration_config(300, 6), w, bundle);
        const long long per = std::min(candidates, 60);
        CHECK(res.stats.prop_attempts == res.stats.iterations * per);
    }
}

TEST_CASE("ablations: empty-world success and path invariants") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle bundle = generate_bundle(spec, 400, 0.05, 5);
    const World w = empty_world(spec);
    for (auto kind :
         {AblationKind::UniBBoEWithBias, AblationKind::UniBBoENoStrategy,
          AblationKind::BiBBoENoStrategy}) {
        AblationVariant v;
        v.kind = kind;
        const auto res =
            plan_ablation(v, iteration_config(30000, 2), w, bundle);
        REQUIRE(res.success());
        check_path(res, spec, w);
        CHECK(res.stats.prop_attempts > 0);
        if (kind == AblationKind::BiBBoENoStrategy)
            CHECK(res.stats.reverse_nodes > 0);
        else
            CHECK(res.stats.reverse_nodes == 0);
    }
}

TEST_CASE("bi-nostrategy: candidate counting and determinism") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle bundle = generate_bundle(spec, 60, 0.05, 9);
    const World w =
        generate_scenario(spec, Difficulty::at(DifficultyLevel::Medium), 4);
    AblationVariant v;
    v.kind = AblationKind::BiBBoENoStrategy;
    v.candidates = 100;
    const auto a = plan_ablation(v, iteration_config(700, 33), w, bundle);
    const auto b = plan_ablation(v, iteration_config(700, 33), w, bundle);
    // Every propagation site evaluates min(100, 60) = 60 candidates.
    CHECK(a.stats.prop_attempts % 60 == 0);
    CHECK(a.stats.prop_attempts >= a.stats.iterations * 60);
    CHECK(a.stats.iterations == b.stats.iterations);
    CHECK(a.stats.prop_attempts == b.stats.prop_attempts);
    CHECK(a.stats.forward_nodes == b.stats.forward_nodes);
    CHECK(a.stats.reverse_nodes == b.stats.reverse_nodes);
    CHECK(a.success() == b.success());
}

TEST_CASE("ablations: reject an invalid start") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle bundle = generate_bundle(spec, 30, 0.05, 1);
    World w = empty_world(spec);
    w.obstacles.push_back(Obstacle::rect(1.0, 1.0, 2.0, 2.0));
    for (auto kind :
         {AblationKind::UniBBoEWithBias, AblationKind::UniBBoENoStrategy,
          AblationKind::BiBBoENoStrategy}) {
        AblationVariant v;
        v.kind = kind;
        CHECK_THROWS_AS(plan_ablation(v, iteration_config(10, 0), w, bundle),
                        std::invalid_argument);
    }
}

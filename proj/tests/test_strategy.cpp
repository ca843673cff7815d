#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "bboe/strategy.hpp"

using namespace bboe;

namespace {

State make_state(std::initializer_list<double> vals) {
    State s;
    for (double v : vals) s.push_back(v);
    return s;
}

World open_world(const SystemSpec& spec) {
    World w;
    w.bx = {-200.0, 200.0};  // roomy: placement never exits bounds
    w.by = {-200.0, 200.0};
    w.start = make_state({0.0, 0.0, 0.0});
    while (w.start.size() < spec.state_dim) w.start.push_back(0.0);
    w.goal_x = 19.0;
    w.goal_y = 19.0;
    w.system_name = spec.name;
    return w;
}

// Brute-force oracle: place every near edge at x_near, measure its end state
// against x_des with the full metric, stable-sort by (key, id).
SortedNeighborhood oracle_sort(const SystemSpec& spec, const EdgeBundle& b,
                               const std::vector<int>& near,
                               const State& x_near, const State& x_des) {
    SortedNeighborhood out;
    out.anchor = x_near;
    std::vector<std::pair<double, int>> keyed;
    for (int id : near) {
        const EdgeInstance inst = transform_edge(spec, b.edges[id], x_near);
        keyed.emplace_back(distance(spec, inst.end_state(), x_des), id);
    }
    std::sort(keyed.begin(), keyed.end());
    for (const auto& [k, id] : keyed) {
        out.keys.push_back(k);
        out.ids.push_back(id);
    }
    return out;
}

}  // namespace

TEST_CASE("biased_indices follows the skip rule") {
    CHECK(biased_indices(12, 4) == std::vector<int>{0, 4, 8, 11});
    CHECK(biased_indices(13, 4) == std::vector<int>{0, 4, 8, 12});
    CHECK(biased_indices(3, 500) == std::vector<int>{0, 2});
    CHECK(biased_indices(1, 500) == std::vector<int>{0});
    CHECK(biased_indices(0, 5).empty());
    CHECK(biased_indices(501, 500) == std::vector<int>{0, 500});
    CHECK(biased_indices(1000, 500) == std::vector<int>{0, 500, 999});
    // len = M*N + 1: the last element is already on the stride.
    CHECK(biased_indices(9, 4) == std::vector<int>{0, 4, 8});
}

TEST_CASE("sort_by_goal_proximity matches the brute-force oracle") {
    const SystemSpec spec = make_car_with_trailer();
    const EdgeBundle b = generate_bundle(spec, 50, 0.05, 8);
    Rng rng(600);
    const Interval box{0.0, 20.0};
    for (int trial = 0; trial < 200; ++trial) {
        const State x_near = sample_state(spec, box, box, rng);
        const State x_des = sample_state(spec, box, box, rng);
        const auto near = near_edges(b, x_near, 0.8);
        const auto got = sort_by_goal_proximity(b, near, x_near, x_des);
        const auto want = oracle_sort(spec, b, near, x_near, x_des);
        REQUIRE(got.ids.size() == want.ids.size());
        CHECK(got.ids == want.ids);
        for (std::size_t i = 0; i < got.keys.size(); ++i)
            CHECK(got.keys[i] == doctest::Approx(want.keys[i]).epsilon(1e-12));
        CHECK(std::is_sorted(got.keys.begin(), got.keys.end()));
    }
}

TEST_CASE("best_prop with k_bias 1 returns the argmin edge in free space") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle b = generate_bundle(spec, 50, 0.05, 8);
    const World w = open_world(spec);
    Rng rng(601);
    const Interval box{0.0, 20.0};
    SelectionParams params;
    params.k_bias = 1.0;
    PropScratch scratch;
    for (int trial = 0; trial < 200; ++trial) {
        const State x_near = sample_state(spec, box, box, rng);
        const State x_des = sample_state(spec, box, box, rng);
        const auto out =
            best_prop_using_edge_bundle(b, x_near, x_des, params, w, rng,
                                        scratch);
        REQUIRE(out.instance.has_value());
        CHECK_FALSE(out.random_branch);
        CHECK(out.attempts == 1);
        const auto want =
            oracle_sort(spec, b, near_edges(b, x_near, params.theta), x_near,
                        x_des);
        CHECK(out.instance->source_edge_id == want.ids.front());
    }
}

TEST_CASE("blocked first-N edges cost exactly two attempts") {
    // Construct a world whose obstacles block exactly the sorted edges at
    // indices 0..N-1. Biased selection then succeeds on its second attempt,
    // while popping the full sorted list needs N+1. Each blocked edge gets
    // its own small disc on one of its waypoints, chosen to keep a wide
    // berth from every edge that must survive (blocking radius is obstacle
    // 0.05 + robot 0.3 = 0.35; we demand > 0.45 clearance). Whether such
    // waypoints exist depends on how the seeded edges fan out, so search
    // seeds until the construction goes through.
    const SystemSpec spec = make_diff_drive();
    const State x_near = make_state({10.0, 10.0, 0.6});
    const State x_des = make_state({17.0, 14.0, 0.0});
    const int N = 3;

    EdgeBundle b;
    SortedNeighborhood sorted;
    std::vector<EdgeInstance> placed;
    World w = open_world(spec);
    bool constructed = false;
    for (std::uint64_t seed = 1; seed <= 200 && !constructed; ++seed) {
        b = generate_bundle(spec, 12, 0.05, seed);
        sorted = sort_by_goal_proximity(b, near_edges(b, x_near, 0.5), x_near,
                                        x_des);
        placed.clear();
        for (int id : sorted.ids)
            placed.push_back(transform_edge(spec, b.edges[id], x_near));
        w.obstacles.clear();
        bool ok = true;
        for (int i = 0; i < N && ok; ++i) {
            int pick = -1;
            // Far waypoints first: endpoints spread the most.
            for (int k = placed[i].waypoint_count() - 1; k >= 1 && pick < 0;
                 --k) {
                bool clear = std::hypot(placed[i].xs[k] - x_near[0],
                                        placed[i].ys[k] - x_near[1]) > 0.45;
                for (std::size_t j = N; clear && j < placed.size(); ++j) {
                    for (int m = 0; m < placed[j].waypoint_count(); ++m) {
                        if (std::hypot(placed[i].xs[k] - placed[j].xs[m],
                                       placed[i].ys[k] - placed[j].ys[m]) <
                            0.45) {
                            clear = false;
                            break;
                        }
                    }
                }
                if (clear) pick = k;
            }
            if (pick < 0)
                ok = false;
            else
                w.obstacles.push_back(Obstacle::circle(placed[i].xs[pick],
                                                       placed[i].ys[pick],
                                                       0.05));
        }
        constructed = ok;
    }
    REQUIRE(constructed);
    // Verify the construction: exactly the first N sorted edges collide.
    std::vector<bool> blocked(sorted.ids.size());
    for (std::size_t i = 0; i < sorted.ids.size(); ++i)
        blocked[i] = !segment_collision_free(w, placed[i]);
    for (std::size_t i = 0; i < blocked.size(); ++i)
        CHECK(blocked[i] == (static_cast<int>(i) < N));

    SelectionParams params;
    params.k_bias = 1.0;
    params.skip_n = N;
    PropScratch scratch;
    Rng rng(1);
    const auto out =
        best_prop_using_edge_bundle(b, x_near, x_des, params, w, rng, scratch);
    REQUIRE(out.instance.has_value());
    CHECK(out.attempts == 2);
    CHECK(out.instance->source_edge_id == sorted.ids[N]);
    CHECK_FALSE(out.random_branch);

    // Exhaustive pop of the sorted list for comparison.
    int exhaustive = 0;
    for (std::size_t i = 0; i < sorted.ids.size(); ++i) {
        const EdgeInstance inst =
            transform_edge(spec, b.edges[sorted.ids[i]], x_near);
        ++exhaustive;
        if (segment_collision_free(w, inst)) break;
    }
    CHECK(exhaustive == N + 1);
}

TEST_CASE("random branch samples distinct edges of the neighborhood") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle b = generate_bundle(spec, 30, 0.05, 2);
    Rng rng(77);
    const State x_near = make_state({5.0, 5.0, 0.0});
    const State x_des = make_state({9.0, 9.0, 0.0});
    const auto sorted =
        sort_by_goal_proximity(b, near_edges(b, x_near, 0.5), x_near, x_des);
    for (int trial = 0; trial < 100; ++trial) {
        const auto picks = random_subset(sorted, 7, rng);
        REQUIRE(picks.size() == 7);
        auto dedup = picks;
        std::sort(dedup.begin(), dedup.end());
        CHECK(std::adjacent_find(dedup.begin(), dedup.end()) == dedup.end());
        for (int id : picks)
            CHECK(std::find(sorted.ids.begin(), sorted.ids.end(), id) !=
                  sorted.ids.end());
    }
    // Over many draws every edge should appear: uniform support.
    std::map<int, int> counts;
    for (int trial = 0; trial < 2000; ++trial)
        for (int id : random_subset(sorted, 3, rng)) ++counts[id];
    CHECK(counts.size() == 30);
}

TEST_CASE("k_bias 0 always uses the random branch, k_bias 1 never") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle b = generate_bundle(spec, 25, 0.05, 4);
    const World w = open_world(spec);
    Rng rng(31);
    PropScratch scratch;
    const State x_near = make_state({4.0, 4.0, 1.0});
    const State x_des = make_state({15.0, 6.0, 0.0});
    SelectionParams p0;
    p0.k_bias = 0.0;
    SelectionParams p1;
    p1.k_bias = 1.0;
    for (int i = 0; i < 50; ++i) {
        CHECK(best_prop_using_edge_bundle(b, x_near, x_des, p0, w, rng,
                                          scratch)
                  .random_branch);
        CHECK_FALSE(best_prop_using_edge_bundle(b, x_near, x_des, p1, w, rng,
                                                scratch)
                        .random_branch);
    }
}

TEST_CASE("attempts never exceed the selected list length") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle b = generate_bundle(spec, 64, 0.05, 10);
    Rng rng(5150);
    PropScratch scratch;
    SelectionParams params;
    params.skip_n = 9;
    // A hostile world: dense clutter so many placements fail.
    World w = open_world(spec);
    Rng wr(8);
    for (int i = 0; i < 120; ++i)
        w.obstacles.push_back(Obstacle::circle(wr.uniform(0.0, 20.0),
                                               wr.uniform(0.0, 20.0), 0.35));
    const int list_len =
        static_cast<int>(biased_indices(b.size(), params.skip_n).size());
    const Interval box{0.0, 20.0};
    for (int trial = 0; trial < 300; ++trial) {
        const State x_near = sample_state(spec, box, box, rng);
        const State x_des = sample_state(spec, box, box, rng);
        const auto out = best_prop_using_edge_bundle(b, x_near, x_des, params,
                                                     w, rng, scratch);
        CHECK(out.attempts <= list_len);
        if (out.instance)
            CHECK(out.attempts >= 1);
    }
}

TEST_CASE("walled-in x_near yields none from every selector") {
    // A blocking annulus only exists if every edge wanders far enough from
    // its start (the annulus cannot overlap the robot disc parked at the
    // anchor). Nearly-stationary edges (tiny |v|) are legitimate bundle
    // members, so search for a small seeded bundle without one.
    const SystemSpec spec = make_diff_drive();
    EdgeBundle b;
    double min_reach = 0.0;
    for (std::uint64_t seed = 1; seed <= 300 && min_reach <= 0.5; ++seed) {
        b = generate_bundle(spec, 8, 0.05, seed);
        min_reach = 1e9;
        for (const Edge& e : b.edges) {
            double reach = 0.0;
            for (int i = 0; i < e.waypoint_count(); ++i)
                reach = std::max(reach, std::hypot(e.xs[i], e.ys[i]));
            min_reach = std::min(min_reach, reach);
        }
    }
    const State x_near = make_state({10.0, 10.0, 0.0});
    REQUIRE(min_reach > 0.5);

    // Ring of overlapping discs: the blocked annulus (disc radius + robot
    // radius on both sides) must start inside min_reach and outside the
    // anchor disc. Waypoints step at most dt * v_max = 0.05 m, so no edge
    // can jump the band.
    const double disc_r = 0.25;
    const double ring_r = 0.55 + 0.5 * std::min(min_reach - 0.1, 2.0);
    REQUIRE(ring_r - disc_r - 0.3 > 0.0);         // anchor disc stays free
    REQUIRE(ring_r - disc_r - 0.3 < min_reach);   // every edge reaches it
    World w = open_world(spec);
    const int spokes = static_cast<int>(kTwoPi * ring_r / 0.05) + 1;
    for (int i = 0; i < spokes; ++i) {
        const double a = i * (kTwoPi / spokes);
        w.obstacles.push_back(
            Obstacle::circle(10.0 + ring_r * std::cos(a),
                             10.0 + ring_r * std::sin(a), disc_r));
    }
    // Sanity: the anchor itself is free.
    REQUIRE_FALSE(state_in_collision(w, x_near));
    // Every edge collides when placed here.
    for (const Edge& e : b.edges) {
        const EdgeInstance inst = transform_edge(spec, e, x_near);
        CHECK_FALSE(segment_collision_free(w, inst));
    }
    Rng rng(9);
    PropScratch scratch;
    SelectionParams params;
    params.skip_n = 4;
    const State x_des = make_state({15.0, 15.0, 0.0});
    for (int i = 0; i < 40; ++i) {
        CHECK_FALSE(best_prop_using_edge_bundle(b, x_near, x_des, params, w,
                                                rng, scratch)
                        .instance.has_value());
        CHECK_FALSE(random_prop_using_edge_bundle(b, x_near, params.theta, w,
                                                  rng, scratch)
                        .instance.has_value());
    }
}

TEST_CASE("random_prop places one uniformly chosen edge") {
    const SystemSpec spec = make_diff_drive();
    const EdgeBundle b = generate_bundle(spec, 20, 0.05, 14);
    const World w = open_world(spec);
    Rng rng(12);
    PropScratch scratch;
    const State x_near = make_state({10.0, 10.0, -0.5});
    std::map<int, int> seen;
    for (int i = 0; i < 4000; ++i) {
        const auto out =
            random_prop_using_edge_bundle(b, x_near, 0.5, w, rng, scratch);
        REQUIRE(out.instance.has_value());
        CHECK(out.attempts == 1);
        CHECK(out.random_branch);
        ++seen[out.instance->source_edge_id];
    }
    CHECK(seen.size() == 20);  // full support
    for (const auto& [id, n] : seen) CHECK(n > 100);  // roughly uniform
}

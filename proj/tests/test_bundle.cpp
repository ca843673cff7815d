#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <zlib.h>

#include "bboe/bundle.hpp"

using namespace bboe;

namespace {

State make_state(std::initializer_list<double> vals) {
    State s;
    for (double v : vals) s.push_back(v);
    return s;
}

std::string temp_path(const char* stem) {
    return (std::filesystem::temp_directory_path() / stem).string();
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    return {std::istreambuf_iterator<char>(is),
            std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("generated edges start at the canonical origin") {
    for (auto id :
         {SystemId::DiffDrive, SystemId::Unicycle, SystemId::CarWithTrailer}) {
        const SystemSpec spec = make_system(id);
        const EdgeBundle b = generate_bundle(spec, 60, 0.05, 11);
        REQUIRE(b.size() == 60);
        for (const Edge& e : b.edges) {
            CHECK(e.xs[0] == 0.0);
            CHECK(e.ys[0] == 0.0);
            CHECK(e.hs[0] == 0.0);
            CHECK(e.waypoint_count() == waypoint_count(e.duration, b.dt));
            CHECK(e.duration >= spec.duration_bounds.lo);
            CHECK(e.duration <= spec.duration_bounds.hi);
            for (int d = 0; d < spec.control_dim; ++d)
                CHECK(spec.control_bounds[d].contains(e.control[d]));
            // Arc length is the polyline length of the waypoints.
            double len = 0.0;
            for (int i = 1; i < e.waypoint_count(); ++i)
                len += std::hypot(e.xs[i] - e.xs[i - 1], e.ys[i] - e.ys[i - 1]);
            CHECK(e.arc_length == doctest::Approx(len).epsilon(1e-12));
            // End state matches the last waypoint.
            const State last = e.waypoint(e.waypoint_count() - 1);
            CHECK(e.end_state == last);
        }
        // Determinism.
        const EdgeBundle b2 = generate_bundle(spec, 60, 0.05, 11);
        for (int i = 0; i < 60; ++i) {
            CHECK(b.edges[i].control == b2.edges[i].control);
            CHECK(b.edges[i].duration == b2.edges[i].duration);
            CHECK(b.edges[i].xs == b2.edges[i].xs);
        }
        const EdgeBundle b3 = generate_bundle(spec, 60, 0.05, 12);
        CHECK(b.edges[0].xs != b3.edges[0].xs);
    }
}

TEST_CASE("bundle round-trips bit-exactly") {
    const SystemSpec spec = make_car_with_trailer();
    const EdgeBundle b = generate_bundle(spec, 40, 0.05, 3);
    const std::string path = temp_path("rt.bboe");
    save_bundle(b, path);
    const EdgeBundle r = load_bundle(path);
    CHECK(r.system.id == spec.id);
    CHECK(r.dt == b.dt);
    CHECK(r.seed == b.seed);
    REQUIRE(r.size() == b.size());
    for (int i = 0; i < b.size(); ++i) {
        const Edge& x = b.edges[i];
        const Edge& y = r.edges[i];
        CHECK(x.control == y.control);
        CHECK(x.duration == y.duration);
        CHECK(x.xs == y.xs);
        CHECK(x.ys == y.ys);
        CHECK(x.hs == y.hs);
        CHECK(x.es == y.es);
        CHECK(x.end_state == y.end_state);
        CHECK(x.arc_length == y.arc_length);
    }
    CHECK(r.end_xs == b.end_xs);
    CHECK(r.start_es == b.start_es);
    std::remove(path.c_str());
}

TEST_CASE("load reports typed errors") {
    const std::string path = temp_path("bad.bboe");

    SUBCASE("missing file") {
        std::remove(path.c_str());
        CHECK_THROWS_AS(load_bundle(path), BundleIoError);
        try {
            load_bundle(path);
        } catch (const BundleIoError& e) {
            CHECK(e.kind == BundleError::MissingFile);
        }
    }

    const SystemSpec spec = make_diff_drive();
    const EdgeBundle b = generate_bundle(spec, 5, 0.05, 1);
    save_bundle(b, path);
    auto bytes = slurp(path);

    SUBCASE("bad magic") {
        bytes[0] = 'X';
        spit(path, bytes);
        try {
            load_bundle(path);
            FAIL("expected throw");
        } catch (const BundleIoError& e) {
            CHECK(e.kind == BundleError::BadFormat);
        }
    }

    SUBCASE("flipped payload byte fails the checksum") {
        bytes[bytes.size() / 2] ^= 0x40;
        spit(path, bytes);
        try {
            load_bundle(path);
            FAIL("expected throw");
        } catch (const BundleIoError& e) {
            CHECK(e.kind == BundleError::ChecksumMismatch);
        }
    }

    SUBCASE("truncation") {
        bytes.resize(bytes.size() - 9);
        spit(path, bytes);
        try {
            load_bundle(path);
            FAIL("expected throw");
        } catch (const BundleIoError& e) {
            CHECK((e.kind == BundleError::Truncated ||
                   e.kind == BundleError::ChecksumMismatch));
        }
    }

    SUBCASE("version bump with a recomputed checksum") {
        // Version lives after the 4-byte magic. Rewrite it, then fix the
        // CRC (last 4 bytes, little-endian) so only the version check can
        // object.
        bytes[4] = 99;
        std::vector<char> body(bytes.begin(), bytes.end() - 4);
        const auto crc = static_cast<std::uint32_t>(::crc32(
            0L, reinterpret_cast<const unsigned char*>(body.data()),
            static_cast<unsigned>(body.size())));
        for (int i = 0; i < 4; ++i)
            bytes[bytes.size() - 4 + i] =
                static_cast<char>((crc >> (8 * i)) & 0xff);
        spit(path, bytes);
        try {
            load_bundle(path);
            FAIL("expected throw");
        } catch (const BundleIoError& e) {
            CHECK(e.kind == BundleError::VersionMismatch);
        }
    }

    std::remove(path.c_str());
}

TEST_CASE("transform is rigid and anchors the first waypoint exactly") {
    const SystemSpec spec = make_car_with_trailer();
    const EdgeBundle b = generate_bundle(spec, 30, 0.05, 21);
    Rng rng(77);
    for (const Edge& e : b.edges) {
        State pose = make_state({rng.uniform(0.0, 20.0), rng.uniform(0.0, 20.0),
                                 wrap_angle(rng.uniform(-kPi, kPi)),
                                 wrap_angle(rng.uniform(-kPi, kPi))});
        const EdgeInstance inst = transform_edge(spec, e, pose);
        REQUIRE(inst.waypoint_count() == e.waypoint_count());
        CHECK(inst.source_edge_id == e.id);
        // Exact first-waypoint anchoring.
        CHECK(inst.first_state() == pose);
        // Rigid: inter-waypoint distances are preserved.
        for (int i = 1; i < e.waypoint_count(); ++i) {
            const double canon = std::hypot(e.xs[i] - e.xs[i - 1],
                                            e.ys[i] - e.ys[i - 1]);
            const double placed = std::hypot(inst.xs[i] - inst.xs[i - 1],
                                             inst.ys[i] - inst.ys[i - 1]);
            CHECK(placed == doctest::Approx(canon).epsilon(1e-9));
        }
        CHECK(inst.arc_length == doctest::Approx(e.arc_length).epsilon(1e-9));
        // Heading increments preserved modulo wrapping.
        for (int i = 0; i < e.waypoint_count(); ++i) {
            const double dh = wrap_angle(inst.hs[i] - pose[2] - e.hs[i]);
            CHECK(std::abs(dh) < 1e-9);
        }
    }
}

TEST_CASE("transform round-trip through the inverse pose") {
    // Place at pose, then read the instance's end state; placing the same
    // edge at the identity and composing with the pose transform must agree
    // to 1e-9.
    const SystemSpec spec = make_unicycle();
    const EdgeBundle b = generate_bundle(spec, 20, 0.05, 5);
    const State pose = make_state({4.0, 7.0, 1.1});
    const double c = std::cos(1.1), s = std::sin(1.1);
    for (const Edge& e : b.edges) {
        const EdgeInstance inst = transform_edge(spec, e, pose);
        for (int i = 0; i < e.waypoint_count(); ++i) {
            // Manual compose.
            const double mx = c * e.xs[i] - s * e.ys[i] + 4.0;
            const double my = s * e.xs[i] + c * e.ys[i] + 7.0;
            CHECK(std::abs(inst.xs[i] - mx) < 1e-9);
            CHECK(std::abs(inst.ys[i] - my) < 1e-9);
            // Un-place back to canonical.
            const double ux = c * (inst.xs[i] - 4.0) + s * (inst.ys[i] - 7.0);
            const double uy = -s * (inst.xs[i] - 4.0) + c * (inst.ys[i] - 7.0);
            CHECK(std::abs(ux - e.xs[i]) < 1e-9);
            CHECK(std::abs(uy - e.ys[i]) < 1e-9);
        }
    }
}

TEST_CASE("transform agrees with re-integration from the pose") {
    // The rigid placement of a canonical edge must equal integrating the
    // edge's control directly from the pose state (SE(2) equivariance of the
    // dynamics). The trailer dimension only matches when the canonical
    // trailer offset equals the pose's, which canonical_anchor encodes.
    for (auto id :
         {SystemId::DiffDrive, SystemId::CarWithTrailer}) {
        const SystemSpec spec = make_system(id);
        const EdgeBundle b = generate_bundle(spec, 25, 0.05, 9);
        State pose = make_state({3.0, 12.0, -2.1});
        if (spec.state_dim == 4) pose.push_back(wrap_angle(-2.1 + 0.37));
        for (const Edge& e : b.edges) {
            State start = pose;
            if (spec.state_dim == 4) {
                // Give the pose the same trailer offset this edge was
                // generated with, so re-integration is exactly comparable.
                start[3] = wrap_angle(pose[2] + e.start_extra());
            }
            const EdgeInstance inst = transform_edge(spec, e, start);
            const auto traj = integrate(spec, start, e.control, e.duration,
                                        b.dt);
            REQUIRE(static_cast<int>(traj.size()) == inst.waypoint_count());
            for (std::size_t i = 0; i < traj.size(); ++i) {
                const State got = inst.waypoint(static_cast<int>(i));
                for (int d = 0; d < spec.state_dim; ++d) {
                    const double diff =
                        spec.angular[d] ? wrap_angle(got[d] - traj[i][d])
                                        : got[d] - traj[i][d];
                    CHECK(std::abs(diff) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("near_edges matches a linear-scan oracle and grows with theta") {
    const SystemSpec spec = make_car_with_trailer();
    const EdgeBundle b = generate_bundle(spec, 200, 0.05, 33);
    Rng rng(5);
    std::vector<int> prev;
    const State x = make_state({10.0, 10.0, 0.8, 1.2});
    for (double theta : {0.05, 0.2, 0.5, 1.0, 2.0, 4.0}) {
        const auto ids = near_edges(b, x, theta);
        // Oracle: filter on the non-pose submetric against the canonical
        // anchor state.
        const State anchor = canonical_anchor(spec, x);
        std::vector<int> expect;
        for (const Edge& e : b.edges) {
            State start = e.waypoint(0);
            if (non_pose_distance(spec, start, anchor) <= theta)
                expect.push_back(e.id);
        }
        CHECK(ids == expect);
        // Monotone growth.
        CHECK(ids.size() >= prev.size());
        for (int id : prev)
            CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());
        prev = ids;
    }

    // Pose-only systems match the whole bundle at any theta.
    const SystemSpec dd = make_diff_drive();
    const EdgeBundle bd = generate_bundle(dd, 50, 0.05, 1);
    const State xd = make_state({1.0, 2.0, 3.0});
    CHECK(near_edges(bd, xd, 1e-12).size() == 50);
    std::vector<int> scratch;
    CHECK(near_edges_ref(bd, xd, 0.5, scratch).size() == 50);
}

TEST_CASE("make_instance wraps rollout waypoints") {
    const SystemSpec spec = make_unicycle();
    Control u;
    u.push_back(0.9);
    u.push_back(-0.3);
    const State x0 = make_state({2.0, 2.0, 0.4});
    const auto traj = integrate(spec, x0, u, 1.5, 0.05);
    const EdgeInstance inst = make_instance(spec, traj);
    CHECK(inst.source_edge_id == -1);
    REQUIRE(inst.waypoint_count() == static_cast<int>(traj.size()));
    CHECK(inst.first_state() == x0);
    double len = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        len += std::hypot(traj[i][0] - traj[i - 1][0],
                          traj[i][1] - traj[i - 1][1]);
    CHECK(inst.arc_length == doctest::Approx(len).epsilon(1e-12));
}

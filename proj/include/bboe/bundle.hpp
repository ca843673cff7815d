#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bboe/dynamics.hpp"
#include "bboe/types.hpp"

namespace bboe {

/// One precomputed forward propagation in the canonical frame (the pose dims
/// of the first waypoint are exactly zero). Waypoints are stored
/// structure-of-arrays; es is empty for pose-only systems.
struct Edge {
    int id = 0;
    Control control;
    double duration = 0.0;
    std::vector<double> xs, ys, hs, es;
    State end_state;
    double arc_length = 0.0;

    int waypoint_count() const { return static_cast<int>(xs.size()); }
    State waypoint(int i) const;
    /// Canonical start value of the non-pose dimension (0 when absent).
    double start_extra() const { return es.empty() ? 0.0 : es[0]; }
};

inline constexpr std::uint32_t kBundleFormatVersion = 1;

struct EdgeBundle {
    SystemSpec system;
    double dt = 0.05;
    std::uint64_t seed = 0;
    std::uint32_t version = kBundleFormatVersion;
    std::vector<Edge> edges;

    // Flattened canonical end states (and start extras), rebuilt after
    // generation/load; these feed the batched goal-key kernel.
    std::vector<double> end_xs, end_ys, end_hs, end_es, start_es;
    std::vector<int> all_ids;

    void rebuild_caches();
    int size() const { return static_cast<int>(edges.size()); }
};

/// An edge rigidly placed into the world frame at some anchor pose.
struct EdgeInstance {
    int source_edge_id = -1;
    int state_dim = 3;
    std::vector<double> xs, ys, hs, es;
    double arc_length = 0.0;

    int waypoint_count() const { return static_cast<int>(xs.size()); }
    State waypoint(int i) const;
    State first_state() const { return waypoint(0); }
    State end_state() const { return waypoint(waypoint_count() - 1); }
};

EdgeBundle generate_bundle(const SystemSpec& spec, int count, double dt,
                           std::uint64_t seed);

enum class BundleError {
    MissingFile,
    BadFormat,
    VersionMismatch,
    Truncated,
    ChecksumMismatch,
    Io,
};

struct BundleIoError : std::runtime_error {
    BundleError kind;
    BundleIoError(BundleError kind, const std::string& msg)
        : std::runtime_error(msg), kind(kind) {}
};

void save_bundle(const EdgeBundle& bundle, const std::string& path);
EdgeBundle load_bundle(const std::string& path);

/// Places the edge at pose_state: positions rotated by the pose heading and
/// translated to the pose position; headings offset by the pose heading;
/// non-pose dims offset so the first waypoint equals pose_state exactly.
/// Angular dims are renormalized.
void transform_edge_into(const SystemSpec& spec, const Edge& edge,
                         const State& pose_state, EdgeInstance& out);
EdgeInstance transform_edge(const SystemSpec& spec, const Edge& edge,
                            const State& pose_state);

/// The canonical-frame state x_near anchors: zero pose, with angular
/// non-pose dims expressed relative to the heading. An edge whose canonical
/// start matches this exactly transforms to a dynamically exact trajectory
/// through x_near.
State canonical_anchor(const SystemSpec& spec, const State& x_near);

/// Wraps an integrated waypoint sequence (e.g. a Monte-Carlo rollout) as an
/// instance; arc length recomputed from positions, source id -1.
EdgeInstance make_instance(const SystemSpec& spec,
                           const std::vector<State>& waypoints);

/// Ids of edges whose canonical start lies within theta of x_near under the
/// non-pose submetric, ascending. Pose-only systems match everything.
std::vector<int> near_edges(const EdgeBundle& bundle, const State& x_near,
                            double theta);

/// Allocation-free variant: returns bundle.all_ids for pose-only systems,
/// otherwise fills and returns scratch.
const std::vector<int>& near_edges_ref(const EdgeBundle& bundle,
                                       const State& x_near, double theta,
                                       std::vector<int>& scratch);

}  // namespace bboe

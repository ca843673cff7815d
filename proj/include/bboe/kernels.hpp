#pragma once

#include <cstddef>
#include <cstdint>

// Batched arithmetic kernels for the planner's inner loops: placing canonical
// edge geometry at a world pose, scoring edge end states against a target
// state, and testing waypoint sets against obstacles. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2 variant selected at
// runtime. The two are equivalence-tested; callers go through active().
//
// All state arrays are structure-of-arrays (one contiguous double array per
// state dimension).

namespace bboe::kernels {

/// Planar rigid placement: rotation (c = cos, s = sin) followed by
/// translation (tx, ty).
struct Se2 {
    double c = 1.0;
    double s = 0.0;
    double tx = 0.0;
    double ty = 0.0;
};

/// Inputs for goal_keys: transform canonical end states by an anchor pose and
/// measure the weighted metric distance of each result to a target state.
struct GoalKeyArgs {
    Se2 place;                    ///< SE(2) placement at the anchor pose
    double pose_heading = 0.0;    ///< heading added to canonical headings
    double pose_extra = 0.0;      ///< anchor value of the non-pose dimension
    double target_x = 0.0;
    double target_y = 0.0;
    double target_heading = 0.0;
    double target_extra = 0.0;
    double wx = 1.0, wy = 1.0, wh = 1.0, we = 1.0;  ///< metric weights
    bool has_extra = false;
    bool extra_angular = false;
};

struct Funcs {
    const char* name;

    /// out_{x,y}[i] = rotate+translate of (xs[i], ys[i]). In-place allowed.
    void (*se2_transform)(const double* xs, const double* ys, std::size_t n,
                          const Se2& t, double* out_x, double* out_y);

    /// out[i] = metric distance from the placed end state of edge i to the
    /// target. end_e/start_e may be null when has_extra is false; the extra
    /// dimension of the placed edge is end_e[i] + (pose_extra - start_e[i]).
    void (*goal_keys)(const double* end_x, const double* end_y,
                      const double* end_h, const double* end_e,
                      const double* start_e, std::size_t n,
                      const GoalKeyArgs& args, double* out);

    /// out[i] = weighted squared metric distance from state i to q. dim is 3
    /// or 4; dimensions 2 and 3 use wrapped angular differences (dimension 3
    /// only when extra_angular).
    void (*weighted_sq_dist)(const double* xs, const double* ys,
                             const double* hs, const double* es, std::size_t n,
                             const double* q, const double* w, int dim,
                             bool extra_angular, double* out);

    /// Index of the smallest element; lowest index wins ties. n > 0.
    std::size_t (*argmin)(const double* v, std::size_t n);

    /// True iff any point lies strictly within distance r of (cx, cy).
    bool (*any_in_circle)(const double* xs, const double* ys, std::size_t n,
                          double cx, double cy, double r);

    /// True iff any point lies strictly within distance `inflate` of the
    /// axis-aligned rectangle [minx, maxx] x [miny, maxy].
    bool (*any_in_rect)(const double* xs, const double* ys, std::size_t n,
                        double minx, double miny, double maxx, double maxy,
                        double inflate);

    /// True iff any point, inflated by margin, pokes outside the box.
    bool (*any_outside_bounds)(const double* xs, const double* ys,
                               std::size_t n, double minx, double miny,
                               double maxx, double maxy, double margin);
};

enum class Impl { Scalar, Avx2 };

/// Reference implementation; always available.
const Funcs& scalar();

bool avx2_supported();

/// AVX2 implementation; only valid when avx2_supported().
const Funcs& avx2();

/// Runtime-selected implementation. Defaults to the best supported variant;
/// the environment variable BBOE_KERNELS=scalar|avx2 overrides.
const Funcs& active();
Impl active_impl();

/// Force a specific implementation (testing hook). Throws if unsupported.
void set_active(Impl impl);

}  // namespace bboe::kernels

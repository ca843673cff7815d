#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bboe/types.hpp"

namespace bboe {

enum class SystemId : std::uint32_t {
    DiffDrive = 0,
    Unicycle = 1,
    CarWithTrailer = 2,
};

/// Static description of a robot system: dimensions, bounds, and the weighted
/// metric. Pose dims are fixed at (x, y, heading) = state indices 0, 1, 2;
/// any further dims are articulation (the car's trailer heading).
struct SystemSpec {
    SystemId id = SystemId::DiffDrive;
    std::string name;
    int state_dim = 3;
    int control_dim = 2;
    std::array<bool, kMaxDim> angular{};     ///< per-state-dim wrap flag
    std::array<Interval, kMaxDim> control_bounds{};
    Interval duration_bounds{0.5, 3.0};
    std::array<double, kMaxDim> metric_weights{};
    // Car geometry (ignored by the differential-drive systems).
    double wheelbase = 0.5;       ///< L: rear axle to front axle
    double trailer_dist = 1.0;    ///< D: hitch to trailer axle

    int pose_dim_count() const { return 3; }
    int non_pose_dims() const { return state_dim - 3; }
};

SystemSpec make_diff_drive();
SystemSpec make_unicycle();
SystemSpec make_car_with_trailer();
SystemSpec make_system(SystemId id);

/// Parses "diffdrive" | "unicycle" | "car-trailer" (case-sensitive).
std::optional<SystemId> system_from_name(const std::string& name);

/// dx/dt = f(x, u) for the system's kinematics.
State derivative(const SystemSpec& spec, const State& x, const Control& u);

/// Fixed-step RK4 under constant control. Returns waypoints at
/// t = 0, dt, 2dt, ..., duration (the last step may be shorter); the first
/// waypoint is x0 exactly and angular dims are renormalized after each step.
std::vector<State> integrate(const SystemSpec& spec, const State& x0,
                             const Control& u, double duration, double dt);

/// Number of waypoints integrate() produces: ceil(duration/dt) + 1.
int waypoint_count(double duration, double dt);

Control sample_control(const SystemSpec& spec, Rng& rng);

double sample_duration(const SystemSpec& spec, Rng& rng);

/// Uniform random state: positions inside the given workspace intervals,
/// angular dims uniform over the circle.
State sample_state(const SystemSpec& spec, const Interval& bx,
                   const Interval& by, Rng& rng);

/// Weighted metric: sqrt of the weighted sum of squared per-dimension
/// differences, angular dims wrapped to (-pi, pi].
double distance(const SystemSpec& spec, const State& a, const State& b);

/// Same metric restricted to the non-pose dimensions (indices >= 3).
double non_pose_distance(const SystemSpec& spec, const State& a, const State& b);

}  // namespace bboe

#include "bboe/dynamics.hpp"

#include <cassert>
#include <cmath>

namespace bboe {

SystemSpec make_diff_drive() {
    SystemSpec s;
    s.id = SystemId::DiffDrive;
    s.name = "diffdrive";
    s.state_dim = 3;
    s.control_dim = 2;
    s.angular = {false, false, true, false};
    s.control_bounds = {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}};
    s.metric_weights = {1.0, 1.0, 0.5, 0.0};
    return s;
}

SystemSpec make_unicycle() {
    SystemSpec s = make_diff_drive();
    s.id = SystemId::Unicycle;
    s.name = "unicycle";
    return s;
}

SystemSpec make_car_with_trailer() {
    SystemSpec s;
    s.id = SystemId::CarWithTrailer;
    s.name = "car-trailer";
    s.state_dim = 4;
    s.control_dim = 2;
    s.angular = {false, false, true, true};
    s.control_bounds = {Interval{-1.0, 1.0}, Interval{-0.6, 0.6}};
    s.metric_weights = {1.0, 1.0, 0.5, 0.5};
    return s;
}

SystemSpec make_system(SystemId id) {
    switch (id) {
        case SystemId::DiffDrive: return make_diff_drive();
        case SystemId::Unicycle: return make_unicycle();
        case SystemId::CarWithTrailer: return make_car_with_trailer();
    }
    assert(false && "unknown system id");
    return make_diff_drive();
}

std::optional<SystemId> system_from_name(const std::string& name) {
    if (name == "diffdrive") return SystemId::DiffDrive;
    if (name == "unicycle") return SystemId::Unicycle;
    if (name == "car-trailer") return SystemId::CarWithTrailer;
    return std::nullopt;
}

State derivative(const SystemSpec& spec, const State& x, const Control& u) {
    assert(x.size() == spec.state_dim && u.size() == spec.control_dim);
    State dx = State::zeros(spec.state_dim);
    const double v = u[0];
    const double heading = x[2];
    dx[0] = v * std::cos(heading);
    dx[1] = v * std::sin(heading);
    switch (spec.id) {
        case SystemId::DiffDrive:
        case SystemId::Unicycle:
            dx[2] = u[1];
            break;
        case SystemId::CarWithTrailer:
            dx[2] = (v / spec.wheelbase) * std::tan(u[1]);
            dx[3] = (v / spec.trailer_dist) * std::sin(heading - x[3]);
            break;
    }
    return dx;
}

namespace {

State rk4_step(const SystemSpec& spec, const State& x, const Control& u,
               double h) {
    const int n = spec.state_dim;
    const State k1 = derivative(spec, x, u);
    State tmp = x;
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const State k2 = derivative(spec, tmp, u);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const State k3 = derivative(spec, tmp, u);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    const State k4 = derivative(spec, tmp, u);
    State out = x;
    for (int i = 0; i < n; ++i) {
        out[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (spec.angular[i]) out[i] = wrap_angle(out[i]);
    }
    return out;
}

}  // namespace

int waypoint_count(double duration, double dt) {
    // Guard against duration/dt landing a hair above an integer (e.g.
    // 3.0/0.05 evaluates to 60.000000000000007).
    return static_cast<int>(std::ceil(duration / dt - 1e-9)) + 1;
}

std::vector<State> integrate(const SystemSpec& spec, const State& x0,
                             const Control& u, double duration, double dt) {
    assert(duration > 0.0 && dt > 0.0 && dt <= duration);
    const int count = waypoint_count(duration, dt);
    std::vector<State> wps;
    wps.reserve(static_cast<std::size_t>(count));
    wps.push_back(x0);
    const int steps = count - 1;
    for (int s = 1; s <= steps; ++s) {
        const double h = (s == steps) ? duration - (steps - 1) * dt : dt;
        wps.push_back(rk4_step(spec, wps.back(), u, h));
    }
    return wps;
}

Control sample_control(const SystemSpec& spec, Rng& rng) {
    Control u = Control::zeros(spec.control_dim);
    for (int i = 0; i < spec.control_dim; ++i)
        u[i] = rng.uniform(spec.control_bounds[static_cast<std::size_t>(i)]);
    return u;
}

double sample_duration(const SystemSpec& spec, Rng& rng) {
    return rng.uniform(spec.duration_bounds);
}

State sample_state(const SystemSpec& spec, const Interval& bx,
                   const Interval& by, Rng& rng) {
    State x = State::zeros(spec.state_dim);
    x[0] = rng.uniform(bx);
    x[1] = rng.uniform(by);
    for (int i = 2; i < spec.state_dim; ++i) {
        assert(spec.angular[i]);
        x[i] = wrap_angle(rng.uniform(-kPi, kPi));
    }
    return x;
}

namespace {

double weighted_sq(const SystemSpec& spec, const State& a, const State& b,
                   int first_dim) {
    double acc = 0.0;
    for (int i = first_dim; i < spec.state_dim; ++i) {
        double d = a[i] - b[i];
        if (spec.angular[i]) d = wrap_angle(d);
        acc += spec.metric_weights[static_cast<std::size_t>(i)] * d * d;
    }
    return acc;
}

}  // namespace

double distance(const SystemSpec& spec, const State& a, const State& b) {
    return std::sqrt(weighted_sq(spec, a, b, 0));
}

double non_pose_distance(const SystemSpec& spec, const State& a,
                         const State& b) {
    return std::sqrt(weighted_sq(spec, a, b, 3));
}

}  // namespace bboe

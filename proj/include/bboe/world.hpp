#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bboe/dynamics.hpp"
#include "bboe/types.hpp"

namespace bboe {

struct EdgeInstance;

struct Obstacle {
    enum class Kind { Circle, Rect };
    Kind kind = Kind::Circle;
    // Circle
    double cx = 0.0, cy = 0.0, r = 0.0;
    // Axis-aligned rectangle
    double minx = 0.0, miny = 0.0, maxx = 0.0, maxy = 0.0;

    static Obstacle circle(double cx, double cy, double r);
    static Obstacle rect(double minx, double miny, double maxx, double maxy);

    /// True iff a disc of radius rr at (px, py) overlaps this obstacle
    /// (open intersection: touching is free).
    bool hits_disc(double px, double py, double rr) const;
};

/// Bounded 2D workspace. The robot is a disc of robot_radius; collision is
/// open (tangency is free) and the goal disc is closed.
struct World {
    Interval bx{0.0, 20.0};
    Interval by{0.0, 20.0};
    std::vector<Obstacle> obstacles;
    State start;
    double goal_x = 0.0, goal_y = 0.0;
    double goal_radius = 1.0;
    double robot_radius = 0.3;
    std::string system_name;  ///< system the start state belongs to
};

enum class DifficultyLevel { Easy, Medium, Hard, VeryHard };

struct Difficulty {
    DifficultyLevel level = DifficultyLevel::Easy;
    int obstacle_count = 8;
    Interval size_range{0.4, 1.5};

    static Difficulty at(DifficultyLevel level);
};

std::optional<DifficultyLevel> difficulty_from_name(const std::string& name);
std::string difficulty_name(DifficultyLevel level);

bool state_in_collision(const World& world, const State& x);

/// Waypoint-wise collision check of an instantiated edge (no sub-waypoint
/// interpolation; dt bounds the resolution).
bool segment_collision_free(const World& world, const EdgeInstance& instance);

/// Closed goal disc on workspace position; heading unconstrained.
bool goal_region_reached(const World& world, const State& x);

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Seeded world generation. Obstacles are drawn from a per-seed stream and
/// accepted independently of the difficulty level, so the obstacle set of a
/// lower level is a prefix of every higher level's set for the same seed
/// (free space shrinks monotonically with difficulty). An obstacle is
/// resampled if it overlaps the robot disc at the start or at the goal
/// center. Throws ScenarioError after 10^4 consecutive rejections.
World generate_scenario(const SystemSpec& spec, const Difficulty& difficulty,
                        std::uint64_t seed);

void save_world(const World& world, const std::string& path);
World load_world(const std::string& path);

}  // namespace bboe

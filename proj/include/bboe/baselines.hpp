#pragma once

#include "bboe/planner.hpp"

namespace bboe {

struct MonteCarloParams {
    int prop_attempts_per_expand = 10;  ///< rollouts scored per expansion
    double goal_bias = 0.05;
};

/// Goal-biased Monte-Carlo RRT: unidirectional tree; per expansion, roll out
/// prop_attempts_per_expand random (control, duration) pairs from the node
/// nearest the target and keep the collision-free rollout ending closest to
/// it. No bundle involved.
PlanResult plan_rrt(const PlannerConfig& config, const World& world,
                    const SystemSpec& spec, double dt,
                    const MonteCarloParams& params);

/// Bidirectional baseline: the plan_bboe control flow (reverse exploration,
/// shrinking radius, priority queue, exploitation schedule) with every
/// bundle propagation replaced by a best-of-k online Monte-Carlo rollout
/// toward the site's desired state.
PlanResult plan_gbrrt(const PlannerConfig& config, const World& world,
                      const SystemSpec& spec, double dt,
                      const MonteCarloParams& params);

enum class AblationKind {
    UniBBoEWithBias,    ///< forward tree only, biased edge selection
    UniBBoENoStrategy,  ///< forward tree only, best of `candidates` random edges
    BiBBoENoStrategy,   ///< bidirectional, best of `candidates` random edges
};

struct AblationVariant {
    AblationKind kind = AblationKind::UniBBoEWithBias;
    double k_bias = 0.85;  ///< UniBBoEWithBias only
    int candidates = 100;  ///< *NoStrategy only
};

PlanResult plan_ablation(const AblationVariant& variant,
                         const PlannerConfig& config, const World& world,
                         const EdgeBundle& bundle);

}  // namespace bboe

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bboe/baselines.hpp"
#include "bboe/planner.hpp"
#include "bboe/world.hpp"

namespace bboe {

/// Salt mixed into a trial seed to derive the planner's rng seed, shared by
/// the single-plan and batch paths so their rows agree.
inline constexpr std::uint64_t kPlannerSeedSalt = 0xb0a7;

struct TrialResult {
    std::string planner_id;
    DifficultyLevel difficulty = DifficultyLevel::Easy;
    std::uint64_t seed = 0;
    bool success = false;
    std::optional<double> time_s;  ///< present iff success
    std::optional<double> cost_m;  ///< present iff success
    long long iterations = 0;
    long long prop_attempts = 0;
    std::string axis_value;  ///< set by ablation sweeps
};

struct CellAggregate {
    std::string planner_id;
    DifficultyLevel difficulty = DifficultyLevel::Easy;
    std::string axis_value;
    int trials = 0;
    int successes = 0;
    double time_mean = 0.0, time_min = 0.0, time_max = 0.0;
    double cost_mean = 0.0, cost_min = 0.0, cost_max = 0.0;

    double success_rate() const {
        return trials == 0 ? 0.0 : static_cast<double>(successes) / trials;
    }
};

/// Known planner ids: bboe, bboe75, bboe85, bboe95, rrt, gbrrt, uni-bias,
/// uni-nostrategy, bi-nostrategy.
bool planner_id_valid(const std::string& id);

/// Runs one planner by id. bundle is required for bundle-based planners and
/// ignored by rrt/gbrrt (which use spec + dt). The bboeNN ids override
/// k_bias_exploit; everything else comes from config.
PlanResult run_planner(const std::string& planner_id,
                       const PlannerConfig& config, const World& world,
                       const EdgeBundle* bundle, const SystemSpec& spec,
                       double dt, const MonteCarloParams& mc);

enum class WorldSeedMode { PerTrial, Fixed };

struct BenchOptions {
    std::vector<std::string> planners;
    std::vector<DifficultyLevel> difficulties;
    int trials = 20;
    std::uint64_t seed0 = 0;
    WorldSeedMode world_seed_mode = WorldSeedMode::PerTrial;
    int jobs = 1;
    PlannerConfig config;
    MonteCarloParams mc;
};

/// Runs every (planner, difficulty, trial) cell, trials in parallel across
/// `jobs` threads. Trial t uses seed seed0 + t: the world comes from that
/// seed (or seed0 when fixed) and the planner rng from
/// mix_seed(seed, kPlannerSeedSalt). A trial whose planner throws is
/// recorded as an unsuccessful row. Rows are returned in task order,
/// independent of scheduling.
std::vector<TrialResult> run_bench(const BenchOptions& options,
                                   const SystemSpec& spec,
                                   const EdgeBundle* bundle, double dt);

/// One trial, same seed derivation as run_bench.
TrialResult run_trial(const std::string& planner_id,
                      DifficultyLevel difficulty, std::uint64_t seed,
                      std::uint64_t world_seed, const PlannerConfig& config,
                      const MonteCarloParams& mc, const SystemSpec& spec,
                      const EdgeBundle* bundle, double dt);

/// Aggregates rows per (planner, difficulty, axis_value) in first-appearance
/// order; time/cost stats are over successful rows only.
std::vector<CellAggregate> aggregate_rows(const std::vector<TrialResult>& rows);

/// CSV with header planner,difficulty,seed,success,time_s,cost_m,iterations,
/// prop_attempts; when axis_name is nonempty an extra leading column carries
/// each row's axis_value. Doubles are written with 17 significant digits so
/// they round-trip exactly.
void write_csv(const std::vector<TrialResult>& rows, const std::string& path,
               const std::string& axis_name = "");
std::vector<TrialResult> read_csv(const std::string& path);

/// The aggregate table as printed by the CLI (mean [min, max] cells).
std::string format_report(const std::vector<CellAggregate>& cells);

}  // namespace bboe

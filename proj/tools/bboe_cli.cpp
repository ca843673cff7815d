#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bboe/bench.hpp"

namespace {

using namespace bboe;

constexpr std::uint64_t kDefaultBundleSeed = 0;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string default_bundle_path(const std::string& system, int edges) {
    const char* dir = std::getenv("BBOE_BUNDLE_DIR");
    const std::string base = (dir && *dir) ? dir : ".";
    return base + "/" + system + "-" + std::to_string(edges) + ".bboe";
}

SystemSpec parse_system(const std::string& name) {
    const auto id = system_from_name(name);
    if (!id)
        throw UsageError("unknown system '" + name +
                         "' (expected diffdrive, unicycle, or car-trailer)");
    return make_system(*id);
}

DifficultyLevel parse_difficulty(const std::string& name) {
    const auto level = difficulty_from_name(name);
    if (!level)
        throw UsageError("unknown difficulty '" + name +
                         "' (expected easy, medium, hard, or veryhard)");
    return *level;
}

/// Loads the bundle for (system, edges, dt): an explicit path wins, then the
/// canonical file under BBOE_BUNDLE_DIR (or the working directory), and
/// otherwise the bundle is generated in memory. Load/generation time is
/// reported here and never counted against a trial.
EdgeBundle resolve_bundle(const SystemSpec& spec, int edges, double dt,
                          const std::string& explicit_path) {
    const auto t0 = std::chrono::steady_clock::now();
    auto secs = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             t0)
            .count();
    };
    const std::string path = explicit_path.empty()
                                 ? default_bundle_path(spec.name, edges)
                                 : explicit_path;
    if (!explicit_path.empty() || std::filesystem::exists(path)) {
        EdgeBundle b = load_bundle(path);
        if (b.system.id != spec.id)
            throw UsageError("bundle " + path + " holds system '" +
                             b.system.name + "', not '" + spec.name + "'");
        std::fprintf(stderr, "bundle: loaded %d edges from %s in %.3f s\n",
                     b.size(), path.c_str(), secs());
        return b;
    }
    EdgeBundle b = generate_bundle(spec, edges, dt, kDefaultBundleSeed);
    std::fprintf(stderr,
                 "bundle: %s not found; generated %d edges in memory "
                 "(dt %g, seed %llu) in %.3f s\n",
                 path.c_str(), b.size(), dt,
                 static_cast<unsigned long long>(kDefaultBundleSeed), secs());
    return b;
}

bool planner_uses_bundle(const std::string& id) {
    return id != "rrt" && id != "gbrrt";
}

void print_rows(const std::vector<TrialResult>& rows) {
    std::printf(
        "planner,difficulty,seed,success,time_s,cost_m,iterations,"
        "prop_attempts\n");
    for (const auto& r : rows) {
        std::printf("%s,%s,%llu,%d,", r.planner_id.c_str(),
                    difficulty_name(r.difficulty).c_str(),
                    static_cast<unsigned long long>(r.seed), r.success ? 1 : 0);
        if (r.time_s) std::printf("%.17g", *r.time_s);
        std::printf(",");
        if (r.cost_m) std::printf("%.17g", *r.cost_m);
        std::printf(",%lld,%lld\n", r.iterations, r.prop_attempts);
    }
}

void dump_path_waypoints(const Path& path, const std::string& out) {
    std::ofstream os(out, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for write: " + out);
    const int dim = path.states.empty() ? 3 : path.states.front().size();
    const char* names[] = {"x", "y", "theta", "theta_t"};
    os << "i";
    for (int d = 0; d < dim; ++d) os << "," << names[d];
    os << "\n";
    char buf[64];
    long long row = 0;
    auto emit = [&](const State& s) {
        os << row++;
        for (int d = 0; d < s.size(); ++d) {
            std::snprintf(buf, sizeof buf, "%.17g", s[d]);
            os << "," << buf;
        }
        os << "\n";
    };
    if (!path.states.empty()) emit(path.states.front());
    for (const EdgeInstance& inst : path.instances) {
        // The first waypoint duplicates the previous instance's end state.
        for (int i = 1; i < inst.waypoint_count(); ++i)
            emit(inst.waypoint(i));
    }
}

int cmd_bundle_generate(const std::string& system, int edges, double dt,
                        std::uint64_t seed, std::string out) {
    const SystemSpec spec = parse_system(system);
    if (out.empty()) out = default_bundle_path(spec.name, edges);
    const auto t0 = std::chrono::steady_clock::now();
    const EdgeBundle bundle = generate_bundle(spec, edges, dt, seed);
    save_bundle(bundle, out);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("wrote %d edges to %s in %.3f s\n", bundle.size(), out.c_str(),
                secs);
    return 0;
}

struct PlannerFlags {
    double k_bias = 0.85;
    int skip_n = 500;
    double theta = 0.5;
    double gamma = 8.0;
    double delta_hr = 3.0;
    double budget_s = 60.0;
    long long max_iter = 2'000'000;

    PlannerConfig to_config() const {
        PlannerConfig c;
        c.k_bias_exploit = k_bias;
        c.skip_n = skip_n;
        c.theta = theta;
        c.gamma = gamma;
        c.delta_hr = delta_hr;
        c.time_budget_s = budget_s;
        c.max_iter = max_iter;
        return c;
    }
};

void add_planner_flags(CLI::App* cmd, PlannerFlags& f) {
    cmd->add_option("--k-bias", f.k_bias,
                    "probability of the biased edge list during exploitation")
        ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--skip-n", f.skip_n, "stride N through the sorted list")
        ->check(CLI::Range(2, 1 << 30));
    cmd->add_option("--theta", f.theta, "neighborhood radius (non-pose)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--gamma", f.gamma, "shrinking-radius scale")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--delta-hr", f.delta_hr, "reverse-coupling radius cap")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--budget-s", f.budget_s,
                    "wall-clock budget per trial in seconds (0 disables)");
    cmd->add_option("--max-iter", f.max_iter, "iteration cap per trial")
        ->check(CLI::PositiveNumber);
}

int cmd_plan(const std::string& system, int edges, double dt,
             std::uint64_t seed, const std::string& scenario,
             const std::string& difficulty, const std::string& planner,
             const PlannerFlags& flags, const std::string& bundle_path,
             const std::string& out, const std::string& dump_scenario) {
    const SystemSpec spec = parse_system(system);
    if (!planner_id_valid(planner))
        throw UsageError("unknown planner '" + planner + "'");
    const DifficultyLevel level = parse_difficulty(difficulty);

    World world;
    if (!scenario.empty()) {
        world = load_world(scenario);
        if (!world.system_name.empty() && world.system_name != spec.name)
            throw UsageError("scenario " + scenario + " is for system '" +
                             world.system_name + "', not '" + spec.name + "'");
        if (world.start.size() != spec.state_dim)
            throw UsageError("scenario start state dimension mismatch");
    } else {
        world = generate_scenario(spec, Difficulty::at(level), seed);
    }
    if (!dump_scenario.empty()) save_world(world, dump_scenario);

    std::optional<EdgeBundle> bundle;
    if (planner_uses_bundle(planner))
        bundle = resolve_bundle(spec, edges, dt, bundle_path);

    PlannerConfig config = flags.to_config();
    config.seed = mix_seed(seed, kPlannerSeedSalt);
    const MonteCarloParams mc;
    const PlanResult result =
        run_planner(planner, config, world, bundle ? &*bundle : nullptr, spec,
                    bundle ? bundle->dt : dt, mc);

    TrialResult row;
    row.planner_id = planner;
    row.difficulty = level;
    row.seed = seed;
    row.iterations = result.stats.iterations;
    row.prop_attempts = result.stats.prop_attempts;
    if (result.success()) {
        row.success = true;
        row.time_s = result.stats.time_s;
        row.cost_m = result.path->total_cost;
    }
    print_rows({row});
    if (result.success() && !out.empty())
        dump_path_waypoints(*result.path, out);
    return result.success() ? 0 : 1;
}

std::vector<DifficultyLevel> parse_difficulties(
    const std::vector<std::string>& names) {
    std::vector<DifficultyLevel> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(parse_difficulty(n));
    return out;
}

int cmd_bench(const std::string& system, int edges, double dt,
              std::uint64_t seed, const std::vector<std::string>& planners,
              const std::vector<std::string>& difficulties, int trials,
              int jobs, const std::string& world_seed_mode,
              const PlannerFlags& flags, const std::string& bundle_path,
              const std::string& out) {
    const SystemSpec spec = parse_system(system);
    if (planners.empty()) throw UsageError("at least one --planner required");
    for (const auto& p : planners)
        if (!planner_id_valid(p)) throw UsageError("unknown planner '" + p + "'");

    BenchOptions options;
    options.planners = planners;
    options.difficulties = parse_difficulties(difficulties);
    options.trials = trials;
    options.seed0 = seed;
    options.jobs = jobs;
    if (world_seed_mode == "fixed")
        options.world_seed_mode = WorldSeedMode::Fixed;
    else if (world_seed_mode == "per-trial")
        options.world_seed_mode = WorldSeedMode::PerTrial;
    else
        throw UsageError("--world-seed must be 'fixed' or 'per-trial'");
    options.config = flags.to_config();

    std::optional<EdgeBundle> bundle;
    for (const auto& p : planners)
        if (planner_uses_bundle(p)) {
            bundle = resolve_bundle(spec, edges, dt, bundle_path);
            break;
        }

    const auto rows = run_bench(options, spec, bundle ? &*bundle : nullptr,
                                bundle ? bundle->dt : dt);
    std::fputs(format_report(aggregate_rows(rows)).c_str(), stdout);
    if (!out.empty()) {
        write_csv(rows, out);
        std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
    }
    return 0;
}

int cmd_ablate(const std::string& system, int edges, double dt,
               std::uint64_t seed, const std::string& axis,
               const std::vector<std::string>& values,
               const std::vector<std::string>& difficulties, int trials,
               int jobs, const PlannerFlags& flags,
               const std::string& bundle_path, const std::string& out) {
    const SystemSpec spec = parse_system(system);
    if (values.empty()) throw UsageError("--values must be nonempty");
    if (axis != "skip-n" && axis != "k-bias" && axis != "variant")
        throw UsageError("unknown axis '" + axis +
                         "' (expected skip-n, k-bias, or variant)");

    BenchOptions base;
    base.difficulties = parse_difficulties(difficulties);
    base.trials = trials;
    base.seed0 = seed;
    base.jobs = jobs;
    base.config = flags.to_config();

    std::optional<EdgeBundle> bundle =
        resolve_bundle(spec, edges, dt, bundle_path);

    std::vector<TrialResult> all;
    for (const std::string& value : values) {
        BenchOptions options = base;
        if (axis == "skip-n") {
            options.planners = {"bboe"};
            try {
                options.config.skip_n = std::stoi(value);
            } catch (const std::exception&) {
                throw UsageError("bad skip-n value '" + value + "'");
            }
            if (options.config.skip_n < 2)
                throw UsageError("skip-n values must be >= 2");
        } else if (axis == "k-bias") {
            options.planners = {"bboe"};
            try {
                options.config.k_bias_exploit = std::stod(value);
            } catch (const std::exception&) {
                throw UsageError("bad k-bias value '" + value + "'");
            }
            if (options.config.k_bias_exploit < 0.0 ||
                options.config.k_bias_exploit > 1.0)
                throw UsageError("k-bias values must lie in [0, 1]");
        } else {
            if (!planner_id_valid(value))
                throw UsageError(
                    "bad variant '" + value +
                    "' (expected a planner id such as bboe, uni-bias, "
                    "uni-nostrategy, bi-nostrategy)");
            options.planners = {value};
        }
        auto rows = run_bench(options, spec, &*bundle, bundle->dt);
        for (auto& r : rows) r.axis_value = value;
        all.insert(all.end(), std::make_move_iterator(rows.begin()),
                   std::make_move_iterator(rows.end()));
    }
    std::fputs(format_report(aggregate_rows(all)).c_str(), stdout);
    if (!out.empty()) {
        write_csv(all, out, axis);
        std::printf("wrote %zu rows to %s\n", all.size(), out.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bundle-of-edges kinodynamic planner benchmark"};
    app.require_subcommand(1);

    std::string system = "diffdrive";
    int edges = 2000;
    double dt = 0.05;
    std::uint64_t seed = 0;
    std::string bundle_path;

    auto add_common = [&](CLI::App* cmd, bool with_bundle_path = true) {
        cmd->add_option("--system", system,
                        "diffdrive | unicycle | car-trailer");
        cmd->add_option("--edges", edges, "edges in the bundle")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--dt", dt, "integration step in seconds")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--seed", seed, "base seed");
        if (with_bundle_path)
            cmd->add_option("--bundle", bundle_path,
                            "explicit bundle file (default: "
                            "$BBOE_BUNDLE_DIR/<system>-<edges>.bboe)");
    };

    // bundle-generate
    auto* gen = app.add_subcommand("bundle-generate",
                                   "precompute and store an edge bundle");
    std::string gen_out;
    add_common(gen, false);
    gen->add_option("--out", gen_out, "output path (default canonical)");

    // plan
    auto* plan = app.add_subcommand("plan", "run a single planning trial");
    std::string scenario, plan_difficulty = "easy", planner = "bboe";
    std::string plan_out, dump_scenario;
    PlannerFlags plan_flags;
    add_common(plan);
    plan->add_option("--scenario", scenario,
                     "scenario JSON (overrides --difficulty/--seed world)");
    plan->add_option("--difficulty", plan_difficulty,
                     "easy | medium | hard | veryhard");
    plan->add_option("--planner", planner,
                     "bboe | bboe75 | bboe85 | bboe95 | rrt | gbrrt | "
                     "uni-bias | uni-nostrategy | bi-nostrategy");
    add_planner_flags(plan, plan_flags);
    plan->add_option("--out", plan_out, "write the solution waypoints as CSV");
    plan->add_option("--dump-scenario", dump_scenario,
                     "write the world used for this trial as JSON");

    // bench
    auto* bench = app.add_subcommand("bench", "batch benchmark over seeds");
    std::vector<std::string> bench_planners{"bboe"};
    std::vector<std::string> bench_difficulties{"easy", "medium", "hard",
                                                "veryhard"};
    int trials = 20, jobs = 1;
    std::string world_seed_mode = "per-trial", bench_out;
    PlannerFlags bench_flags;
    add_common(bench);
    bench->add_option("--planner", bench_planners, "planner ids (repeatable)")
        ->delimiter(',');
    bench->add_option("--difficulty", bench_difficulties,
                      "difficulty levels (repeatable)")
        ->delimiter(',');
    bench->add_option("--trials", trials, "trials per (planner, difficulty)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--jobs", jobs, "concurrent trials")
        ->check(CLI::PositiveNumber);
    bench->add_option("--world-seed", world_seed_mode,
                      "fixed | per-trial world seeding");
    add_planner_flags(bench, bench_flags);
    bench->add_option("--out", bench_out, "write raw trial rows as CSV");

    // ablate
    auto* ablate = app.add_subcommand("ablate", "sweep one parameter axis");
    std::string axis;
    std::vector<std::string> values;
    std::vector<std::string> ablate_difficulties{"easy", "medium", "hard",
                                                 "veryhard"};
    int ablate_trials = 20, ablate_jobs = 1;
    std::string ablate_out;
    PlannerFlags ablate_flags;
    add_common(ablate);
    ablate->add_option("--axis", axis, "skip-n | k-bias | variant")
        ->required();
    ablate->add_option("--values", values, "axis values (repeatable)")
        ->delimiter(',')
        ->required();
    ablate->add_option("--difficulty", ablate_difficulties,
                       "difficulty levels (repeatable)")
        ->delimiter(',');
    ablate->add_option("--trials", ablate_trials,
                       "trials per (value, difficulty)")
        ->check(CLI::PositiveNumber);
    ablate->add_option("--jobs", ablate_jobs, "concurrent trials")
        ->check(CLI::PositiveNumber);
    add_planner_flags(ablate, ablate_flags);
    ablate->add_option("--out", ablate_out, "write raw trial rows as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_bundle_generate(system, edges, dt, seed, gen_out);
        if (plan->parsed())
            return cmd_plan(system, edges, dt, seed, scenario, plan_difficulty,
                            planner, plan_flags, bundle_path, plan_out,
                            dump_scenario);
        if (bench->parsed())
            return cmd_bench(system, edges, dt, seed, bench_planners,
                             bench_difficulties, trials, jobs, world_seed_mode,
                             bench_flags, bundle_path, bench_out);
        if (ablate->parsed())
            return cmd_ablate(system, edges, dt, seed, axis, values,
                              ablate_difficulties, ablate_trials, ablate_jobs,
                              ablate_flags, bundle_path, ablate_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BundleIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ScenarioError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

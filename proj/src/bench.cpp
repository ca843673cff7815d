#include "bboe/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bboe {

bool planner_id_valid(const std::string& id) {
    static const char* kIds[] = {"bboe",  "bboe75",        "bboe85",
                                 "bboe95", "rrt",           "gbrrt",
                                 "uni-bias", "uni-nostrategy", "bi-nostrategy"};
    for (const char* k : kIds)
        if (id == k) return true;
    return false;
}

PlanResult run_planner(const std::string& planner_id,
                       const PlannerConfig& config, const World& world,
                       const EdgeBundle* bundle, const SystemSpec& spec,
                       double dt, const MonteCarloParams& mc) {
    auto with_bias = [&](double k_bias) {
        PlannerConfig c = config;
        c.k_bias_exploit = k_bias;
        return c;
    };
    auto need_bundle = [&]() -> const EdgeBundle& {
        if (!bundle)
            throw std::invalid_argument("planner '" + planner_id +
                                        "' requires an edge bundle");
        return *bundle;
    };
    if (planner_id == "bboe") return plan_bboe(config, world, need_bundle());
    if (planner_id == "bboe75")
        return plan_bboe(with_bias(0.75), world, need_bundle());
    if (planner_id == "bboe85")
        return plan_bboe(with_bias(0.85), world, need_bundle());
    if (planner_id == "bboe95")
        return plan_bboe(with_bias(0.95), world, need_bundle());
    if (planner_id == "rrt") return plan_rrt(config, world, spec, dt, mc);
    if (planner_id == "gbrrt") return plan_gbrrt(config, world, spec, dt, mc);
    if (planner_id == "uni-bias")
        return plan_ablation(
            AblationVariant{AblationKind::UniBBoEWithBias,
                            config.k_bias_exploit, 100},
            config, world, need_bundle());
    if (planner_id == "uni-nostrategy")
        return plan_ablation(
            AblationVariant{AblationKind::UniBBoENoStrategy, 0.0, 100},
            config, world, need_bundle());
    if (planner_id == "bi-nostrategy")
        return plan_ablation(
            AblationVariant{AblationKind::BiBBoENoStrategy, 0.0, 100},
            config, world, need_bundle());
    throw std::invalid_argument("unknown planner id: " + planner_id);
}

TrialResult run_trial(const std::string& planner_id,
                      DifficultyLevel difficulty, std::uint64_t seed,
                      std::uint64_t world_seed, const PlannerConfig& config,
                      const MonteCarloParams& mc, const SystemSpec& spec,
                      const EdgeBundle* bundle, double dt) {
    TrialResult row;
    row.planner_id = planner_id;
    row.difficulty = difficulty;
    row.seed = seed;
    try {
        const World world =
            generate_scenario(spec, Difficulty::at(difficulty), world_seed);
        PlannerConfig c = config;
        c.seed = mix_seed(seed, kPlannerSeedSalt);
        const PlanResult result =
            run_planner(planner_id, c, world, bundle, spec, dt, mc);
        row.iterations = result.stats.iterations;
        row.prop_attempts = result.stats.prop_attempts;
        if (result.success()) {
            row.success = true;
            row.time_s = result.stats.time_s;
            row.cost_m = result.path->total_cost;
        }
    } catch (const std::exception&) {
        // Infeasible scenario or misconfigured trial: an unsuccessful row,
        // never a batch abort.
        row.success = false;
    }
    return row;
}

std::vector<TrialResult> run_bench(const BenchOptions& options,
                                   const SystemSpec& spec,
                                   const EdgeBundle* bundle, double dt) {
    struct Task {
        std::string planner;
        DifficultyLevel difficulty;
        std::uint64_t seed;
        std::uint64_t world_seed;
    };
    std::vector<Task> tasks;
    for (const auto& planner : options.planners) {
        for (const auto difficulty : options.difficulties) {
            for (int t = 0; t < options.trials; ++t) {
                const std::uint64_t seed =
                    options.seed0 + static_cast<std::uint64_t>(t);
                const std::uint64_t world_seed =
                    options.world_seed_mode == WorldSeedMode::Fixed
                        ? options.seed0
                        : seed;
                tasks.push_back(Task{planner, difficulty, seed, world_seed});
            }
        }
    }

    std::vector<TrialResult> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            rows[i] = run_trial(task.planner, task.difficulty, task.seed,
                                task.world_seed, options.config, options.mc,
                                spec, bundle, dt);
        }
    };
    const int jobs = std::max(1, options.jobs);
    if (jobs == 1 || tasks.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const auto n = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                             tasks.size());
        pool.reserve(n);
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return rows;
}

std::vector<CellAggregate> aggregate_rows(
    const std::vector<TrialResult>& rows) {
    std::vector<CellAggregate> cells;
    auto cell_of = [&](const TrialResult& row) -> CellAggregate& {
        for (auto& c : cells)
            if (c.planner_id == row.planner_id &&
                c.difficulty == row.difficulty &&
                c.axis_value == row.axis_value)
                return c;
        CellAggregate c;
        c.planner_id = row.planner_id;
        c.difficulty = row.difficulty;
        c.axis_value = row.axis_value;
        cells.push_back(std::move(c));
        return cells.back();
    };
    for (const TrialResult& row : rows) {
        CellAggregate& c = cell_of(row);
        ++c.trials;
        if (!row.success) continue;
        const double t = *row.time_s;
        const double m = *row.cost_m;
        if (c.successes == 0) {
            c.time_min = c.time_max = t;
            c.cost_min = c.cost_max = m;
            c.time_mean = c.cost_mean = 0.0;
        }
        ++c.successes;
        c.time_mean += (t - c.time_mean) / c.successes;
        c.cost_mean += (m - c.cost_mean) / c.successes;
        c.time_min = std::min(c.time_min, t);
        c.time_max = std::max(c.time_max, t);
        c.cost_min = std::min(c.cost_min, m);
        c.cost_max = std::max(c.cost_max, m);
    }
    return cells;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_csv(const std::vector<TrialResult>& rows, const std::string& path,
               const std::string& axis_name) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    if (!axis_name.empty()) out << axis_name << ",";
    out << "planner,difficulty,seed,success,time_s,cost_m,iterations,"
           "prop_attempts\n";
    for (const TrialResult& r : rows) {
        if (!axis_name.empty()) out << r.axis_value << ",";
        out << r.planner_id << "," << difficulty_name(r.difficulty) << ","
            << r.seed << "," << (r.success ? 1 : 0) << ","
            << (r.time_s ? fmt_double(*r.time_s) : "") << ","
            << (r.cost_m ? fmt_double(*r.cost_m) : "") << "," << r.iterations
            << "," << r.prop_attempts << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TrialResult> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("empty CSV: " + path);
    const auto header = split_line(line);
    // The ablation schema carries one extra leading axis column.
    std::size_t base = 0;
    if (!header.empty() && header[0] != "planner") base = 1;
    if (header.size() != base + 8 || header[base] != "planner")
        throw std::runtime_error("unrecognized CSV header in " + path);

    std::vector<TrialResult> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (f.size() != header.size())
            throw std::runtime_error("ragged CSV row in " + path);
        TrialResult r;
        if (base == 1) r.axis_value = f[0];
        r.planner_id = f[base + 0];
        const auto level = difficulty_from_name(f[base + 1]);
        if (!level)
            throw std::runtime_error("bad difficulty in CSV row: " + f[base + 1]);
        r.difficulty = *level;
        r.seed = std::stoull(f[base + 2]);
        r.success = f[base + 3] == "1";
        if (!f[base + 4].empty()) r.time_s = std::stod(f[base + 4]);
        if (!f[base + 5].empty()) r.cost_m = std::stod(f[base + 5]);
        r.iterations = std::stoll(f[base + 6]);
        r.prop_attempts = std::stoll(f[base + 7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string format_report(const std::vector<CellAggregate>& cells) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-16s %-10s %-8s %-8s %-26s %-26s\n",
                  "planner", "difficulty", "axis", "success",
                  "time_s mean [min, max]", "cost_m mean [min, max]");
    out << line;
    for (const CellAggregate& c : cells) {
        char timebuf[64] = "-";
        char costbuf[64] = "-";
        if (c.successes > 0) {
            std::snprintf(timebuf, sizeof timebuf, "%.2f [%.2f, %.2f]",
                          c.time_mean, c.time_min, c.time_max);
            std::snprintf(costbuf, sizeof costbuf, "%.2f [%.2f, %.2f]",
                          c.cost_mean, c.cost_min, c.cost_max);
        }
        char rate[16];
        std::snprintf(rate, sizeof rate, "%d/%d", c.successes, c.trials);
        std::snprintf(line, sizeof line, "%-16s %-10s %-8s %-8s %-26s %-26s\n",
                      c.planner_id.c_str(),
                      difficulty_name(c.difficulty).c_str(),
                      c.axis_value.empty() ? "-" : c.axis_value.c_str(), rate,
                      timebuf, costbuf);
        out << line;
    }
    return out.str();
}

}  // namespace bboe

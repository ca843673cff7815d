#include "bboe/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <utility>
#include <vector>

#include "bboe/bundle.hpp"
#include "bboe/kernels.hpp"
#include "json.hpp"

namespace bboe {

Obstacle Obstacle::circle(double cx, double cy, double r) {
    Obstacle o;
    o.kind = Kind::Circle;
    o.cx = cx;
    o.cy = cy;
    o.r = r;
    return o;
}

Obstacle Obstacle::rect(double minx, double miny, double maxx, double maxy) {
    Obstacle o;
    o.kind = Kind::Rect;
    o.minx = minx;
    o.miny = miny;
    o.maxx = maxx;
    o.maxy = maxy;
    return o;
}

bool Obstacle::hits_disc(double px, double py, double rr) const {
    if (kind == Kind::Circle) {
        const double dx = px - cx;
        const double dy = py - cy;
        const double reach = r + rr;
        return dx * dx + dy * dy < reach * reach;
    }
    double dx = 0.0;
    if (px < minx) dx = minx - px;
    else if (px > maxx) dx = px - maxx;
    double dy = 0.0;
    if (py < miny) dy = miny - py;
    else if (py > maxy) dy = py - maxy;
    return dx * dx + dy * dy < rr * rr;
}

Difficulty Difficulty::at(DifficultyLevel level) {
    Difficulty d;
    d.level = level;
    switch (level) {
        case DifficultyLevel::Easy: d.obstacle_count = 8; break;
        case DifficultyLevel::Medium: d.obstacle_count = 20; break;
        case DifficultyLevel::Hard: d.obstacle_count = 40; break;
        case DifficultyLevel::VeryHard: d.obstacle_count = 70; break;
    }
    return d;
}

std::optional<DifficultyLevel> difficulty_from_name(const std::string& name) {
    if (name == "easy") return DifficultyLevel::Easy;
    if (name == "medium") return DifficultyLevel::Medium;
    if (name == "hard") return DifficultyLevel::Hard;
    if (name == "veryhard") return DifficultyLevel::VeryHard;
    return std::nullopt;
}

std::string difficulty_name(DifficultyLevel level) {
    switch (level) {
        case DifficultyLevel::Easy: return "easy";
        case DifficultyLevel::Medium: return "medium";
        case DifficultyLevel::Hard: return "hard";
        case DifficultyLevel::VeryHard: return "veryhard";
    }
    return "easy";
}

bool state_in_collision(const World& world, const State& x) {
    const double px = x[0];
    const double py = x[1];
    const double rr = world.robot_radius;
    if (px - rr < world.bx.lo || px + rr > world.bx.hi ||
        py - rr < world.by.lo || py + rr > world.by.hi)
        return true;
    for (const Obstacle& o : world.obstacles)
        if (o.hits_disc(px, py, rr)) return true;
    return false;
}

bool segment_collision_free(const World& world, const EdgeInstance& instance) {
    const auto& k = kernels::active();
    const double* xs = instance.xs.data();
    const double* ys = instance.ys.data();
    const auto n = instance.xs.size();
    const double rr = world.robot_radius;
    if (k.any_outside_bounds(xs, ys, n, world.bx.lo, world.by.lo, world.bx.hi,
                             world.by.hi, rr))
        return false;
    for (const Obstacle& o : world.obstacles) {
        if (o.kind == Obstacle::Kind::Circle) {
            if (k.any_in_circle(xs, ys, n, o.cx, o.cy, o.r + rr)) return false;
        } else {
            if (k.any_in_rect(xs, ys, n, o.minx, o.miny, o.maxx, o.maxy, rr))
                return false;
        }
    }
    return true;
}

bool goal_region_reached(const World& world, const State& x) {
    const double dx = x[0] - world.goal_x;
    const double dy = x[1] - world.goal_y;
    return dx * dx + dy * dy <= world.goal_radius * world.goal_radius;
}

namespace {

// Generated scenarios are built from one obstacle stream per seed: a walled
// pocket around the goal with one mouth, then three full-height walls with
// one door each, with clutter scattered between wall B and wall C and after
// wall C. A difficulty level takes a prefix of the stream, which is what
// makes the free space monotone across levels for a fixed seed. Mouth and
// door positions are seeded; door heights are forced to zigzag so no
// straight corridor crosses the workspace. Every passage is narrow enough
// that threading it — not open-space coverage — dominates planning effort.
constexpr double kWallXs[3] = {5.4, 10.2, 13.6};
constexpr double kDoorWidths[3] = {1.3, 1.1, 1.0};
// Door heights stay below the pocket band so no door exits into a pocket
// leg, and wall C sits far enough west that the corridor between its upper
// span and the pocket face stays a full meter wide.
constexpr double kDoorYLo = 4.0;
constexpr double kDoorYHi = 13.9;
constexpr double kDoorZigzagGap = 4.5;
constexpr double kWallBlock = 1.5;        // nominal wall-block size
constexpr int kWallBudget = 14;           // stream slots per wall
constexpr double kPocketCorner = 16.1;    // goal-pocket box corner
// Pocket walls are thinner than regular walls: the mouth should read as an
// aperture rather than a deep tunnel, but the legs still need enough body
// that a search coupling across them dies out quickly.
constexpr double kPocketThick = 1.0;
constexpr double kPocketMouth = 1.2;
constexpr int kPocketBudget = 8;          // stream slots for the pocket
constexpr int kScatterTo = 40;            // stream index where wall C starts
constexpr int kScatterChunk = 30;
constexpr int kMaxChunkAttempts = 32;
constexpr double kStartClearance = 1.2;   // scatter keep-out radii
constexpr double kGoalClearance = 1.5;
constexpr double kThroatClearance = 1.2;  // added to the passage half-width
constexpr double kFloodCell = 0.1;
constexpr double kFloodSlack = 0.08;      // > cell half-diagonal

struct WallPlan {
    double x;
    double door_w;
    double door_y;
};

struct PocketPlan {
    bool mouth_on_v = true;  // mouth in the vertical leg, else horizontal
    double mouth_c = 0.0;    // mouth center along that leg
};

double pick_zigzag_y(Rng& rng, double prev) {
    for (int i = 0; i < 64; ++i) {
        const double y = rng.uniform(kDoorYLo, kDoorYHi);
        if (std::isnan(prev) || std::abs(y - prev) >= kDoorZigzagGap) return y;
    }
    return prev >= 0.5 * (kDoorYLo + kDoorYHi) ? prev - kDoorZigzagGap
                                               : prev + kDoorZigzagGap;
}

bool blocks_endpoints(const Obstacle& o, const World& w) {
    return o.hits_disc(w.start[0], w.start[1], w.robot_radius) ||
           o.hits_disc(w.goal_x, w.goal_y, w.robot_radius);
}

// Tiles [a0, a1] along one axis with rect blocks whose sizes stay inside
// `sizes`; [p0, p1] is the perpendicular extent. Blocks touch exactly when
// an even tiling fits and overlap slightly otherwise, so the span never has
// a gap. Emission runs from a0 towards a1.
std::vector<Obstacle> tile_span(double a0, double a1, double p0, double p1,
                                bool vertical, const Interval& sizes) {
    std::vector<Obstacle> out;
    const double span = a1 - a0;
    if (span < sizes.lo) return out;
    const double cap = std::clamp(kWallBlock, sizes.lo, sizes.hi);
    const int n = std::max(1, static_cast<int>(std::ceil(span / cap)));
    const double h = std::max(span / n, sizes.lo);
    const double step = n > 1 ? (span - h) / (n - 1) : 0.0;
    for (int k = 0; k < n; ++k) {
        const double a = a0 + k * step;
        out.push_back(vertical ? Obstacle::rect(p0, a, p1, a + h)
                               : Obstacle::rect(a, p0, a + h, p1));
    }
    return out;
}

// Appends a structure's blocks and pads the segment to its fixed stream
// budget with strictly interior copies of the functional blocks, so a level
// boundary always lands at the same stream index no matter how the seeded
// door or mouth position tiled out. Interior copies change no free space.
void append_blocks(std::vector<Obstacle>& stream, const World& w,
                   const std::vector<Obstacle>& blocks, int budget,
                   const Interval& sizes) {
    std::vector<Obstacle> kept;
    for (const Obstacle& o : blocks)
        if (!blocks_endpoints(o, w)) kept.push_back(o);
    const std::size_t nfunc = kept.size();
    for (std::size_t k = 0;
         nfunc > 0 && kept.size() < static_cast<std::size_t>(budget); ++k) {
        const Obstacle& host = kept[k % nfunc];
        const double ix = std::min(
            0.05, std::max(0.0, 0.5 * ((host.maxx - host.minx) - sizes.lo)));
        const double iy = std::min(
            0.05, std::max(0.0, 0.5 * ((host.maxy - host.miny) - sizes.lo)));
        kept.push_back(Obstacle::rect(host.minx + ix, host.miny + iy,
                                      host.maxx - ix, host.maxy - iy));
    }
    stream.insert(stream.end(), kept.begin(), kept.end());
}

void emit_wall(std::vector<Obstacle>& stream, const World& w,
               const WallPlan& wp, const Interval& sizes) {
    const double th = std::clamp(kWallBlock, sizes.lo, sizes.hi);
    const double x0 = wp.x - 0.5 * th;
    const double x1 = wp.x + 0.5 * th;
    std::vector<Obstacle> blocks = tile_span(
        w.by.lo, wp.door_y - 0.5 * wp.door_w, x0, x1, true, sizes);
    const auto above = tile_span(wp.door_y + 0.5 * wp.door_w, w.by.hi, x0, x1,
                                 true, sizes);
    // Above-door blocks go in ceiling first, so truncating a level mid-wall
    // widens the door from above instead of opening a second gap.
    blocks.insert(blocks.end(), above.rbegin(), above.rend());
    append_blocks(stream, w, blocks, kWallBudget, sizes);
}

// L-shaped pocket walling the goal corner off from the open field: a
// vertical leg covering y in [corner, top] and a horizontal leg covering
// x in [corner, right], joined at the corner, with a single mouth gap in
// one seeded leg. Reaching the goal means entering through the mouth.
void emit_pocket(std::vector<Obstacle>& stream, const World& w,
                 const PocketPlan& pp, const Interval& sizes) {
    const double th = std::clamp(kPocketThick, sizes.lo, sizes.hi);
    const double v0 = kPocketCorner - 0.5 * th;
    const double v1 = kPocketCorner + 0.5 * th;
    const double m0 = pp.mouth_c - 0.5 * kPocketMouth;
    const double m1 = pp.mouth_c + 0.5 * kPocketMouth;
    std::vector<Obstacle> blocks;
    auto add = [&blocks](const std::vector<Obstacle>& b) {
        blocks.insert(blocks.end(), b.begin(), b.end());
    };
    if (pp.mouth_on_v) {
        add(tile_span(v0, m0, v0, v1, true, sizes));
        add(tile_span(m1, w.by.hi, v0, v1, true, sizes));
        add(tile_span(v1, w.bx.hi, v0, v1, false, sizes));
    } else {
        add(tile_span(v0, w.by.hi, v0, v1, true, sizes));
        add(tile_span(v1, m0, v0, v1, false, sizes));
        add(tile_span(m1, w.bx.hi, v0, v1, false, sizes));
    }
    append_blocks(stream, w, blocks, kPocketBudget, sizes);
}

Obstacle sample_scatter(Rng& rng, const World& w, const Interval& sizes) {
    if (rng.uniform01() < 0.5) {
        const double r = 0.5 * rng.uniform(sizes);
        return Obstacle::circle(rng.uniform(w.bx.lo + r, w.bx.hi - r),
                                rng.uniform(w.by.lo + r, w.by.hi - r), r);
    }
    const double hx = 0.5 * rng.uniform(sizes);
    const double hy = 0.5 * rng.uniform(sizes);
    const double cx = rng.uniform(w.bx.lo + hx, w.bx.hi - hx);
    const double cy = rng.uniform(w.by.lo + hy, w.by.hi - hy);
    return Obstacle::rect(cx - hx, cy - hy, cx + hx, cy + hy);
}

// Scatter may not crowd the start region, the goal region, any door throat,
// the pocket mouth, or the pocket interior (passages of later stream
// segments included, since a level that adds the structure must still reach
// the goal through it).
bool violates_clearance(const Obstacle& o, const World& w,
                        const std::array<WallPlan, 3>& walls,
                        const PocketPlan& pp) {
    if (o.hits_disc(w.start[0], w.start[1], kStartClearance)) return true;
    if (o.hits_disc(w.goal_x, w.goal_y, kGoalClearance)) return true;
    for (const WallPlan& wp : walls)
        if (o.hits_disc(wp.x, wp.door_y, 0.5 * wp.door_w + kThroatClearance))
            return true;
    const double mx = pp.mouth_on_v ? kPocketCorner : pp.mouth_c;
    const double my = pp.mouth_on_v ? pp.mouth_c : kPocketCorner;
    if (o.hits_disc(mx, my, 0.5 * kPocketMouth + kThroatClearance))
        return true;
    const double b = kPocketCorner - 0.5 * kPocketThick - 0.3;
    double ox1, oy1;
    if (o.kind == Obstacle::Kind::Circle) {
        ox1 = o.cx + o.r;
        oy1 = o.cy + o.r;
    } else {
        ox1 = o.maxx;
        oy1 = o.maxy;
    }
    if (ox1 > b && oy1 > b) return true;
    return false;
}

// Conservative start-goal connectivity: cells whose center keeps
// robot_radius + slack of clearance are free, so a 4-connected cell path
// certifies a continuous collision-free disc path (slack covers the worst
// within-cell offset). Failure may be a false alarm on hairline gaps, which
// only costs a re-roll.
bool flood_connected(const World& w) {
    const double cell = kFloodCell;
    const double inflate = w.robot_radius + kFloodSlack;
    const int nx = std::max(
        1, static_cast<int>(std::llround((w.bx.hi - w.bx.lo) / cell)));
    const int ny = std::max(
        1, static_cast<int>(std::llround((w.by.hi - w.by.lo) / cell)));
    auto idx = [nx](int i, int j) {
        return static_cast<std::size_t>(j) * nx + i;
    };
    auto cx_of = [&](int i) { return w.bx.lo + (i + 0.5) * cell; };
    auto cy_of = [&](int j) { return w.by.lo + (j + 0.5) * cell; };

    std::vector<std::uint8_t> blocked(static_cast<std::size_t>(nx) * ny, 0);
    const int m =
        std::max(0, static_cast<int>(std::ceil(inflate / cell - 0.5)));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (i < m || j < m || i >= nx - m || j >= ny - m)
                blocked[idx(i, j)] = 1;

    for (const Obstacle& o : w.obstacles) {
        double bx0, by0, bx1, by1;
        if (o.kind == Obstacle::Kind::Circle) {
            bx0 = o.cx - o.r;
            by0 = o.cy - o.r;
            bx1 = o.cx + o.r;
            by1 = o.cy + o.r;
        } else {
            bx0 = o.minx;
            by0 = o.miny;
            bx1 = o.maxx;
            by1 = o.maxy;
        }
        const int i0 = std::clamp(
            static_cast<int>((bx0 - inflate - w.bx.lo) / cell) - 1, 0, nx - 1);
        const int i1 = std::clamp(
            static_cast<int>((bx1 + inflate - w.bx.lo) / cell) + 1, 0, nx - 1);
        const int j0 = std::clamp(
            static_cast<int>((by0 - inflate - w.by.lo) / cell) - 1, 0, ny - 1);
        const int j1 = std::clamp(
            static_cast<int>((by1 + inflate - w.by.lo) / cell) + 1, 0, ny - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                if (!blocked[idx(i, j)] &&
                    o.hits_disc(cx_of(i), cy_of(j), inflate))
                    blocked[idx(i, j)] = 1;
    }

    auto cell_of = [&](double x, double y) {
        const int i = std::clamp(static_cast<int>((x - w.bx.lo) / cell), 0,
                                 nx - 1);
        const int j = std::clamp(static_cast<int>((y - w.by.lo) / cell), 0,
                                 ny - 1);
        return std::pair<int, int>(i, j);
    };
    const auto [si, sj] = cell_of(w.start[0], w.start[1]);
    const auto [gi, gj] = cell_of(w.goal_x, w.goal_y);
    if (blocked[idx(si, sj)] || blocked[idx(gi, gj)]) return false;

    std::vector<std::pair<int, int>> stack{{si, sj}};
    std::vector<std::uint8_t> seen(blocked.size(), 0);
    seen[idx(si, sj)] = 1;
    while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        if (i == gi && j == gj) return true;
        constexpr int di[4] = {1, -1, 0, 0};
        constexpr int dj[4] = {0, 0, 1, -1};
        for (int t = 0; t < 4; ++t) {
            const int ni = i + di[t];
            const int nj = j + dj[t];
            if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
            const std::size_t q = idx(ni, nj);
            if (blocked[q] || seen[q]) continue;
            seen[q] = 1;
            stack.push_back({ni, nj});
        }
    }
    return false;
}

}  // namespace

World generate_scenario(const SystemSpec& spec, const Difficulty& difficulty,
                        std::uint64_t seed) {
    World w;
    w.system_name = spec.name;
    w.goal_x = 18.5;
    w.goal_y = 18.5;

    const double sx = 1.5, sy = 1.5;
    w.start = State::zeros(spec.state_dim);
    w.start[0] = sx;
    w.start[1] = sy;
    w.start[2] = wrap_angle(std::atan2(w.goal_y - sy, w.goal_x - sx));
    for (int d = 3; d < spec.state_dim; ++d)
        w.start[d] = spec.angular[d] ? w.start[2] : 0.0;

    const int want = difficulty.obstacle_count;
    const Interval& sizes = difficulty.size_range;

    std::array<WallPlan, 3> walls;
    PocketPlan pocket;
    Rng door_rng(mix_seed(seed, 0xd002c0deULL));
    pocket.mouth_on_v = door_rng.uniform01() < 0.5;
    {
        // Keep at least one whole block (>= sizes.lo) on each side of the
        // mouth so the gap is exactly kPocketMouth wide, and keep the whole
        // mouth beyond the other leg's band: a gap that faces the other
        // leg's broadside is not an opening.
        const double th = std::clamp(kPocketThick, sizes.lo, sizes.hi);
        const double v1 = kPocketCorner + 0.5 * th;
        const double lo = pocket.mouth_on_v
                              ? v1 + 0.5 * kPocketMouth
                              : v1 + sizes.lo + 0.5 * kPocketMouth;
        const double hi = (pocket.mouth_on_v ? w.by.hi : w.bx.hi) - sizes.lo -
                          0.5 * kPocketMouth;
        pocket.mouth_c = door_rng.uniform(lo, std::max(lo, hi));
    }
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < 3; ++i) {
        walls[i].x = kWallXs[i];
        walls[i].door_w = kDoorWidths[i];
        walls[i].door_y = pick_zigzag_y(door_rng, prev);
        prev = walls[i].door_y;
    }

    std::vector<Obstacle> stream;
    stream.reserve(static_cast<std::size_t>(
        std::max(want, kScatterTo) + kScatterChunk));

    // Fills the stream with scatter up to `target`, then requires start-goal
    // connectivity of everything placed so far; on failure only this chunk
    // is re-rolled, so earlier stream content (and with it the cross-level
    // prefix property) is untouched. Chunk boundaries and salts depend on
    // the stream alone, never on `want`: a level stopping mid-chunk still
    // completes the chunk before truncating, which keeps the accepted
    // layout identical across levels.
    auto scatter_chunk = [&](int target, int chunk_no) {
        const std::size_t base = stream.size();
        if (static_cast<int>(base) >= target) return;
        for (int attempt = 0; attempt < kMaxChunkAttempts; ++attempt) {
            stream.resize(base);
            Rng rng(mix_seed(mix_seed(seed, 0x5ca77e20ULL + chunk_no),
                             static_cast<std::uint64_t>(attempt)));
            int rejections = 0;
            while (static_cast<int>(stream.size()) < target) {
                const Obstacle o = sample_scatter(rng, w, sizes);
                if (violates_clearance(o, w, walls, pocket)) {
                    if (++rejections >= 10000)
                        throw ScenarioError(
                            "scenario generation stalled: 10^4 consecutive "
                            "rejected obstacles (seed " +
                            std::to_string(seed) + ")");
                    continue;
                }
                rejections = 0;
                stream.push_back(o);
            }
            World probe = w;
            probe.obstacles = stream;
            if (flood_connected(probe)) return;
        }
        // Every attempt tripped the (conservative) connectivity check; keep
        // the last layout rather than fail, since determinism is the only
        // hard guarantee here.
    };

    emit_pocket(stream, w, pocket, sizes);
    if (static_cast<int>(stream.size()) < want)
        emit_wall(stream, w, walls[0], sizes);
    if (static_cast<int>(stream.size()) < want)
        emit_wall(stream, w, walls[1], sizes);
    int chunk_no = 0;
    if (static_cast<int>(stream.size()) < want)
        scatter_chunk(std::max(kScatterTo, static_cast<int>(stream.size())),
                      chunk_no++);
    if (static_cast<int>(stream.size()) < want)
        emit_wall(stream, w, walls[2], sizes);
    while (static_cast<int>(stream.size()) < want)
        scatter_chunk(static_cast<int>(stream.size()) + kScatterChunk,
                      chunk_no++);

    stream.resize(static_cast<std::size_t>(want));
    w.obstacles = std::move(stream);
    return w;
}

void save_world(const World& world, const std::string& path) {
    nlohmann::json j;
    j["bounds"] = {{"min", {world.bx.lo, world.by.lo}},
                   {"max", {world.bx.hi, world.by.hi}}};
    j["system"] = world.system_name;
    nlohmann::json obs = nlohmann::json::array();
    for (const Obstacle& o : world.obstacles) {
        if (o.kind == Obstacle::Kind::Circle)
            obs.push_back({{"type", "circle"},
                           {"center", {o.cx, o.cy}},
                           {"radius", o.r}});
        else
            obs.push_back({{"type", "rect"},
                           {"min", {o.minx, o.miny}},
                           {"max", {o.maxx, o.maxy}}});
    }
    j["obstacles"] = std::move(obs);
    std::vector<double> start(world.start.data(),
                              world.start.data() + world.start.size());
    j["start"] = start;
    j["goal"] = {{"center", {world.goal_x, world.goal_y}},
                 {"radius", world.goal_radius}};
    j["robot_radius"] = world.robot_radius;

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ScenarioError("cannot open for write: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw ScenarioError("write failed: " + path);
}

World load_world(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError("malformed scenario JSON in " + path + ": " +
                            e.what());
    }
    try {
        World w;
        w.bx = {j["bounds"]["min"][0], j["bounds"]["max"][0]};
        w.by = {j["bounds"]["min"][1], j["bounds"]["max"][1]};
        w.system_name = j.value("system", std::string{});
        for (const auto& o : j["obstacles"]) {
            if (o["type"] == "circle")
                w.obstacles.push_back(Obstacle::circle(
                    o["center"][0], o["center"][1], o["radius"]));
            else if (o["type"] == "rect")
                w.obstacles.push_back(
                    Obstacle::rect(o["min"][0], o["min"][1], o["max"][0],
                                   o["max"][1]));
            else
                throw ScenarioError("unknown obstacle type in " + path);
        }
        const auto& start = j["start"];
        w.start = State::zeros(static_cast<int>(start.size()));
        for (int d = 0; d < w.start.size(); ++d)
            w.start[d] = start[static_cast<std::size_t>(d)];
        w.goal_x = j["goal"]["center"][0];
        w.goal_y = j["goal"]["center"][1];
        w.goal_radius = j["goal"]["radius"];
        w.robot_radius = j["robot_radius"];
        return w;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError("scenario fields missing or mistyped in " + path +
                            ": " + e.what());
    }
}

}  // namespace bboe

#include "bboe/strategy.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "bboe/kernels.hpp"

namespace bboe {
namespace {

kernels::GoalKeyArgs make_key_args(const SystemSpec& spec, const State& x_near,
                                   const State& x_des) {
    kernels::GoalKeyArgs a;
    const double heading = x_near[2];
    a.place = kernels::Se2{std::cos(heading), std::sin(heading), x_near[0],
                           x_near[1]};
    a.pose_heading = heading;
    a.target_x = x_des[0];
    a.target_y = x_des[1];
    a.target_heading = x_des[2];
    a.wx = spec.metric_weights[0];
    a.wy = spec.metric_weights[1];
    a.wh = spec.metric_weights[2];
    if (spec.state_dim > 3) {
        a.has_extra = true;
        a.extra_angular = spec.angular[3];
        a.pose_extra = x_near[3];
        a.target_extra = x_des[3];
        a.we = spec.metric_weights[3];
    }
    return a;
}

/// Fills scratch.keys with the distance of every near edge's placed end
/// state to x_des. near ids are ascending, so when the neighborhood is the
/// whole bundle the flattened caches are used as-is.
void compute_goal_keys(const EdgeBundle& bundle, const std::vector<int>& near,
                       const State& x_near, const State& x_des,
                       PropScratch& s) {
    const std::size_t n = near.size();
    const auto args = make_key_args(bundle.system, x_near, x_des);
    s.keys.resize(n);
    const bool extra = args.has_extra;
    if (n == bundle.edges.size()) {
        kernels::active().goal_keys(
            bundle.end_xs.data(), bundle.end_ys.data(), bundle.end_hs.data(),
            extra ? bundle.end_es.data() : nullptr,
            extra ? bundle.start_es.data() : nullptr, n, args, s.keys.data());
        return;
    }
    s.gx.resize(n);
    s.gy.resize(n);
    s.gh.resize(n);
    s.ge.resize(extra ? n : 0);
    s.gs.resize(extra ? n : 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<std::size_t>(near[i]);
        s.gx[i] = bundle.end_xs[id];
        s.gy[i] = bundle.end_ys[id];
        s.gh[i] = bundle.end_hs[id];
        if (extra) {
            s.ge[i] = bundle.end_es[id];
            s.gs[i] = bundle.start_es[id];
        }
    }
    kernels::active().goal_keys(s.gx.data(), s.gy.data(), s.gh.data(),
                                extra ? s.ge.data() : nullptr,
                                extra ? s.gs.data() : nullptr, n, args,
                                s.keys.data());
}

/// scratch.order <- positions 0..n-1 sorted by (key, position). near ids
/// ascend, so position order equals id order and this matches a stable sort.
void sort_positions(PropScratch& s) {
    const auto n = s.keys.size();
    s.order.resize(n);
    std::iota(s.order.begin(), s.order.end(), 0);
    std::sort(s.order.begin(), s.order.end(), [&](int a, int b) {
        const auto ka = s.keys[static_cast<std::size_t>(a)];
        const auto kb = s.keys[static_cast<std::size_t>(b)];
        return ka < kb || (ka == kb && a < b);
    });
}

bool attempt(const EdgeBundle& bundle, int edge_id, const State& x_near,
             const World& world, PropScratch& s, PropOutcome& out) {
    ++out.attempts;
    transform_edge_into(bundle.system, bundle.edges[static_cast<std::size_t>(edge_id)],
                        x_near, s.inst);
    if (!segment_collision_free(world, s.inst)) return false;
    out.instance = std::move(s.inst);
    s.inst = EdgeInstance{};
    return true;
}

}  // namespace

std::vector<int> biased_indices(int len, int N) {
    assert(N >= 2);
    std::vector<int> idx;
    if (len <= 0) return idx;
    for (int i = 0; i < len; i += N) idx.push_back(i);
    if (idx.back() != len - 1) idx.push_back(len - 1);
    return idx;
}

SortedNeighborhood sort_by_goal_proximity(const EdgeBundle& bundle,
                                          const std::vector<int>& near_ids,
                                          const State& x_near,
                                          const State& x_des) {
    PropScratch s;
    compute_goal_keys(bundle, near_ids, x_near, x_des, s);
    sort_positions(s);
    SortedNeighborhood out;
    out.anchor = x_near;
    out.ids.resize(near_ids.size());
    out.keys.resize(near_ids.size());
    for (std::size_t i = 0; i < s.order.size(); ++i) {
        const auto pos = static_cast<std::size_t>(s.order[i]);
        out.ids[i] = near_ids[pos];
        out.keys[i] = s.keys[pos];
    }
    return out;
}

std::vector<int> biased_subset(const SortedNeighborhood& sorted, int N) {
    const auto idx = biased_indices(static_cast<int>(sorted.ids.size()), N);
    std::vector<int> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(sorted.ids[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<int> random_subset(const SortedNeighborhood& sorted, int count,
                               Rng& rng) {
    const int len = static_cast<int>(sorted.ids.size());
    const int take = std::min(count, len);
    std::vector<int> pool(sorted.ids);
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::max(take, 0)));
    for (int i = 0; i < take; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_int(
                               static_cast<std::uint64_t>(len - i)));
        std::swap(pool[static_cast<std::size_t>(i)],
                  pool[static_cast<std::size_t>(j)]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
    }
    return out;
}

PropOutcome best_prop_using_edge_bundle(const EdgeBundle& bundle,
                                        const State& x_near,
                                        const State& x_des,
                                        const SelectionParams& params,
                                        const World& world, Rng& rng,
                                        PropScratch& scratch) {
    PropOutcome out;
    const std::vector<int>& near =
        near_edges_ref(bundle, x_near, params.theta, scratch.near);
    const int len = static_cast<int>(near.size());
    if (len == 0) return out;

    const double c_rand = rng.uniform01();
    out.random_branch = !(c_rand <= params.k_bias);

    if (!out.random_branch) {
        compute_goal_keys(bundle, near, x_near, x_des, scratch);
        // First pop is always the global best; sort the rest only if it
        // collides.
        const auto best_pos =
            kernels::active().argmin(scratch.keys.data(), scratch.keys.size());
        if (attempt(bundle, near[best_pos], x_near, world, scratch, out))
            return out;
        sort_positions(scratch);
        const auto idx = biased_indices(len, params.skip_n);
        for (std::size_t t = 1; t < idx.size(); ++t) {
            const auto pos = static_cast<std::size_t>(
                scratch.order[static_cast<std::size_t>(idx[t])]);
            if (attempt(bundle, near[pos], x_near, world, scratch, out))
                return out;
        }
        return out;
    }

    // Randomized list: as many distinct uniform picks as the biased list
    // would have had, popped in pick order. Positions are drawn directly
    // (position-in-sorted-order and position-in-neighborhood are both
    // uniform), so no sort is needed.
    const auto take = biased_indices(len, params.skip_n).size();
    scratch.order.resize(static_cast<std::size_t>(len));
    std::iota(scratch.order.begin(), scratch.order.end(), 0);
    for (std::size_t i = 0; i < take; ++i) {
        const auto j =
            i + static_cast<std::size_t>(rng.uniform_int(
                    static_cast<std::uint64_t>(len) - i));
        std::swap(scratch.order[i], scratch.order[j]);
        const auto pos = static_cast<std::size_t>(scratch.order[i]);
        if (attempt(bundle, near[pos], x_near, world, scratch, out)) return out;
    }
    return out;
}

PropOutcome random_prop_using_edge_bundle(const EdgeBundle& bundle,
                                          const State& x_near, double theta,
                                          const World& world, Rng& rng,
                                          PropScratch& scratch) {
    PropOutcome out;
    out.random_branch = true;
    const std::vector<int>& near =
        near_edges_ref(bundle, x_near, theta, scratch.near);
    if (near.empty()) return out;
    const auto pick = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::uint64_t>(near.size())));
    attempt(bundle, near[pick], x_near, world, scratch, out);
    return out;
}

}  // namespace bboe

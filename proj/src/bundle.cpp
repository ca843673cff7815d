#include "bboe/bundle.hpp"

#include <zlib.h>

#include <cassert>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "bboe/kernels.hpp"

namespace bboe {

State Edge::waypoint(int i) const {
    assert(i >= 0 && i < waypoint_count());
    State s = State::zeros(es.empty() ? 3 : 4);
    s[0] = xs[static_cast<std::size_t>(i)];
    s[1] = ys[static_cast<std::size_t>(i)];
    s[2] = hs[static_cast<std::size_t>(i)];
    if (!es.empty()) s[3] = es[static_cast<std::size_t>(i)];
    return s;
}

State EdgeInstance::waypoint(int i) const {
    assert(i >= 0 && i < waypoint_count());
    State s = State::zeros(state_dim);
    s[0] = xs[static_cast<std::size_t>(i)];
    s[1] = ys[static_cast<std::size_t>(i)];
    s[2] = hs[static_cast<std::size_t>(i)];
    if (state_dim > 3) s[3] = es[static_cast<std::size_t>(i)];
    return s;
}

void EdgeBundle::rebuild_caches() {
    const std::size_t n = edges.size();
    end_xs.resize(n);
    end_ys.resize(n);
    end_hs.resize(n);
    const bool extra = system.non_pose_dims() > 0;
    end_es.resize(extra ? n : 0);
    start_es.resize(extra ? n : 0);
    all_ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Edge& e = edges[i];
        end_xs[i] = e.xs.back();
        end_ys[i] = e.ys.back();
        end_hs[i] = e.hs.back();
        if (extra) {
            end_es[i] = e.es.back();
            start_es[i] = e.es.front();
        }
        all_ids[i] = static_cast<int>(i);
    }
}

namespace {

double arc_length_of(const std::vector<double>& xs,
                     const std::vector<double>& ys) {
    double acc = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        acc += std::hypot(xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
    return acc;
}

}  // namespace

EdgeBundle generate_bundle(const SystemSpec& spec, int count, double dt,
                           std::uint64_t seed) {
    assert(count >= 1 && dt > 0.0);
    EdgeBundle b;
    b.system = spec;
    b.dt = dt;
    b.seed = seed;
    b.edges.reserve(static_cast<std::size_t>(count));
    Rng rng(seed);
    State x0 = State::zeros(spec.state_dim);
    for (int id = 0; id < count; ++id) {
        for (int d = 3; d < spec.state_dim; ++d)
            x0[d] = spec.angular[d] ? wrap_angle(rng.uniform(-kPi, kPi))
                                    : rng.uniform(-1.0, 1.0);
        const Control u = sample_control(spec, rng);
        const double duration = sample_duration(spec, rng);
        const auto wps = integrate(spec, x0, u, duration, dt);

        Edge e;
        e.id = id;
        e.control = u;
        e.duration = duration;
        const std::size_t n = wps.size();
        e.xs.resize(n);
        e.ys.resize(n);
        e.hs.resize(n);
        if (spec.state_dim > 3) e.es.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            e.xs[i] = wps[i][0];
            e.ys[i] = wps[i][1];
            e.hs[i] = wps[i][2];
            if (spec.state_dim > 3) e.es[i] = wps[i][3];
        }
        e.end_state = wps.back();
        e.arc_length = arc_length_of(e.xs, e.ys);
        b.edges.push_back(std::move(e));
    }
    b.rebuild_caches();
    return b;
}

// ---------------------------------------------------------------------------
// Serialization: little-endian binary. Layout:
//   "BBOE" | u32 version | u32 system id | u32 edge count | f64 dt | u64 seed
//   per edge: f64 control[control_dim] | f64 duration | u32 waypoint count |
//             f64 waypoints[count * state_dim] (x, y, heading[, extra])
//   u32 CRC32 of everything above
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'B', 'B', 'O', 'E'};

template <typename T>
void put(std::string& buf, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
}

class Cursor {
public:
    Cursor(const char* data, std::size_t size) : data_(data), size_(size) {}

    template <typename T>
    T take() {
        if (pos_ + sizeof(T) > size_)
            throw BundleIoError(BundleError::Truncated,
                                "bundle file ends mid-record");
        T v;
        std::memcpy(&v, data_ + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void take_doubles(double* out, std::size_t n) {
        if (pos_ + n * sizeof(double) > size_)
            throw BundleIoError(BundleError::Truncated,
                                "bundle file ends mid-record");
        std::memcpy(out, data_ + pos_, n * sizeof(double));
        pos_ += n * sizeof(double);
    }

    std::size_t pos() const { return pos_; }

private:
    const char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

std::uint32_t crc_of(const char* data, std::size_t n) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(data),
              static_cast<uInt>(n)));
}

}  // namespace

void save_bundle(const EdgeBundle& bundle, const std::string& path) {
    std::string buf;
    buf.reserve(64 + bundle.edges.size() * 1600);
    buf.append(kMagic, 4);
    put<std::uint32_t>(buf, bundle.version);
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(bundle.system.id));
    put<std::uint32_t>(buf, static_cast<std::uint32_t>(bundle.edges.size()));
    put<double>(buf, bundle.dt);
    put<std::uint64_t>(buf, bundle.seed);
    for (const Edge& e : bundle.edges) {
        for (int d = 0; d < bundle.system.control_dim; ++d)
            put<double>(buf, e.control[d]);
        put<double>(buf, e.duration);
        const int wp = e.waypoint_count();
        put<std::uint32_t>(buf, static_cast<std::uint32_t>(wp));
        for (int i = 0; i < wp; ++i) {
            const auto u = static_cast<std::size_t>(i);
            put<double>(buf, e.xs[u]);
            put<double>(buf, e.ys[u]);
            put<double>(buf, e.hs[u]);
            if (!e.es.empty()) put<double>(buf, e.es[u]);
        }
    }
    put<std::uint32_t>(buf, crc_of(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw BundleIoError(BundleError::Io, "cannot open for write: " + path);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw BundleIoError(BundleError::Io, "write failed: " + path);
}

EdgeBundle load_bundle(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec))
        throw BundleIoError(BundleError::MissingFile,
                            "bundle file not found: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw BundleIoError(BundleError::Io, "cannot open for read: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());

    if (buf.size() < 4 + 4 + 4 + 4 + 8 + 8 + 4)
        throw BundleIoError(BundleError::Truncated,
                            "bundle file shorter than header: " + path);
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw BundleIoError(BundleError::BadFormat,
                            "bad magic bytes (not a bundle file): " + path);

    // Validate the checksum before trusting any payload fields.
    const std::size_t body = buf.size() - 4;
    std::uint32_t stored;
    std::memcpy(&stored, buf.data() + body, 4);
    if (crc_of(buf.data(), body) != stored)
        throw BundleIoError(BundleError::ChecksumMismatch,
                            "bundle checksum mismatch: " + path);

    Cursor cur(buf.data(), body);
    cur.take<std::uint32_t>();  // magic, already checked
    const auto version = cur.take<std::uint32_t>();
    if (version != kBundleFormatVersion)
        throw BundleIoError(BundleError::VersionMismatch,
                            "unsupported bundle version " +
                                std::to_string(version) + ": " + path);
    const auto sys_raw = cur.take<std::uint32_t>();
    if (sys_raw > static_cast<std::uint32_t>(SystemId::CarWithTrailer))
        throw BundleIoError(BundleError::BadFormat,
                            "unknown system id in bundle: " + path);
    const auto count = cur.take<std::uint32_t>();
    const double dt = cur.take<double>();
    const auto seed = cur.take<std::uint64_t>();

    EdgeBundle b;
    b.system = make_system(static_cast<SystemId>(sys_raw));
    b.version = version;
    b.dt = dt;
    b.seed = seed;
    b.edges.reserve(count);
    for (std::uint32_t id = 0; id < count; ++id) {
        Edge e;
        e.id = static_cast<int>(id);
        e.control = Control::zeros(b.system.control_dim);
        for (int d = 0; d < b.system.control_dim; ++d)
            e.control[d] = cur.take<double>();
        e.duration = cur.take<double>();
        const auto wp = cur.take<std::uint32_t>();
        if (wp == 0)
            throw BundleIoError(BundleError::BadFormat,
                                "edge with zero waypoints: " + path);
        e.xs.resize(wp);
        e.ys.resize(wp);
        e.hs.resize(wp);
        if (b.system.state_dim > 3) e.es.resize(wp);
        for (std::uint32_t i = 0; i < wp; ++i) {
            double s[kMaxDim];
            cur.take_doubles(s, static_cast<std::size_t>(b.system.state_dim));
            e.xs[i] = s[0];
            e.ys[i] = s[1];
            e.hs[i] = s[2];
            if (b.system.state_dim > 3) e.es[i] = s[3];
        }
        e.end_state = e.waypoint(static_cast<int>(wp) - 1);
        e.arc_length = arc_length_of(e.xs, e.ys);
        b.edges.push_back(std::move(e));
    }
    if (cur.pos() != body)
        throw BundleIoError(BundleError::BadFormat,
                            "trailing bytes after edge records: " + path);
    b.rebuild_caches();
    return b;
}

void transform_edge_into(const SystemSpec& spec, const Edge& edge,
                         const State& pose_state, EdgeInstance& out) {
    const std::size_t n = edge.xs.size();
    out.source_edge_id = edge.id;
    out.state_dim = spec.state_dim;
    out.arc_length = edge.arc_length;
    out.xs.resize(n);
    out.ys.resize(n);
    out.hs.resize(n);
    out.es.resize(spec.state_dim > 3 ? n : 0);

    const double heading = pose_state[2];
    kernels::Se2 place{std::cos(heading), std::sin(heading), pose_state[0],
                       pose_state[1]};
    kernels::active().se2_transform(edge.xs.data(), edge.ys.data(), n, place,
                                    out.xs.data(), out.ys.data());
    for (std::size_t i = 0; i < n; ++i)
        out.hs[i] = wrap_angle(edge.hs[i] + heading);
    if (spec.state_dim > 3) {
        const double offset = pose_state[3] - edge.es[0];
        if (spec.angular[3])
            for (std::size_t i = 0; i < n; ++i)
                out.es[i] = wrap_angle(edge.es[i] + offset);
        else
            for (std::size_t i = 0; i < n; ++i) out.es[i] = edge.es[i] + offset;
    }
    // Anchor exactly: the rotation above reproduces the zero first waypoint
    // only up to roundoff, and the planner's chaining invariant is exact.
    out.xs[0] = pose_state[0];
    out.ys[0] = pose_state[1];
    out.hs[0] = pose_state[2];
    if (spec.state_dim > 3) out.es[0] = pose_state[3];
}

EdgeInstance transform_edge(const SystemSpec& spec, const Edge& edge,
                            const State& pose_state) {
    EdgeInstance out;
    transform_edge_into(spec, edge, pose_state, out);
    return out;
}

EdgeInstance make_instance(const SystemSpec& spec,
                           const std::vector<State>& waypoints) {
    EdgeInstance out;
    out.source_edge_id = -1;
    out.state_dim = spec.state_dim;
    const std::size_t n = waypoints.size();
    out.xs.resize(n);
    out.ys.resize(n);
    out.hs.resize(n);
    out.es.resize(spec.state_dim > 3 ? n : 0);
    for (std::size_t i = 0; i < n; ++i) {
        out.xs[i] = waypoints[i][0];
        out.ys[i] = waypoints[i][1];
        out.hs[i] = waypoints[i][2];
        if (spec.state_dim > 3) out.es[i] = waypoints[i][3];
    }
    out.arc_length = arc_length_of(out.xs, out.ys);
    return out;
}

State canonical_anchor(const SystemSpec& spec, const State& x_near) {
    State c = State::zeros(spec.state_dim);
    for (int d = 3; d < spec.state_dim; ++d)
        c[d] = spec.angular[d] ? wrap_angle(x_near[d] - x_near[2]) : x_near[d];
    return c;
}

std::vector<int> near_edges(const EdgeBundle& bundle, const State& x_near,
                            double theta) {
    std::vector<int> scratch;
    return near_edges_ref(bundle, x_near, theta, scratch);
}

const std::vector<int>& near_edges_ref(const EdgeBundle& bundle,
                                       const State& x_near, double theta,
                                       std::vector<int>& scratch) {
    if (bundle.system.non_pose_dims() == 0) return bundle.all_ids;
    const State anchor = canonical_anchor(bundle.system, x_near);
    scratch.clear();
    for (const Edge& e : bundle.edges) {
        State start = State::zeros(bundle.system.state_dim);
        start[3] = e.start_extra();
        if (non_pose_distance(bundle.system, start, anchor) <= theta)
            scratch.push_back(e.id);
    }
    return scratch;
}

}  // namespace bboe

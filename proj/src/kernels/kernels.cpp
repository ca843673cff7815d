#include "bboe/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "bboe/types.hpp"

namespace bboe::kernels {
namespace {

void se2_transform_scalar(const double* xs, const double* ys, std::size_t n,
                          const Se2& t, double* out_x, double* out_y) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i];
        const double y = ys[i];
        out_x[i] = t.c * x - t.s * y + t.tx;
        out_y[i] = t.s * x + t.c * y + t.ty;
    }
}

void goal_keys_scalar(const double* end_x, const double* end_y,
                      const double* end_h, const double* end_e,
                      const double* start_e, std::size_t n,
                      const GoalKeyArgs& a, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double rx = a.place.c * end_x[i] - a.place.s * end_y[i] + a.place.tx;
        const double ry = a.place.s * end_x[i] + a.place.c * end_y[i] + a.place.ty;
        const double dx = rx - a.target_x;
        const double dy = ry - a.target_y;
        const double dh = wrap_angle(end_h[i] + a.pose_heading - a.target_heading);
        double acc = a.wx * dx * dx + a.wy * dy * dy + a.wh * dh * dh;
        if (a.has_extra) {
            double de = end_e[i] + (a.pose_extra - start_e[i]) - a.target_extra;
            if (a.extra_angular) de = wrap_angle(de);
            acc += a.we * de * de;
        }
        out[i] = std::sqrt(acc);
    }
}

void weighted_sq_dist_scalar(const double* xs, const double* ys,
                             const double* hs, const double* es, std::size_t n,
                             const double* q, const double* w, int dim,
                             bool extra_angular, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - q[0];
        const double dy = ys[i] - q[1];
        const double dh = wrap_angle(hs[i] - q[2]);
        double acc = w[0] * dx * dx + w[1] * dy * dy + w[2] * dh * dh;
        if (dim > 3) {
            double de = es[i] - q[3];
            if (extra_angular) de = wrap_angle(de);
            acc += w[3] * de * de;
        }
        out[i] = acc;
    }
}

std::size_t argmin_scalar(const double* v, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (v[i] < v[best]) best = i;
    }
    return best;
}

bool any_in_circle_scalar(const double* xs, const double* ys, std::size_t n,
                          double cx, double cy, double r) {
    const double r2 = r * r;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - cx;
        const double dy = ys[i] - cy;
        if (dx * dx + dy * dy < r2) return true;
    }
    return false;
}

bool any_in_rect_scalar(const double* xs, const double* ys, std::size_t n,
                        double minx, double miny, double maxx, double maxy,
                        double inflate) {
    const double r2 = inflate * inflate;
    for (std::size_t i = 0; i < n; ++i) {
        // Distance from the point to the rectangle: clamp onto the box, then
        // measure the residual.
        double dx = 0.0;
        if (xs[i] < minx) dx = minx - xs[i];
        else if (xs[i] > maxx) dx = xs[i] - maxx;
        double dy = 0.0;
        if (ys[i] < miny) dy = miny - ys[i];
        else if (ys[i] > maxy) dy = ys[i] - maxy;
        if (dx * dx + dy * dy < r2) return true;
    }
    return false;
}

bool any_outside_bounds_scalar(const double* xs, const double* ys,
                               std::size_t n, double minx, double miny,
                               double maxx, double maxy, double margin) {
    for (std::size_t i = 0; i < n; ++i) {
        if (xs[i] - margin < minx || xs[i] + margin > maxx ||
            ys[i] - margin < miny || ys[i] + margin > maxy)
            return true;
    }
    return false;
}

constexpr Funcs kScalar = {
    "scalar",
    se2_transform_scalar,
    goal_keys_scalar,
    weighted_sq_dist_scalar,
    argmin_scalar,
    any_in_circle_scalar,
    any_in_rect_scalar,
    any_outside_bounds_scalar,
};

Impl pick_default() {
#if defined(BBOE_HAVE_AVX2_TU)
    if (const char* env = std::getenv("BBOE_KERNELS")) {
        const std::string v(env);
        if (v == "scalar") return Impl::Scalar;
        if (v == "avx2" && avx2_supported()) return Impl::Avx2;
    }
    if (avx2_supported()) return Impl::Avx2;
#endif
    return Impl::Scalar;
}

Impl g_active = pick_default();

}  // namespace

const Funcs& scalar() { return kScalar; }

bool avx2_supported() {
#if defined(BBOE_HAVE_AVX2_TU) && defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Funcs& active() {
    return g_active == Impl::Avx2 ? avx2() : kScalar;
}

Impl active_impl() { return g_active; }

void set_active(Impl impl) {
    if (impl == Impl::Avx2 && !avx2_supported())
        throw std::runtime_error("AVX2 kernels not supported on this host");
    g_active = impl;
}

#if !defined(BBOE_HAVE_AVX2_TU)
const Funcs& avx2() {
    throw std::runtime_error("AVX2 kernels not built");
}
#endif

}  // namespace bboe::kernels

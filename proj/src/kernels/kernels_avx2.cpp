#include "bboe/kernels.hpp"

#if defined(BBOE_HAVE_AVX2_TU)

#include <immintrin.h>

#include <cmath>

// AVX2 variants of the batch kernels. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a runtime CPU check; nothing
// here may be referenced from generic code paths except through the Funcs
// table. Scalar tail helpers are internal to this file so they never collide
// with the generic-ISA definitions at link time.

namespace bboe::kernels {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

double wrap1(double a) { return a - kTwoPi * std::ceil((a - kPi) / kTwoPi); }

// Vector wrap to (-pi, pi]: a - 2*pi*ceil((a - pi) / (2*pi)), matching wrap1.
inline __m256d wrap4(__m256d a) {
    const __m256d pi = _mm256_set1_pd(kPi);
    const __m256d twopi = _mm256_set1_pd(kTwoPi);
    __m256d k = _mm256_div_pd(_mm256_sub_pd(a, pi), twopi);
    k = _mm256_round_pd(k, _MM_FROUND_TO_POS_INF | _MM_FROUND_NO_EXC);
    return _mm256_sub_pd(a, _mm256_mul_pd(twopi, k));
}

void se2_transform_avx2(const double* xs, const double* ys, std::size_t n,
                        const Se2& t, double* out_x, double* out_y) {
    const __m256d c = _mm256_set1_pd(t.c);
    const __m256d s = _mm256_set1_pd(t.s);
    const __m256d tx = _mm256_set1_pd(t.tx);
    const __m256d ty = _mm256_set1_pd(t.ty);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(xs + i);
        const __m256d y = _mm256_loadu_pd(ys + i);
        const __m256d rx =
            _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(c, x), _mm256_mul_pd(s, y)), tx);
        const __m256d ry =
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(s, x), _mm256_mul_pd(c, y)), ty);
        _mm256_storeu_pd(out_x + i, rx);
        _mm256_storeu_pd(out_y + i, ry);
    }
    for (; i < n; ++i) {
        const double x = xs[i];
        const double y = ys[i];
        out_x[i] = t.c * x - t.s * y + t.tx;
        out_y[i] = t.s * x + t.c * y + t.ty;
    }
}

void goal_keys_avx2(const double* end_x, const double* end_y,
                    const double* end_h, const double* end_e,
                    const double* start_e, std::size_t n, const GoalKeyArgs& a,
                    double* out) {
    const __m256d c = _mm256_set1_pd(a.place.c);
    const __m256d s = _mm256_set1_pd(a.place.s);
    const __m256d tx = _mm256_set1_pd(a.place.tx);
    const __m256d ty = _mm256_set1_pd(a.place.ty);
    const __m256d gx = _mm256_set1_pd(a.target_x);
    const __m256d gy = _mm256_set1_pd(a.target_y);
    const __m256d hoff = _mm256_set1_pd(a.pose_heading - a.target_heading);
    const __m256d eoff = _mm256_set1_pd(a.pose_extra - a.target_extra);
    const __m256d wx = _mm256_set1_pd(a.wx);
    const __m256d wy = _mm256_set1_pd(a.wy);
    const __m256d wh = _mm256_set1_pd(a.wh);
    const __m256d we = _mm256_set1_pd(a.we);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d ex = _mm256_loadu_pd(end_x + i);
        const __m256d ey = _mm256_loadu_pd(end_y + i);
        const __m256d rx =
            _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(c, ex), _mm256_mul_pd(s, ey)), tx);
        const __m256d ry =
            _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(s, ex), _mm256_mul_pd(c, ey)), ty);
        const __m256d dx = _mm256_sub_pd(rx, gx);
        const __m256d dy = _mm256_sub_pd(ry, gy);
        const __m256d dh = wrap4(_mm256_add_pd(_mm256_loadu_pd(end_h + i), hoff));
        __m256d acc = _mm256_mul_pd(wx, _mm256_mul_pd(dx, dx));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(wy, _mm256_mul_pd(dy, dy)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(wh, _mm256_mul_pd(dh, dh)));
        if (a.has_extra) {
            __m256d de = _mm256_add_pd(
                _mm256_sub_pd(_mm256_loadu_pd(end_e + i), _mm256_loadu_pd(start_e + i)),
                eoff);
            if (a.extra_angular) de = wrap4(de);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(we, _mm256_mul_pd(de, de)));
        }
        _mm256_storeu_pd(out + i, _mm256_sqrt_pd(acc));
    }
    for (; i < n; ++i) {
        const double rx = a.place.c * end_x[i] - a.place.s * end_y[i] + a.place.tx;
        const double ry = a.place.s * end_x[i] + a.place.c * end_y[i] + a.place.ty;
        const double dx = rx - a.target_x;
        const double dy = ry - a.target_y;
        const double dh = wrap1(end_h[i] + a.pose_heading - a.target_heading);
        double acc = a.wx * dx * dx + a.wy * dy * dy + a.wh * dh * dh;
        if (a.has_extra) {
            double de = end_e[i] + (a.pose_extra - start_e[i]) - a.target_extra;
            if (a.extra_angular) de = wrap1(de);
            acc += a.we * de * de;
        }
        out[i] = std::sqrt(acc);
    }
}

void weighted_sq_dist_avx2(const double* xs, const double* ys, const double* hs,
                           const double* es, std::size_t n, const double* q,
                           const double* w, int dim, bool extra_angular,
                           double* out) {
    const __m256d qx = _mm256_set1_pd(q[0]);
    const __m256d qy = _mm256_set1_pd(q[1]);
    const __m256d qh = _mm256_set1_pd(q[2]);
    const __m256d wx = _mm256_set1_pd(w[0]);
    const __m256d wy = _mm256_set1_pd(w[1]);
    const __m256d wh = _mm256_set1_pd(w[2]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
        const __m256d dh = wrap4(_mm256_sub_pd(_mm256_loadu_pd(hs + i), qh));
        __m256d acc = _mm256_mul_pd(wx, _mm256_mul_pd(dx, dx));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(wy, _mm256_mul_pd(dy, dy)));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(wh, _mm256_mul_pd(dh, dh)));
        if (dim > 3) {
            __m256d de = _mm256_sub_pd(_mm256_loadu_pd(es + i), _mm256_set1_pd(q[3]));
            if (extra_angular) de = wrap4(de);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(w[3]),
                                                   _mm256_mul_pd(de, de)));
        }
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - q[0];
        const double dy = ys[i] - q[1];
        const double dh = wrap1(hs[i] - q[2]);
        double acc = w[0] * dx * dx + w[1] * dy * dy + w[2] * dh * dh;
        if (dim > 3) {
            double de = es[i] - q[3];
            if (extra_angular) de = wrap1(de);
            acc += w[3] * de * de;
        }
        out[i] = acc;
    }
}

std::size_t argmin_avx2(const double* v, std::size_t n) {
    if (n < 8) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (v[i] < v[best]) best = i;
        return best;
    }
    __m256d vmin = _mm256_loadu_pd(v);
    __m256i vidx = _mm256_set_epi64x(3, 2, 1, 0);
    __m256i idx = vidx;
    const __m256i four = _mm256_set1_epi64x(4);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) {
        idx = _mm256_add_epi64(idx, four);
        const __m256d cand = _mm256_loadu_pd(v + i);
        // Strict less-than keeps the earlier index on ties within a lane.
        const __m256d lt = _mm256_cmp_pd(cand, vmin, _CMP_LT_OQ);
        vmin = _mm256_blendv_pd(vmin, cand, lt);
        vidx = _mm256_castpd_si256(_mm256_blendv_pd(
            _mm256_castsi256_pd(vidx), _mm256_castsi256_pd(idx), lt));
    }
    alignas(32) double vals[4];
    alignas(32) long long idxs[4];
    _mm256_store_pd(vals, vmin);
    _mm256_store_si256(reinterpret_cast<__m256i*>(idxs), vidx);
    double best_val = vals[0];
    std::size_t best = static_cast<std::size_t>(idxs[0]);
    for (int lane = 1; lane < 4; ++lane) {
        const auto j = static_cast<std::size_t>(idxs[lane]);
        if (vals[lane] < best_val || (vals[lane] == best_val && j < best)) {
            best_val = vals[lane];
            best = j;
        }
    }
    for (; i < n; ++i) {
        if (v[i] < best_val) {
            best_val = v[i];
            best = i;
        }
    }
    return best;
}

bool any_in_circle_avx2(const double* xs, const double* ys, std::size_t n,
                        double cx, double cy, double r) {
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vcy = _mm256_set1_pd(cy);
    const __m256d r2 = _mm256_set1_pd(r * r);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vcx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vcy);
        const __m256d d2 =
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        if (_mm256_movemask_pd(_mm256_cmp_pd(d2, r2, _CMP_LT_OQ))) return true;
    }
    const double rr2 = r * r;
    for (; i < n; ++i) {
        const double dx = xs[i] - cx;
        const double dy = ys[i] - cy;
        if (dx * dx + dy * dy < rr2) return true;
    }
    return false;
}

bool any_in_rect_avx2(const double* xs, const double* ys, std::size_t n,
                      double minx, double miny, double maxx, double maxy,
                      double inflate) {
    const __m256d vminx = _mm256_set1_pd(minx);
    const __m256d vminy = _mm256_set1_pd(miny);
    const __m256d vmaxx = _mm256_set1_pd(maxx);
    const __m256d vmaxy = _mm256_set1_pd(maxy);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d r2 = _mm256_set1_pd(inflate * inflate);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(xs + i);
        const __m256d y = _mm256_loadu_pd(ys + i);
        const __m256d dx = _mm256_max_pd(
            zero, _mm256_max_pd(_mm256_sub_pd(vminx, x), _mm256_sub_pd(x, vmaxx)));
        const __m256d dy = _mm256_max_pd(
            zero, _mm256_max_pd(_mm256_sub_pd(vminy, y), _mm256_sub_pd(y, vmaxy)));
        const __m256d d2 =
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        if (_mm256_movemask_pd(_mm256_cmp_pd(d2, r2, _CMP_LT_OQ))) return true;
    }
    const double rr2 = inflate * inflate;
    for (; i < n; ++i) {
        double dx = 0.0;
        if (xs[i] < minx) dx = minx - xs[i];
        else if (xs[i] > maxx) dx = xs[i] - maxx;
        double dy = 0.0;
        if (ys[i] < miny) dy = miny - ys[i];
        else if (ys[i] > maxy) dy = ys[i] - maxy;
        if (dx * dx + dy * dy < rr2) return true;
    }
    return false;
}

bool any_outside_bounds_avx2(const double* xs, const double* ys, std::size_t n,
                             double minx, double miny, double maxx, double maxy,
                             double margin) {
    const __m256d vminx = _mm256_set1_pd(minx);
    const __m256d vminy = _mm256_set1_pd(miny);
    const __m256d vmaxx = _mm256_set1_pd(maxx);
    const __m256d vmaxy = _mm256_set1_pd(maxy);
    const __m256d m = _mm256_set1_pd(margin);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(xs + i);
        const __m256d y = _mm256_loadu_pd(ys + i);
        __m256d bad = _mm256_cmp_pd(_mm256_sub_pd(x, m), vminx, _CMP_LT_OQ);
        bad = _mm256_or_pd(bad, _mm256_cmp_pd(_mm256_add_pd(x, m), vmaxx, _CMP_GT_OQ));
        bad = _mm256_or_pd(bad, _mm256_cmp_pd(_mm256_sub_pd(y, m), vminy, _CMP_LT_OQ));
        bad = _mm256_or_pd(bad, _mm256_cmp_pd(_mm256_add_pd(y, m), vmaxy, _CMP_GT_OQ));
        if (_mm256_movemask_pd(bad)) return true;
    }
    for (; i < n; ++i) {
        if (xs[i] - margin < minx || xs[i] + margin > maxx ||
            ys[i] - margin < miny || ys[i] + margin > maxy)
            return true;
    }
    return false;
}

constexpr Funcs kAvx2 = {
    "avx2",
    se2_transform_avx2,
    goal_keys_avx2,
    weighted_sq_dist_avx2,
    argmin_avx2,
    any_in_circle_avx2,
    any_in_rect_avx2,
    any_outside_bounds_avx2,
};

}  // namespace

const Funcs& avx2() { return kAvx2; }

}  // namespace bboe::kernels

#endif  // BBOE_HAVE_AVX2_TU

#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace bboe {

/// Maximum state dimension supported by the fixed-capacity containers.
/// Covers planar pose (x, y, heading) plus one articulated degree of freedom.
inline constexpr int kMaxDim = 4;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wraps an angle to the half-open interval (-pi, pi].
inline double wrap_angle(double a) {
    return a - kTwoPi * std::ceil((a - kPi) / kTwoPi);
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Fixed-capacity numeric vector used for states and controls.
class Vec {
public:
    Vec() = default;
    Vec(std::initializer_list<double> init) {
        assert(init.size() <= static_cast<std::size_t>(kMaxDim));
        n_ = static_cast<int>(init.size());
        int i = 0;
        for (double v : init) v_[i++] = v;
    }
    static Vec zeros(int n) {
        assert(n >= 0 && n <= kMaxDim);
        Vec v;
        v.n_ = n;
        return v;
    }

    int size() const { return n_; }
    void push_back(double v) {
        assert(n_ < kMaxDim);
        v_[n_++] = v;
    }
    double& operator[](int i) {
        assert(i >= 0 && i < n_);
        return v_[i];
    }
    double operator[](int i) const {
        assert(i >= 0 && i < n_);
        return v_[i];
    }
    const double* data() const { return v_.data(); }
    double* data() { return v_.data(); }

    friend bool operator==(const Vec& a, const Vec& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i)
            if (a.v_[i] != b.v_[i]) return false;
        return true;
    }

private:
    std::array<double, kMaxDim> v_{};
    int n_ = 0;
};

using State = Vec;
using Control = Vec;

/// Deterministic random source. The draw routines are pinned here (rather
/// than delegating to std::uniform_* distributions) so that seeded sequences
/// are identical across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi); returns lo for a degenerate interval.
    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    double uniform(const Interval& iv) { return uniform(iv.lo, iv.hi); }

    /// Unbiased uniform integer on [0, n). Lemire's multiply-shift rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        assert(n > 0);
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::mt19937_64 gen_;
};

/// SplitMix64 finalizer; used to derive independent seeds from a base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace bboe

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace uavmec {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Bearing from `from` to `to`, wrapped into [0, 2*pi).
inline double bearing(Vec2 from, Vec2 to) {
    double a = std::atan2(to.y - from.y, to.x - from.x);
    if (a < 0.0) a += 2.0 * M_PI;
    return a;
}

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    bool contains(Vec2 p, double eps = 0.0) const {
        return p.x >= x0 - eps && p.x <= x1 + eps && p.y >= y0 - eps && p.y <= y1 + eps;
    }
    Vec2 clip(Vec2 p) const {
        return {std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)};
    }
    Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent seed from a base seed, a purpose tag, and up to two
/// indices. Streams derived with distinct tags or indices never overlap in
/// practice, which is what keeps worker-count changes and the discriminator
/// pathway from perturbing unrelated random draws.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    std::uint64_t s = base;
    std::uint64_t x = splitmix64(s) ^ h;
    x ^= splitmix64(s) + a * 0x9e3779b97f4a7c15ULL;
    std::uint64_t y = x;
    x = splitmix64(y) ^ (b + 0x632be59bd9b4e019ULL);
    std::uint64_t z = x;
    return splitmix64(z);
}

/// Deterministic random source. All stochastic components draw through this
/// wrapper so that trajectories replay bit-for-bit under a fixed seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Standard normal via Box-Muller; second value cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Gamma(alpha, 1) for alpha >= 1 (Marsaglia-Tsang squeeze method).
    double gamma(double alpha) {
        if (alpha < 1.0) throw std::invalid_argument("Rng::gamma requires alpha >= 1");
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform();
            if (u <= 0.0) continue;
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

/// Digamma (derivative of log-gamma). Recurrence below 6, asymptotic series above.
inline double digamma(double x) {
    if (!(x > 0.0)) throw std::invalid_argument("digamma requires x > 0");
    double result = 0.0;
    while (x < 6.0) {
        result -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    result += std::log(x) - 0.5 * inv;
    // Bernoulli-number tail: 1/12 x^2 - 1/120 x^4 + 1/252 x^6 - 1/240 x^8 + 1/132 x^10
    result -= inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    return result;
}

inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

/// Shortest round-trip decimal representation; keeps emitted logs and traces
/// byte-stable across runs.
inline std::string double_to_string(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace uavmec

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace regulus {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// point outside the chart's coordinate domain
struct domain_error : error { using error::error; };
// metric not positive definite / matrix not invertible at tolerance
struct degeneracy_error : error { using error::error; };
// iterative solver failed to reach its tolerance
struct nonconvergence_error : error { using error::error; };
// duplicate sample points carrying conflicting values
struct inconsistent_field_error : error { using error::error; };
// requested construction is not defined for this input (by design)
struct unsupported_construction_error : error { using error::error; };
// bad builtin-surface or query parameters
struct parameter_error : error { using error::error; };
// malformed input file
struct format_error : error { using error::error; };

struct Point2 {
    double x1 = 0.0, x2 = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x1, s * a.x2}; }
    friend Point2 operator*(Point2 a, double s) { return s * a; }
    friend Point2 operator/(Point2 a, double s) { return {a.x1 / s, a.x2 / s}; }
};

using Vec2 = Point2;

inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double cross(Vec2 a, Vec2 b) { return a.x1 * b.x2 - a.x2 * b.x1; }
inline double norm(Vec2 a) { return std::hypot(a.x1, a.x2); }
inline double dist(Point2 a, Point2 b) { return norm(a - b); }

// general 2x2 matrix, used for coordinate normalizations
struct Mat2 {
    double m11 = 1.0, m12 = 0.0, m21 = 0.0, m22 = 1.0;

    Vec2 apply(Vec2 v) const { return {m11 * v.x1 + m12 * v.x2, m21 * v.x1 + m22 * v.x2}; }
    double det() const { return m11 * m22 - m12 * m21; }
    static Mat2 identity() { return {}; }
    static Mat2 scale(double s) { return {s, 0.0, 0.0, s}; }
};

inline Mat2 inverse(const Mat2& m) {
    const double d = m.det();
    if (std::abs(d) < 1e-300) throw degeneracy_error("singular 2x2 matrix");
    return {m.m22 / d, -m.m12 / d, -m.m21 / d, m.m11 / d};
}

// symmetric 2x2 tensor (metric components g11, g12, g22)
struct SymMatrix2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a12; }
    double trace() const { return a11 + a22; }
    Vec2 apply(Vec2 v) const { return {a11 * v.x1 + a12 * v.x2, a12 * v.x1 + a22 * v.x2}; }
    double quad(Vec2 u, Vec2 v) const { return dot(u, apply(v)); }
    double operator()(int i, int j) const {
        return (i == 0) ? (j == 0 ? a11 : a12) : (j == 0 ? a12 : a22);
    }

    static SymMatrix2 identity() { return {1.0, 0.0, 1.0}; }

    friend SymMatrix2 operator+(SymMatrix2 a, SymMatrix2 b) {
        return {a.a11 + b.a11, a.a12 + b.a12, a.a22 + b.a22};
    }
    friend SymMatrix2 operator-(SymMatrix2 a, SymMatrix2 b) {
        return {a.a11 - b.a11, a.a12 - b.a12, a.a22 - b.a22};
    }
    friend SymMatrix2 operator*(double s, SymMatrix2 a) {
        return {s * a.a11, s * a.a12, s * a.a22};
    }
};

// inverse of a metric tensor; relative determinant tolerance guards degeneracy
inline SymMatrix2 inverse_metric(const SymMatrix2& g) {
    const double scale = std::max({std::abs(g.a11), std::abs(g.a22), std::abs(g.a12)});
    const double d = g.det();
    if (!(d > 1e-12 * scale * scale) || !(g.a11 > 0.0))
        throw degeneracy_error("metric is degenerate or not positive definite");
    return {g.a22 / d, -g.a12 / d, g.a11 / d};
}

// principal square root of an SPD tensor: (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
inline SymMatrix2 sqrt_spd(const SymMatrix2& m) {
    const double d = m.det();
    if (!(d > 0.0) || !(m.a11 > 0.0)) throw degeneracy_error("sqrt of non-SPD tensor");
    const double s = std::sqrt(d);
    const double t = std::sqrt(m.trace() + 2.0 * s);
    return {(m.a11 + s) / t, m.a12 / t, (m.a22 + s) / t};
}

// full second-order jet of the metric at a point.
// dg[l] = d g / d x_l;  d2g[p] = second partials with p indexing the
// unordered pair (1,1) -> 0, (1,2) -> 1, (2,2) -> 2.
struct MetricJet {
    SymMatrix2 g;
    std::array<SymMatrix2, 2> dg{};
    std::array<SymMatrix2, 3> d2g{};

    static constexpr int pair_index(int l, int m) { return l + m; }  // 0,1 indices
    const SymMatrix2& second(int l, int m) const { return d2g[pair_index(l, m)]; }
};

// a possibly-unbounded length (e.g. injectivity radius)
struct Radius {
    double value = 0.0;
    bool unbounded = false;

    static Radius of(double v) { return {v, false}; }
    static Radius infinite() { return {std::numeric_limits<double>::infinity(), true}; }
    double as_bound(double cap) const { return unbounded ? cap : value; }
};

// a search result that may have hit its cap ("at least `value`")
struct Capped {
    double value = 0.0;
    bool capped = false;
};

// deterministic 64-bit generator (splitmix64); used for all subsampling so
// results do not depend on the standard library's distribution internals
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }  // [0,1)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }
};

inline double sq(double x) { return x * x; }

constexpr double kDefaultSeed = 0x5EED;

}  // namespace regulus

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "types.hpp"

namespace regulus {

// distance between samples i and j; empty function means Euclidean chart distance
using PairDistanceFn = std::function<double(std::size_t, std::size_t)>;

// k scalar components per point, row-major; one derivative level of a field
class ComponentField {
  public:
    ComponentField() = default;
    ComponentField(std::size_t n_points, std::size_t n_comp)
        : n_(n_points), k_(n_comp), data_(n_points * n_comp, 0.0) {}

    std::size_t points() const { return n_; }
    std::size_t comps() const { return k_; }
    double& at(std::size_t i, std::size_t c) { return data_[i * k_ + c]; }
    double at(std::size_t i, std::size_t c) const { return data_[i * k_ + c]; }

    double sup_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }
    // max over components of |f_c(i) - f_c(j)|
    double max_abs_diff(std::size_t i, std::size_t j) const {
        double m = 0.0;
        for (std::size_t c = 0; c < k_; ++c) m = std::max(m, std::abs(data_[i * k_ + c] - data_[j * k_ + c]));
        return m;
    }

  private:
    std::size_t n_ = 0, k_ = 0;
    std::vector<double> data_;
};

inline ComponentField scalar_field(const std::vector<double>& v) {
    ComponentField f(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) f.at(i, 0) = v[i];
    return f;
}

struct NormEstimate {
    double value = 0.0;
    std::vector<double> terms;  // weighted terms, level 0..k then the seminorm term
    double seminorm = 0.0;      // unweighted top-level seminorm
    double alpha = 0.0;
    std::size_t n_points = 0;
    std::size_t n_pairs = 0;
};

namespace detail {

constexpr std::size_t kFullPairLimit = 2000;
constexpr std::size_t kRandomPairs = 1000000;
constexpr int kBucketSide = 32;

// deterministic pair coverage: all pairs when n is small; otherwise every pair
// inside (and across adjacent) spatial buckets plus a fixed batch of random
// long-range pairs
template <class Visit>
void for_sample_pairs(const std::vector<Point2>& pts, std::uint64_t seed, Visit&& visit) {
    const std::size_t n = pts.size();
    if (n < 2) return;
    if (n <= kFullPairLimit) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
        return;
    }
    double xlo = pts[0].x1, xhi = xlo, ylo = pts[0].x2, yhi = ylo;
    for (const Point2& p : pts) {
        xlo = std::min(xlo, p.x1);
        xhi = std::max(xhi, p.x1);
        ylo = std::min(ylo, p.x2);
        yhi = std::max(yhi, p.x2);
    }
    const double wx = std::max(xhi - xlo, 1e-300), wy = std::max(yhi - ylo, 1e-300);
    auto cell = [&](const Point2& p) {
        int cx = std::min(kBucketSide - 1, static_cast<int>((p.x1 - xlo) / wx * kBucketSide));
        int cy = std::min(kBucketSide - 1, static_cast<int>((p.x2 - ylo) / wy * kBucketSide));
        return cy * kBucketSide + cx;
    };
    std::vector<std::vector<std::size_t>> buckets(kBucketSide * kBucketSide);
    for (std::size_t i = 0; i < n; ++i) buckets[cell(pts[i])].push_back(i);
    // within-cell pairs and pairs against E, N, NE, NW neighbours
    const int dx[4] = {1, 0, 1, -1}, dy[4] = {0, 1, 1, 1};
    for (int cy = 0; cy < kBucketSide; ++cy)
        for (int cx = 0; cx < kBucketSide; ++cx) {
            const auto& own = buckets[cy * kBucketSide + cx];
            for (std::size_t a = 0; a < own.size(); ++a)
                for (std::size_t b = a + 1; b < own.size(); ++b) visit(own[a], own[b]);
            for (int d = 0; d < 4; ++d) {
                const int nx = cx + dx[d], ny = cy + dy[d];
                if (nx < 0 || nx >= kBucketSide || ny < 0 || ny >= kBucketSide) continue;
                const auto& other = buckets[ny * kBucketSide + nx];
                for (std::size_t a : own)
                    for (std::size_t b : other) visit(a, b);
            }
        }
    SplitMix64 rng(seed);
    for (std::size_t t = 0; t < kRandomPairs; ++t) {
        const std::size_t i = rng.index(n), j = rng.index(n);
        if (i != j) visit(i, j);
    }
}

}  // namespace detail

// Holder seminorm sup_{x != y} max_c |f_c(x) - f_c(y)| / d(x,y)^alpha over the
// sampled pairs (a lower bound for the true seminorm)
inline double holder_seminorm(const std::vector<Point2>& pts, const ComponentField& f, double alpha,
                              const PairDistanceFn& pair_dist = {}, std::uint64_t seed = kDefaultSeed,
                              std::size_t* pairs_out = nullptr) {
    double best = 0.0;
    std::size_t count = 0;
    double scale = 0.0;
    for (const Point2& p : pts) scale = std::max({scale, std::abs(p.x1), std::abs(p.x2)});
    const double dmin = 1e-14 * std::max(1.0, scale);
    detail::for_sample_pairs(pts, seed, [&](std::size_t i, std::size_t j) {
        const double d = pair_dist ? pair_dist(i, j) : dist(pts[i], pts[j]);
        ++count;
        if (d <= dmin) return;
        const double q = f.max_abs_diff(i, j) / std::pow(d, alpha);
        if (q > best) best = q;
    });
    if (pairs_out) *pairs_out = count;
    return best;
}

// dimensionless norm with diameter weights:
//   sum_j diam^j * sup|D^j f|  +  diam^(k+alpha) * [D^k f]_alpha
// levels[j] holds the components of the j-th derivative at each sample
inline NormEstimate nondim_norm(const std::vector<Point2>& pts,
                                const std::vector<ComponentField>& levels, double diam, double alpha,
                                const PairDistanceFn& pair_dist = {},
                                std::uint64_t seed = kDefaultSeed) {
    if (levels.empty()) throw parameter_error("nondim_norm needs at least one derivative level");
    NormEstimate e;
    e.alpha = alpha;
    e.n_points = pts.size();
    const std::size_t k = levels.size() - 1;
    for (std::size_t j = 0; j <= k; ++j) {
        const double t = std::pow(diam, static_cast<double>(j)) * levels[j].sup_abs();
        e.terms.push_back(t);
        e.value += t;
    }
    e.seminorm = holder_seminorm(pts, levels[k], alpha, pair_dist, seed, &e.n_pairs);
    const double t = std::pow(diam, static_cast<double>(k) + alpha) * e.seminorm;
    e.terms.push_back(t);
    e.value += t;
    return e;
}

// curvature norm on a radius-delta ball: sup|K| + (2 delta)^alpha [K]_alpha,
// with the seminorm taken against geodesic distances between samples
inline NormEstimate curvature_norm(const std::vector<Point2>& pts, const std::vector<double>& K,
                                   double delta, double alpha, const PairDistanceFn& geo_dist,
                                   std::uint64_t seed = kDefaultSeed) {
    return nondim_norm(pts, {scalar_field(K)}, 2.0 * delta, alpha, geo_dist, seed);
}

// interior-weighted norm with boundary-gap weights d_x = gap(x):
//   sum_j sup_x d_x^(j+sigma) |D^j f(x)|
//   + sup_{x,y} min(d_x,d_y)^(k+alpha+sigma) |D^k f(x) - D^k f(y)| / |x-y|^alpha
inline NormEstimate interior_weighted_norm(const std::vector<Point2>& pts,
                                           const std::vector<ComponentField>& levels,
                                           const std::vector<double>& gaps, double alpha, double sigma,
                                           std::uint64_t seed = kDefaultSeed) {
    if (levels.empty()) throw parameter_error("interior_weighted_norm needs at least one level");
    if (gaps.size() != pts.size()) throw parameter_error("interior_weighted_norm: gap count mismatch");
    NormEstimate e;
    e.alpha = alpha;
    e.n_points = pts.size();
    const std::size_t k = levels.size() - 1;
    for (std::size_t j = 0; j <= k; ++j) {
        double t = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double m = 0.0;
            for (std::size_t c = 0; c < levels[j].comps(); ++c)
                m = std::max(m, std::abs(levels[j].at(i, c)));
            t = std::max(t, std::pow(gaps[i], static_cast<double>(j) + sigma) * m);
        }
        e.terms.push_back(t);
        e.value += t;
    }
    double scale = 0.0;
    for (const Point2& p : pts) scale = std::max({scale, std::abs(p.x1), std::abs(p.x2)});
    const double dmin = 1e-14 * std::max(1.0, scale);
    double best = 0.0;
    std::size_t count = 0;
    detail::for_sample_pairs(pts, seed, [&](std::size_t i, std::size_t j) {
        const double d = dist(pts[i], pts[j]);
        ++count;
        if (d <= dmin) return;
        const double w = std::pow(std::min(gaps[i], gaps[j]), static_cast<double>(k) + alpha + sigma);
        const double q = w * levels[k].max_abs_diff(i, j) / std::pow(d, alpha);
        if (q > best) best = q;
    });
    e.n_pairs = count;
    e.seminorm = best;
    e.terms.push_back(best);
    e.value += best;
    return e;
}

}  // namespace regulus

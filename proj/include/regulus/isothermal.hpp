#pragma once
// isothermal disc charts z : ball -> closed delta-disc, z(center) = 0, with
// conformal factor phi so the pulled-back metric is phi * (dx^2 + dy^2)

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "regulus/geodesic.hpp"
#include "regulus/tensor.hpp"

namespace regulus {

struct ConformalJet {
    double phi = 1.0;
    Vec2 dphi{0.0, 0.0};                       // d phi / d z-coordinates
    std::array<double, 3> d2phi{0.0, 0.0, 0.0};  // xx, xy, yy
};

struct IsothermalChart {
    enum class Construction { analytic, radial_ode };
    Construction construction = Construction::analytic;
    double delta = 0.0;  // disc radius = ball radius
    Point2 center{};     // ball center in surface chart coordinates
    double phi0 = 1.0;   // conformal factor at z = 0

    std::function<Point2(Point2)> forward;        // surface chart point -> z
    std::function<Point2(Point2)> inverse;        // z -> surface chart point
    std::function<double(Point2)> phi;            // conformal factor at z
    std::function<double(Point2)> curvature_at;   // K of the surface at inverse(z)
    std::function<ConformalJet(Point2)> phi_jet;  // phi with derivatives in z
};

enum class IsoMethod { automatic, analytic, radial_ode };

namespace detail {

using cplx = std::complex<double>;

inline cplx to_cplx(Point2 p) { return {p.x1, p.x2}; }
inline Point2 to_point(cplx z) { return {z.real(), z.imag()}; }

// rational conformal factors c/(u^2) with u = lam2 +/- |z|^2 cover the sphere
// and hyperbolic closed forms; sign is +1 for sphere, -1 for hyperbolic
inline ConformalJet rational_phi_jet(Point2 z, double c, double lam2, double sign) {
    const double u = lam2 + sign * (sq(z.x1) + sq(z.x2));
    const double u3 = u * u * u, u4 = u3 * u;
    ConformalJet j;
    j.phi = c / (u * u);
    j.dphi = {-4.0 * sign * c * z.x1 / u3, -4.0 * sign * c * z.x2 / u3};
    j.d2phi[0] = -4.0 * sign * c / u3 + 24.0 * c * sq(z.x1) / u4;
    j.d2phi[1] = 24.0 * c * z.x1 * z.x2 / u4;
    j.d2phi[2] = -4.0 * sign * c / u3 + 24.0 * c * sq(z.x2) / u4;
    return j;
}

inline IsothermalChart iso_flat(const GeodesicBall& ball) {
    IsothermalChart iso;
    iso.construction = IsothermalChart::Construction::analytic;
    iso.delta = ball.radius;
    iso.center = ball.center;
    iso.phi0 = 1.0;
    const Point2 c = ball.center;
    iso.forward = [c](Point2 p) { return p - c; };
    iso.inverse = [c](Point2 z) { return z + c; };
    iso.phi = [](Point2) { return 1.0; };
    iso.curvature_at = [](Point2) { return 0.0; };
    iso.phi_jet = [](Point2) { return ConformalJet{}; };
    return iso;
}

inline IsothermalChart iso_sphere(const GeodesicBall& ball, double R) {
    const double delta = ball.radius;
    const cplx a = to_cplx(ball.center) / R;
    const double rstar = std::tan(delta / (2.0 * R));
    const double lambda = delta / rstar;
    const double lam2 = sq(lambda);
    const double cphi = 4.0 * sq(R) * lam2;

    IsothermalChart iso;
    iso.construction = IsothermalChart::Construction::analytic;
    iso.delta = delta;
    iso.center = ball.center;
    iso.phi0 = 4.0 * sq(R) / lam2;
    iso.forward = [a, R, lambda](Point2 p) {
        const cplx w = to_cplx(p) / R;
        return to_point(lambda * (w - a) / (1.0 + std::conj(a) * w));
    };
    iso.inverse = [a, R, lambda](Point2 z) {
        const cplx w = to_cplx(z) / lambda;
        return to_point(R * (w + a) / (1.0 - std::conj(a) * w));
    };
    iso.phi = [cphi, lam2](Point2 z) { return cphi / sq(lam2 + sq(z.x1) + sq(z.x2)); };
    iso.curvature_at = [R](Point2) { return 1.0 / sq(R); };
    iso.phi_jet = [cphi, lam2](Point2 z) { return rational_phi_jet(z, cphi, lam2, +1.0); };
    return iso;
}

inline IsothermalChart iso_hyperbolic(const GeodesicBall& ball, double k) {
    const double delta = ball.radius;
    const cplx a = to_cplx(ball.center);
    const double rstar = std::tanh(delta * std::sqrt(k) / 2.0);
    const double lambda = delta / rstar;
    const double lam2 = sq(lambda);
    const double cphi = 4.0 * lam2 / k;

    IsothermalChart iso;
    iso.construction = IsothermalChart::Construction::analytic;
    iso.delta = delta;
    iso.center = ball.center;
    iso.phi0 = 4.0 / (k * lam2);
    iso.forward = [a, lambda](Point2 p) {
        const cplx w = to_cplx(p);
        return to_point(lambda * (w - a) / (1.0 - std::conj(a) * w));
    };
    iso.inverse = [a, lambda](Point2 z) {
        const cplx w = to_cplx(z) / lambda;
        return to_point((w + a) / (1.0 + std::conj(a) * w));
    };
    iso.phi = [cphi, lam2](Point2 z) { return cphi / sq(lam2 - sq(z.x1) - sq(z.x2)); };
    iso.curvature_at = [k](Point2) { return -k; };
    iso.phi_jet = [cphi, lam2](Point2 z) { return rational_phi_jet(z, cphi, lam2, -1.0); };
    return iso;
}

// ---- radial construction ----------------------------------------------------
// about the center of a rotationally symmetric ball the metric in geodesic
// polar coordinates is dr^2 + J(r)^2 dtheta^2 with J the Jacobi field along any
// ray.  The disc radius rho solves rho'/rho = 1/J, normalized so rho(delta) =
// delta, and phi = (J/rho)^2.  We integrate the deviation P = J - r and
// H(r) = integral of (r - J)/(J r) so that rho(r) = r*exp(H(r) - H(delta))
// without cancellation near r = 0.

struct RadialSolve {
    MetricChart chart;
    Point2 center{};
    Vec2 u{};  // unit-speed launch direction of the reference (+x) ray
    double delta = 0.0;
    double t0 = 0.0;  // series handoff radius
    double K0 = 0.0;
    double Hdelta = 0.0;
    std::vector<std::pair<double, OdeState<7>>> nodes;  // accepted steps, ascending t

    OdeState<7> series_state(double r) const {
        const Point2 x = center + r * u;
        return {x.x1, x.x2,        u.x1,
                u.x2, -K0 * r * r * r / 6.0, -K0 * r * r / 2.0,
                K0 * r * r / 12.0};
    }

    OdeState<7> state_at(double r) const {
        if (r <= t0) return series_state(std::max(r, 0.0));
        // resume from the last stored node at or before r
        std::size_t lo = 0, hi = nodes.size();
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (nodes[mid].first <= r) lo = mid; else hi = mid;
        }
        const auto& [tn, yn] = nodes[lo];
        if (std::abs(tn - r) < 1e-15 * delta) return yn;
        auto rhs = [this](double t, const OdeState<7>& y) { return radial_rhs(t, y); };
        auto out = integrate_ode<7>(rhs, yn, tn, r, OdeOptions{1e-12, 1e-12});
        if (!out.reached)
            throw nonconvergence_error(chart.label + ": radial chart solve stalled at arc length " +
                                       std::to_string(out.t));
        return out.y;
    }

    OdeState<7> radial_rhs(double t, const OdeState<7>& y) const {
        const MetricJet jet = chart.jet({y[0], y[1]});
        const Christoffel G = christoffel(jet);
        const Vec2 v{y[2], y[3]};
        const double K = gauss_curvature(jet);
        const double J = t + y[4];
        if (!(J > 0.0))
            throw degeneracy_error(chart.label + ": radial ray develops a conjugate point inside the disc");
        return {v.x1,
                v.x2,
                -G.sym[0].quad(v, v),
                -G.sym[1].quad(v, v),
                y[5],
                -K * J,
                -y[4] / (J * t)};
    }

    double rho(double r) const {
        if (r <= 0.0) return 0.0;
        return r * std::exp(state_at(r)[6] - Hdelta);
    }
    double jacobi(double r) const { return r + state_at(r)[4]; }

    double phi_at_r(double r) const {
        if (r <= t0) return std::exp(2.0 * Hdelta);
        const OdeState<7> y = state_at(r);
        const double ratio = (1.0 + y[4] / r) * std::exp(Hdelta - y[6]);  // J/rho
        return sq(ratio);
    }

    double max_r() const { return nodes.back().first; }

    // invert the strictly increasing r -> rho by safeguarded Newton
    double r_of_rho(double target) const {
        if (target <= 0.0) return 0.0;
        double lo = 0.0, hi = max_r();
        const double rho_hi = rho(hi);
        if (target >= rho_hi) {
            if (target > rho_hi * (1.0 + 1e-9))
                throw domain_error(chart.label + ": disc radius " + std::to_string(target) +
                                   " beyond the solved range " + std::to_string(rho_hi));
            return hi;
        }
        double r = std::min(target, hi);  // rho(r) ~ r near the center
        for (int it = 0; it < 60; ++it) {
            const OdeState<7> y = (r <= t0) ? series_state(r) : state_at(r);
            const double rho_r = r * std::exp(y[6] - Hdelta);
            const double err = rho_r - target;
            if (std::abs(err) <= 1e-13 * delta) return r;
            if (err > 0.0) hi = r; else lo = r;
            const double J = r + y[4];
            double step = (rho_r > 0.0 && J > 0.0) ? err * J / rho_r : 0.0;
            double next = r - step;
            if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);  // bisect when Newton leaves the bracket
            r = next;
        }
        return r;
    }
};

inline double intrinsic_angle(const SymMatrix2& A, double theta) {
    const Vec2 ref = A.apply({1.0, 0.0});
    const Vec2 dir = A.apply({std::cos(theta), std::sin(theta)});
    return std::atan2(cross(ref, dir), dot(ref, dir));
}

inline IsothermalChart iso_radial(const GeodesicBall& ball) {
    const MetricChart& chart = ball.chart;
    const double delta = ball.radius;

    auto solve = std::make_shared<RadialSolve>();
    solve->chart = chart;
    solve->center = ball.center;
    solve->delta = delta;
    solve->u = unit_speed(chart, ball.center, {1.0, 0.0});
    solve->t0 = 1e-8 * delta;
    solve->K0 = gauss_curvature(chart, ball.center);

    // integrate a little past the rim so phi differencing at boundary samples
    // stays inside the solved range
    const double t_end = delta * 1.01;
    auto rhs = [s = solve.get()](double t, const OdeState<7>& y) { return s->radial_rhs(t, y); };
    auto guard = [&chart](double, const OdeState<7>& y) { return chart.contains({y[0], y[1]}); };
    auto record = [s = solve.get()](double, const OdeState<7>&, double t_new, const OdeState<7>& y_new) {
        s->nodes.push_back({t_new, y_new});
        return StepFlow::proceed;
    };
    solve->nodes.push_back({solve->t0, solve->series_state(solve->t0)});
    auto out = integrate_ode<7>(rhs, solve->nodes.front().second, solve->t0, t_end,
                                OdeOptions{1e-12, 1e-12}, guard, record);
    if (!out.reached && out.t < delta)
        throw domain_error(chart.label + ": reference ray leaves the chart at arc length " +
                           std::to_string(out.t) + " inside the requested disc");
    // H(delta) by resolving exactly at the rim
    solve->Hdelta = 0.0;
    solve->Hdelta = solve->state_at(delta)[6];

    const SymMatrix2 A = sqrt_spd(chart.metric(ball.center));
    const SymMatrix2 Ainv = inverse_metric(A);

    // precompute images of all ball samples: radius tags and launch angles are
    // exact, so no shooting is needed for them
    auto cache = std::make_shared<std::map<std::pair<double, double>, Point2>>();
    (*cache)[{ball.center.x1, ball.center.x2}] = {0.0, 0.0};
    std::vector<double> rho_i(ball.n_radial + 1, 0.0);
    for (std::size_t i = 1; i <= ball.n_radial; ++i)
        rho_i[i] = solve->rho(delta * static_cast<double>(i) / static_cast<double>(ball.n_radial));
    for (std::size_t j = 0; j < ball.n_rays; ++j) {
        const double th_g = intrinsic_angle(A, ball.theta[ball.index(j, 1)]);
        const double cs = std::cos(th_g), sn = std::sin(th_g);
        for (std::size_t i = 1; i <= ball.n_radial; ++i) {
            const Point2 p = ball.points[ball.index(j, i)];
            (*cache)[{p.x1, p.x2}] = {rho_i[i] * cs, rho_i[i] * sn};
        }
    }

    IsothermalChart iso;
    iso.construction = IsothermalChart::Construction::radial_ode;
    iso.delta = delta;
    iso.center = ball.center;
    iso.phi0 = std::exp(2.0 * solve->Hdelta);

    const Point2 c = ball.center;
    const MetricChart chart_copy = chart;
    iso.forward = [solve, cache, A, c, chart_copy](Point2 p) {
        const auto hit = cache->find({p.x1, p.x2});
        if (hit != cache->end()) return hit->second;
        const double scale = std::max(1.0, norm(c));
        if (dist(p, c) < 1e-14 * scale) return Point2{0.0, 0.0};
        const DistanceSolve d = shoot_distance(chart_copy, c, p);
        const double th_g = intrinsic_angle(A, d.theta);
        const double rr = solve->rho(d.length);
        return Point2{rr * std::cos(th_g), rr * std::sin(th_g)};
    };
    iso.inverse = [solve, A, Ainv, c, chart_copy](Point2 z) {
        const double r_disc = norm(z);
        if (r_disc < 1e-15 * solve->delta) return c;
        const double r = solve->r_of_rho(r_disc);
        const double th_g = std::atan2(z.x2, z.x1);
        // unit vector at angle th_g in the orthonormal frame carried by A
        const Vec2 e1 = A.apply({1.0, 0.0}) / norm(A.apply({1.0, 0.0}));
        const Vec2 e2{-e1.x2, e1.x1};
        const Vec2 w = std::cos(th_g) * e1 + std::sin(th_g) * e2;
        return exp_map(chart_copy, c, Ainv.apply(w), r);
    };
    iso.phi = [solve](Point2 z) { return solve->phi_at_r(solve->r_of_rho(norm(z))); };
    iso.curvature_at = [solve, chart_copy](Point2 z) {
        const OdeState<7> y = solve->state_at(solve->r_of_rho(norm(z)));
        return gauss_curvature(chart_copy, {y[0], y[1]});
    };
    const double h = delta * 1e-4;
    auto phi_fn = iso.phi;
    iso.phi_jet = [phi_fn, h](Point2 z) {
        const Point2 e1{h, 0.0}, e2{0.0, h};
        ConformalJet j;
        j.phi = phi_fn(z);
        const double px = phi_fn(z + e1), mx = phi_fn(z - e1);
        const double py = phi_fn(z + e2), my = phi_fn(z - e2);
        j.dphi = {(px - mx) / (2.0 * h), (py - my) / (2.0 * h)};
        j.d2phi[0] = (px - 2.0 * j.phi + mx) / (h * h);
        j.d2phi[2] = (py - 2.0 * j.phi + my) / (h * h);
        j.d2phi[1] = (phi_fn(z + e1 + e2) - phi_fn(z + e1 - e2) - phi_fn(z - e1 + e2) +
                      phi_fn(z - e1 - e2)) /
                     (4.0 * h * h);
        return j;
    };
    return iso;
}

}  // namespace detail

// build an isothermal chart for the ball.  Conformal builtins get the closed
// Moebius/scaling normalization; rotationally symmetric surfaces get the
// radial-ODE construction; anything else is unsupported by design.
inline IsothermalChart isothermal_chart(const GeodesicBall& ball,
                                        IsoMethod method = IsoMethod::automatic) {
    const MetricChart& chart = ball.chart;
    if (method == IsoMethod::automatic)
        method = (chart.model != ConformalModel::none) ? IsoMethod::analytic
                 : chart.homogeneous                   ? IsoMethod::radial_ode
                                                       : IsoMethod::analytic;  // falls through to the error below

    if (method == IsoMethod::analytic) {
        switch (chart.model) {
            case ConformalModel::flat:
                return detail::iso_flat(ball);
            case ConformalModel::sphere:
                return detail::iso_sphere(ball, chart.model_param);
            case ConformalModel::hyperbolic:
                return detail::iso_hyperbolic(ball, chart.model_param);
            case ConformalModel::none:
                break;
        }
        throw unsupported_construction_error(
            chart.label + ": isothermal chart needs a conformal closed form or rotational symmetry "
                          "about the ball center");
    }
    if (!chart.homogeneous)
        throw unsupported_construction_error(
            chart.label + ": radial isothermal construction needs rotational symmetry about the ball center");
    return detail::iso_radial(ball);
}

// worst violation of the curvature/conformal-factor compatibility equation
// K = -laplace(log phi)/(2 phi) over the lattice |z| <= 0.9*delta,
// with the laplacian by 5-point stencil at step delta/grid_n
inline double liouville_residual(const IsothermalChart& iso,
                                 const std::function<double(Point2)>& K_eval, int grid_n) {
    if (grid_n < 10) throw parameter_error("liouville_residual needs grid_n >= 10");
    const double h = iso.delta / grid_n;
    const double rmax = 0.9 * iso.delta;
    const int M = static_cast<int>(std::floor(rmax / h)) + 1;  // one extra ring for stencil arms
    const int W = 2 * M + 1;

    std::vector<double> phi_v(static_cast<std::size_t>(W) * W, 0.0);
    std::vector<double> lphi(static_cast<std::size_t>(W) * W, 0.0);
    std::vector<char> have(static_cast<std::size_t>(W) * W, 0);
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(i + M) * W + (j + M); };
    for (int i = -M; i <= M; ++i)
        for (int j = -M; j <= M; ++j) {
            const double rr = h * std::hypot(static_cast<double>(i), static_cast<double>(j));
            if (rr > rmax + h * 1.0000001) continue;
            const double p = iso.phi({i * h, j * h});
            if (!(p > 0.0))
                throw degeneracy_error("conformal factor not positive at grid point (" +
                                       std::to_string(i * h) + ", " + std::to_string(j * h) + ")");
            phi_v[idx(i, j)] = p;
            lphi[idx(i, j)] = std::log(p);
            have[idx(i, j)] = 1;
        }

    double worst = 0.0;
    for (int i = -M; i <= M; ++i)
        for (int j = -M; j <= M; ++j) {
            const double rr = h * std::hypot(static_cast<double>(i), static_cast<double>(j));
            if (rr > rmax) continue;
            if (!have[idx(i, j)] || !have[idx(i + 1, j)] || !have[idx(i - 1, j)] ||
                !have[idx(i, j + 1)] || !have[idx(i, j - 1)])
                continue;
            const double lap = (lphi[idx(i + 1, j)] + lphi[idx(i - 1, j)] + lphi[idx(i, j + 1)] +
                                lphi[idx(i, j - 1)] - 4.0 * lphi[idx(i, j)]) /
                               (h * h);
            const double K = K_eval(iso.inverse({i * h, j * h}));
            worst = std::max(worst, std::abs(K + lap / (2.0 * phi_v[idx(i, j)])));
        }
    return worst;
}

// extremal ratios of riemannian distance to euclidean distance between chart
// images, over seeded random sample pairs of the ball
inline std::pair<double, double> distance_distortion(const GeodesicBall& ball,
                                                     const IsothermalChart& iso, std::size_t n_pairs,
                                                     std::uint64_t seed = kDefaultSeed) {
    if (n_pairs < 1) throw parameter_error("distance_distortion needs n_pairs >= 1");
    const auto& pts = ball.points;
    if (pts.size() < 2) throw parameter_error("ball has too few samples for distortion");

    SplitMix64 rng(seed);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    std::size_t got = 0;
    for (std::size_t attempt = 0; got < n_pairs && attempt < 20 * n_pairs + 100; ++attempt) {
        const std::size_t i = rng.index(pts.size());
        const std::size_t j = rng.index(pts.size());
        if (i == j) continue;
        const Point2 zi = iso.forward(pts[i]);
        const Point2 zj = iso.forward(pts[j]);
        const double dz = dist(zi, zj);
        if (dz <= 1e-13 * iso.delta) continue;
        const double dg = ball.chart.pair_distance(pts[i], pts[j]);
        if (!(dg > 0.0)) continue;
        const double ratio = dg / dz;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        ++got;
    }
    if (got == 0) throw nonconvergence_error("no usable sample pairs for distance distortion");
    return {lo, hi};
}

}  // namespace regulus

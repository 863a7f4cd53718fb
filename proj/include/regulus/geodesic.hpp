#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "chart.hpp"
#include "ode.hpp"
#include "tensor.hpp"
#include "types.hpp"

namespace regulus {

// state layout: y = (x1, x2, v1, v2) and, when extended, (J, J')
using GeoState = OdeState<4>;
using JacobiState = OdeState<6>;

namespace detail {

inline GeoState geo_rhs(const MetricChart& chart, double, const GeoState& y) {
    const Point2 x{y[0], y[1]};
    const Vec2 v{y[2], y[3]};
    const Christoffel G = christoffel(chart.jet(x));
    GeoState dy;
    dy[0] = v.x1;
    dy[1] = v.x2;
    for (int k = 0; k < 2; ++k) {
        const double a = G.sym[k].quad(v, v);
        dy[2 + k] = -a;
    }
    return dy;
}

inline JacobiState jacobi_rhs(const MetricChart& chart, double, const JacobiState& y) {
    const Point2 x{y[0], y[1]};
    const Vec2 v{y[2], y[3]};
    const MetricJet jet = chart.jet(x);
    const Christoffel G = christoffel(jet);
    const double K = gauss_curvature(jet);
    JacobiState dy;
    dy[0] = v.x1;
    dy[1] = v.x2;
    dy[2] = -G.sym[0].quad(v, v);
    dy[3] = -G.sym[1].quad(v, v);
    dy[4] = y[5];
    dy[5] = -K * y[4];
    return dy;
}

inline auto domain_guard(const MetricChart& chart) {
    return [&chart](double, const auto& y) { return chart.domain.contains({y[0], y[1]}); };
}

template <std::size_t N>
StepFlow no_observer(double, const OdeState<N>&, double, const OdeState<N>&) {
    return StepFlow::proceed;
}

}  // namespace detail

// rescale v to unit Riemannian speed at p
inline Vec2 unit_speed(const MetricChart& chart, Point2 p, Vec2 v) {
    const double s = chart.jet(p).g.quad(v, v);
    if (!(s > 0.0)) throw parameter_error("unit_speed needs a nonzero direction");
    return v / std::sqrt(s);
}

struct GeodesicResult {
    Point2 x{};
    Vec2 v{};
    double t = 0.0;    // arc length actually covered
    bool exited = false;  // stopped at the chart boundary before the target
};

// integrate the unit-speed geodesic from p in direction v for arc length t_end
inline GeodesicResult integrate_geodesic(const MetricChart& chart, Point2 p, Vec2 v, double t_end,
                                         std::vector<std::pair<double, GeoState>>* trace = nullptr) {
    const Vec2 u = unit_speed(chart, p, v);
    GeoState y0{p.x1, p.x2, u.x1, u.x2};
    auto rhs = [&chart](double t, const GeoState& y) { return detail::geo_rhs(chart, t, y); };
    if (trace) trace->push_back({0.0, y0});
    auto obs = [&](double, const GeoState&, double t_new, const GeoState& y_new) {
        if (trace) trace->push_back({t_new, y_new});
        return StepFlow::proceed;
    };
    auto out = integrate_ode<4>(rhs, y0, 0.0, t_end, {}, detail::domain_guard(chart), obs);
    GeodesicResult r;
    r.x = {out.y[0], out.y[1]};
    r.v = {out.y[2], out.y[3]};
    r.t = out.t;
    r.exited = !out.reached;
    return r;
}

// exponential map: the point at arc length t along the geodesic from p in
// direction v; leaving the chart is an error naming the exit arc length
inline Point2 exp_map(const MetricChart& chart, Point2 p, Vec2 v, double t) {
    const GeodesicResult r = integrate_geodesic(chart, p, v, t);
    if (r.exited) {
        std::ostringstream os;
        os << chart.label << ": geodesic leaves the chart at arc length " << r.t
           << " (target " << t << ")";
        throw domain_error(os.str());
    }
    return r.x;
}

// polar sample of a geodesic ball: points[0] is the center, then ray-major
// checkpoints at radii delta*i/n_radial, i = 1..n_radial
struct GeodesicBall {
    MetricChart chart;  // the surface the ball lives on
    Point2 center{};
    double radius = 0.0;
    std::size_t n_rays = 0, n_radial = 0;
    std::vector<Point2> points;
    std::vector<double> r;      // arc-length radius tag per point
    std::vector<double> theta;  // launch angle per point (0 for the center)

    std::size_t index(std::size_t ray, std::size_t radial) const {  // radial is 1-based
        return 1 + ray * n_radial + (radial - 1);
    }
    std::vector<std::size_t> boundary_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t j = 0; j < n_rays; ++j) out.push_back(index(j, n_radial));
        return out;
    }
};

inline GeodesicBall geodesic_ball(const MetricChart& chart, Point2 center, double delta,
                                  std::size_t n_rays, std::size_t n_radial) {
    if (!(delta > 0.0) || n_rays < 3 || n_radial < 1)
        throw parameter_error("geodesic_ball needs delta > 0, n_rays >= 3, n_radial >= 1");
    const Radius inj = chart.injectivity_radius(center);
    if (!inj.unbounded && delta >= inj.value) {
        std::ostringstream os;
        os << chart.label << ": ball radius " << delta << " reaches the injectivity radius "
           << inj.value << " at " << detail::point_str(center);
        throw parameter_error(os.str());
    }
    GeodesicBall ball;
    ball.chart = chart;
    ball.center = center;
    ball.radius = delta;
    ball.n_rays = n_rays;
    ball.n_radial = n_radial;
    ball.points.resize(1 + n_rays * n_radial);
    ball.r.resize(ball.points.size(), 0.0);
    ball.theta.resize(ball.points.size(), 0.0);
    ball.points[0] = center;
    auto rhs = [&chart](double t, const GeoState& y) { return detail::geo_rhs(chart, t, y); };
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (std::size_t j = 0; j < n_rays; ++j) {
        const double th = kTwoPi * static_cast<double>(j) / static_cast<double>(n_rays);
        const Vec2 u = unit_speed(chart, center, {std::cos(th), std::sin(th)});
        GeoState y{center.x1, center.x2, u.x1, u.x2};
        double t = 0.0;
        for (std::size_t i = 1; i <= n_radial; ++i) {
            const double target = delta * static_cast<double>(i) / static_cast<double>(n_radial);
            auto out = integrate_ode<4>(rhs, y, t, target, {}, detail::domain_guard(chart),
                                        detail::no_observer<4>);
            if (!out.reached) {
                std::ostringstream os;
                os << chart.label << ": ball ray at angle " << th
                   << " leaves the chart at arc length " << out.t;
                throw domain_error(os.str());
            }
            y = out.y;
            t = out.t;
            const std::size_t idx = ball.index(j, i);
            ball.points[idx] = {y[0], y[1]};
            ball.r[idx] = target;
            ball.theta[idx] = th;
        }
    }
    return ball;
}

// ---- two-point distance by shooting -----------------------------------------

struct DistanceOptions {
    std::uint64_t seed = kDefaultSeed;
    double tol_rel = 1e-9;       // endpoint tolerance relative to the separation
    std::size_t scan = 16;       // initial launch fan
    std::size_t max_iter = 80;
};

struct DistanceSolve {
    double length = 0.0;  // arc length of the connecting geodesic
    double theta = 0.0;   // launch angle at p
    Point2 endpoint{};
    double endpoint_gap = 0.0;  // metric distance from the endpoint to q
};

namespace detail {

struct Launch {
    double theta = 0.0;
    double t_star = 0.0;   // arc length of closest approach
    Point2 x{};
    Vec2 v{};
    double gap = 0.0;      // metric miss distance at closest approach
    double miss = 0.0;     // signed transversal miss
};

// closest approach to q along the geodesic launched at angle theta
inline Launch probe_ray(const MetricChart& chart, Point2 p, Point2 q, double theta, double s_max) {
    auto rhs = [&chart](double t, const GeoState& y) { return detail::geo_rhs(chart, t, y); };
    const Vec2 u = unit_speed(chart, p, {std::cos(theta), std::sin(theta)});
    GeoState y0{p.x1, p.x2, u.x1, u.x2};
    std::vector<std::pair<double, GeoState>> nodes{{0.0, y0}};
    auto obs = [&](double, const GeoState&, double t_new, const GeoState& y_new) {
        nodes.push_back({t_new, y_new});
        return StepFlow::proceed;
    };
    auto out = integrate_ode<4>(rhs, y0, 0.0, s_max, {}, detail::domain_guard(chart), obs);
    (void)out;
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double d = sq(nodes[i].second[0] - q.x1) + sq(nodes[i].second[1] - q.x2);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    // Newton refinement of f(t) = (x - q) . v from the best node
    double t = nodes[best].first;
    GeoState y = nodes[best].second;
    const double t_lo = best > 0 ? nodes[best - 1].first : 0.0;
    const double t_hi = best + 1 < nodes.size() ? nodes[best + 1].first : nodes.back().first;
    for (int it = 0; it < 12; ++it) {
        const Point2 x{y[0], y[1]};
        const Vec2 v{y[2], y[3]};
        const Vec2 w = x - q;
        const double f = dot(w, v);
        const GeoState dy = detail::geo_rhs(chart, t, y);
        const double fp = dot(v, v) + w.x1 * dy[2] + w.x2 * dy[3];
        if (!(std::abs(fp) > 0.0)) break;
        double t_next = std::clamp(t - f / fp, t_lo, t_hi);
        if (std::abs(t_next - t) < 1e-15 * std::max(1.0, std::abs(t))) {
            t = t_next;
            break;
        }
        auto r = integrate_ode<4>(rhs, nodes[best].second, nodes[best].first, t_next, {});
        if (!r.reached) break;
        y = r.y;
        t = t_next;
    }
    Launch L;
    L.theta = theta;
    L.t_star = t;
    L.x = {y[0], y[1]};
    L.v = {y[2], y[3]};
    const Vec2 w = q - L.x;
    L.gap = std::sqrt(std::max(0.0, chart.jet(q).g.quad(w, w)));
    L.miss = cross(L.v, w);
    return L;
}

}  // namespace detail

// distance between chart points by geodesic shooting: fan scan for a
// sign-changing bracket of the transversal miss, then secant/bisection
inline DistanceSolve shoot_distance(const MetricChart& chart, Point2 p, Point2 q,
                                    const DistanceOptions& opt = {}) {
    DistanceSolve sol;
    const double sep = dist(p, q);
    double local_scale = std::sqrt(std::max(chart.jet(p).g.trace(), chart.jet(q).g.trace()) / 2.0);
    if (sep * local_scale < 1e-14) return sol;  // coincident points
    const double chord = chord_length(chart, p, q);
    const double tol = opt.tol_rel * std::max(chord, 1e-12);
    const double s_max = 1.25 * chord + 4.0 * tol;
    SplitMix64 rng(opt.seed);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const double jitter = kTwoPi * rng.uniform() / static_cast<double>(opt.scan);
    std::vector<detail::Launch> fan;
    for (std::size_t i = 0; i < opt.scan; ++i) {
        const double th = jitter + kTwoPi * static_cast<double>(i) / static_cast<double>(opt.scan);
        fan.push_back(detail::probe_ray(chart, p, q, th, s_max));
        if (fan.back().gap <= tol) {
            const auto& L = fan.back();
            return {L.t_star, L.theta, L.x, L.gap};
        }
    }
    // pick the adjacent sign-changing pair closest to the target
    std::size_t pick = fan.size();
    double pick_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fan.size(); ++i) {
        const auto& A = fan[i];
        const auto& B = fan[(i + 1) % fan.size()];
        if ((A.miss > 0.0) == (B.miss > 0.0)) continue;
        const double g = std::min(A.gap, B.gap);
        if (g < pick_gap) {
            pick_gap = g;
            pick = i;
        }
    }
    if (pick == fan.size())
        throw nonconvergence_error(chart.label + ": no bracketing launch fan for distance shooting");
    detail::Launch A = fan[pick], B = fan[(pick + 1) % fan.size()];
    // unwrap so the bracket is an increasing interval (launch angles are 2pi-periodic)
    double th_a = A.theta, th_b = A.theta + (B.theta > A.theta ? B.theta - A.theta
                                                               : B.theta + kTwoPi - A.theta);
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        double th_mid;
        const double denom = B.miss - A.miss;
        if (std::abs(denom) > 0.0) {
            th_mid = th_a - A.miss * (th_b - th_a) / denom;  // secant
            const double lo = th_a + 0.1 * (th_b - th_a), hi = th_b - 0.1 * (th_b - th_a);
            if (!(th_mid >= lo && th_mid <= hi)) th_mid = 0.5 * (th_a + th_b);
        } else {
            th_mid = 0.5 * (th_a + th_b);
        }
        detail::Launch M = detail::probe_ray(chart, p, q, th_mid, s_max);
        if (M.gap <= tol) return {M.t_star, M.theta, M.x, M.gap};
        if ((M.miss > 0.0) == (A.miss > 0.0)) {
            A = M;
            th_a = th_mid;
        } else {
            B = M;
            th_b = th_mid;
        }
    }
    throw nonconvergence_error(chart.label + ": distance shooting did not converge");
}

inline double riemann_distance(const MetricChart& chart, Point2 p, Point2 q,
                               const DistanceOptions& opt = {}) {
    return shoot_distance(chart, p, q, opt).length;
}

// ---- Jacobi field scans ------------------------------------------------------

struct ConjugateScan {
    enum class Kind { found, unbounded, exited } kind = Kind::unbounded;
    double value = 0.0;  // zero location / cap reached / exit arc length
};

// first zero of the Jacobi field J(0)=0, J'(0)=1 along the geodesic from p in
// direction v, scanned up to arc length cap.  a zero within extrapolation
// reach just past a chart exit (relative 1e-3) is located by a Jacobi-Newton
// step and reported as found.
inline ConjugateScan conjugate_distance(const MetricChart& chart, Point2 p, Vec2 v,
                                        double cap = 50.0) {
    const Vec2 u = unit_speed(chart, p, v);
    auto rhs = [&chart](double t, const JacobiState& y) { return detail::jacobi_rhs(chart, t, y); };
    const OdeOptions tight{1e-12, 1e-12};
    JacobiState y0{p.x1, p.x2, u.x1, u.x2, 0.0, 1.0};
    // bracket of the step where the sign change happened
    double zero_hint = 0.0, bt0 = 0.0;
    JacobiState by0 = y0;
    auto obs = [&](double t_prev, const JacobiState& y_prev, double t_new, const JacobiState& y_new) {
        if (t_prev > 0.0 && y_prev[4] > 0.0 && y_new[4] <= 0.0) {
            bt0 = t_prev;
            by0 = y_prev;
            zero_hint = t_new;
            return StepFlow::stop;
        }
        return StepFlow::proceed;
    };
    auto out = integrate_ode<6>(rhs, y0, 0.0, cap, tight, detail::domain_guard(chart), obs);
    ConjugateScan scan;
    if (out.stopped) {
        scan.kind = ConjugateScan::Kind::found;
        scan.value = refine_zero<6>(rhs, by0, bt0, zero_hint, 4, tight);
        return scan;
    }
    if (out.reached) {
        scan.kind = ConjugateScan::Kind::unbounded;
        scan.value = cap;
        return scan;
    }
    // blocked at the chart boundary: extrapolate across the exit if a zero is
    // just out of reach
    const double J = out.y[4], Jp = out.y[5];
    if (Jp < 0.0 && J >= 0.0) {
        double dt = -J / Jp;  // Newton from the exit state
        const double K = gauss_curvature(chart.jet({out.y[0], out.y[1]}));
        const double f = J + Jp * dt - 0.5 * K * J * dt * dt;
        const double fp = Jp - K * J * dt;
        if (std::abs(fp) > 0.0) dt -= f / fp;
        if (dt >= 0.0 && dt <= 1e-3 * std::max(out.t, 1.0) && out.t + dt <= cap) {
            scan.kind = ConjugateScan::Kind::found;
            scan.value = out.t + dt;
            return scan;
        }
    }
    scan.kind = ConjugateScan::Kind::exited;
    scan.value = out.t;
    return scan;
}

// Laplacian of the distance function r(x) = d(center, x), evaluated at q:
// J'(r)/J(r) along the minimizing geodesic (two-dimensional surfaces)
inline double laplacian_of_distance(const MetricChart& chart, Point2 center, Point2 q,
                                    const DistanceOptions& opt = {}) {
    const DistanceSolve sol = shoot_distance(chart, center, q, opt);
    if (!(sol.length > 0.0)) throw parameter_error("laplacian_of_distance: coincident points");
    const Vec2 u = unit_speed(chart, center, {std::cos(sol.theta), std::sin(sol.theta)});
    auto rhs = [&chart](double t, const JacobiState& y) { return detail::jacobi_rhs(chart, t, y); };
    JacobiState y0{center.x1, center.x2, u.x1, u.x2, 0.0, 1.0};
    auto out = integrate_ode<6>(rhs, y0, 0.0, sol.length, {1e-12, 1e-12},
                                detail::domain_guard(chart), detail::no_observer<6>);
    if (!out.reached) throw domain_error(chart.label + ": geodesic to target leaves the chart");
    if (!(out.y[4] > 0.0))
        throw degeneracy_error("laplacian_of_distance: conjugate point before the target");
    return out.y[5] / out.y[4];
}

}  // namespace regulus

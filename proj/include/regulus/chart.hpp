#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "types.hpp"

namespace regulus {

enum class DerivMode { analytic, finite_difference };

// conformal models with closed-form isothermal normalizations
enum class ConformalModel { none, flat, sphere, hyperbolic };

struct DomainRegion {
    enum class Kind { rectangle, disc };

    Kind kind = Kind::disc;
    Point2 lo{}, hi{};        // rectangle corners
    Point2 center{};          // disc
    double radius = 0.0;

    static DomainRegion rectangle(Point2 lo, Point2 hi) {
        DomainRegion d;
        d.kind = Kind::rectangle;
        d.lo = lo;
        d.hi = hi;
        return d;
    }
    static DomainRegion disc(Point2 c, double r) {
        DomainRegion d;
        d.kind = Kind::disc;
        d.center = c;
        d.radius = r;
        return d;
    }

    double extent() const {
        if (kind == Kind::rectangle) return std::max(hi.x1 - lo.x1, hi.x2 - lo.x2);
        return 2.0 * radius;
    }

    bool contains(Point2 p) const {
        const double tol = 1e-12 * std::max(1.0, extent());
        if (kind == Kind::rectangle)
            return p.x1 >= lo.x1 - tol && p.x1 <= hi.x1 + tol && p.x2 >= lo.x2 - tol &&
                   p.x2 <= hi.x2 + tol;
        return dist(p, center) <= radius + tol;
    }

    // Euclidean gap from an interior point to the boundary
    double boundary_gap(Point2 p) const {
        if (kind == Kind::rectangle)
            return std::max(0.0, std::min({p.x1 - lo.x1, hi.x1 - p.x1, p.x2 - lo.x2, hi.x2 - p.x2}));
        return std::max(0.0, radius - dist(p, center));
    }
};

namespace detail {

inline std::string point_str(Point2 p) {
    std::ostringstream os;
    os << "(" << p.x1 << ", " << p.x2 << ")";
    return os.str();
}

inline void check_spd(const SymMatrix2& g, Point2 p) {
    const double scale = std::max({std::abs(g.a11), std::abs(g.a22), std::abs(g.a12)});
    if (!(g.a11 > 0.0) || !(g.det() > 1e-12 * scale * scale))
        throw degeneracy_error("metric degenerate at " + point_str(p));
}

}  // namespace detail

struct MetricChart {
    std::string label;
    DomainRegion domain;
    DerivMode deriv_mode = DerivMode::analytic;
    double deriv_step = 0.0;  // recorded step when deriv_mode is finite_difference

    std::function<MetricJet(Point2)> jet_fn;  // raw evaluator, no checks
    std::function<SymMatrix2(Point2)> value_fn;  // g only; set when cheaper than a full jet
    std::function<Radius(Point2)> inj_fn;     // surface-supplied injectivity radius
    std::function<double(Point2, Point2)> exact_distance;  // closed form, may be empty

    // the metric is invariant under rotations about every point (flat / sphere /
    // hyperbolic); enables the radial isothermal construction about any center
    bool homogeneous = false;
    ConformalModel model = ConformalModel::none;
    double model_param = 0.0;  // sphere: R, hyperbolic: k

    bool contains(Point2 p) const { return domain.contains(p); }

    MetricJet jet(Point2 p) const {
        if (!contains(p)) throw domain_error(label + ": point " + detail::point_str(p) + " outside chart domain");
        MetricJet j = jet_fn(p);
        detail::check_spd(j.g, p);
        return j;
    }

    SymMatrix2 metric(Point2 p) const {
        if (!value_fn) return jet(p).g;
        if (!contains(p)) throw domain_error(label + ": point " + detail::point_str(p) + " outside chart domain");
        SymMatrix2 g = value_fn(p);
        detail::check_spd(g, p);
        return g;
    }

    Radius injectivity_radius(Point2 p) const { return inj_fn ? inj_fn(p) : Radius::infinite(); }

    bool has_exact_distance() const { return static_cast<bool>(exact_distance); }

    // pairwise distance for norm estimation: closed form when the surface
    // supplies one, otherwise metric length of the straight chart segment
    // (adaptive quadrature; relative bias O(sup|g - I|^2) on near-flat charts)
    double pair_distance(Point2 p, Point2 q) const;
};

inline MetricJet eval_metric_jet(const MetricChart& chart, Point2 p) { return chart.jet(p); }

// ---- coordinate transforms ------------------------------------------------

// congruence B^T g B
inline SymMatrix2 congruence(const SymMatrix2& g, const Mat2& B) {
    const double b11 = B.m11, b12 = B.m12, b21 = B.m21, b22 = B.m22;
    const double c11 = g.a11 * b11 + g.a12 * b21;
    const double c12 = g.a11 * b12 + g.a12 * b22;
    const double c21 = g.a12 * b11 + g.a22 * b21;
    const double c22 = g.a12 * b12 + g.a22 * b22;
    return {b11 * c11 + b21 * c21, b11 * c12 + b21 * c22, b12 * c12 + b22 * c22};
}

// pullback of a metric jet under the affine change x = x0 + B y, evaluated at
// the x-point where `jet` was taken: returns the jet in y coordinates
inline MetricJet transform_jet(const MetricJet& jet, const Mat2& B) {
    auto b = [&](int l, int m) {
        return (l == 0) ? (m == 0 ? B.m11 : B.m12) : (m == 0 ? B.m21 : B.m22);
    };
    MetricJet out;
    out.g = congruence(jet.g, B);
    for (int m = 0; m < 2; ++m) {
        SymMatrix2 s{};
        for (int l = 0; l < 2; ++l) s = s + b(l, m) * congruence(jet.dg[l], B);
        out.dg[m] = s;
    }
    for (int m = 0; m < 2; ++m)
        for (int n = m; n < 2; ++n) {
            SymMatrix2 s{};
            for (int l = 0; l < 2; ++l)
                for (int t = 0; t < 2; ++t)
                    s = s + b(l, m) * b(t, n) * congruence(jet.second(l, t), B);
            out.d2g[MetricJet::pair_index(m, n)] = s;
        }
    return out;
}

// ---- builtin surfaces ------------------------------------------------------

namespace detail {

// conformal jet g = phi * I from the scalar jet of phi
inline MetricJet conformal_jet(double phi, Vec2 dphi, double d11, double d12, double d22) {
    MetricJet j;
    j.g = phi * SymMatrix2::identity();
    j.dg[0] = dphi.x1 * SymMatrix2::identity();
    j.dg[1] = dphi.x2 * SymMatrix2::identity();
    j.d2g[0] = d11 * SymMatrix2::identity();
    j.d2g[1] = d12 * SymMatrix2::identity();
    j.d2g[2] = d22 * SymMatrix2::identity();
    return j;
}

// compactly supported bump, C^{3,1}: (1-t^2)^4 on |t|<1, zero outside
inline double bump(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    const double u = 1.0 - t * t;
    return sq(sq(u));
}
inline double bump_d1(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    const double u = 1.0 - t * t;
    return -8.0 * t * u * u * u;
}
inline double bump_d2(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    const double u = 1.0 - t * t;
    return u * u * (56.0 * t * t - 8.0);
}

inline double sphere_distance(Point2 p, Point2 q, double R) {
    auto lift = [R](Point2 x) -> std::array<double, 3> {
        const double s = R * R + sq(x.x1) + sq(x.x2);
        return {2.0 * R * R * x.x1 / s, 2.0 * R * R * x.x2 / s,
                R * (sq(x.x1) + sq(x.x2) - R * R) / s};
    };
    const auto P = lift(p), Q = lift(q);
    const double d0 = P[0] * Q[0] + P[1] * Q[1] + P[2] * Q[2];
    const std::array<double, 3> c{P[1] * Q[2] - P[2] * Q[1], P[2] * Q[0] - P[0] * Q[2],
                                  P[0] * Q[1] - P[1] * Q[0]};
    const double cn = std::sqrt(sq(c[0]) + sq(c[1]) + sq(c[2]));
    return R * std::atan2(cn, d0);
}

inline double hyperbolic_distance(Point2 p, Point2 q, double k) {
    const double num = 2.0 * sq(dist(p, q));
    const double den = (1.0 - sq(norm(p))) * (1.0 - sq(norm(q)));
    const double u = num / den;
    // acosh(1+u) in a form stable near u = 0
    return std::log1p(u + std::sqrt(u * (u + 2.0))) / std::sqrt(k);
}

}  // namespace detail

// builtin metric surfaces:
//   "flat"                       g = I
//   "sphere"         params {R}  round sphere, stereographic chart
//   "hyperbolic"     params {k}  curvature -k, Poincare disc chart
//   "polar-flat"                 g = diag(1, x1^2)
//   "perturbed-flat" params {a,w} g11 = 1 + a*bump(x1/w)*bump(x2/w)
inline MetricChart builtin_surface(const std::string& name, const std::vector<double>& params = {}) {
    MetricChart c;
    auto fmt = [](const std::string& base, const std::vector<std::pair<std::string, double>>& kv) {
        std::ostringstream os;
        os << base;
        for (const auto& [k, v] : kv) os << " " << k << "=" << v;
        return os.str();
    };

    if (name == "flat") {
        c.label = "flat";
        c.domain = DomainRegion::disc({0, 0}, 1000.0);
        c.jet_fn = [](Point2) {
            MetricJet j;
            j.g = SymMatrix2::identity();
            return j;
        };
        c.inj_fn = [](Point2) { return Radius::infinite(); };
        c.exact_distance = [](Point2 p, Point2 q) { return dist(p, q); };
        c.homogeneous = true;
        c.model = ConformalModel::flat;
        return c;
    }

    if (name == "sphere") {
        if (params.size() != 1 || !(params[0] > 0.0))
            throw parameter_error("sphere needs one parameter R > 0");
        const double R = params[0];
        c.label = fmt("sphere", {{"R", R}});
        // huge disc: the stereographic chart covers everything but one point
        c.domain = DomainRegion::disc({0, 0}, 1e9 * R);
        c.jet_fn = [R](Point2 p) {
            const double s = R * R + sq(p.x1) + sq(p.x2);
            const double k4 = 4.0 * sq(sq(R));
            const double phi = k4 / sq(s);
            const double s3 = phi / s;  // k4 * s^-3
            const Vec2 dphi{-4.0 * p.x1 * s3, -4.0 * p.x2 * s3};
            const double s4 = s3 / s;
            auto dd = [&](double xi, double xj, bool diag) {
                return -4.0 * ((diag ? s3 : 0.0) - 6.0 * xi * xj * s4);
            };
            return detail::conformal_jet(phi, dphi, dd(p.x1, p.x1, true), dd(p.x1, p.x2, false),
                                         dd(p.x2, p.x2, true));
        };
        c.inj_fn = [R](Point2) { return Radius::of(3.14159265358979323846 * R); };
        c.exact_distance = [R](Point2 p, Point2 q) { return detail::sphere_distance(p, q, R); };
        c.homogeneous = true;
        c.model = ConformalModel::sphere;
        c.model_param = R;
        return c;
    }

    if (name == "hyperbolic") {
        if (params.size() != 1 || !(params[0] > 0.0))
            throw parameter_error("hyperbolic needs one parameter k > 0");
        const double k = params[0];
        c.label = fmt("hyperbolic", {{"k", k}});
        // hold a hairline margin off the rim: the metric blows up there, and
        // rays that crawl into the last few ulps stall the integrator instead
        // of failing cleanly through the domain guard
        c.domain = DomainRegion::disc({0, 0}, 1.0 - 1e-12);
        c.jet_fn = [k](Point2 p) {
            const double t = 1.0 - sq(p.x1) - sq(p.x2);
            const double a = 4.0 / k;
            const double phi = a / sq(t);
            const double t3 = 4.0 * phi / t;  // 4a * t^-3
            const Vec2 dphi{p.x1 * t3, p.x2 * t3};
            const double t4 = t3 / t;
            auto dd = [&](double xi, double xj, bool diag) {
                return (diag ? t3 : 0.0) + 6.0 * xi * xj * t4;
            };
            return detail::conformal_jet(phi, dphi, dd(p.x1, p.x1, true), dd(p.x1, p.x2, false),
                                         dd(p.x2, p.x2, true));
        };
        c.inj_fn = [](Point2) { return Radius::infinite(); };
        c.exact_distance = [k](Point2 p, Point2 q) { return detail::hyperbolic_distance(p, q, k); };
        c.homogeneous = true;
        c.model = ConformalModel::hyperbolic;
        c.model_param = k;
        return c;
    }

    if (name == "polar-flat") {
        c.label = "polar-flat";
        c.domain = DomainRegion::rectangle({0.05, -50.0}, {50.0, 50.0});
        c.homogeneous = true;  // intrinsically flat, so symmetric about every point
        c.jet_fn = [](Point2 p) {
            MetricJet j;
            j.g = {1.0, 0.0, sq(p.x1)};
            j.dg[0] = {0.0, 0.0, 2.0 * p.x1};
            j.d2g[0] = {0.0, 0.0, 2.0};
            return j;
        };
        c.inj_fn = [](Point2 p) { return Radius::of(p.x1); };
        c.exact_distance = [](Point2 p, Point2 q) {
            const double dth = std::abs(p.x2 - q.x2);
            if (dth >= 3.14159265358979323846) return p.x1 + q.x1;  // around the apex
            return std::sqrt(std::max(0.0, sq(p.x1) + sq(q.x1) - 2.0 * p.x1 * q.x1 * std::cos(dth)));
        };
        return c;
    }

    if (name == "perturbed-flat") {
        if (params.size() != 2 || !(params[0] >= 0.0) || !(params[1] > 0.0))
            throw parameter_error("perturbed-flat needs parameters a >= 0, w > 0");
        const double a = params[0], w = params[1];
        // smallness cap keeping the surface free of conjugate points and loops
        const double cap = 0.05 * std::min(1.0, w * w);
        if (a > cap) {
            std::ostringstream os;
            os << "perturbed-flat amplitude a=" << a << " above smallness cap " << cap;
            throw parameter_error(os.str());
        }
        c.label = fmt("perturbed-flat", {{"a", a}, {"w", w}});
        c.domain = DomainRegion::disc({0, 0}, 1000.0);
        c.jet_fn = [a, w](Point2 p) {
            using namespace detail;
            const double u = p.x1 / w, v = p.x2 / w;
            MetricJet j;
            j.g = {1.0 + a * bump(u) * bump(v), 0.0, 1.0};
            j.dg[0] = {a * bump_d1(u) * bump(v) / w, 0.0, 0.0};
            j.dg[1] = {a * bump(u) * bump_d1(v) / w, 0.0, 0.0};
            j.d2g[0] = {a * bump_d2(u) * bump(v) / (w * w), 0.0, 0.0};
            j.d2g[1] = {a * bump_d1(u) * bump_d1(v) / (w * w), 0.0, 0.0};
            j.d2g[2] = {a * bump(u) * bump_d2(v) / (w * w), 0.0, 0.0};
            return j;
        };
        c.inj_fn = [](Point2) { return Radius::infinite(); };
        return c;
    }

    throw parameter_error("unknown builtin surface: " + name);
}

// ---- finite-difference jets -------------------------------------------------

inline double default_fd_step(const DomainRegion& d) {
    return std::max(1e-5, 1e-4 * d.extent());
}

// replace the derivative part of the jet by central differences of g at step h
// (h = 0 picks the default step for the chart's domain)
inline MetricChart with_finite_differences(MetricChart base, double h = 0.0) {
    if (h <= 0.0) h = default_fd_step(base.domain);
    auto raw = base.jet_fn;
    auto dom = base.domain;
    std::string lbl = base.label;
    auto value = [raw, dom, lbl](Point2 p) {
        if (!dom.contains(p))
            throw domain_error(lbl + ": finite-difference stencil leaves the domain near " +
                               detail::point_str(p));
        return raw(p).g;
    };
    base.jet_fn = [value, h](Point2 p) {
        const Point2 e1{h, 0.0}, e2{0.0, h};
        MetricJet j;
        j.g = value(p);
        const SymMatrix2 px = value(p + e1), mx = value(p - e1);
        const SymMatrix2 py = value(p + e2), my = value(p - e2);
        j.dg[0] = (1.0 / (2.0 * h)) * (px - mx);
        j.dg[1] = (1.0 / (2.0 * h)) * (py - my);
        j.d2g[0] = (1.0 / (h * h)) * (px - 2.0 * j.g + mx);
        j.d2g[2] = (1.0 / (h * h)) * (py - 2.0 * j.g + my);
        const SymMatrix2 pp = value(p + e1 + e2), pm = value(p + e1 - e2);
        const SymMatrix2 mp = value(p - e1 + e2), mm = value(p - e1 - e2);
        j.d2g[1] = (1.0 / (4.0 * h * h)) * ((pp - pm) - (mp - mm));
        return j;
    };
    base.deriv_mode = DerivMode::finite_difference;
    base.deriv_step = h;
    // metric values stay available on the whole domain even where the
    // derivative stencil would not fit
    base.value_fn = [raw](Point2 p) { return raw(p).g; };
    return base;
}

// pull back under x -> lambda x: an isometry onto its image, so curvature,
// injectivity radius and distances carry over to corresponding points
inline MetricChart rescale_coordinates(MetricChart base, double lambda) {
    if (!(lambda > 0.0)) throw parameter_error("rescale_coordinates needs lambda > 0");
    MetricChart c;
    c.label = base.label + " [coords scaled]";
    if (base.domain.kind == DomainRegion::Kind::rectangle)
        c.domain = DomainRegion::rectangle(base.domain.lo / lambda, base.domain.hi / lambda);
    else
        c.domain = DomainRegion::disc(base.domain.center / lambda, base.domain.radius / lambda);
    auto raw = base.jet_fn;
    const Mat2 B = Mat2::scale(lambda);
    c.jet_fn = [raw, lambda, B](Point2 y) { return transform_jet(raw(lambda * y), B); };
    if (base.value_fn) {
        auto val = base.value_fn;
        c.value_fn = [val, lambda, B](Point2 y) { return congruence(val(lambda * y), B); };
    }
    auto inj = base.inj_fn;
    c.inj_fn = [inj, lambda](Point2 y) { return inj(lambda * y); };
    if (base.exact_distance) {
        auto ed = base.exact_distance;
        c.exact_distance = [ed, lambda](Point2 p, Point2 q) { return ed(lambda * p, lambda * q); };
    }
    c.homogeneous = base.homogeneous;
    c.deriv_mode = base.deriv_mode;
    c.deriv_step = base.deriv_step / lambda;
    return c;
}

// ---- chord length -----------------------------------------------------------

namespace detail {

template <class F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// metric length of the straight chart segment from p to q (an upper bound on
// the Riemannian distance)
inline double chord_length(const MetricChart& chart, Point2 p, Point2 q) {
    const Vec2 v = q - p;
    if (norm(v) == 0.0) return 0.0;
    auto f = [&](double t) {
        const Point2 x = p + t * v;
        return std::sqrt(std::max(0.0, chart.metric(x).quad(v, v)));
    };
    const double fa = f(0.0), fm = f(0.5), fb = f(1.0);
    const double whole = (fa + 4.0 * fm + fb) / 6.0;
    const double tol = 1e-11 * std::max(whole, 1e-30);
    return detail::adaptive_simpson(f, 0.0, 1.0, fa, fm, fb, whole, tol, 28);
}

inline double MetricChart::pair_distance(Point2 p, Point2 q) const {
    if (exact_distance) return exact_distance(p, q);
    return chord_length(*this, p, q);
}

}  // namespace regulus

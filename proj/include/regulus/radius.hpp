#pragma once
// regularity radii: bisection for the intrinsic radius, certified lower
// bounds for the extrinsic radius via concrete chart constructions, and the
// derived global quantity

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "regulus/geodesic.hpp"
#include "regulus/holder.hpp"
#include "regulus/isothermal.hpp"
#include "regulus/tensor.hpp"

namespace regulus {

struct RegularityQuery {
    MetricChart chart;
    Point2 p0{};
    double alpha = 0.5;
    std::size_t n_rays = 64;
    std::size_t n_radial = 64;
    double tol = 1e-3;  // relative bisection tolerance
    double cap = 50.0;  // search cap for unbounded radii
    std::uint64_t seed = kDefaultSeed;
};

// distance between ball samples by index: the surface's closed form when
// available, otherwise fixed-node Simpson length of the chart chord (an upper
// bound, exact on flat charts)
inline PairDistanceFn ball_pair_distance(const GeodesicBall& ball) {
    const auto& chart = ball.chart;
    if (chart.exact_distance) {
        auto ed = chart.exact_distance;
        auto pts = ball.points;
        return [ed, pts](std::size_t i, std::size_t j) { return ed(pts[i], pts[j]); };
    }
    auto pts = ball.points;
    const MetricChart c = chart;
    return [c, pts](std::size_t i, std::size_t j) {
        const Point2 p = pts[i], q = pts[j];
        constexpr int kNodes = 16;  // composite Simpson on a fixed grid
        const Vec2 v = q - p;
        auto speed = [&](double t) {
            return std::sqrt(std::max(0.0, c.metric(p + t * v).quad(v, v)));
        };
        double s = speed(0.0) + speed(1.0);
        for (int m = 1; m < kNodes; ++m)
            s += (m % 2 ? 4.0 : 2.0) * speed(m / static_cast<double>(kNodes));
        return s / (3.0 * kNodes);
    };
}

namespace detail {

inline void validate_query(const RegularityQuery& q) {
    if (!(q.alpha > 0.0) || q.alpha > 1.0) throw parameter_error("alpha must lie in (0, 1]");
    if (q.n_rays < 8 || q.n_radial < 4) throw parameter_error("sampling needs n_rays >= 8, n_radial >= 4");
    if (!(q.tol > 0.0) || q.tol >= 0.1) throw parameter_error("tol must lie in (0, 0.1)");
    if (!(q.cap > 0.0)) throw parameter_error("cap must be positive");
    if (!q.chart.contains(q.p0)) throw domain_error(q.chart.label + ": query point outside the domain");
}

// injectivity radius at least 2*delta at every sample of the closed ball
inline bool inj_at_least(const GeodesicBall& ball, double bound) {
    for (const Point2& p : ball.points) {
        const Radius r = ball.chart.injectivity_radius(p);
        if (!r.unbounded && r.value < bound * (1.0 - 1e-12)) return false;
    }
    return true;
}

// evaluate a delta-predicate on a 16-point grid, demand the one-flip pattern
// T...TF...F, and return the bracket around the flip
struct GridScan {
    bool all_true = false;
    bool all_false = false;
    double last_true = 0.0;
    double first_false = 0.0;
};

template <class Pred>
GridScan predicate_grid(Pred&& pred, double hi, const std::string& label) {
    constexpr int kGrid = 16;
    std::array<bool, kGrid> ok{};
    for (int i = 0; i < kGrid; ++i) ok[i] = pred(hi * (i + 1) / static_cast<double>(kGrid));
    for (int i = 1; i < kGrid; ++i)
        if (ok[i] && !ok[i - 1])
            throw inconsistent_field_error(label +
                                           ": regularity predicate is not monotone across the "
                                           "search grid; refusing to bisect");
    GridScan scan;
    scan.all_true = ok[kGrid - 1];
    scan.all_false = !ok[0];
    for (int i = 0; i < kGrid; ++i) {
        const double d = hi * (i + 1) / static_cast<double>(kGrid);
        if (ok[i]) scan.last_true = d;
        else {
            scan.first_false = d;
            break;
        }
    }
    return scan;
}

// bisection refinement of the predicate flip inside (lo, hi]; lo passes (or is
// 0), hi fails; returns the best passing value found
template <class Pred>
double refine_flip(Pred&& pred, double lo, double hi, double tol) {
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid)) lo = mid;
        else hi = mid;
    }
    return lo;
}

}  // namespace detail

// ---- intrinsic radius --------------------------------------------------------

// largest delta with inj >= 2*delta at the ball samples and
// delta^2 * (sup|K| + (2 delta)^alpha [K]_alpha) <= 1, found by bisection
inline Capped rho_int(const RegularityQuery& q) {
    detail::validate_query(q);
    const Radius inj0 = q.chart.injectivity_radius(q.p0);
    const double hi = std::min(q.cap, inj0.unbounded ? q.cap : 0.5 * inj0.value);

    auto pred = [&q](double delta) {
        try {
            const GeodesicBall ball = geodesic_ball(q.chart, q.p0, delta, q.n_rays, q.n_radial);
            if (!detail::inj_at_least(ball, 2.0 * delta)) return false;
            const std::vector<double> K = curvature_values(q.chart, ball.points);
            const NormEstimate nk =
                curvature_norm(ball.points, K, delta, q.alpha, ball_pair_distance(ball), q.seed);
            return delta * delta * nk.value <= 1.0;
        } catch (const domain_error&) {
            return false;
        } catch (const parameter_error&) {
            return false;
        } catch (const degeneracy_error&) {
            return false;
        } catch (const nonconvergence_error&) {
            return false;  // unverifiable radius counts against the estimate
        }
    };

    const auto scan = detail::predicate_grid(pred, hi, q.chart.label + " (intrinsic radius)");
    if (scan.all_true) {
        if (hi >= q.cap) return {q.cap, true};
        return {hi, false};  // capped by the injectivity constraint itself
    }
    const double lo = scan.all_false ? 0.0 : scan.last_true;
    return {detail::refine_flip(pred, lo, scan.first_false, q.tol), false};
}

// ---- chart certificates --------------------------------------------------------

// sampled chart data for one candidate construction: coordinates, the metric
// deviation g - I with two derivative levels per component, and ball metadata
struct ChartSample {
    std::vector<Point2> points;                             // chart coordinates y
    std::array<std::vector<ComponentField>, 3> comp_levels;  // per component 11, 12, 22
    Point2 x0{};
    SymMatrix2 g_x0 = SymMatrix2::identity();
    double diam = 0.0;  // max pairwise gap over rim samples
    bool inj_ok = false;
    double delta = 0.0;
    std::string construction;
};

struct ChartCertificate {
    double delta = 0.0;
    double alpha = 0.0;
    double bound = 0.0;
    double diam = 0.0;
    Point2 x0{};
    std::array<double, 3> measured_norms{};  // components 11, 12, 22
    bool g_at_x0_identity = false;
    bool inj_ok = false;
    bool pass = false;
    std::size_t n_points = 0;
    std::string construction;

    double max_norm() const {
        return std::max({measured_norms[0], measured_norms[1], measured_norms[2]});
    }
};

namespace detail {

inline double rim_diameter(const GeodesicBall& ball, const std::vector<Point2>& mapped) {
    // extreme points of a topological disc lie on the image of its rim
    const auto rim = ball.boundary_indices();
    double d = 0.0;
    for (std::size_t a = 0; a < rim.size(); ++a)
        for (std::size_t b = a + 1; b < rim.size(); ++b)
            d = std::max(d, dist(mapped[rim[a]], mapped[rim[b]]));
    return d;
}

inline void set_levels(std::array<std::vector<ComponentField>, 3>& levels, std::size_t n) {
    for (auto& lv : levels) {
        lv.clear();
        lv.emplace_back(n, 1);  // value
        lv.emplace_back(n, 2);  // first partials
        lv.emplace_back(n, 3);  // second partials
    }
}

}  // namespace detail

// candidate (a): the surface's own coordinates, translated and linearly
// normalized by the metric square root so g(0) = identity
inline ChartSample native_chart_sample(const GeodesicBall& ball) {
    const MetricChart& chart = ball.chart;
    const SymMatrix2 A = sqrt_spd(chart.metric(ball.center));
    const SymMatrix2 Ai = inverse_metric(A);
    const Mat2 B{Ai.a11, Ai.a12, Ai.a12, Ai.a22};  // x = p0 + B y

    ChartSample s;
    s.construction = "native";
    s.delta = ball.radius;
    const std::size_t n = ball.points.size();
    s.points.resize(n);
    detail::set_levels(s.comp_levels, n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 w = ball.points[i] - ball.center;
        s.points[i] = A.apply(w);
        const MetricJet jet = transform_jet(chart.jet(ball.points[i]), B);
        const double dev[3] = {jet.g.a11 - 1.0, jet.g.a12, jet.g.a22 - 1.0};
        for (int c = 0; c < 3; ++c) {
            auto comp = [c](const SymMatrix2& m) { return c == 0 ? m.a11 : (c == 1 ? m.a12 : m.a22); };
            s.comp_levels[c][0].at(i, 0) = dev[c];
            s.comp_levels[c][1].at(i, 0) = comp(jet.dg[0]);
            s.comp_levels[c][1].at(i, 1) = comp(jet.dg[1]);
            s.comp_levels[c][2].at(i, 0) = comp(jet.d2g[0]);
            s.comp_levels[c][2].at(i, 1) = comp(jet.d2g[1]);
            s.comp_levels[c][2].at(i, 2) = comp(jet.d2g[2]);
        }
        if (i == 0) s.g_x0 = jet.g;
    }
    s.x0 = s.points[0];
    s.diam = detail::rim_diameter(ball, s.points);
    s.inj_ok = detail::inj_at_least(ball, 2.0 * ball.radius);
    return s;
}

// candidate (b): the isothermal disc chart rescaled by the square root of the
// central conformal factor, making the pulled-back metric the identity at 0
inline ChartSample isothermal_chart_sample(const GeodesicBall& ball, const IsothermalChart& iso) {
    const double xi = std::sqrt(iso.phi0);
    const double xi2 = xi * xi;

    ChartSample s;
    s.construction = "isothermal";
    s.delta = ball.radius;
    const std::size_t n = ball.points.size();
    s.points.resize(n);
    detail::set_levels(s.comp_levels, n);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 z = iso.forward(ball.points[i]);
        s.points[i] = xi * z;
        const ConformalJet pj = iso.phi_jet(z);
        // g(y) = phi(z)/xi^2 * I with y = xi z, so each y-derivative divides by xi
        const double f = pj.phi / xi2 - 1.0;
        const Vec2 df = pj.dphi / (xi2 * xi);
        const double d2f[3] = {pj.d2phi[0] / (xi2 * xi2), pj.d2phi[1] / (xi2 * xi2),
                               pj.d2phi[2] / (xi2 * xi2)};
        for (int c : {0, 2}) {  // components 11 and 22 carry the factor; 12 is zero
            s.comp_levels[c][0].at(i, 0) = f;
            s.comp_levels[c][1].at(i, 0) = df.x1;
            s.comp_levels[c][1].at(i, 1) = df.x2;
            s.comp_levels[c][2].at(i, 0) = d2f[0];
            s.comp_levels[c][2].at(i, 1) = d2f[1];
            s.comp_levels[c][2].at(i, 2) = d2f[2];
        }
        if (i == 0) s.g_x0 = {pj.phi / xi2, 0.0, pj.phi / xi2};
    }
    s.x0 = s.points[0];
    s.diam = detail::rim_diameter(ball, s.points);
    s.inj_ok = detail::inj_at_least(ball, 2.0 * ball.radius);
    return s;
}

// evaluate both chart conditions: identity at x0 (entrywise 1e-9) and each
// component's diameter-weighted norm within the bound
inline ChartCertificate check_chart_certificate(const ChartSample& s, double alpha, double bound,
                                                std::uint64_t seed = kDefaultSeed) {
    if (s.points.empty()) throw parameter_error("chart certificate needs a nonempty sample");
    ChartCertificate cert;
    cert.delta = s.delta;
    cert.alpha = alpha;
    cert.bound = bound;
    cert.diam = s.diam;
    cert.x0 = s.x0;
    cert.n_points = s.points.size();
    cert.construction = s.construction;
    cert.inj_ok = s.inj_ok;
    cert.g_at_x0_identity = std::abs(s.g_x0.a11 - 1.0) <= 1e-9 && std::abs(s.g_x0.a12) <= 1e-9 &&
                            std::abs(s.g_x0.a22 - 1.0) <= 1e-9;
    for (int c = 0; c < 3; ++c) {
        const NormEstimate e = nondim_norm(s.points, s.comp_levels[c], s.diam, alpha, {}, seed);
        cert.measured_norms[c] = e.value;
    }
    cert.pass = cert.g_at_x0_identity && cert.inj_ok && cert.max_norm() <= bound;
    return cert;
}

// one-shot certificate for a concrete construction at a fixed radius
inline ChartCertificate chart_certificate(const MetricChart& chart, Point2 p0, double delta,
                                          double alpha, bool isothermal, std::size_t n_rays = 64,
                                          std::size_t n_radial = 64, double bound = 1.0,
                                          std::uint64_t seed = kDefaultSeed);

// ---- extrinsic radius ----------------------------------------------------------

struct CandidateResult {
    std::string construction;
    bool supported = false;
    Capped value{};
    std::optional<ChartCertificate> certificate;  // at the certified radius
    std::string note;
};

struct ExtCertification {
    Capped value{};           // best certified radius over the candidates
    std::string winner;       // construction that achieved it
    std::vector<CandidateResult> candidates;
};

namespace detail {

// guard band: the search accepts only certificates comfortably inside the
// bound, so the emitted certificate re-verifies at doubled sampling
constexpr double kCertGuard = 1e-2;

inline ChartSample build_sample(const MetricChart& chart, Point2 p0, double delta,
                                std::size_t n_rays, std::size_t n_radial, bool isothermal) {
    const GeodesicBall ball = geodesic_ball(chart, p0, delta, n_rays, n_radial);
    if (!isothermal) return native_chart_sample(ball);
    return isothermal_chart_sample(ball, isothermal_chart(ball));
}

inline CandidateResult certify_candidate(const RegularityQuery& q, bool isothermal,
                                         const std::string& name, double bound) {
    CandidateResult res;
    res.construction = name;
    res.supported = true;

    auto pred = [&](double delta) {
        try {
            const ChartSample s =
                detail::build_sample(q.chart, q.p0, delta, q.n_rays, q.n_radial, isothermal);
            const ChartCertificate cert = check_chart_certificate(s, q.alpha, bound, q.seed);
            return cert.g_at_x0_identity && cert.inj_ok &&
                   cert.max_norm() <= bound * (1.0 - detail::kCertGuard);
        } catch (const domain_error&) {
            return false;
        } catch (const parameter_error&) {
            return false;
        } catch (const degeneracy_error&) {
            return false;
        } catch (const nonconvergence_error&) {
            return false;
        }
    };

    const Radius inj0 = q.chart.injectivity_radius(q.p0);
    const double hi = std::min(q.cap, inj0.unbounded ? q.cap : 0.5 * inj0.value);
    const auto scan = detail::predicate_grid(pred, hi, q.chart.label + " (" + name + " chart)");

    double best;
    if (scan.all_true) {
        if (hi >= q.cap) {
            res.value = {q.cap, true};
            return res;
        }
        best = hi;
    } else if (scan.all_false) {
        best = detail::refine_flip(pred, 0.0, scan.first_false, q.tol);
    } else {
        best = detail::refine_flip(pred, scan.last_true, scan.first_false, q.tol);
    }
    if (!(best > 0.0)) {
        res.value = {0.0, false};
        res.note = "no certificate found";
        return res;
    }

    // emit the certificate and insist it re-verifies at doubled sampling with
    // only hairline slack; shrink if the denser norms cross the bound
    for (int attempt = 0; attempt < 8; ++attempt) {
        const ChartSample dense =
            detail::build_sample(q.chart, q.p0, best, 2 * q.n_rays, 2 * q.n_radial, isothermal);
        const ChartCertificate cert =
            check_chart_certificate(dense, q.alpha, bound * (1.0 + 1e-6), q.seed);
        if (cert.pass) {
            res.value = {best, false};
            res.certificate = cert;
            return res;
        }
        best *= 1.0 - q.tol;
    }
    res.value = {0.0, false};
    res.note = "certificate failed dense re-verification";
    return res;
}

}  // namespace detail

inline ChartCertificate chart_certificate(const MetricChart& chart, Point2 p0, double delta,
                                          double alpha, bool isothermal, std::size_t n_rays,
                                          std::size_t n_radial, double bound, std::uint64_t seed) {
    return check_chart_certificate(detail::build_sample(chart, p0, delta, n_rays, n_radial, isothermal),
                                   alpha, bound, seed);
}

// certified lower bound on the extrinsic radius: the best radius at which a
// concrete chart construction passes the deviation-norm certificate.  The
// default bound 1 matches the radius definition; bound 0.01 gives the
// restricted-chart radius.  The true supremum ranges over all isometric
// charts and is not searchable.
inline ExtCertification certify_rho_ext(const RegularityQuery& q, double bound = 1.0) {
    detail::validate_query(q);
    if (!(bound > 0.0)) throw parameter_error("certificate bound must be positive");
    ExtCertification out;

    out.candidates.push_back(detail::certify_candidate(q, false, "native", bound));

    const bool iso_supported =
        q.chart.model != ConformalModel::none || q.chart.homogeneous;
    if (q.alpha >= 1.0) {
        CandidateResult res;
        res.construction = "isothermal";
        res.note = "needs alpha < 1";
        out.candidates.push_back(res);
    } else if (!iso_supported) {
        CandidateResult res;
        res.construction = "isothermal";
        res.note = "no isothermal construction for this surface";
        out.candidates.push_back(res);
    } else {
        out.candidates.push_back(detail::certify_candidate(q, true, "isothermal", bound));
    }

    for (const CandidateResult& c : out.candidates) {
        if (!c.supported) continue;
        const bool better = c.value.capped != out.value.capped
                                ? c.value.capped
                                : c.value.value > out.value.value;
        if (better) {
            out.value = c.value;
            out.winner = c.construction;
        }
    }
    return out;
}

// ---- global quantity -----------------------------------------------------------

// inverse square of the worst intrinsic radius over the probe points; zero
// when every probe is capped (the flat direction)
inline double global_regularity(const MetricChart& chart, double alpha,
                                const std::vector<Point2>& probes,
                                const RegularityQuery& base = {}) {
    if (probes.empty()) throw parameter_error("global_regularity needs at least one probe point");
    double worst = std::numeric_limits<double>::infinity();
    for (const Point2& p : probes) {
        RegularityQuery q = base;
        q.chart = chart;
        q.p0 = p;
        q.alpha = alpha;
        const Capped r = rho_int(q);
        if (r.capped) continue;  // contributes no finite constraint
        worst = std::min(worst, r.value);
    }
    if (!std::isfinite(worst)) return 0.0;
    if (!(worst > 0.0)) throw degeneracy_error("intrinsic radius vanished at a probe point");
    return 1.0 / (worst * worst);
}

}  // namespace regulus

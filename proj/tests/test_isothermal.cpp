#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <regulus/geodesic.hpp>
#include <regulus/isothermal.hpp>

using namespace regulus;

namespace {

// seeded points of the open disc of radius rmax, biased away from the rim
std::vector<Point2> disc_points(double rmax, std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<Point2> out;
    out.reserve(n);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rmax * std::sqrt(rng.uniform());
        const double th = kTwoPi * rng.uniform();
        out.push_back({r * std::cos(th), r * std::sin(th)});
    }
    return out;
}

// synthetic chart: closed-form conformal factor on a disc, identity transition
IsothermalChart closed_form_chart(double delta, double sign) {
    IsothermalChart iso;
    iso.delta = delta;
    iso.phi0 = 4.0;
    iso.forward = [](Point2 p) { return p; };
    iso.inverse = [](Point2 z) { return z; };
    iso.phi = [sign](Point2 z) { return 4.0 / sq(1.0 + sign * (sq(z.x1) + sq(z.x2))); };
    iso.curvature_at = [sign](Point2) { return sign; };
    return iso;
}

}  // namespace

TEST_CASE("flat ball gets the identity isothermal chart") {
    auto chart = builtin_surface("flat");
    auto ball = geodesic_ball(chart, {2.0, 3.0}, 0.5, 12, 4);
    auto iso = isothermal_chart(ball);

    CHECK(iso.construction == IsothermalChart::Construction::analytic);
    CHECK(iso.phi0 == 1.0);
    for (const Point2& p : ball.points) {
        const Point2 z = iso.forward(p);
        CHECK(z.x1 == Catch::Approx(p.x1 - 2.0).margin(1e-12));
        CHECK(z.x2 == Catch::Approx(p.x2 - 3.0).margin(1e-12));
        CHECK(iso.phi(z) == 1.0);
    }
    const auto jet = iso.phi_jet({0.1, -0.2});
    CHECK(jet.phi == 1.0);
    CHECK(jet.dphi.x1 == 0.0);
    CHECK(jet.d2phi[0] == 0.0);

    auto [lo, hi] = distance_distortion(ball, iso, 200);
    CHECK(lo == Catch::Approx(1.0).margin(1e-9));
    CHECK(hi == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("sphere: analytic and radial constructions agree") {
    auto chart = builtin_surface("sphere", {1.0});
    auto ball = geodesic_ball(chart, {0.3, -0.1}, 0.3, 16, 8);

    auto iso_a = isothermal_chart(ball, IsoMethod::analytic);
    auto iso_r = isothermal_chart(ball, IsoMethod::radial_ode);
    CHECK(iso_a.construction == IsothermalChart::Construction::analytic);
    CHECK(iso_r.construction == IsothermalChart::Construction::radial_ode);

    // conformal factor at the origin
    CHECK(iso_r.phi0 == Catch::Approx(iso_a.phi0).epsilon(1e-8));

    // ball samples land on the same disc points
    for (const Point2& p : ball.points) {
        const Point2 za = iso_a.forward(p);
        const Point2 zr = iso_r.forward(p);
        CHECK(dist(za, zr) <= 1e-6 * ball.radius);
    }

    // conformal factors agree off the sample set
    for (const Point2& z : disc_points(0.95 * ball.radius, 25, 41)) {
        CHECK(iso_r.phi(z) == Catch::Approx(iso_a.phi(z)).epsilon(1e-6));
    }

    // transitions back to the surface agree
    for (const Point2& z : disc_points(0.9 * ball.radius, 10, 42)) {
        const Point2 pa = iso_a.inverse(z);
        const Point2 pr = iso_r.inverse(z);
        CHECK(dist(pa, pr) <= 1e-7);
    }
}

TEST_CASE("hyperbolic: analytic and radial constructions agree") {
    auto chart = builtin_surface("hyperbolic", {1.0});
    auto ball = geodesic_ball(chart, {0.2, 0.1}, 0.3, 16, 8);

    auto iso_a = isothermal_chart(ball, IsoMethod::analytic);
    auto iso_r = isothermal_chart(ball, IsoMethod::radial_ode);

    CHECK(iso_r.phi0 == Catch::Approx(iso_a.phi0).epsilon(1e-8));
    for (const Point2& p : ball.points) {
        CHECK(dist(iso_a.forward(p), iso_r.forward(p)) <= 1e-6 * ball.radius);
    }
    for (const Point2& z : disc_points(0.95 * ball.radius, 25, 43)) {
        CHECK(iso_r.phi(z) == Catch::Approx(iso_a.phi(z)).epsilon(1e-6));
    }
}

TEST_CASE("isothermal chart normalizations") {
    auto chart = builtin_surface("sphere", {1.0});
    auto ball = geodesic_ball(chart, {0.3, -0.1}, 0.3, 16, 8);

    for (IsoMethod m : {IsoMethod::analytic, IsoMethod::radial_ode}) {
        auto iso = isothermal_chart(ball, m);

        // center to origin
        const Point2 z0 = iso.forward(ball.center);
        CHECK(norm(z0) <= 1e-12);

        // rim to the delta circle
        for (std::size_t idx : ball.boundary_indices()) {
            CHECK(std::abs(norm(iso.forward(ball.points[idx])) - ball.radius) <=
                  1e-6 * ball.radius);
        }

        // the +x ray lands on the positive real axis
        const Point2 zx = iso.forward(ball.points[ball.index(0, ball.n_radial)]);
        CHECK(zx.x1 > 0.0);
        CHECK(std::abs(zx.x2) <= 1e-6 * ball.radius);

        // positive conformal factor across the disc
        for (const Point2& z : disc_points(0.99 * ball.radius, 20, 44)) {
            CHECK(iso.phi(z) > 0.0);
        }

        // round trip through the transition
        for (const Point2& p : ball.points) {
            const Point2 back = iso.inverse(iso.forward(p));
            CHECK(dist(back, p) <= 1e-8 * std::max(1.0, norm(p)));
        }
    }
}

TEST_CASE("pullback of the flat disc metric matches the surface metric") {
    // |v|_g^2 = phi(z(p)) * |Dz(p) v|^2 for conformal chart maps
    struct Case {
        const char* name;
        std::vector<double> params;
        Point2 center;
    };
    for (const Case& tc : {Case{"sphere", {1.0}, {0.3, -0.1}},
                           Case{"hyperbolic", {1.0}, {0.2, 0.1}}}) {
        auto chart = builtin_surface(tc.name, tc.params);
        auto ball = geodesic_ball(chart, tc.center, 0.3, 12, 6);
        auto iso = isothermal_chart(ball, IsoMethod::analytic);

        SplitMix64 rng(kDefaultSeed);
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        const double h = 1e-5;
        for (int trial = 0; trial < 100; ++trial) {
            const Point2 p = ball.points[rng.index(ball.points.size())];
            const double psi = kTwoPi * rng.uniform();
            const Vec2 v{std::cos(psi), std::sin(psi)};

            const Point2 zp = iso.forward({p.x1 + h * v.x1, p.x2 + h * v.x2});
            const Point2 zm = iso.forward({p.x1 - h * v.x1, p.x2 - h * v.x2});
            const Vec2 dz = (zp - zm) / (2.0 * h);

            const double lhs = chart.metric(p).quad(v, v);
            const double rhs = iso.phi(iso.forward(p)) * dot(dz, dz);
            CHECK(rhs == Catch::Approx(lhs).epsilon(1e-6));
        }
    }
}

TEST_CASE("polar coordinates of the plane flatten to the identity factor") {
    auto chart = builtin_surface("polar-flat");
    auto ball = geodesic_ball(chart, {1.0, 0.3}, 0.4, 12, 5);
    auto iso = isothermal_chart(ball);

    CHECK(iso.construction == IsothermalChart::Construction::radial_ode);
    CHECK(iso.phi0 == Catch::Approx(1.0).margin(1e-10));
    for (const Point2& z : disc_points(0.95 * ball.radius, 20, 45)) {
        CHECK(iso.phi(z) == Catch::Approx(1.0).margin(1e-9));
    }

    // a flat surface maps isometrically: chart-image gaps equal distances
    auto [lo, hi] = distance_distortion(ball, iso, 150);
    CHECK(lo >= 1.0 - 1e-7);
    CHECK(hi <= 1.0 + 1e-7);
}

TEST_CASE("compatibility residual vanishes for closed-form factors") {
    // factors 4/(1 +- |z|^2)^2 with curvature +-1 on the half-disc
    auto pos = closed_form_chart(0.5, +1.0);
    auto neg = closed_form_chart(0.5, -1.0);

    const double res_pos = liouville_residual(pos, pos.curvature_at, 200);
    const double res_neg = liouville_residual(neg, neg.curvature_at, 200);
    CHECK(res_pos < 1e-5);
    CHECK(res_neg < 1e-5);

    // the 5-point stencil converges at second order
    for (const auto& iso : {pos, neg}) {
        const double r1 = liouville_residual(iso, iso.curvature_at, 50);
        const double r2 = liouville_residual(iso, iso.curvature_at, 100);
        const double r3 = liouville_residual(iso, iso.curvature_at, 200);
        CHECK(std::log2(r1 / r2) >= 1.9);
        CHECK(std::log2(r2 / r3) >= 1.9);
    }

    CHECK_THROWS_AS(liouville_residual(pos, pos.curvature_at, 9), parameter_error);
}

TEST_CASE("compatibility residual on constructed charts") {
    auto sphere = builtin_surface("sphere", {1.0});
    auto ball = geodesic_ball(sphere, {0.3, -0.1}, 0.3, 16, 8);
    auto iso = isothermal_chart(ball, IsoMethod::analytic);
    auto K = [&sphere](Point2 p) { return gauss_curvature(sphere, p); };
    CHECK(liouville_residual(iso, K, 100) < 1e-5);

    auto polar = builtin_surface("polar-flat");
    auto pball = geodesic_ball(polar, {1.0, 0.3}, 0.4, 12, 5);
    auto piso = isothermal_chart(pball);
    auto pK = [&polar](Point2 p) { return gauss_curvature(polar, p); };
    CHECK(liouville_residual(piso, pK, 15) < 1e-6);
}

TEST_CASE("conformal factor jets match the factor") {
    auto chart = builtin_surface("sphere", {1.0});
    auto ball = geodesic_ball(chart, {0.3, -0.1}, 0.3, 16, 8);
    auto iso = isothermal_chart(ball, IsoMethod::analytic);

    const double h = 1e-6;
    for (const Point2& z : disc_points(0.9 * ball.radius, 10, 46)) {
        const auto jet = iso.phi_jet(z);
        CHECK(jet.phi == Catch::Approx(iso.phi(z)));
        const double fx = (iso.phi({z.x1 + h, z.x2}) - iso.phi({z.x1 - h, z.x2})) / (2.0 * h);
        const double fy = (iso.phi({z.x1, z.x2 + h}) - iso.phi({z.x1, z.x2 - h})) / (2.0 * h);
        CHECK(jet.dphi.x1 == Catch::Approx(fx).margin(1e-6));
        CHECK(jet.dphi.x2 == Catch::Approx(fy).margin(1e-6));
    }

    // radial-route jets are finite differences of a smooth factor; verify the
    // laplacian of log phi closes the curvature equation at loose tolerance
    auto iso_r = isothermal_chart(ball, IsoMethod::radial_ode);
    for (const Point2& z : disc_points(0.8 * ball.radius, 4, 47)) {
        const auto jet = iso_r.phi_jet(z);
        const double lap_log =
            (jet.d2phi[0] + jet.d2phi[2]) / jet.phi -
            (sq(jet.dphi.x1) + sq(jet.dphi.x2)) / sq(jet.phi);
        CHECK(-lap_log / (2.0 * jet.phi) == Catch::Approx(1.0).epsilon(5e-4));
    }
}

TEST_CASE("curvature bound controls the factor spread") {
    // kappa = 1, delta = 0.3: factors stay within exp(+-4 delta^2 kappa) of
    // each other across the disc
    auto chart = builtin_surface("sphere", {1.0});
    auto ball = geodesic_ball(chart, {0.3, -0.1}, 0.3, 16, 8);
    auto iso = isothermal_chart(ball);

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Point2& z : disc_points(0.999 * ball.radius, 200, 48)) {
        const double f = iso.phi(z);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double bound = std::exp(4.0 * sq(ball.radius) * 1.0);
    CHECK(hi / lo <= bound);
    CHECK(hi / lo >= 1.0);
    // and the spread is genuinely small here
    CHECK(std::abs(std::log(hi / lo)) < 0.1);
}

TEST_CASE("asymmetric metrics are rejected") {
    auto chart = builtin_surface("perturbed-flat", {0.05, 2.0});
    auto ball = geodesic_ball(chart, {0.0, 0.0}, 0.4, 12, 4);
    CHECK_THROWS_AS(isothermal_chart(ball), unsupported_construction_error);
    CHECK_THROWS_AS(isothermal_chart(ball, IsoMethod::radial_ode),
                    unsupported_construction_error);
}

TEST_CASE("distance distortion rejects bad inputs") {
    auto chart = builtin_surface("flat");
    auto ball = geodesic_ball(chart, {0.0, 0.0}, 1.0, 12, 4);
    auto iso = isothermal_chart(ball);
    CHECK_THROWS_AS(distance_distortion(ball, iso, 0), parameter_error);
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "regulus/tensor.hpp"

using namespace regulus;

namespace {

// curvature of an orthogonal metric diag(E, 1) depending on both coordinates:
//   K = -E_22 / (2 E) + (E_2)^2 / (4 E^2)
// independent of the Christoffel route used by the library
double orthogonal_curvature(double E, double E2, double E22) {
    return -E22 / (2.0 * E) + E2 * E2 / (4.0 * E * E);
}

}  // namespace

TEST_CASE("Christoffel symbols on the polar-flat chart") {
    const MetricChart c = builtin_surface("polar-flat");
    const Christoffel G = christoffel(c.jet({2.0, 0.0}));
    CHECK(G(0, 1, 1) == Catch::Approx(-2.0).margin(1e-12));   // radial-angular
    CHECK(G(1, 0, 1) == Catch::Approx(0.5).margin(1e-12));
    CHECK(G(0, 0, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(G(1, 1, 1) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("Christoffel symbols on the hyperbolic chart") {
    // conformal metric: with f = log(phi)/2 the symbols are combinations of
    // the partials of f; at (0.5, 0) with k = 1: f_1 = 4/3, f_2 = 0
    const MetricChart c = builtin_surface("hyperbolic", {1.0});
    const Christoffel G = christoffel(c.jet({0.5, 0.0}));
    const double f1 = 4.0 / 3.0;
    CHECK(G(0, 0, 0) == Catch::Approx(f1).margin(1e-10));
    CHECK(G(0, 1, 1) == Catch::Approx(-f1).margin(1e-10));
    CHECK(G(1, 0, 1) == Catch::Approx(f1).margin(1e-10));
    CHECK(G(0, 0, 1) == Catch::Approx(0.0).margin(1e-10));
    CHECK(G(1, 0, 0) == Catch::Approx(0.0).margin(1e-10));
    CHECK(G(1, 1, 1) == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("Christoffel partials agree with finite differences of the symbols") {
    const MetricChart c = builtin_surface("sphere", {1.3});
    const Point2 p{0.4, -0.3};
    const auto dG = christoffel_partials(c.jet(p));
    const double h = 1e-6;
    for (int m = 0; m < 2; ++m) {
        const Point2 e = m == 0 ? Point2{h, 0} : Point2{0, h};
        const Christoffel Gp = christoffel(c.jet(p + e));
        const Christoffel Gm = christoffel(c.jet(p - e));
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = i; j < 2; ++j) {
                    const double fd = (Gp(k, i, j) - Gm(k, i, j)) / (2.0 * h);
                    CHECK(dG[m](k, i, j) == Catch::Approx(fd).margin(1e-7));
                }
    }
}

TEST_CASE("curvature of the model surfaces") {
    const double R = 1.7;
    const MetricChart s = builtin_surface("sphere", {R});
    for (Point2 p : {Point2{0, 0}, Point2{0.8, -0.4}, Point2{2.0, 1.0}})
        CHECK(gauss_curvature(s, p) == Catch::Approx(1.0 / (R * R)).epsilon(1e-11));

    const double k = 2.3;
    const MetricChart h = builtin_surface("hyperbolic", {k});
    for (Point2 p : {Point2{0, 0}, Point2{0.5, 0.3}, Point2{-0.7, 0.1}})
        CHECK(gauss_curvature(h, p) == Catch::Approx(-k).epsilon(1e-11));

    const MetricChart f = builtin_surface("flat");
    CHECK(gauss_curvature(f, {100.0, -40.0}) == Catch::Approx(0.0).margin(1e-14));

    const MetricChart pf = builtin_surface("polar-flat");
    for (Point2 p : {Point2{0.5, 0.0}, Point2{7.0, 3.0}})
        CHECK(gauss_curvature(pf, p) == Catch::Approx(0.0).margin(1e-11));
}

TEST_CASE("perturbed-flat curvature against the orthogonal-metric formula") {
    const double a = 0.01, w = 1.0;
    const MetricChart c = builtin_surface("perturbed-flat", {a, w});
    for (Point2 p : {Point2{0, 0}, Point2{0.3, 0.2}, Point2{-0.6, 0.45}, Point2{0.05, -0.9}}) {
        const MetricJet j = c.jet(p);
        const double want = orthogonal_curvature(j.g.a11, j.dg[1].a11, j.d2g[2].a11);
        CHECK(gauss_curvature(j) == Catch::Approx(want).epsilon(1e-12).margin(1e-15));
    }
    // peak curvature scale: K(0,0) = 8a / (2 (1+a)) = 4a/(1+a)
    CHECK(gauss_curvature(c, {0, 0}) == Catch::Approx(4.0 * a / (1.0 + a)).epsilon(1e-12));
    // curvature vanishes outside the bump support
    CHECK(gauss_curvature(c, {1.5, 0.0}) == 0.0);
}

TEST_CASE("curvature is invariant under coordinate rescaling") {
    const MetricChart h = builtin_surface("hyperbolic", {0.7});
    const MetricChart r = rescale_coordinates(h, 0.25);
    CHECK(gauss_curvature(r, {0.8, 0.4}) == Catch::Approx(gauss_curvature(h, {0.2, 0.1})).epsilon(1e-10));
}

TEST_CASE("curvature from finite-difference jets stays within budget") {
    const MetricChart c = builtin_surface("sphere", {1.0});
    const MetricChart fd = with_finite_differences(c, 1e-4);
    const Point2 p{0.35, 0.15};
    CHECK(gauss_curvature(fd, p) == Catch::Approx(1.0).margin(2e-7));
    // second-order convergence: quartering the error when halving the step;
    // steps large enough that truncation dominates second-difference roundoff
    const double e1 = std::abs(gauss_curvature(with_finite_differences(c, 2e-3), p) - 1.0);
    const double e2 = std::abs(gauss_curvature(with_finite_differences(c, 1e-3), p) - 1.0);
    CHECK(e1 / e2 > 3.4);
    CHECK(e1 / e2 < 4.6);
}

TEST_CASE("curvature_values evaluates over a point range") {
    const MetricChart s = builtin_surface("sphere", {2.0});
    const std::vector<Point2> pts{{0, 0}, {0.5, 0.5}, {1.0, -0.3}};
    const auto K = curvature_values(s, pts);
    REQUIRE(K.size() == 3);
    for (double v : K) CHECK(v == Catch::Approx(0.25).epsilon(1e-11));
}

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <regulus/radius.hpp>

using namespace regulus;

namespace {

RegularityQuery make_query(MetricChart chart, Point2 p0, double alpha) {
    RegularityQuery q;
    q.chart = std::move(chart);
    q.p0 = p0;
    q.alpha = alpha;
    q.n_rays = 32;  // test-speed sampling; full pair sweep still applies
    q.n_radial = 24;
    return q;
}

// flat square sample with a constant metric, for certificate edge cases
ChartSample constant_metric_sample(const SymMatrix2& g, double half_width) {
    ChartSample s;
    s.construction = "native";
    s.delta = half_width;
    const int n = 9;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s.points.push_back({half_width * (2.0 * i / (n - 1) - 1.0),
                                half_width * (2.0 * j / (n - 1) - 1.0)});
    const std::size_t m = s.points.size();
    for (auto& lv : s.comp_levels) {
        lv.emplace_back(m, 1);
        lv.emplace_back(m, 2);
        lv.emplace_back(m, 3);
    }
    const double dev[3] = {g.a11 - 1.0, g.a12, g.a22 - 1.0};
    for (std::size_t i = 0; i < m; ++i)
        for (int c = 0; c < 3; ++c) s.comp_levels[c][0].at(i, 0) = dev[c];
    s.x0 = {0.0, 0.0};
    s.g_x0 = g;
    double d = 0.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) d = std::max(d, dist(s.points[a], s.points[b]));
    s.diam = d;
    s.inj_ok = true;
    return s;
}

}  // namespace

TEST_CASE("intrinsic radius of the constant-curvature surfaces") {
    SECTION("flat plane is capped") {
        auto r = rho_int(make_query(builtin_surface("flat"), {0.0, 0.0}, 0.5));
        CHECK(r.capped);
        CHECK(r.value == 50.0);
    }
    SECTION("spheres bind at the curvature constraint") {
        for (double R : {0.5, 1.0, 2.0}) {
            auto r = rho_int(make_query(builtin_surface("sphere", {R}), {0.0, 0.0}, 0.5));
            CHECK_FALSE(r.capped);
            CHECK(r.value == Catch::Approx(R).epsilon(0.02));
        }
    }
    SECTION("hyperbolic plane of unit curvature") {
        auto r = rho_int(make_query(builtin_surface("hyperbolic", {1.0}), {0.0, 0.0}, 0.5));
        CHECK_FALSE(r.capped);
        CHECK(r.value == Catch::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("intrinsic radius respects the injectivity constraint") {
    // flat metric in polar coordinates: curvature vanishes, so only the
    // injectivity radius x1 >= 2 delta over the ball binds: delta = x1/3
    auto q = make_query(builtin_surface("polar-flat"), {1.0, 0.3}, 0.5);
    auto r = rho_int(q);
    CHECK_FALSE(r.capped);
    CHECK(r.value == Catch::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("intrinsic radius scales with the sphere and shrinks with curvature") {
    const double r_half = rho_int(make_query(builtin_surface("sphere", {0.5}), {0.0, 0.0}, 0.5)).value;
    const double r_one = rho_int(make_query(builtin_surface("sphere", {1.0}), {0.0, 0.0}, 0.5)).value;
    const double r_two = rho_int(make_query(builtin_surface("sphere", {2.0}), {0.0, 0.0}, 0.5)).value;

    CHECK(r_half == Catch::Approx(0.5 * r_one).epsilon(0.02));
    CHECK(r_two == Catch::Approx(2.0 * r_one).epsilon(0.02));
    // sharper curvature never raises the radius
    CHECK(r_half <= r_one * (1.0 + 1e-9));
    CHECK(r_one <= r_two * (1.0 + 1e-9));
}

TEST_CASE("intrinsic radius input validation") {
    auto chart = builtin_surface("flat");
    auto q = make_query(chart, {0.0, 0.0}, 0.5);

    q.alpha = 0.0;
    CHECK_THROWS_AS(rho_int(q), parameter_error);
    q.alpha = 1.5;
    CHECK_THROWS_AS(rho_int(q), parameter_error);
    q.alpha = 0.5;
    q.p0 = {5000.0, 0.0};
    CHECK_THROWS_AS(rho_int(q), domain_error);
}

TEST_CASE("chart certificates judge the sampled conditions") {
    SECTION("identity metric passes the restricted bound") {
        auto s = constant_metric_sample(SymMatrix2::identity(), 1.0);
        auto cert = check_chart_certificate(s, 0.5, 0.01);
        CHECK(cert.g_at_x0_identity);
        CHECK(cert.pass);
        CHECK(cert.max_norm() == 0.0);
    }
    SECTION("slightly scaled metric fails the identity condition") {
        auto s = constant_metric_sample({1.001, 0.0, 1.001}, 1.0);
        auto cert = check_chart_certificate(s, 0.5, 1.0);
        CHECK_FALSE(cert.g_at_x0_identity);
        CHECK_FALSE(cert.pass);
    }
    SECTION("restricted-bound pass implies unit-bound pass on the same sample") {
        // the native chart deviates at first order away from the base point,
        // so the 0.01-restricted bound only admits genuinely small discs
        auto chart = builtin_surface("sphere", {1.0});
        auto ball = geodesic_ball(chart, {0.1, -0.2}, 0.005, 16, 8);
        auto s = native_chart_sample(ball);
        auto tight = check_chart_certificate(s, 0.5, 0.01);
        auto loose = check_chart_certificate(s, 0.5, 1.0);
        REQUIRE(tight.pass);  // tiny ball of a smooth surface
        CHECK(loose.pass);
        CHECK(tight.measured_norms[0] == loose.measured_norms[0]);
    }
    SECTION("empty sample is rejected") {
        ChartSample s;
        CHECK_THROWS_AS(check_chart_certificate(s, 0.5, 1.0), parameter_error);
    }
}

TEST_CASE("bump amplitude splits the restricted and unit bounds") {
    // calibrate the bump so the measured norm sits near 0.02: beyond the
    // 0.01-restricted bound yet far inside the unit bound
    const double w = 2.0;
    const double probe_a = 0.004;
    auto probe_chart = builtin_surface("perturbed-flat", {probe_a, w});
    auto probe_ball = geodesic_ball(probe_chart, {0.0, 0.0}, 1.0, 24, 12);
    auto probe_cert = check_chart_certificate(native_chart_sample(probe_ball), 0.5, 1.0);
    REQUIRE(probe_cert.max_norm() > 0.0);

    const double a_star = probe_a * 0.02 / probe_cert.max_norm();
    auto chart = builtin_surface("perturbed-flat", {a_star, w});
    auto ball = geodesic_ball(chart, {0.0, 0.0}, 1.0, 24, 12);
    auto s = native_chart_sample(ball);

    auto strict = check_chart_certificate(s, 0.5, 0.01);
    auto loose = check_chart_certificate(s, 0.5, 1.0);
    CHECK(strict.max_norm() == Catch::Approx(0.02).epsilon(0.3));  // norm scales near-linearly
    CHECK_FALSE(strict.pass);
    CHECK(loose.pass);
}

TEST_CASE("certified extrinsic radius on the corpus") {
    SECTION("flat plane certifies at the cap") {
        auto res = certify_rho_ext(make_query(builtin_surface("flat"), {0.0, 0.0}, 0.5));
        CHECK(res.value.capped);
        CHECK(res.value.value == 50.0);
    }
    SECTION("unit sphere certifies a usable radius") {
        auto res = certify_rho_ext(make_query(builtin_surface("sphere", {1.0}), {0.0, 0.0}, 0.5));
        CHECK_FALSE(res.value.capped);
        CHECK(res.value.value > 0.1);
        REQUIRE(res.candidates.size() == 2);
        for (const auto& c : res.candidates) {
            if (!c.supported || c.value.capped || !(c.value.value > 0.0)) continue;
            REQUIRE(c.certificate.has_value());
            CHECK(c.certificate->pass);  // emitted only after dense re-verification
            CHECK(c.certificate->n_points > 0);
        }
    }
    SECTION("sphere radius doubles with the sphere") {
        auto r1 = certify_rho_ext(make_query(builtin_surface("sphere", {1.0}), {0.0, 0.0}, 0.5));
        auto r2 = certify_rho_ext(make_query(builtin_surface("sphere", {2.0}), {0.0, 0.0}, 0.5));
        CHECK(r2.value.value == Catch::Approx(2.0 * r1.value.value).epsilon(0.02));
    }
}

TEST_CASE("emitted certificates re-verify independently") {
    auto q = make_query(builtin_surface("sphere", {1.0}), {0.0, 0.0}, 0.5);
    auto res = certify_rho_ext(q);
    REQUIRE_FALSE(res.value.capped);

    for (const auto& c : res.candidates) {
        if (!c.supported || !(c.value.value > 0.0)) continue;
        const bool iso = c.construction == "isothermal";
        auto ball = geodesic_ball(q.chart, q.p0, c.value.value, 2 * q.n_rays, 2 * q.n_radial);
        auto sample = iso ? isothermal_chart_sample(ball, isothermal_chart(ball))
                          : native_chart_sample(ball);
        auto cert = check_chart_certificate(sample, q.alpha, 1.0 + 1e-6);
        CHECK(cert.pass);
    }
}

TEST_CASE("asymmetric surfaces fall back to the native chart") {
    auto q = make_query(builtin_surface("perturbed-flat", {0.05, 2.0}), {0.0, 0.0}, 0.5);
    q.cap = 8.0;  // keep the search small
    auto res = certify_rho_ext(q);
    REQUIRE(res.candidates.size() == 2);
    CHECK(res.candidates[0].supported);
    CHECK_FALSE(res.candidates[1].supported);
    CHECK(res.candidates[1].note == "no isothermal construction for this surface");
    CHECK(res.winner == "native");
    CHECK(res.value.value > 0.0);
}

TEST_CASE("isothermal candidate is skipped at the Lipschitz endpoint") {
    auto q = make_query(builtin_surface("sphere", {1.0}), {0.0, 0.0}, 1.0);
    auto res = certify_rho_ext(q);
    REQUIRE(res.candidates.size() == 2);
    CHECK_FALSE(res.candidates[1].supported);
    CHECK(res.candidates[1].note == "needs alpha < 1");
    CHECK(res.value.value > 0.0);  // the native chart still certifies
}

TEST_CASE("global quantity inverts the worst radius") {
    SECTION("flat direction gives zero") {
        auto chart = builtin_surface("flat");
        RegularityQuery base;
        base.n_rays = 32;
        base.n_radial = 24;
        CHECK(global_regularity(chart, 0.5, {{0.0, 0.0}, {3.0, 1.0}}, base) == 0.0);
    }
    SECTION("unit sphere gives one everywhere") {
        auto chart = builtin_surface("sphere", {1.0});
        RegularityQuery base;
        base.n_rays = 32;
        base.n_radial = 24;
        const double v = global_regularity(chart, 0.5, {{0.0, 0.0}, {0.4, 0.2}}, base);
        CHECK(v == Catch::Approx(1.0).epsilon(0.05));
    }
    SECTION("unit-curvature hyperbolic gives one") {
        auto chart = builtin_surface("hyperbolic", {1.0});
        RegularityQuery base;
        base.n_rays = 32;
        base.n_radial = 24;
        const double v = global_regularity(chart, 0.5, {{0.0, 0.0}}, base);
        CHECK(v == Catch::Approx(1.0).epsilon(0.05));
    }
    SECTION("empty probe list is rejected") {
        auto chart = builtin_surface("flat");
        CHECK_THROWS_AS(global_regularity(chart, 0.5, {}), parameter_error);
    }
}

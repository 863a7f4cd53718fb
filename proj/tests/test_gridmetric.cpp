#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "regulus/geodesic.hpp"
#include "regulus/gridmetric.hpp"
#include "regulus/tensor.hpp"

using namespace regulus;

namespace {

std::string temp_path(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path();
    return (dir / ("regulus-" + tag + "-" + std::to_string(counter++) + ".grid")).string();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& tag) : path(temp_path(tag)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

TEST_CASE("grid round-trip reproduces node values bit for bit") {
    const MetricChart sphere = builtin_surface("sphere", {1.0});
    const GridMetric grid = sample_grid_metric(sphere, {-0.5, -0.5}, {0.5, 0.5}, 21, 21);

    TempFile f("roundtrip");
    write_grid_metric_file(f.path, grid);
    const GridMetric back = read_grid_metric_file(f.path);

    REQUIRE(back.nx == 21);
    REQUIRE(back.ny == 21);
    for (std::size_t i = 0; i < grid.g.size(); ++i) {
        REQUIRE(back.g[i].a11 == grid.g[i].a11);
        REQUIRE(back.g[i].a12 == grid.g[i].a12);
        REQUIRE(back.g[i].a22 == grid.g[i].a22);
    }

    // the chart built on top evaluates node coordinates to the same bits
    const MetricChart c = grid_metric_chart(back);
    for (int iy = 0; iy < 21; iy += 5)
        for (int ix = 0; ix < 21; ix += 5) {
            const Point2 node{grid.x0 + ix * grid.dx, grid.y0 + iy * grid.dy};
            const SymMatrix2 m = c.metric(node);
            REQUIRE(m.a11 == grid.at(ix, iy).a11);
            REQUIRE(m.a12 == grid.at(ix, iy).a12);
            REQUIRE(m.a22 == grid.at(ix, iy).a22);
        }
}

TEST_CASE("written grid file has the documented shape") {
    const MetricChart flat = builtin_surface("flat");
    const GridMetric grid = sample_grid_metric(flat, {0.0, 0.0}, {1.0, 1.0}, 5, 4);

    std::ostringstream out;
    write_grid_metric(out, grid);
    const std::string text = out.str();

    REQUIRE(text.rfind("# gridmetric v1 5 4 0 0 ", 0) == 0);
    std::size_t lines = 0;
    for (char ch : text)
        if (ch == '\n') ++lines;
    REQUIRE(lines == 1 + 5 * 4);
}

TEST_CASE("interpolated values track the sampled surface between nodes") {
    const MetricChart sphere = builtin_surface("sphere", {1.0});
    const GridMetric grid = sample_grid_metric(sphere, {-0.5, -0.5}, {0.5, 0.5}, 101, 101);
    const MetricChart c = grid_metric_chart(grid);

    SplitMix64 rng(31);
    for (int i = 0; i < 50; ++i) {
        const Point2 p{-0.4 + 0.8 * rng.uniform(), -0.4 + 0.8 * rng.uniform()};
        const SymMatrix2 approx = c.metric(p);
        const SymMatrix2 exact = sphere.metric(p);
        REQUIRE(std::abs(approx.a11 - exact.a11) < 1e-7);
        REQUIRE(std::abs(approx.a12 - exact.a12) < 1e-7);
        REQUIRE(std::abs(approx.a22 - exact.a22) < 1e-7);
    }
}

TEST_CASE("identity grid behaves as a flat chart") {
    const MetricChart flat = builtin_surface("flat");
    const GridMetric grid = sample_grid_metric(flat, {-1.0, -1.0}, {1.0, 1.0}, 11, 11);

    TempFile f("identity");
    write_grid_metric_file(f.path, grid);
    const MetricChart c = load_grid_metric(f.path);

    REQUIRE(c.deriv_mode == DerivMode::finite_difference);
    REQUIRE(c.deriv_step > 0.0);
    REQUIRE(std::abs(gauss_curvature(c, {0.3, -0.2})) < 1e-12);
    REQUIRE(std::abs(gauss_curvature(c, {0.0, 0.0})) < 1e-12);
}

TEST_CASE("grid sampled from the unit sphere reproduces its curvature") {
    const MetricChart sphere = builtin_surface("sphere", {1.0});
    const GridMetric grid = sample_grid_metric(sphere, {-0.5, -0.5}, {0.5, 0.5}, 101, 101);

    TempFile f("sphere");
    write_grid_metric_file(f.path, grid);
    const MetricChart c = load_grid_metric(f.path);

    for (const Point2 p : {Point2{0.0, 0.0}, Point2{0.2, 0.1}, Point2{-0.3, 0.25}}) {
        REQUIRE(std::abs(gauss_curvature(c, p) - 1.0) < 1e-3);
    }
}

TEST_CASE("malformed grid files are rejected") {
    SECTION("wrong magic") {
        TempFile f("magic");
        write_text(f.path, "# notagrid v1 4 4 0 0 1 1\n");
        REQUIRE_THROWS_AS(read_grid_metric_file(f.path), format_error);
    }
    SECTION("grid too small") {
        TempFile f("small");
        write_text(f.path, "# gridmetric v1 3 4 0 0 1 1\n");
        REQUIRE_THROWS_AS(read_grid_metric_file(f.path), format_error);
    }
    SECTION("nonpositive spacing") {
        TempFile f("spacing");
        write_text(f.path, "# gridmetric v1 4 4 0 0 -1 1\n");
        REQUIRE_THROWS_AS(read_grid_metric_file(f.path), format_error);
    }
    SECTION("short data") {
        TempFile f("short");
        std::string body = "# gridmetric v1 4 4 0 0 1 1\n";
        for (int i = 0; i < 5; ++i) body += "1 0 1\n";
        write_text(f.path, body);
        REQUIRE_THROWS_AS(read_grid_metric_file(f.path), format_error);
    }
    SECTION("unparseable entry") {
        TempFile f("junk");
        std::string body = "# gridmetric v1 4 4 0 0 1 1\n";
        for (int i = 0; i < 7; ++i) body += "1 0 1\n";
        body += "1 zebra 1\n";
        for (int i = 0; i < 8; ++i) body += "1 0 1\n";
        write_text(f.path, body);
        REQUIRE_THROWS_AS(read_grid_metric_file(f.path), format_error);
    }
    SECTION("trailing data") {
        TempFile f("extra");
        std::string body = "# gridmetric v1 4 4 0 0 1 1\n";
        for (int i = 0; i < 17; ++i) body += "1 0 1\n";
        write_text(f.path, body);
        REQUIRE_THROWS_AS(read_grid_metric_file(f.path), format_error);
    }
    SECTION("missing file") {
        REQUIRE_THROWS_AS(read_grid_metric_file("/nonexistent/regulus.grid"), format_error);
    }
}

TEST_CASE("degenerate grid nodes are rejected with their location") {
    TempFile f("degenerate");
    std::string body = "# gridmetric v1 4 4 0 0 1 1\n";
    for (int i = 0; i < 6; ++i) body += "1 0 1\n";
    body += "1 1 1\n";  // zero determinant at node 6 = (2, 1)
    for (int i = 0; i < 9; ++i) body += "1 0 1\n";
    write_text(f.path, body);
    try {
        read_grid_metric_file(f.path);
        FAIL("expected degeneracy_error");
    } catch (const degeneracy_error& e) {
        REQUIRE(std::string(e.what()).find("(2, 1)") != std::string::npos);
    }
}

TEST_CASE("curvature_field samples a ball and keeps its tags") {
    const MetricChart sphere = builtin_surface("sphere", {1.0});
    const GeodesicBall ball = geodesic_ball(sphere, {0.1, -0.2}, 0.5, 16, 8);
    const CurvatureField field = curvature_field(sphere, ball);

    REQUIRE(field.points.size() == ball.points.size());
    REQUIRE(field.r.size() == ball.points.size());
    for (double k : field.values) REQUIRE(std::abs(k - 1.0) < 1e-9);
    for (std::size_t i = 0; i < field.r.size(); ++i) REQUIRE(field.r[i] <= 0.5 + 1e-12);

    const MetricChart flat = builtin_surface("flat");
    const CurvatureField zero = curvature_field(flat, geodesic_ball(flat, {0.0, 0.0}, 1.0, 8, 4));
    for (double k : zero.values) REQUIRE(k == 0.0);
}

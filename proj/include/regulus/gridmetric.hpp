#pragma once
// grid-sampled metrics: a small text format plus a chart whose g-values come
// from bicubic interpolation of the samples (derivatives by finite differences)

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <locale>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "regulus/chart.hpp"

namespace regulus {

// node samples of a metric on a uniform rectangular grid,
// row-major with the x index fastest
struct GridMetric {
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0;
    double dx = 0.0, dy = 0.0;

    std::vector<SymMatrix2> g;

    std::size_t index(int ix, int iy) const {
        return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(ix);
    }
    const SymMatrix2& at(int ix, int iy) const { return g[index(ix, iy)]; }
    SymMatrix2& at(int ix, int iy) { return g[index(ix, iy)]; }
};

namespace detail {

// slopes of the not-a-knot cubic spline through uniformly spaced values.
// exact for polynomials up to degree 3; n >= 3.
inline void spline_slopes(const double* v, int n, double h, int vstride, double* m, int mstride) {
    std::vector<double> diag(n), rhs(n), upper(n);
    auto val = [&](int i) { return v[static_cast<std::ptrdiff_t>(i) * vstride]; };

    // end rows come from third-derivative continuity at the first and last
    // interior nodes, folded into tridiagonal form
    diag[0] = 1.0;
    upper[0] = 2.0;
    rhs[0] = (-5.0 * val(0) + 4.0 * val(1) + val(2)) / (2.0 * h);
    for (int i = 1; i + 1 < n; ++i) {
        diag[i] = 4.0;
        upper[i] = 1.0;
        rhs[i] = 3.0 * (val(i + 1) - val(i - 1)) / h;
    }
    diag[n - 1] = 1.0;
    rhs[n - 1] = (5.0 * val(n - 1) - 4.0 * val(n - 2) - val(n - 3)) / (2.0 * h);

    // Thomas elimination; lower entries are 1 except the final row's 2
    for (int i = 1; i < n; ++i) {
        const double lower = (i == n - 1) ? 2.0 : 1.0;
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> out(n);
    out[n - 1] = rhs[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) out[i] = (rhs[i] - upper[i] * out[i + 1]) / diag[i];
    for (int i = 0; i < n; ++i) m[static_cast<std::ptrdiff_t>(i) * mstride] = out[i];
}

// cubic Hermite basis
inline double herm0(double s) { return 1.0 + s * s * (2.0 * s - 3.0); }   // value, left
inline double herm1(double s) { return s * s * (3.0 - 2.0 * s); }         // value, right
inline double hermd0(double s) { return s * (s - 1.0) * (s - 1.0); }      // slope, left
inline double hermd1(double s) { return s * s * (s - 1.0); }              // slope, right

struct GridCell {
    int c = 0;      // cell index
    double s = 0.0; // local coordinate in [0,1]
};

// locate u (in node units) inside [0, n-1]; coordinates within 1e-9 of a node
// snap onto it so node evaluations reproduce the stored samples exactly
inline GridCell grid_locate(double u, int n) {
    const long nearest = std::lround(u);
    if (nearest >= 0 && nearest <= n - 1 && std::abs(u - static_cast<double>(nearest)) < 1e-9) {
        if (nearest == n - 1) return {n - 2, 1.0};
        return {static_cast<int>(nearest), 0.0};
    }
    int c = static_cast<int>(std::floor(u));
    if (c < 0) c = 0;
    if (c > n - 2) c = n - 2;
    return {c, u - static_cast<double>(c)};
}

// one scalar component with spline-derived node derivatives; evaluation is the
// bicubic Hermite patch of the surrounding cell
struct BicubicTable {
    int nx = 0, ny = 0;
    double x0 = 0.0, y0 = 0.0, dx = 0.0, dy = 0.0;
    std::vector<double> v, fx, fy, fxy;

    void build(const GridMetric& grid, double SymMatrix2::*comp) {
        nx = grid.nx;
        ny = grid.ny;
        x0 = grid.x0;
        y0 = grid.y0;
        dx = grid.dx;
        dy = grid.dy;
        const std::size_t n = grid.g.size();
        v.resize(n);
        fx.resize(n);
        fy.resize(n);
        fxy.resize(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = grid.g[i].*comp;
        for (int iy = 0; iy < ny; ++iy)
            spline_slopes(&v[grid.index(0, iy)], nx, dx, 1, &fx[grid.index(0, iy)], 1);
        for (int ix = 0; ix < nx; ++ix)
            spline_slopes(&v[grid.index(ix, 0)], ny, dy, nx, &fy[grid.index(ix, 0)], nx);
        // cross derivatives: x-spline of the y-slopes
        for (int iy = 0; iy < ny; ++iy)
            spline_slopes(&fy[grid.index(0, iy)], nx, dx, 1, &fxy[grid.index(0, iy)], 1);
    }

    double eval(double X, double Y) const {
        const GridCell cx = grid_locate((X - x0) / dx, nx);
        const GridCell cy = grid_locate((Y - y0) / dy, ny);
        const double h0s = herm0(cx.s), h1s = herm1(cx.s), g0s = hermd0(cx.s), g1s = hermd1(cx.s);
        const double h0t = herm0(cy.s), h1t = herm1(cy.s), g0t = hermd0(cy.s), g1t = hermd1(cy.s);
        const std::size_t base = static_cast<std::size_t>(cy.c) * nx + cx.c;
        const std::size_t i00 = base, i10 = base + 1, i01 = base + nx, i11 = base + nx + 1;
        double r = 0.0;
        r += v[i00] * h0s * h0t + v[i10] * h1s * h0t + v[i01] * h0s * h1t + v[i11] * h1s * h1t;
        r += dx * (fx[i00] * g0s * h0t + fx[i10] * g1s * h0t + fx[i01] * g0s * h1t + fx[i11] * g1s * h1t);
        r += dy * (fy[i00] * h0s * g0t + fy[i10] * h1s * g0t + fy[i01] * h0s * g1t + fy[i11] * h1s * g1t);
        r += dx * dy *
             (fxy[i00] * g0s * g0t + fxy[i10] * g1s * g0t + fxy[i01] * g0s * g1t + fxy[i11] * g1s * g1t);
        return r;
    }
};

struct GridTables {
    BicubicTable t11, t12, t22;
};

[[noreturn]] inline void grid_format_fail(const std::string& path, const std::string& what) {
    throw format_error("gridmetric " + path + ": " + what);
}

}  // namespace detail

// parse the text format:
//   # gridmetric v1 <nx> <ny> <x0> <y0> <dx> <dy>
//   g11 g12 g22          (nx*ny lines, row-major, x index fastest)
inline GridMetric read_grid_metric(std::istream& in, const std::string& path = "<stream>") {
    in.imbue(std::locale::classic());
    std::string header;
    if (!std::getline(in, header)) detail::grid_format_fail(path, "missing header line");
    std::istringstream hs(header);
    hs.imbue(std::locale::classic());
    std::string hash, name, version;
    GridMetric grid;
    hs >> hash >> name >> version >> grid.nx >> grid.ny >> grid.x0 >> grid.y0 >> grid.dx >> grid.dy;
    if (!hs || hash != "#" || name != "gridmetric" || version != "v1")
        detail::grid_format_fail(path, "malformed header: expected '# gridmetric v1 nx ny x0 y0 dx dy'");
    if (grid.nx < 4 || grid.ny < 4)
        detail::grid_format_fail(path, "grid needs at least 4 nodes per axis");
    if (!(grid.dx > 0.0) || !(grid.dy > 0.0) || !std::isfinite(grid.x0) || !std::isfinite(grid.y0) ||
        !std::isfinite(grid.dx) || !std::isfinite(grid.dy))
        detail::grid_format_fail(path, "header spacings must be finite and positive");

    const std::size_t count = static_cast<std::size_t>(grid.nx) * static_cast<std::size_t>(grid.ny);
    grid.g.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        SymMatrix2 m;
        if (!(in >> m.a11 >> m.a12 >> m.a22))
            detail::grid_format_fail(path, "data ends after " + std::to_string(i) + " of " +
                                               std::to_string(count) + " nodes");
        if (!std::isfinite(m.a11) || !std::isfinite(m.a12) || !std::isfinite(m.a22))
            detail::grid_format_fail(path, "non-finite entry at node " + std::to_string(i));
        if (!(m.det() > 0.0) || !(m.a11 > 0.0)) {
            const int ix = static_cast<int>(i) % grid.nx;
            const int iy = static_cast<int>(i) / grid.nx;
            throw degeneracy_error("gridmetric " + path + ": metric not positive definite at node (" +
                                   std::to_string(ix) + ", " + std::to_string(iy) + ")");
        }
        grid.g[i] = m;
    }
    std::string extra;
    if (in >> extra) detail::grid_format_fail(path, "trailing data after " + std::to_string(count) + " nodes");
    return grid;
}

inline GridMetric read_grid_metric_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::grid_format_fail(path, "cannot open file");
    return read_grid_metric(in, path);
}

inline void write_grid_metric(std::ostream& out, const GridMetric& grid) {
    out.imbue(std::locale::classic());
    out << std::setprecision(17);
    out << "# gridmetric v1 " << grid.nx << ' ' << grid.ny << ' ' << grid.x0 << ' ' << grid.y0 << ' '
        << grid.dx << ' ' << grid.dy << '\n';
    for (const SymMatrix2& m : grid.g) out << m.a11 << ' ' << m.a12 << ' ' << m.a22 << '\n';
}

inline void write_grid_metric_file(const std::string& path, const GridMetric& grid) {
    std::ofstream out(path);
    if (!out) detail::grid_format_fail(path, "cannot open file for writing");
    write_grid_metric(out, grid);
    out.flush();
    if (!out) detail::grid_format_fail(path, "write failed");
}

// sample a chart's metric on a uniform grid over [lo, hi]
inline GridMetric sample_grid_metric(const MetricChart& chart, Point2 lo, Point2 hi, int nx, int ny) {
    if (nx < 4 || ny < 4) throw parameter_error("sample_grid_metric needs at least 4 nodes per axis");
    if (!(hi.x1 > lo.x1) || !(hi.x2 > lo.x2)) throw parameter_error("sample_grid_metric needs hi > lo");
    GridMetric grid;
    grid.nx = nx;
    grid.ny = ny;
    grid.x0 = lo.x1;
    grid.y0 = lo.x2;
    grid.dx = (hi.x1 - lo.x1) / (nx - 1);
    grid.dy = (hi.x2 - lo.x2) / (ny - 1);
    grid.g.resize(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            grid.at(ix, iy) = chart.metric({grid.x0 + ix * grid.dx, grid.y0 + iy * grid.dy});
    return grid;
}

// chart over the grid's rectangle; g interpolated bicubically, derivatives by
// central differences at a step wide enough to straddle interpolation cells
inline MetricChart grid_metric_chart(const GridMetric& grid, const std::string& label = "grid-metric") {
    const double xe = grid.x0 + (grid.nx - 1) * grid.dx;
    const double ye = grid.y0 + (grid.ny - 1) * grid.dy;

    auto tables = std::make_shared<detail::GridTables>();
    tables->t11.build(grid, &SymMatrix2::a11);
    tables->t12.build(grid, &SymMatrix2::a12);
    tables->t22.build(grid, &SymMatrix2::a22);

    MetricChart c;
    c.label = label + " " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny);
    c.domain = DomainRegion::rectangle({grid.x0, grid.y0}, {xe, ye});
    c.jet_fn = [tables](Point2 p) {
        MetricJet j;
        j.g.a11 = tables->t11.eval(p.x1, p.x2);
        j.g.a12 = tables->t12.eval(p.x1, p.x2);
        j.g.a22 = tables->t22.eval(p.x1, p.x2);
        return j;
    };
    // injectivity radius is not derivable from samples; callers doing radius
    // searches on grid charts must bound delta by domain reach themselves
    const double h = std::max(default_fd_step(c.domain), 0.45 * std::min(grid.dx, grid.dy));
    return with_finite_differences(std::move(c), h);
}

inline MetricChart load_grid_metric(const std::string& path) {
    return grid_metric_chart(read_grid_metric_file(path), "grid-metric(" + path + ")");
}

}  // namespace regulus

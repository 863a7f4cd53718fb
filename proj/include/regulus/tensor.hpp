#pragma once

#include <array>
#include <vector>

#include "chart.hpp"
#include "types.hpp"

namespace regulus {

// Christoffel symbols of the second kind; sym[k](i,j) = Gamma^k_ij
struct Christoffel {
    std::array<SymMatrix2, 2> sym{};

    double operator()(int k, int i, int j) const { return sym[k](i, j); }
};

namespace detail {

// lower-index bracket [ij,l] = (d_j g_il + d_i g_jl - d_l g_ij) / 2
inline double bracket(const MetricJet& jet, int i, int j, int l) {
    return 0.5 * (jet.dg[j](i, l) + jet.dg[i](j, l) - jet.dg[l](i, j));
}

// d_m of the bracket, from second partials
inline double bracket_d(const MetricJet& jet, int m, int i, int j, int l) {
    return 0.5 * (jet.second(m, j)(i, l) + jet.second(m, i)(j, l) - jet.second(m, l)(i, j));
}

}  // namespace detail

inline Christoffel christoffel(const MetricJet& jet) {
    const SymMatrix2 gi = inverse_metric(jet.g);
    Christoffel G;
    for (int k = 0; k < 2; ++k) {
        double v[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = i; j < 2; ++j) {
                double s = 0.0;
                for (int l = 0; l < 2; ++l) s += gi(k, l) * detail::bracket(jet, i, j, l);
                v[i][j] = s;
            }
        G.sym[k] = {v[0][0], v[0][1], v[1][1]};
    }
    return G;
}

// partials dG[m](k,i,j) = d_m Gamma^k_ij, using
// d_m g^{kl} = -g^{ka} g^{lb} d_m g_ab
inline std::array<Christoffel, 2> christoffel_partials(const MetricJet& jet) {
    const SymMatrix2 gi = inverse_metric(jet.g);
    std::array<Christoffel, 2> dG;
    for (int m = 0; m < 2; ++m) {
        // d_m of the inverse metric
        double dgi[2][2];
        for (int k = 0; k < 2; ++k)
            for (int l = k; l < 2; ++l) {
                double s = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) s += gi(k, a) * gi(l, b) * jet.dg[m](a, b);
                dgi[k][l] = -s;
            }
        dgi[1][0] = dgi[0][1];
        for (int k = 0; k < 2; ++k) {
            double v[2][2];
            for (int i = 0; i < 2; ++i)
                for (int j = i; j < 2; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < 2; ++l)
                        s += dgi[k][l] * detail::bracket(jet, i, j, l) +
                             gi(k, l) * detail::bracket_d(jet, m, i, j, l);
                    v[i][j] = s;
                }
            dG[m].sym[k] = {v[0][0], v[0][1], v[1][1]};
        }
    }
    return dG;
}

// Gauss curvature from the full curvature tensor contracted once:
// K = -(d_1 G^2_12 - d_2 G^2_11 + G^1_12 G^2_11 - G^1_11 G^2_12
//       + G^2_12 G^2_12 - G^2_11 G^2_22) / g_11     (indices here 1-based)
inline double gauss_curvature(const MetricJet& jet) {
    const Christoffel G = christoffel(jet);
    const auto dG = christoffel_partials(jet);
    const double r = dG[0](1, 0, 1) - dG[1](1, 0, 0) + G(0, 0, 1) * G(1, 0, 0) -
                     G(0, 0, 0) * G(1, 0, 1) + G(1, 0, 1) * G(1, 0, 1) -
                     G(1, 0, 0) * G(1, 1, 1);
    return -r / jet.g.a11;
}

inline double gauss_curvature(const MetricChart& chart, Point2 p) {
    return gauss_curvature(chart.jet(p));
}

template <class PointRange>
std::vector<double> curvature_values(const MetricChart& chart, const PointRange& pts) {
    std::vector<double> out;
    out.reserve(pts.size());
    for (const Point2& p : pts) out.push_back(gauss_curvature(chart.jet(p)));
    return out;
}

// curvature sampled over a geodesic ball, keeping the sample coordinates and
// their distance tags so norm estimators can weight pairs geodesically
struct CurvatureField {
    std::vector<Point2> points;
    std::vector<double> r;       // riemannian distance of each sample from the ball center
    std::vector<double> values;  // K at each sample
};

template <class Ball>
CurvatureField curvature_field(const MetricChart& chart, const Ball& ball) {
    CurvatureField f;
    f.points = ball.points;
    f.r = ball.r;
    f.values = curvature_values(chart, ball.points);
    return f;
}

}  // namespace regulus

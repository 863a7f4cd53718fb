#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "types.hpp"

namespace regulus {

struct OdeOptions {
    double atol = 1e-10;
    double rtol = 1e-10;
    std::size_t max_steps = 1000000;
    double initial_step = 0.0;  // 0 picks a fraction of the interval
};

template <std::size_t N>
using OdeState = std::array<double, N>;

enum class StepFlow { proceed, stop };

template <std::size_t N>
struct OdeOutcome {
    OdeState<N> y{};
    double t = 0.0;
    bool reached = false;  // hit the requested end time
    bool blocked = false;  // stopped against the acceptable-set boundary
    bool stopped = false;  // observer asked to stop
    std::size_t n_steps = 0;
};

namespace detail {

// one Dormand-Prince 5(4) trial step; returns false if the right-hand side
// threw a recoverable evaluation error inside the step
template <std::size_t N, class RHS>
bool dp45_step(RHS&& rhs, double t, const OdeState<N>& y, double h, OdeState<N>& out,
               double& err_ratio, double atol, double rtol) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    OdeState<N> k1, k2, k3, k4, k5, k6, k7, tmp;
    try {
        k1 = rhs(t, y);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (k1[i] / 5);
        k2 = rhs(t + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (3.0 / 40 * k1[i] + 9.0 / 40 * k2[i]);
        k3 = rhs(t + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (44.0 / 45 * k1[i] - 56.0 / 15 * k2[i] + 32.0 / 9 * k3[i]);
        k4 = rhs(t + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (19372.0 / 6561 * k1[i] - 25360.0 / 2187 * k2[i] +
                                 64448.0 / 6561 * k3[i] - 212.0 / 729 * k4[i]);
        k5 = rhs(t + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (9017.0 / 3168 * k1[i] - 355.0 / 33 * k2[i] +
                                 46732.0 / 5247 * k3[i] + 49.0 / 176 * k4[i] - 5103.0 / 18656 * k5[i]);
        k6 = rhs(t + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            out[i] = y[i] + h * (35.0 / 384 * k1[i] + 500.0 / 1113 * k3[i] + 125.0 / 192 * k4[i] -
                                 2187.0 / 6784 * k5[i] + 11.0 / 84 * k6[i]);
        k7 = rhs(t + h, out);
    } catch (const error&) {
        return false;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double e = h * (71.0 / 57600 * k1[i] - 71.0 / 16695 * k3[i] + 71.0 / 1920 * k4[i] -
                              17253.0 / 339200 * k5[i] + 22.0 / 525 * k6[i] - 1.0 / 40 * k7[i]);
        const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(out[i]));
        acc += sq(e / sc);
    }
    err_ratio = std::sqrt(acc / N);
    for (std::size_t i = 0; i < N; ++i)
        if (!std::isfinite(out[i])) return false;  // singular evaluation inside the step
    return std::isfinite(err_ratio);
}

}  // namespace detail

// adaptive integration of y' = rhs(t, y) from t0 to t1.
//  - acceptable(t, y): when supplied, the solution is kept inside this set;
//    steps ending outside are halved, and once the step floor is reached the
//    outcome is flagged `blocked` at the last interior state.
//  - observer(t_prev, y_prev, t_new, y_new): called on every accepted step;
//    returning StepFlow::stop ends the run with `stopped` set.
// recoverable evaluation errors thrown by rhs shrink the step like a boundary.
template <std::size_t N, class RHS, class Acceptable, class Observer>
OdeOutcome<N> integrate_ode(RHS&& rhs, OdeState<N> y0, double t0, double t1, const OdeOptions& opt,
                            Acceptable&& acceptable, Observer&& observer) {
    OdeOutcome<N> out;
    out.y = y0;
    out.t = t0;
    if (t1 == t0) {
        out.reached = true;
        return out;
    }
    const double dir = t1 > t0 ? 1.0 : -1.0;
    double h = opt.initial_step > 0.0 ? opt.initial_step : std::abs(t1 - t0) / 100.0;
    h = std::min(h, std::abs(t1 - t0));
    while ((out.t - t1) * dir < 0.0) {
        if (++out.n_steps > opt.max_steps)
            throw nonconvergence_error("ode integration exceeded the step limit");
        h = std::min(h, std::abs(t1 - out.t));
        const double h_floor = 1e-14 * std::max(1.0, std::abs(out.t));
        OdeState<N> y_new;
        double err = 0.0;
        const bool ok = detail::dp45_step(rhs, out.t, out.y, dir * h, y_new, err, opt.atol, opt.rtol);
        if (!ok || (ok && err > 1.0)) {
            const double shrink = ok ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0) : 0.5;
            h *= shrink;
            if (h < h_floor) {
                if (!ok) {
                    out.blocked = true;  // rhs unevaluable just ahead
                    return out;
                }
                throw nonconvergence_error("ode step size underflow");
            }
            continue;
        }
        if (!acceptable(out.t + dir * h, y_new)) {
            h *= 0.5;
            if (h < h_floor) {
                out.blocked = true;
                return out;
            }
            continue;
        }
        const double t_new = out.t + dir * h;
        const StepFlow flow = observer(out.t, out.y, t_new, y_new);
        out.y = y_new;
        out.t = t_new;
        if (flow == StepFlow::stop) {
            out.stopped = true;
            return out;
        }
        h *= std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    }
    out.reached = true;
    return out;
}

template <std::size_t N, class RHS>
OdeOutcome<N> integrate_ode(RHS&& rhs, OdeState<N> y0, double t0, double t1,
                            const OdeOptions& opt = {}) {
    return integrate_ode<N>(rhs, y0, t0, t1, opt,
                            [](double, const OdeState<N>&) { return true; },
                            [](double, const OdeState<N>&, double, const OdeState<N>&) {
                                return StepFlow::proceed;
                            });
}

// locate a sign change of component `comp` inside one accepted step by
// bisection with re-integration from the step's start state
template <std::size_t N, class RHS>
double refine_zero(RHS&& rhs, const OdeState<N>& y_a, double t_a, double t_b, std::size_t comp,
                   const OdeOptions& opt = {}) {
    const double f_a = y_a[comp];
    double lo = t_a, hi = t_b;
    for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        auto r = integrate_ode<N>(rhs, y_a, t_a, mid, opt);
        if (!r.reached) throw nonconvergence_error("zero refinement integration failed");
        if ((r.y[comp] > 0.0) == (f_a > 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace regulus

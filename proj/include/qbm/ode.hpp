#pragma once

// Adaptive Dormand-Prince 5(4) integration for small fixed-size Eigen states.

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Core>

#include "qbm/errors.hpp"

namespace qbm {

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-12;
    double initial_step = 0.0;  // 0 picks a step from the derivative scale
    double min_step = 1e-14;    // relative to the integration span
    long max_steps = 10'000'000;
};

/// Integrates dy/dt = f(t, y) and returns y at every time in `t_grid`.
/// t_grid must be ascending; the first entry is the initial time.
template <typename Vector, typename Rhs>
std::vector<Vector> integrate_dopri5(Rhs&& f, const Vector& y0, std::span<const double> t_grid,
                                     const OdeOptions& opts = {}) {
    require(!t_grid.empty(), "integrate_dopri5: empty time grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        require(t_grid[i] >= t_grid[i - 1], "integrate_dopri5: time grid must be ascending");

    using S = typename Vector::Scalar;

    // Butcher tableau
    const S c2 = S(1) / 5, c3 = S(3) / 10, c4 = S(4) / 5, c5 = S(8) / 9;
    const S a21 = S(1) / 5;
    const S a31 = S(3) / 40, a32 = S(9) / 40;
    const S a41 = S(44) / 45, a42 = -S(56) / 15, a43 = S(32) / 9;
    const S a51 = S(19372) / 6561, a52 = -S(25360) / 2187, a53 = S(64448) / 6561, a54 = -S(212) / 729;
    const S a61 = S(9017) / 3168, a62 = -S(355) / 33, a63 = S(46732) / 5247, a64 = S(49) / 176,
                a65 = -S(5103) / 18656;
    const S b1 = S(35) / 384, b3 = S(500) / 1113, b4 = S(125) / 192, b5 = -S(2187) / 6784, b6 = S(11) / 84;
    const S e1 = S(71) / 57600, e3 = -S(71) / 16695, e4 = S(71) / 1920, e5 = -S(17253) / 339200,
                e6 = S(22) / 525, e7 = -S(1) / 40;

    std::vector<Vector> out;
    out.reserve(t_grid.size());
    out.push_back(y0);

    const double span = t_grid.back() - t_grid.front();
    const double h_floor = opts.min_step * std::max(span, 1.0);
    double t = t_grid.front();
    Vector y = y0;
    Vector k1 = f(t, y);

    auto error_norm = [&](const Vector& err, const Vector& ya, const Vector& yb) {
        double norm = 0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double scale = opts.atol + opts.rtol * std::max(std::abs(double(ya[i])), std::abs(double(yb[i])));
            norm = std::max(norm, std::abs(double(err[i])) / scale);
        }
        return norm;
    };

    double h = opts.initial_step;
    if (h <= 0) {
        const double d0 = error_norm(y, y, y), d1 = error_norm(k1, y, y);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        if (span > 0) h = std::min(h, span);
    }

    long steps = 0;
    for (std::size_t gi = 1; gi < t_grid.size(); ++gi) {
        const double target = t_grid[gi];
        while (t < target) {
            if (++steps > opts.max_steps) {
                std::ostringstream msg;
                msg << "integrate_dopri5: step budget exhausted at t = " << t;
                throw NumericalError(msg.str(), t);
            }
            const bool last = t + h >= target;
            const double h_try = h;
            if (last) h = target - t;
            const S hs = S(h);
            const Vector k2 = f(t + double(c2) * h, Vector(y + hs * (a21 * k1)));
            const Vector k3 = f(t + double(c3) * h, Vector(y + hs * (a31 * k1 + a32 * k2)));
            const Vector k4 = f(t + double(c4) * h, Vector(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
            const Vector k5 = f(t + double(c5) * h, Vector(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
            const Vector k6 =
                f(t + h, Vector(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
            const Vector y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Vector k7 = f(t + h, y_new);
            const Vector err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double en = error_norm(err, y, y_new);

            if (en <= 1.0) {
                t = last ? target : t + h;
                y = y_new;
                k1 = k7;
                const double grow = en == 0 ? 5.0 : std::min(5.0, 0.9 * std::pow(en, -0.2));
                h = last ? std::max(h_try, h * grow) : h * grow;
            } else {
                h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
                if (h < h_floor) {
                    std::ostringstream msg;
                    msg << "integrate_dopri5: step size underflow at t = " << t;
                    throw NumericalError(msg.str(), t);
                }
            }
        }
        out.push_back(y);
    }
    return out;
}

}  // namespace qbm

#include "qbm/fit.hpp"

#include <cmath>
#include <sstream>

#include "qbm/errors.hpp"

namespace qbm {

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "fit_linear: x and y differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw DataError("fit_linear: need at least 3 points, got " + std::to_string(n));

    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("fit_linear: non-finite input");
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0) throw DataError("fit_linear: x values are all equal");

    LinearFit f;
    f.n = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        sse += r * r;
    }
    const double s2 = sse / double(n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / double(n) + mx * mx / sxx));
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

PowerLawFit fit_power_law(std::span<const double> tau, std::span<const double> value) {
    require(tau.size() == value.size(), "fit_power_law: tau and value differ in length");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!(tau[i] > 0) || !(value[i] > 0)) {
            std::ostringstream msg;
            msg << "fit_power_law: non-positive pair (" << tau[i] << ", " << value[i] << ") at index " << i;
            throw DataError(msg.str());
        }
        lx.push_back(std::log(tau[i]));
        ly.push_back(std::log(value[i]));
    }
    const LinearFit lin = fit_linear(lx, ly);
    PowerLawFit f;
    f.n = lin.n;
    f.exponent = lin.slope;
    f.exponent_se = lin.slope_se;
    f.prefactor = std::exp(lin.intercept);
    f.prefactor_se = f.prefactor * lin.intercept_se;
    f.r2 = lin.r2;
    return f;
}

DecayFit fit_kurtosis_decay(std::span<const double> tau, std::span<const double> kappa) {
    require(tau.size() == kappa.size(), "fit_kurtosis_decay: tau and kappa differ in length");
    DecayFit f;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (kappa[i] > 0 && std::isfinite(kappa[i])) {
            x.push_back(tau[i]);
            y.push_back(std::log(kappa[i]));
        } else {
            f.excluded_taus.push_back(tau[i]);
        }
    }
    if (!f.excluded_taus.empty())
        f.diagnostic = std::to_string(f.excluded_taus.size()) + " non-positive kurtosis point(s) excluded";
    if (x.size() < kMinDecayPoints) {
        std::ostringstream msg;
        msg << "fit_kurtosis_decay: need " << kMinDecayPoints << " positive points, got " << x.size();
        if (!f.diagnostic.empty()) msg << " (" << f.diagnostic << ")";
        throw DataError(msg.str());
    }
    const LinearFit lin = fit_linear(x, y);
    f.used = x.size();
    f.amplitude = std::exp(lin.intercept);
    f.rate = -lin.slope;
    f.rate_se = lin.slope_se;
    f.r2 = lin.r2;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (lin.intercept + lin.slope * x[i]);
        f.residual += r * r;
    }
    f.converged = std::isfinite(f.rate) && f.rate > 0;
    if (!f.converged) {
        if (!f.diagnostic.empty()) f.diagnostic += "; ";
        f.diagnostic += "fitted rate is not positive";
    }
    return f;
}

}  // namespace qbm

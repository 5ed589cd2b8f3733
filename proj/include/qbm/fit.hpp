#pragma once

#include <span>
#include <string>
#include <vector>

namespace qbm {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    double r2 = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope x. Needs >= 3 points and
/// distinct x values (DataError otherwise).
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double exponent_se = 0.0;
    double prefactor_se = 0.0;  // delta method from the log intercept
    double r2 = 0.0;
    std::size_t n = 0;
};

/// value = prefactor * tau^exponent by OLS in log-log space. All taus and
/// values must be positive.
PowerLawFit fit_power_law(std::span<const double> tau, std::span<const double> value);

struct DecayFit {
    double amplitude = 0.0;
    double rate = 0.0;  // 1 / time unit of tau
    double rate_se = 0.0;
    double residual = 0.0;  // sum of squared log residuals
    double r2 = 0.0;
    bool converged = false;
    std::size_t used = 0;
    std::vector<double> excluded_taus;  // points with kappa <= 0
    std::string diagnostic;
};

inline constexpr std::size_t kMinDecayPoints = 5;

/// kappa = amplitude * exp(-rate tau) by least squares on log kappa.
/// Non-positive kappa points are dropped and listed; fewer than five
/// remaining points is a DataError.
DecayFit fit_kurtosis_decay(std::span<const double> tau, std::span<const double> kappa);

}  // namespace qbm

#pragma once

#include <array>
#include <numbers>
#include <optional>
#include <string>

#include "qbm/fit.hpp"
#include "qbm/market.hpp"
#include "qbm/params.hpp"

namespace qbm {

enum class AcfWeights { uniform, counts };

AcfWeights parse_acf_weights(const std::string& name);

struct AcfFitOptions {
    std::optional<NonMarkovParams> guess;  // empty selects the automatic guess
    AcfWeights weights = AcfWeights::uniform;
    double base_minutes = 0.0;  // sampling step; 0 takes the smallest lag spacing
    int max_iterations = 200;
    double step_tol = 1e-10;      // relative parameter step
    double residual_tol = 1e-12;  // relative change of the residual
    int grid_candidates = 24;     // Omega starts tried when the periodogram is ambiguous
};

struct AcfFit {
    NonMarkovParams nm{0.0, 1.0, 0.0};
    double residual = 0.0;          // weighted sum of squared errors
    double initial_residual = 0.0;  // at the starting point of the reported run
    std::array<double, 3> std_error{};  // xi, eta, Omega
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;
    bool grid_fallback = false;
    std::size_t points = 0;
    std::string diagnostic;
};

/// Largest admissible Omega for lags sampled every `base` minutes. The model
/// oscillates at 2 Omega, so this is half the Nyquist angular frequency.
inline double acf_omega_limit(double base) { return std::numbers::pi / (2.0 * base); }

/// Damped least squares of acf_model against the positive lags of `acf`
/// (lag 0 carries the white-noise weight and is excluded). Bounds:
/// xi >= 0, 0 < eta <= 1, 0 <= Omega < acf_omega_limit(base). Needs at least
/// 10 positive lags with counts (DataError otherwise). A run that hits the
/// iteration cap or collapses to xi = 0 is returned with converged = false.
AcfFit fit_acf(const AcfEstimate& acf, const AcfFitOptions& opts = {});

}  // namespace qbm

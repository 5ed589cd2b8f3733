#pragma once

#include <array>
#include <numbers>
#include <string_view>

#include "qbm/moments.hpp"
#include "qbm/params.hpp"

namespace qbm::presets {

// Published Shanghai Composite ACF fits (minutes, log-price units).
struct AcfPeriod {
    std::string_view label;
    NonMarkovParams nm;
};

inline constexpr double kAcfOmega = 8.33e-3 * std::numbers::pi;

inline constexpr std::array<AcfPeriod, 3> kAcfPeriods{{
    {"1999-2004", {5.48e-4, 5.56e-3, kAcfOmega}},
    {"2004-2010", {4.47e-4, 4.55e-3, kAcfOmega}},
    {"2010-2013", {3.46e-4, 3.33e-3, kAcfOmega}},
}};

// Variance comparison set: M = 10, hbar = 0.01, gamma = 1e3, t = 10, sx2(0) = 1e-7.
inline constexpr ModelParams variance_params(double kT = 0.1) { return {10.0, 1e3, kT, 0.01}; }
inline constexpr double kVarianceTime = 10.0;
inline constexpr double kVarianceSx2 = 1e-7;

// Kurtosis relaxation set: M = 20, kT = hbar = gamma = 1.
inline constexpr ModelParams kKurtosisParams{20.0, 1.0, 1.0, 1.0};

/// <X^2> = <P^2> = hbar/2, no correlation, <X^4> = 50 hbar^2, other fourth moments Gaussian.
inline MomentState kurtosis_initial_state(double hbar = 1.0) {
    MomentState s = MomentState::gaussian(hbar / 2, hbar / 2, 0.0);
    s(4, 0) = 50.0 * hbar * hbar;
    return s;
}

}  // namespace qbm::presets

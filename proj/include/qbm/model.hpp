#pragma once

// Closed-form scalar functions of the quantum Brownian motion model.
//
// Every function is pure and templated on the scalar type; instantiate with
// double for production use or long double for tighter checks.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include "qbm/params.hpp"

namespace qbm {

namespace detail {

// Integrals of exp(a s) and s exp(a s) over [0, t] for Re(a) < 0. A power
// series takes over when |a t| is small, where the closed forms cancel.
template <typename Scalar>
std::complex<Scalar> exp_integral(std::complex<Scalar> a, Scalar t) {
    using C = std::complex<Scalar>;
    if (std::isinf(t)) return C(-1) / a;
    const C at = a * t;
    if (std::abs(at) < Scalar(0.5)) {
        // sum_n a^n t^(n+1) / (n+1)!
        C term(t);
        C sum(t);
        for (int n = 1; n < 60; ++n) {
            term *= at / Scalar(n + 1);
            sum += term;
            if (std::abs(term) <= std::numeric_limits<Scalar>::epsilon() * std::abs(sum)) break;
        }
        return sum;
    }
    return (std::exp(at) - C(1)) / a;
}

template <typename Scalar>
std::complex<Scalar> tau_exp_integral(std::complex<Scalar> a, Scalar t) {
    using C = std::complex<Scalar>;
    if (std::isinf(t)) return C(1) / (a * a);
    const C at = a * t;
    if (std::abs(at) < Scalar(0.5)) {
        // sum_n a^n t^(n+2) / (n! (n+2))
        C power(t * t);
        Scalar factorial = 1;
        C sum = power / Scalar(2);
        for (int n = 1; n < 60; ++n) {
            power *= at;
            factorial *= Scalar(n);
            const C term = power / (factorial * Scalar(n + 2));
            sum += term;
            if (std::abs(term) <= std::numeric_limits<Scalar>::epsilon() * std::abs(sum)) break;
        }
        return sum;
    }
    return (std::exp(at) * (at - C(1)) + C(1)) / (a * a);
}

// 4 gamma * [t + e^{-2 gamma t}/gamma - (e^{-4 gamma t} + 3)/(4 gamma)] as a
// function of u = 2 gamma t.
template <typename Scalar>
Scalar relaxation_bracket(Scalar u) {
    if (u < Scalar(0.1)) {
        // sum_{n>=3} [4 (-1)^n - (-2)^n] u^n / n!
        Scalar sum = 0;
        Scalar un_over_fact = u * u / Scalar(2);
        for (int n = 3; n < 40; ++n) {
            un_over_fact *= u / Scalar(n);
            const Scalar coeff = Scalar(4) * ((n % 2) ? Scalar(-1) : Scalar(1)) -
                                 ((n % 2) ? -std::pow(Scalar(2), n) : std::pow(Scalar(2), n));
            const Scalar term = coeff * un_over_fact;
            sum += term;
            if (std::abs(term) <= std::numeric_limits<Scalar>::epsilon() * std::abs(sum)) break;
        }
        return sum;
    }
    return Scalar(2) * u + Scalar(4) * std::expm1(-u) - std::expm1(Scalar(-2) * u);
}

}  // namespace detail

/// R(tau) = xi^2 e^{-eta tau} (cos 2 Omega tau + 1) / 2.
template <typename Scalar>
Scalar acf_model(const NonMarkovParamsT<Scalar>& nm, Scalar tau) {
    require(tau >= 0, "acf_model: tau must be >= 0");
    if (std::isinf(tau)) return Scalar(0);
    return Scalar(0.5) * nm.xi * nm.xi * std::exp(-nm.eta * tau) *
           (std::cos(Scalar(2) * nm.Omega * tau) + Scalar(1));
}

/// Bath noise kernel split into the weight of its Dirac term and its smooth part.
template <typename Scalar>
struct NoiseKernel {
    Scalar delta_weight;
    Scalar smooth;
};

template <typename Scalar>
NoiseKernel<Scalar> noise_kernel(const ModelParamsT<Scalar>& params,
                                 const NonMarkovParamsT<Scalar>& nm, Scalar tau) {
    require(tau >= 0, "noise_kernel: tau must be >= 0");
    const Scalar Mg = params.M * params.gamma;
    return {Scalar(8) * Mg * params.kT, Scalar(8) * Mg * Mg * acf_model(nm, tau)};
}

/// Time-dependent normal diffusion coefficient Delta(t) of the
/// time-convolutionless master equation. Accepts t = +infinity.
template <typename Scalar>
Scalar delta_coefficient(const ModelParamsT<Scalar>& params,
                         const NonMarkovParamsT<Scalar>& nm, Scalar t) {
    require(t >= 0, "delta_coefficient: t must be >= 0");
    using C = std::complex<Scalar>;
    const Scalar markov = params.markov_delta();
    if (nm.xi == Scalar(0)) return markov;
    const Scalar scale = Scalar(2) * std::pow(params.M * params.gamma * nm.xi / params.hbar, 2);
    const Scalar integral = detail::exp_integral(C(-nm.eta), t).real() +
                            detail::exp_integral(C(-nm.eta, Scalar(2) * nm.Omega), t).real();
    return markov + scale * integral;
}

/// Time-dependent cross-diffusion coefficient Lambda(t). Accepts t = +infinity.
template <typename Scalar>
Scalar lambda_coefficient(const ModelParamsT<Scalar>& params,
                          const NonMarkovParamsT<Scalar>& nm, Scalar t) {
    require(t >= 0, "lambda_coefficient: t must be >= 0");
    using C = std::complex<Scalar>;
    if (nm.xi == Scalar(0)) return Scalar(0);
    const Scalar scale = Scalar(2) * params.M * params.gamma * params.gamma * nm.xi * nm.xi /
                         (params.hbar * params.hbar);
    const Scalar integral = detail::tau_exp_integral(C(-nm.eta), t).real() +
                            detail::tau_exp_integral(C(-nm.eta, Scalar(2) * nm.Omega), t).real();
    return scale * integral;
}

/// Bath spectral density J(omega).
template <typename Scalar>
Scalar spectral_density(const ModelParamsT<Scalar>& params, const BathSpectrumT<Scalar>& spec,
                        Scalar omega) {
    require(omega >= 0, "spectral_density: omega must be >= 0");
    spec.validate();
    const Scalar pi = std::numbers::pi_v<Scalar>;
    const Scalar Mg = params.M * params.gamma;
    const Scalar ohmic = Scalar(2) * Mg * omega / pi;
    switch (spec.kind) {
        case SpectrumKind::ohmic:
            return ohmic;
        case SpectrumKind::ohmic_lorentz: {
            const Scalar c2 = spec.cutoff * spec.cutoff;
            return ohmic * c2 / (c2 + omega * omega);
        }
        case SpectrumKind::composite: {
            require(params.kT > 0, "spectral_density: composite spectrum requires kT > 0");
            const auto& nm = spec.nm;
            const Scalar e2 = nm.eta * nm.eta;
            const Scalar w = Mg * Mg * nm.xi * nm.xi * nm.eta / (pi * params.kT);
            const Scalar dm = omega - Scalar(2) * nm.Omega;
            const Scalar dp = omega + Scalar(2) * nm.Omega;
            const Scalar lorentz =
                Scalar(2) / (e2 + omega * omega) + Scalar(1) / (e2 + dm * dm) + Scalar(1) / (e2 + dp * dp);
            return ohmic + w * lorentz * omega;
        }
    }
    return ohmic;
}

/// Free-particle coordinate variance sigma_x^2(t) under the Markovian
/// Caldeira-Leggett dynamics, from arbitrary initial second moments.
template <typename Scalar>
Scalar variance_closed_form(const ModelParamsT<Scalar>& params, const SecondMomentInitT<Scalar>& init,
                            Scalar t) {
    require(t >= 0, "variance_closed_form: t must be >= 0");
    const Scalar Mg = params.M * params.gamma;
    const Scalar u = Scalar(2) * params.gamma * t;
    const Scalar a = -std::expm1(-u) / (Scalar(2) * Mg);
    const Scalar thermal = params.kT / Mg * detail::relaxation_bracket(u) / (Scalar(4) * params.gamma);
    return init.sx2_0 + a * a * init.sp2_0 + a * init.spx_0 + thermal;
}

/// Small gamma*t expansion for a minimal-uncertainty initial state.
template <typename Scalar>
Scalar variance_short_time(const ModelParamsT<Scalar>& params, Scalar sx2_0, Scalar t) {
    require(t >= 0, "variance_short_time: t must be >= 0");
    require(sx2_0 > 0, "variance_short_time: sx2_0 must be > 0");
    const Scalar h = params.hbar;
    return sx2_0 + h * h * t * t / (params.M * params.M * sx2_0) +
           Scalar(4) * params.kT * params.gamma * t * t * t / (Scalar(3) * params.M);
}

/// Classical random-walk variance (kT / M gamma) t.
template <typename Scalar>
Scalar classical_variance(const ModelParamsT<Scalar>& params, Scalar t) {
    require(t >= 0, "classical_variance: t must be >= 0");
    return params.kT / (params.M * params.gamma) * t;
}

inline constexpr double kMarkovWarningRatio = 0.1;

/// gamma * max(1/cutoff, hbar/(2 pi kT)); values much less than one mean the
/// Markovian approximation holds.
template <typename Scalar>
Scalar markov_validity(const ModelParamsT<Scalar>& params, Scalar cutoff) {
    require(cutoff > 0, "markov_validity: cutoff must be > 0");
    require(params.kT > 0, "markov_validity: kT must be > 0");
    const Scalar thermal_time = params.hbar / (Scalar(2) * std::numbers::pi_v<Scalar> * params.kT);
    return std::max(Scalar(1) / cutoff, thermal_time) * params.gamma;
}

/// sigma_p^2(0) = hbar^2 / (4 sigma_x^2(0)).
template <typename Scalar>
Scalar minimal_uncertainty_momentum(const ModelParamsT<Scalar>& params, Scalar sx2_0) {
    require(sx2_0 > 0, "minimal_uncertainty_momentum: sx2_0 must be > 0");
    return params.hbar * params.hbar / (Scalar(4) * sx2_0);
}

}  // namespace qbm

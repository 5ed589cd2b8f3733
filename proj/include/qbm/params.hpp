#pragma once

#include <cmath>
#include <string>

#include "qbm/errors.hpp"

namespace qbm {

/// Physical parameters of the open system: index inertia M, dissipation
/// rate gamma, fluctuation strength kT and irrationality scale hbar. All
/// dimensionless.
template <typename Scalar>
struct ModelParamsT {
    Scalar M{1};
    Scalar gamma{1};
    Scalar kT{1};
    Scalar hbar{1};

    void validate() const {
        require(M > 0, "ModelParams: M must be > 0");
        require(gamma > 0, "ModelParams: gamma must be > 0");
        require(kT >= 0, "ModelParams: kT must be >= 0");
        require(hbar > 0, "ModelParams: hbar must be > 0");
    }

    /// Markovian normal-diffusion coefficient 2 M gamma kT / hbar^2.
    Scalar markov_delta() const { return Scalar(2) * M * gamma * kT / (hbar * hbar); }
};

/// Autocorrelation triple: intensity xi [ln S / time], decay eta [1/time],
/// market periodicity Omega [1/time].
template <typename Scalar>
struct NonMarkovParamsT {
    Scalar xi{0};
    Scalar eta{1};
    Scalar Omega{0};

    void validate() const {
        require(xi >= 0, "NonMarkovParams: xi must be >= 0");
        require(eta > 0, "NonMarkovParams: eta must be > 0");
        require(Omega >= 0, "NonMarkovParams: Omega must be >= 0");
    }
};

/// Initial second moments: sigma_x^2(0), sigma_p^2(0) and the symmetrized
/// cross moment sigma_px(0) = <XP + PX>.
template <typename Scalar>
struct SecondMomentInitT {
    Scalar sx2_0{1};
    Scalar sp2_0{1};
    Scalar spx_0{0};

    void validate() const {
        require(sx2_0 > 0, "SecondMomentInit: sx2_0 must be > 0");
        require(sp2_0 > 0, "SecondMomentInit: sp2_0 must be > 0");
    }

    /// Heisenberg bound sx2 * sp2 >= hbar^2 / 4.
    bool quantum_admissible(const ModelParamsT<Scalar>& params) const {
        return sx2_0 * sp2_0 >= params.hbar * params.hbar / Scalar(4);
    }
};

enum class SpectrumKind { ohmic, ohmic_lorentz, composite };

template <typename Scalar>
struct BathSpectrumT {
    SpectrumKind kind{SpectrumKind::ohmic};
    Scalar cutoff{0};
    NonMarkovParamsT<Scalar> nm{};

    void validate() const {
        if (kind == SpectrumKind::ohmic_lorentz)
            require(cutoff > 0, "BathSpectrum: ohmic-lorentz requires cutoff > 0");
        if (kind == SpectrumKind::composite) nm.validate();
    }
};

using ModelParams = ModelParamsT<double>;
using NonMarkovParams = NonMarkovParamsT<double>;
using SecondMomentInit = SecondMomentInitT<double>;
using BathSpectrum = BathSpectrumT<double>;

inline SpectrumKind parse_spectrum_kind(const std::string& name) {
    if (name == "ohmic") return SpectrumKind::ohmic;
    if (name == "ohmic-lorentz") return SpectrumKind::ohmic_lorentz;
    if (name == "composite") return SpectrumKind::composite;
    throw std::invalid_argument("unknown spectrum kind '" + name + "'");
}

}  // namespace qbm

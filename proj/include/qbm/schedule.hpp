#pragma once

#include <optional>
#include <string>

#include "qbm/model.hpp"

namespace qbm {

enum class KernelKind { markov, non_markov };

inline KernelKind parse_kernel_kind(const std::string& name) {
    if (name == "markov") return KernelKind::markov;
    if (name == "non-markov") return KernelKind::non_markov;
    throw std::invalid_argument("unknown kernel kind '" + name + "'");
}

/// Diffusion coefficients Delta(t), Lambda(t) driving the phase-space dynamics.
template <typename Scalar>
struct KernelScheduleT {
    KernelKind kind{KernelKind::markov};
    ModelParamsT<Scalar> params{};
    NonMarkovParamsT<Scalar> nm{};

    static KernelScheduleT markov(const ModelParamsT<Scalar>& p) { return {KernelKind::markov, p, {}}; }
    static KernelScheduleT non_markov(const ModelParamsT<Scalar>& p, const NonMarkovParamsT<Scalar>& nm) {
        return {KernelKind::non_markov, p, nm};
    }

    void validate() const {
        params.validate();
        if (kind == KernelKind::non_markov) nm.validate();
    }

    Scalar delta(Scalar t) const {
        return kind == KernelKind::markov ? params.markov_delta() : delta_coefficient(params, nm, t);
    }
    Scalar lambda(Scalar t) const {
        return kind == KernelKind::markov ? Scalar(0) : lambda_coefficient(params, nm, t);
    }
};

using KernelSchedule = KernelScheduleT<double>;

}  // namespace qbm

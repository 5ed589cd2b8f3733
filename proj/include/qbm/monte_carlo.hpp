#pragma once

#include <cstdint>
#include <vector>

#include "qbm/moments.hpp"
#include "qbm/rng.hpp"

namespace qbm {

/// Draws initial phase-space points. x and p are jointly Gaussian with the
/// given second moments, except that a positive `x_excess_kurtosis` replaces
/// the x marginal by a two-component Gaussian scale mixture with the same
/// variance and the requested excess kurtosis (x and p then independent).
struct InitSampler {
    double var_x = 1.0;
    double var_p = 1.0;
    double cov_xp = 0.0;
    double x_excess_kurtosis = 0.0;

    /// Sampler reproducing m20, m02, m11 and m40 of `state`.
    static InitSampler matching(const MomentState& state);

    /// Population moments of the sampled distribution.
    MomentState population_moments() const;

    void validate() const;
};

struct McOptions {
    std::size_t n_paths = 100'000;
    double dt = 1e-3;
    std::vector<double> record_times;  // multiples of dt; must include only t >= 0
    std::uint64_t seed = 0;
    std::size_t chunk_size = 4096;     // paths per RNG work unit
    unsigned threads = 0;              // 0 uses hardware concurrency
};

/// Ensemble estimates of every m(j,k) with their standard errors.
struct EnsembleTrajectory {
    std::vector<double> times;
    std::vector<MomentState> mean;
    std::vector<MomentVector<double>> std_error;
    std::size_t n_paths = 0;
};

/// Euler-Maruyama ensemble for the Markovian limit:
///   dx = (p/M) dt,  dp = -2 gamma p dt + sqrt(2 hbar^2 Delta) dW,  Delta = 2 M gamma kT / hbar^2.
/// Each path draws from its own substream of `seed`, so results do not
/// depend on the thread count.
EnsembleTrajectory simulate_sde_markov(const ModelParams& params, const InitSampler& sampler,
                                       const McOptions& opts);

}  // namespace qbm

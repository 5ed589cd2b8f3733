#include "qbm/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace qbm {

void InitSampler::validate() const {
    require(var_x >= 0 && var_p >= 0, "InitSampler: variances must be >= 0");
    require(cov_xp * cov_xp <= var_x * var_p, "InitSampler: covariance exceeds Cauchy-Schwarz bound");
    require(x_excess_kurtosis >= 0, "InitSampler: negative excess kurtosis is not supported");
    require(x_excess_kurtosis == 0 || cov_xp == 0,
            "InitSampler: excess kurtosis requires uncorrelated x and p");
    require(x_excess_kurtosis == 0 || var_x > 0, "InitSampler: excess kurtosis requires var_x > 0");
}

InitSampler InitSampler::matching(const MomentState& state) {
    InitSampler s;
    s.var_x = state(2, 0);
    s.var_p = state(0, 2);
    s.cov_xp = state(1, 1);
    s.x_excess_kurtosis = std::max(0.0, state.kurtosis());
    return s;
}

MomentState InitSampler::population_moments() const {
    MomentState m = MomentState::gaussian(var_x, var_p, cov_xp);
    m(4, 0) = (3.0 + x_excess_kurtosis) * var_x * var_x;
    return m;
}

namespace {

// Two-component scale mixture: weight w at variance v_wide, 1 - w at var/2.
struct ScaleMixture {
    double w = 0;
    double sd_wide = 0;
    double sd_narrow = 0;

    explicit ScaleMixture(double var, double excess) {
        w = 3.0 / (4.0 * excess + 3.0);
        sd_narrow = std::sqrt(var / 2.0);
        sd_wide = std::sqrt(0.5 * var * (1.0 + w) / w);
    }
};

struct ChunkSums {
    std::vector<MomentVector<double>> sum;
    std::vector<MomentVector<double>> sum_sq;
};

void accumulate(MomentVector<double>& sum, MomentVector<double>& sum_sq, double x, double p) {
    double xp[kMaxMomentOrder + 1], pp[kMaxMomentOrder + 1];
    xp[0] = pp[0] = 1.0;
    for (int i = 1; i <= kMaxMomentOrder; ++i) {
        xp[i] = xp[i - 1] * x;
        pp[i] = pp[i - 1] * p;
    }
    for (int n = 0; n <= kMaxMomentOrder; ++n)
        for (int k = 0; k <= n; ++k) {
            const double v = xp[n - k] * pp[k];
            const int idx = moment_index(n - k, k);
            sum[idx] += v;
            sum_sq[idx] += v * v;
        }
}

}  // namespace

EnsembleTrajectory simulate_sde_markov(const ModelParams& params, const InitSampler& sampler,
                                       const McOptions& opts) {
    params.validate();
    sampler.validate();
    require(opts.n_paths >= 1000, "simulate_sde_markov: n_paths must be >= 1000");
    require(opts.dt > 0, "simulate_sde_markov: dt must be > 0");
    require(opts.dt * 2.0 * params.gamma < 0.1, "simulate_sde_markov: unstable step, need 2 gamma dt < 0.1");
    require(!opts.record_times.empty(), "simulate_sde_markov: no record times");
    require(opts.chunk_size > 0, "simulate_sde_markov: chunk_size must be > 0");

    // Record times -> step indices.
    std::vector<long> record_steps;
    for (double t : opts.record_times) {
        require(t >= 0, "simulate_sde_markov: record times must be >= 0");
        const double steps = t / opts.dt;
        const long rounded = std::lround(steps);
        require(std::abs(steps - double(rounded)) < 1e-6 * std::max(1.0, steps),
                "simulate_sde_markov: record times must be multiples of dt");
        record_steps.push_back(rounded);
    }
    require(std::is_sorted(record_steps.begin(), record_steps.end()),
            "simulate_sde_markov: record times must be ascending");
    const std::size_t n_rec = record_steps.size();

    const double dt = opts.dt;
    const double inv_m = 1.0 / params.M;
    const double damping = 2.0 * params.gamma * dt;
    const double noise = std::sqrt(2.0 * params.hbar * params.hbar * params.markov_delta() * dt);

    const bool mixture = sampler.x_excess_kurtosis > 0;
    const ScaleMixture mix(sampler.var_x, mixture ? sampler.x_excess_kurtosis : 1.0);
    const double sd_x = std::sqrt(sampler.var_x);
    // p = a x_std + b z
    const double corr_a = sd_x > 0 ? sampler.cov_xp / sd_x : 0.0;
    const double corr_b = std::sqrt(std::max(0.0, sampler.var_p - corr_a * corr_a));

    const std::size_t n_chunks = (opts.n_paths + opts.chunk_size - 1) / opts.chunk_size;
    std::vector<ChunkSums> chunks(n_chunks);

    auto run_chunk = [&](std::size_t c) {
        ChunkSums& out = chunks[c];
        out.sum.assign(n_rec, MomentVector<double>::Zero());
        out.sum_sq.assign(n_rec, MomentVector<double>::Zero());
        const std::size_t first = c * opts.chunk_size;
        const std::size_t last = std::min(opts.n_paths, first + opts.chunk_size);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (std::size_t path = first; path < last; ++path) {
            Engine rng = make_engine(opts.seed, path);
            double x, p;
            if (mixture) {
                const double sd = uniform(rng) < mix.w ? mix.sd_wide : mix.sd_narrow;
                x = sd * normal(rng);
                p = std::sqrt(sampler.var_p) * normal(rng);
            } else {
                const double zx = normal(rng);
                const double zp = normal(rng);
                x = sd_x * zx;
                p = corr_a * zx + corr_b * zp;
            }
            long step = 0;
            for (std::size_t r = 0; r < n_rec; ++r) {
                for (; step < record_steps[r]; ++step) {
                    const double dw = normal(rng);
                    x += p * inv_m * dt;
                    p += -damping * p + noise * dw;
                }
                accumulate(out.sum[r], out.sum_sq[r], x, p);
            }
        }
    };

    unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
    if (threads <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t c = t; c < n_chunks; c += threads) run_chunk(c);
            });
    }

    EnsembleTrajectory result;
    result.n_paths = opts.n_paths;
    const double n = double(opts.n_paths);
    for (std::size_t r = 0; r < n_rec; ++r) {
        MomentVector<double> sum = MomentVector<double>::Zero(), sum_sq = MomentVector<double>::Zero();
        for (const auto& ch : chunks) {
            sum += ch.sum[r];
            sum_sq += ch.sum_sq[r];
        }
        MomentVector<double> mean = sum / n;
        MomentVector<double> var = (sum_sq / n - mean.cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1.0));
        mean[0] = 1.0;
        result.times.push_back(double(record_steps[r]) * dt);
        result.mean.emplace_back(mean);
        result.std_error.push_back((var / n).cwiseSqrt());
    }
    return result;
}

}  // namespace qbm

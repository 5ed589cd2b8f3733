#include <cmath>

#include "doctest.h"
#include "qbm/monte_carlo.hpp"

using namespace qbm;

namespace {

McOptions options(std::size_t n, double dt, std::vector<double> times, std::uint64_t seed = 11) {
    McOptions o;
    o.n_paths = n;
    o.dt = dt;
    o.record_times = std::move(times);
    o.seed = seed;
    return o;
}

}  // namespace

TEST_CASE("substreams are deterministic and distinct") {
    CHECK(substream_seed(1, 0) == substream_seed(1, 0));
    CHECK(substream_seed(1, 0) != substream_seed(1, 1));
    CHECK(substream_seed(1, 0) != substream_seed(2, 0));
    Engine a = make_engine(3, 9), b = make_engine(3, 9);
    CHECK(a() == b());
}

TEST_CASE("InitSampler moments") {
    const MomentState target = [] {
        MomentState s = MomentState::gaussian(0.5, 0.5, 0.0);
        s(4, 0) = 50.0;
        return s;
    }();
    const InitSampler s = InitSampler::matching(target);
    CHECK(s.x_excess_kurtosis == doctest::Approx(197.0));
    CHECK(s.population_moments()(4, 0) == doctest::Approx(50.0));

    // The t = 0 ensemble reproduces the sampler's moments.
    const ModelParams p{20, 1, 1, 1};
    const auto e = simulate_sde_markov(p, s, options(200'000, 1e-3, {0.0}));
    const MomentState pop = s.population_moments();
    for (int idx : {moment_index(2, 0), moment_index(0, 2), moment_index(1, 1), moment_index(0, 4)}) {
        const double se = e.std_error[0][idx];
        CHECK(std::abs(e.mean[0].vector()[idx] - pop.vector()[idx]) < 4 * se + 1e-12);
    }
    // Heavy tails converge slowly; the ensemble m40 is at least in range.
    CHECK(e.mean[0](4, 0) > 20.0);

    InitSampler bad{1.0, 1.0, 2.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    InitSampler corr_kurt{1.0, 1.0, 0.5, 1.0};
    CHECK_THROWS_AS(corr_kurt.validate(), std::invalid_argument);
}

TEST_CASE("zero temperature and zero momentum freeze the ensemble") {
    const ModelParams p{1, 1, 0, 1};
    const InitSampler s{0.3, 0.0, 0.0, 0.0};
    const auto e = simulate_sde_markov(p, s, options(2000, 1e-2, {0.0, 0.5, 1.0}));
    for (std::size_t r = 0; r < e.times.size(); ++r) {
        CHECK(e.mean[r](2, 0) == e.mean[0](2, 0));
        CHECK(e.mean[r](0, 2) == 0.0);
    }
}

TEST_CASE("momentum relaxes to equipartition") {
    const ModelParams p{2, 1, 0.5, 1};
    const double dt = 1e-3;
    const auto e = simulate_sde_markov(p, InitSampler{1.0, 0.0, 0.0, 0.0}, options(20'000, dt, {5.0}));
    // Stationary variance of the discrete scheme is M kT / (1 - gamma dt).
    const double target = p.M * p.kT;
    CHECK(std::abs(e.mean[0](0, 2) - target) < 4 * e.std_error[0][moment_index(0, 2)] + 2 * dt * target);
}

TEST_CASE("ensemble moments agree with the moment ODE") {
    const ModelParams p{20, 1, 1, 1};
    MomentState init = MomentState::gaussian(0.5, 0.5, 0.0);
    init(4, 0) = 50.0;
    const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
    const double dt = 1e-3;
    const auto e = simulate_sde_markov(p, InitSampler::matching(init), options(20'000, dt, times));
    const auto ode = evolve_moments(init, KernelSchedule::markov(p), times);
    int outliers = 0, checked = 0;
    for (std::size_t r = 0; r < times.size(); ++r)
        for (int idx = 1; idx < kMomentCount; ++idx) {
            const double ref = ode.states[r].vector()[idx];
            const double tol = 4 * e.std_error[r][idx] + 5 * dt * std::abs(ref) + 1e-12;
            ++checked;
            if (std::abs(e.mean[r].vector()[idx] - ref) > tol) ++outliers;
        }
    CHECK(checked == 56);
    CHECK(outliers <= 1);
    // Second moments in x are tight enough to check individually.
    for (std::size_t r = 0; r < times.size(); ++r) {
        const int idx = moment_index(2, 0);
        CHECK(std::abs(e.mean[r](2, 0) - ode.states[r](2, 0)) < 4 * e.std_error[r][idx] + 1e-3);
    }
}

TEST_CASE("results depend on the seed but not on the thread count") {
    const ModelParams p{1, 1, 1, 1};
    const InitSampler s{1.0, 1.0, 0.2, 0.0};
    auto o = options(5000, 1e-2, {0.5, 1.0}, 42);
    o.chunk_size = 512;
    o.threads = 1;
    const auto a = simulate_sde_markov(p, s, o);
    o.threads = 4;
    const auto b = simulate_sde_markov(p, s, o);
    for (std::size_t r = 0; r < a.times.size(); ++r) CHECK(a.mean[r].vector() == b.mean[r].vector());
    o.seed = 43;
    const auto c = simulate_sde_markov(p, s, o);
    CHECK(c.mean[1].vector() != a.mean[1].vector());
}

TEST_CASE("simulate_sde_markov validates its options") {
    const ModelParams p{1, 1, 1, 1};
    const InitSampler s{1.0, 1.0, 0.0, 0.0};
    CHECK_THROWS_AS(simulate_sde_markov(p, s, options(10, 1e-3, {1.0})), std::invalid_argument);
    CHECK_THROWS_AS(simulate_sde_markov(p, s, options(1000, 0.1, {1.0})), std::invalid_argument);
    CHECK_THROWS_AS(simulate_sde_markov(p, s, options(1000, 1e-2, {0.015})), std::invalid_argument);
    CHECK_THROWS_AS(simulate_sde_markov(p, s, options(1000, 1e-2, {0.5, 0.2})), std::invalid_argument);
    CHECK_THROWS_AS(simulate_sde_markov(p, s, options(1000, 1e-2, {})), std::invalid_argument);
}

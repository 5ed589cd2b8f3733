#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qbm/phase_space.hpp"

using namespace qbm;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Max-norm distance between the PDE result and the sheared initial Gaussian.
double free_streaming_error(int n) {
    const ModelParams p{1.0, 1e-12, 0.0, 1.0};
    const MomentState init = MomentState::gaussian(1.0, 1.0, 0.0);
    const PhaseSpaceGrid g = PhaseSpaceGrid::gaussian(Axis{-10, 10, n}, Axis{-7.5, 7.5, n}, init);
    PdeOptions o;
    o.records = 2;
    const double t = 1.0;
    const auto traj = evolve_wigner_pde(g, KernelSchedule::markov(p), Potential{}, t, o);
    double err = 0.0, peak = 0.0;
    const double norm = 1.0 / (2.0 * std::numbers::pi);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x0 = g.x.node(i) - g.p.node(j) * t / p.M;
            const double pj = g.p.node(j);
            const double exact = norm * std::exp(-0.5 * (x0 * x0 + pj * pj));
            err = std::max(err, std::abs(traj.final_grid.w(i, j) - exact));
            peak = std::max(peak, exact);
        }
    return err / peak;
}

}  // namespace

TEST_CASE("Axis geometry") {
    const Axis a{-1.0, 1.0, 4};
    CHECK(a.step() == 0.5);
    CHECK(a.node(0) == -0.75);
    CHECK(a.node(3) == 0.75);
    CHECK(a.extent() == 0.75);
}

TEST_CASE("grid_moments of a product Gaussian") {
    const MomentState m = MomentState::gaussian(2.0, 0.5, 0.0);
    const PhaseSpaceGrid g = PhaseSpaceGrid::gaussian(Axis{-14, 14, 200}, Axis{-7, 7, 200}, m);
    CHECK(std::abs(g.mass() - 1.0) < 1e-12);
    const MomentState q = grid_moments(g);
    CHECK(rel(q(2, 0), 2.0) < 1e-8);
    CHECK(rel(q(0, 2), 0.5) < 1e-8);
    CHECK(rel(q(4, 0), 12.0) < 1e-8);
    CHECK(rel(q(2, 2), 1.0) < 1e-8);
    for (auto [j, k] : {std::pair{1, 0}, {0, 1}, {1, 1}, {3, 0}, {2, 1}, {1, 3}})
        CHECK(std::abs(q(j, k)) < 1e-12);
}

TEST_CASE("PhaseSpaceGrid validation") {
    const MomentState m = MomentState::gaussian(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(PhaseSpaceGrid::gaussian(Axis{-8, 8, 8}, Axis{-8, 8, 32}, m).validate(), std::invalid_argument);
    PhaseSpaceGrid g = PhaseSpaceGrid::gaussian(Axis{-8, 8, 32}, Axis{-8, 8, 32}, m);
    g.w *= 1.01;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
    CHECK_THROWS_AS(PhaseSpaceGrid::gaussian(Axis{}, Axis{}, MomentState::gaussian(1.0, 1.0, 1.5)),
                    std::invalid_argument);
}

TEST_CASE("free streaming matches the sheared Gaussian with second-order convergence") {
    const double e_coarse = free_streaming_error(96);
    const double e_fine = free_streaming_error(192);
    CHECK(e_coarse < 2e-2);
    const double order = std::log2(e_coarse / e_fine);
    CHECK(order > 1.8);
    CHECK(order < 2.3);
}

static double markov_kurtosis(int n, PdeTrajectory* out = nullptr) {
    const ModelParams p{1.0, 0.5, 0.5, 1.0};
    const MomentState init = MomentState::gaussian(1.0, 1.0, 0.0);
    const auto schedule = KernelSchedule::markov(p);
    const PhaseSpaceGrid g = auto_gaussian_grid(init, schedule, Potential{}, 2.0, n, n);
    PdeOptions o;
    o.records = 5;
    auto pde = evolve_wigner_pde(g, schedule, Potential{}, 2.0, o);
    const double k = pde.moments.back().kurtosis();
    if (out) *out = std::move(pde);
    return k;
}

TEST_CASE("Markovian Gaussian evolution agrees with the moment ODE") {
    const ModelParams p{1.0, 0.5, 0.5, 1.0};
    PdeTrajectory pde;
    markov_kurtosis(96, &pde);
    const auto ode = evolve_moments(MomentState::gaussian(1.0, 1.0, 0.0), KernelSchedule::markov(p), pde.times);
    for (std::size_t r = 0; r < pde.times.size(); ++r) {
        CHECK(rel(pde.moments[r](2, 0), ode.states[r](2, 0)) < 1e-3);
        CHECK(rel(pde.moments[r](0, 2), ode.states[r](0, 2)) < 1e-3);
        CHECK(std::abs(pde.moments[r](1, 1) - ode.states[r](1, 1)) < 1e-3);
    }
    CHECK(pde.mass_drift() < 1e-10);
    CHECK(pde.negativity.size() == pde.times.size());
    CHECK_FALSE(pde.negativity_exceeded);
}

TEST_CASE("fourth-moment error converges at second order") {
    // The exact solution stays Gaussian, so the grid kurtosis is pure discretization error.
    const double k64 = markov_kurtosis(64);
    const double k128 = markov_kurtosis(128);
    CHECK(std::log2(k64 / k128) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::abs(k128) < 0.05);
}

TEST_CASE("non-Markovian evolution agrees with the moment ODE") {
    const ModelParams p{1.0, 0.5, 0.5, 1.0};
    const NonMarkovParams nm{0.6, 0.8, 0.4};
    MomentState init = MomentState::gaussian(1.0, 1.0, 0.0);
    const auto schedule = KernelSchedule::non_markov(p, nm);
    const double t_end = 2.0;
    const PhaseSpaceGrid g = auto_gaussian_grid(init, schedule, Potential{}, t_end, 128, 128);
    PdeOptions o;
    o.records = 5;
    const auto pde = evolve_wigner_pde(g, schedule, Potential{}, t_end, o);
    const auto ode = evolve_moments(init, schedule, pde.times);
    for (std::size_t r = 0; r < pde.times.size(); ++r) {
        for (auto [j, k] : {std::pair{2, 0}, {0, 2}})
            CHECK(rel(pde.moments[r](j, k), ode.states[r](j, k)) < 1e-3);
        CHECK(std::abs(pde.moments[r](1, 1) - ode.states[r](1, 1)) < 1e-3);
        CHECK(rel(pde.moments[r](4, 0), ode.states[r](4, 0)) < 2e-2);
        CHECK(rel(pde.moments[r](0, 4), ode.states[r](0, 4)) < 2e-2);
    }
}

TEST_CASE("harmonic potential oscillates at twice the trap frequency and conserves energy") {
    const ModelParams p{1.0, 1e-12, 0.0, 1.0};
    const double omega0 = 1.0;
    const MomentState init = MomentState::gaussian(1.0, 0.25, 0.0);
    const auto schedule = KernelSchedule::markov(p);
    const Potential pot = Potential::harmonic(omega0);
    const double t_end = std::numbers::pi / omega0;
    const PhaseSpaceGrid g = auto_gaussian_grid(init, schedule, pot, t_end, 128, 128, 7.0);
    PdeOptions o;
    o.records = 5;
    const auto pde = evolve_wigner_pde(g, schedule, pot, t_end, o);
    // m20(t) = cos^2 + 0.25 sin^2 has period pi / omega0.
    for (std::size_t r = 0; r < pde.times.size(); ++r) {
        const double t = pde.times[r];
        const double c = std::cos(omega0 * t), s = std::sin(omega0 * t);
        CHECK(std::abs(pde.moments[r](2, 0) - (c * c + 0.25 * s * s)) < 1e-6);
        const double energy = pde.moments[r](0, 2) / (2 * p.M) + 0.5 * p.M * omega0 * omega0 * pde.moments[r](2, 0);
        CHECK(std::abs(energy - 0.625) < 1e-6);
    }
    CHECK(pde.moments.back()(2, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(pde.moments[2](2, 0) == doctest::Approx(0.25).epsilon(1e-5));
}

TEST_CASE("mass is conserved") {
    const ModelParams p{2.0, 0.3, 0.2, 0.5};
    const NonMarkovParams nm{0.4, 1.0, 1.0};
    const auto schedule = KernelSchedule::non_markov(p, nm);
    const MomentState init = MomentState::gaussian(0.5, 0.5, 0.1);
    const PhaseSpaceGrid g = auto_gaussian_grid(init, schedule, Potential::harmonic(0.5), 3.0, 64, 64);
    PdeOptions o;
    o.keep_snapshots = true;
    const auto pde = evolve_wigner_pde(g, schedule, Potential::harmonic(0.5), 3.0, o);
    CHECK(pde.mass_drift() < 1e-6);
    CHECK(pde.snapshots.size() == pde.times.size());
    CHECK(pde.steps > 0);
}

TEST_CASE("evolve_wigner_pde reports stability and boundary violations") {
    const ModelParams p{1.0, 0.5, 0.5, 1.0};
    const auto schedule = KernelSchedule::markov(p);
    const MomentState init = MomentState::gaussian(1.0, 1.0, 0.0);
    const PhaseSpaceGrid g = auto_gaussian_grid(init, schedule, Potential{}, 1.0, 32, 32);

    PdeOptions o;
    o.dt = 2.0 * pde_stability_bound(g, schedule, Potential{}, 1.0);
    CHECK_THROWS_AS(evolve_wigner_pde(g, schedule, Potential{}, 1.0, o), NumericalError);

    // A tight box lets mass reach the outer ring as x spreads.
    const PhaseSpaceGrid tight = PhaseSpaceGrid::gaussian(Axis{-7, 7, 64}, Axis{-10, 10, 64}, init);
    try {
        evolve_wigner_pde(tight, schedule, Potential{}, 20.0);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("boundary") != std::string::npos);
        CHECK(e.time() > 0.0);
    }

    CHECK_THROWS_AS(evolve_wigner_pde(g, schedule, Potential{}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(evolve_wigner_pde(g, schedule, Potential::harmonic(0.0), 1.0), std::invalid_argument);
}

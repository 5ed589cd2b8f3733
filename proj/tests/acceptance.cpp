// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes except those listed in
// kKnownUnattainable, which must still fail (a fixed one has to be removed
// from the list). The FAIL lines are printed either way.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/calibration.hpp"
#include "qbm/market.hpp"
#include "qbm/model.hpp"
#include "qbm/moments.hpp"
#include "qbm/monte_carlo.hpp"
#include "qbm/phase_space.hpp"
#include "qbm/presets.hpp"
#include "qbm/rng.hpp"

using namespace qbm;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    std::string failures;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            failures += " [failed: " + what + "]";
        }
    }
};

// Criteria that cannot hold for the model as defined; see the README.
const std::set<int> kKnownUnattainable{1};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ReturnSeries returns_from(const std::vector<double>& v) {
    ReturnSeries r;
    r.values = v;
    const Minute t0 = synthetic_epoch();
    for (std::size_t k = 0; k < v.size(); ++k) {
        r.starts.push_back(t0 + Minute(k));
        r.sessions.push_back(0);
    }
    return r;
}

// 1. Quantum vs classical variance at M = 10, hbar = 0.01, gamma = 1e3, t = 10.
void variance_limits(Outcome& o) {
    const double t = presets::kVarianceTime, sx2 = presets::kVarianceSx2;
    double worst = 0, worst_kT = 0;
    for (double kT : {1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0, 10.0}) {
        const ModelParams p = presets::variance_params(kT);
        const SecondMomentInit init{sx2, minimal_uncertainty_momentum(p, sx2), 0.0};
        const double d = rel(variance_closed_form(p, init, t), classical_variance(p, t));
        if (d > worst) worst = d, worst_kT = kT;
        o.check(d <= 0.02, "kT = " + std::to_string(kT) + " deviates " + std::to_string(100 * d) + "%");
    }
    o.detail << "max quantum/classical deviation " << 100 * worst << "% at kT = " << worst_kT;

    // Smallest kT on a fine grid meeting the 2% bound.
    double threshold = NAN;
    for (double kT = 1e-2; kT < 1.0; kT *= 1.001) {
        const ModelParams p = presets::variance_params(kT);
        const SecondMomentInit init{sx2, minimal_uncertainty_momentum(p, sx2), 0.0};
        if (rel(variance_closed_form(p, init, t), classical_variance(p, t)) <= 0.02) {
            threshold = kT;
            break;
        }
    }
    o.detail << "; 2% holds from kT = " << threshold;

    const ModelParams ref = presets::variance_params(1.0);
    const double hg = ref.hbar * ref.gamma * 1e-3;
    double min_margin = INFINITY;
    for (double kT : {hg, 1e-3, 1e-4, 1e-6, 0.0}) {
        const ModelParams p = presets::variance_params(kT);
        const double sp2 = minimal_uncertainty_momentum(p, sx2);
        const double floor = sp2 / std::pow(2 * p.M * p.gamma, 2);
        const double excess = variance_closed_form(p, SecondMomentInit{sx2, sp2, 0.0}, t) - classical_variance(p, t);
        min_margin = std::min(min_margin, excess / floor);
        o.check(excess >= floor, "floor violated at kT = " + std::to_string(kT));
    }
    o.detail << "; low-kT excess / floor >= " << min_margin;
}

// 2. Moment ODE vs closed-form variance for randomized parameters.
void ode_vs_closed_form(Outcome& o) {
    Engine rng = make_engine(2024, 11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
    double worst = 0;
    for (int set = 0; set < 20; ++set) {
        const ModelParams p{log_uniform(0.1, 100), log_uniform(1e-2, 1e3), log_uniform(1e-3, 10),
                            log_uniform(1e-3, 1)};
        const double sx2 = log_uniform(1e-8, 1);
        const double sp2 = minimal_uncertainty_momentum(p, sx2) * log_uniform(1, 10);
        const double spx = (2 * u(rng) - 1) * std::sqrt(sx2 * sp2);  // |<XP+PX>/2| <= half the bound
        const auto t = uniform_grid(10.0 / p.gamma, 51);
        const auto traj = evolve_moments(MomentState::gaussian(sx2, sp2, 0.5 * spx), KernelSchedule::markov(p), t);
        for (std::size_t i = 0; i < t.size(); ++i)
            worst = std::max(worst, rel(traj.states[i](2, 0), variance_closed_form(p, {sx2, sp2, spx}, t[i])));
    }
    o.detail << "20 sets, max relative deviation " << worst;
    o.check(worst <= 1e-6, "deviation above 1e-6");
}

// 3. Moment ODE vs Monte Carlo at the kurtosis setup.
void ode_vs_monte_carlo(Outcome& o) {
    const ModelParams p = presets::kKurtosisParams;
    const MomentState init = presets::kurtosis_initial_state();
    McOptions opts;
    opts.n_paths = 100'000;
    opts.dt = 1e-3;
    opts.record_times = {0.0, 0.5, 1.0, 2.0};
    opts.seed = 2024;
    const auto sampler = InitSampler::matching(init);
    const auto e = simulate_sde_markov(p, sampler, opts);
    const auto ode = evolve_moments(sampler.population_moments(), KernelSchedule::markov(p), e.times);
    double worst = 0;
    std::string where;
    int compared = 0;
    for (std::size_t r = 0; r < e.times.size(); ++r)
        for (int n : {2, 4})
            for (int k = 0; k <= n; ++k) {
                const int idx = moment_index(n - k, k);
                const double se = e.std_error[r][idx];
                const double diff = std::abs(e.mean[r].vector()[idx] - ode.states[r].vector()[idx]);
                if (se == 0 && diff == 0) continue;
                ++compared;
                const double z = diff / se;
                if (z > worst) {
                    worst = z;
                    where = "m" + std::to_string(n - k) + std::to_string(k) + " at t = " + std::to_string(e.times[r]);
                }
            }
    o.detail << compared << " comparisons at 1e5 paths, max |z| = " << worst << " (" << where << ")";
    o.check(worst <= 3.0, "a moment outside 3 standard errors");
}

// 4. Kurtosis relaxation from the kurtosis initial state.
void kurtosis_decay(Outcome& o) {
    const auto t = uniform_grid(100.0, 10001);
    const auto k = kurtosis_trajectory(evolve_moments(presets::kurtosis_initial_state(),
                                                      KernelSchedule::markov(presets::kKurtosisParams), t));
    o.check(k.front() == 197.0, "kappa(0) != 197");
    bool decreasing = true;
    for (std::size_t i = 1; i < k.size(); ++i) decreasing = decreasing && k[i] < k[i - 1];
    o.check(decreasing, "not strictly decreasing");
    // Decay window: from 0 until kappa has fallen by one e-fold.
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size() && k[i] >= k.front() / std::numbers::e; ++i) {
        x.push_back(t[i]);
        y.push_back(k[i]);
    }
    const auto fit = fit_kurtosis_decay(x, y);
    o.detail << "kappa(0) = " << k.front() << ", window [0, " << x.back() << "], rate " << fit.rate
             << ", R^2 = " << fit.r2;
    o.check(fit.r2 >= 0.99, "R^2 below 0.99");
}

// 5. Diffusion coefficient limits.
void coefficient_limits(Outcome& o) {
    const ModelParams p{3.0, 0.7, 0.4, 0.2};
    const NonMarkovParams nm{0.5, 0.3, 1.1};
    const double d0 = delta_coefficient(p, nm, 0.0);
    const double l0 = lambda_coefficient(p, nm, 0.0);
    const double markov = 2 * p.M * p.gamma * p.kT / (p.hbar * p.hbar);
    const double eps = std::numeric_limits<double>::epsilon();
    o.check(std::abs(d0 - markov) <= 4 * eps * markov, "Delta(0)");
    o.check(l0 == 0.0, "Lambda(0)");

    // Integrals of the ACF kernel to infinity.
    const double e = nm.eta, w2 = 4 * nm.Omega * nm.Omega;
    const double d_inf = markov + 2 * std::pow(p.M * p.gamma * nm.xi / p.hbar, 2) * (1 / e + e / (e * e + w2));
    const double l_inf = 2 * p.M * p.gamma * p.gamma * nm.xi * nm.xi / (p.hbar * p.hbar) *
                         (1 / (e * e) + (e * e - w2) / std::pow(e * e + w2, 2));
    const double dr = rel(delta_coefficient(p, nm, std::numeric_limits<double>::infinity()), d_inf);
    const double lr = rel(lambda_coefficient(p, nm, std::numeric_limits<double>::infinity()), l_inf);
    o.check(dr <= 1e-10, "Delta(inf)");
    o.check(lr <= 1e-10, "Lambda(inf)");

    const auto t = uniform_grid(5.0, 51);
    const MomentState init = presets::kurtosis_initial_state();
    const auto a = evolve_moments(init, KernelSchedule::markov(p), t);
    const auto b = evolve_moments(init, KernelSchedule::non_markov(p, {0.0, nm.eta, nm.Omega}), t);
    double worst = 0;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (int j = 0; j < kMomentCount; ++j) {
            const double ref = a.states[i].vector()[j];
            if (ref != 0) worst = std::max(worst, rel(b.states[i].vector()[j], ref));
        }
    o.check(worst <= 1e-8, "xi = 0 trajectory");
    o.detail << "|Delta(0) - 2M gamma kT/hbar^2| = " << std::abs(d0 - markov) << ", Lambda(0) = " << l0
             << ", rel err at infinity " << dr << " / " << lr << ", xi = 0 max rel diff " << worst;
}

// 6. ACF maxima and R(0) for the 1999-2004 triple.
void acf_periodicity(Outcome& o) {
    const auto nm = presets::kAcfPeriods[0].nm;
    std::vector<double> maxima;
    for (int tau = 5; tau < 480; tau += 5) {
        const double v = acf_model(nm, double(tau));
        if (v > acf_model(nm, tau - 5.0) && v > acf_model(nm, tau + 5.0)) maxima.push_back(tau);
    }
    const double r0 = acf_model(nm, 0.0);
    o.detail << "R(0) = " << r0 << ", grid maxima at";
    for (double m : maxima) o.detail << " " << m;
    o.check(maxima.size() >= 2 && std::abs(maxima[0] - 120) <= 5 && std::abs(maxima[1] - 240) <= 5, "maxima");
    o.check(std::abs(r0 - 3.0030e-7) < 5e-12, "R(0)");
}

// 7. Calibration round trip.
AcfEstimate model_samples(const NonMarkovParams& nm, double noise_frac, std::uint64_t seed) {
    AcfEstimate a;
    Engine rng = make_engine(seed, 3);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int lag = 5; lag <= 480; lag += 5) {
        double v = acf_model(nm, double(lag));
        if (noise_frac > 0) v += noise_frac * acf_model(nm, 0.0) * g(rng);
        a.lags.push_back(lag);
        a.values.push_back(v);
        a.counts.push_back(std::size_t(10000 - lag));
    }
    return a;
}

void calibration_round_trip(Outcome& o) {
    double clean = 0, noisy = 0;
    for (const auto& period : presets::kAcfPeriods) {
        const auto f = fit_acf(model_samples(period.nm, 0, 0));
        o.check(f.converged, std::string(period.label) + " noiseless fit did not converge");
        for (double r : {rel(f.nm.xi, period.nm.xi), rel(f.nm.eta, period.nm.eta), rel(f.nm.Omega, period.nm.Omega)})
            clean = std::max(clean, r);
        for (std::uint64_t seed : {1, 2, 3}) {
            const auto g = fit_acf(model_samples(period.nm, 0.05, seed));
            o.check(g.converged, std::string(period.label) + " noisy fit did not converge");
            for (double r :
                 {rel(g.nm.xi, period.nm.xi), rel(g.nm.eta, period.nm.eta), rel(g.nm.Omega, period.nm.Omega)})
                noisy = std::max(noisy, r);
        }
    }
    o.detail << "max relative error noiseless " << clean << ", 5% noise (seeds 1-3) " << noisy;
    o.check(clean <= 1e-6, "noiseless recovery");
    o.check(noisy <= 0.05, "noisy recovery");
}

// 8. Empirical pipeline on synthetic GBM, seeds 1 to 3.
void gbm_pipeline(Outcome& o) {
    const double mu = 1e-5, sigma = 1e-3;
    const std::size_t n = 200'000;
    std::vector<Minute> taus;
    for (Minute tau = 5; tau <= 100; tau += 5) taus.push_back(tau);
    const double drift = mu - sigma * sigma / 2, drift_se = sigma / std::sqrt(double(n));
    const double band = 4 / std::sqrt(double(n));
    for (std::uint64_t seed : {1, 2, 3}) {
        const std::string tag = "seed " + std::to_string(seed) + ": ";
        const auto s = synth_gbm(mu, sigma, n, 1, seed);
        const auto sc = drift_vol_scaling(s, taus);
        o.check(sc.sigma_fit && sc.mu_fit, tag + "scaling fit refused: " + sc.diagnostic);
        if (!sc.sigma_fit || !sc.mu_fit) continue;
        o.check(std::abs(sc.sigma_fit->exponent - 0.5) <= 0.05, tag + "sigma exponent");
        o.check(sc.mu_fit->r2 >= 0.99, tag + "mu not linear");
        o.check(std::abs(sc.mu_fit->slope - drift) <= 3 * drift_se, tag + "mu slope");

        const auto k = empirical_kurtosis(s, taus);
        double worst = 0;
        for (std::size_t i = 0; i < k.taus.size(); ++i)
            worst = std::max(worst, std::abs(k.kurtosis[i]) / (4 * std::sqrt(24.0 / double(k.counts[i]))));
        o.check(k.taus.size() == taus.size(), tag + "kurtosis skipped horizons");
        o.check(worst < 1, tag + "kurtosis above 4 sqrt(24/n)");

        const auto acf = normalized_acf(empirical_acf(log_returns(s, 1, SessionPolicy::intraday, true), 480));
        double peak = 0;
        for (std::size_t i = 1; i < acf.values.size(); ++i) peak = std::max(peak, std::abs(acf.values[i]));
        o.check(peak < band, tag + "ACF outside the white-noise band");
        o.detail << (seed > 1 ? "; " : "") << tag << "sigma exponent " << sc.sigma_fit->exponent << ", mu slope "
                 << sc.mu_fit->slope << " (expected " << drift << " +- " << drift_se << "), mu R^2 "
                 << sc.mu_fit->r2 << ", max |kappa| / bound " << worst << ", max |ACF| sqrt(n) "
                 << peak * std::sqrt(double(n)) << " (band 4)";
    }
}

// 9. Wigner PDE checks.
double free_streaming_error(int n) {
    const ModelParams p{1.0, 1e-12, 0.0, 1.0};
    const MomentState init = MomentState::gaussian(1.0, 1.0, 0.0);
    const PhaseSpaceGrid g = PhaseSpaceGrid::gaussian(Axis{-10, 10, n}, Axis{-7.5, 7.5, n}, init);
    PdeOptions o;
    o.records = 2;
    const auto traj = evolve_wigner_pde(g, KernelSchedule::markov(p), Potential{}, 1.0, o);
    double err = 0.0, peak = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double x0 = g.x.node(i) - g.p.node(j), pj = g.p.node(j);
            const double exact = std::exp(-0.5 * (x0 * x0 + pj * pj)) / (2 * std::numbers::pi);
            err = std::max(err, std::abs(traj.final_grid.w(i, j) - exact));
            peak = std::max(peak, exact);
        }
    return err / peak;
}

void pde_checks(Outcome& o) {
    const ModelParams p = presets::kKurtosisParams;
    const auto schedule = KernelSchedule::markov(p);
    const MomentState init = MomentState::gaussian(0.5, 0.5, 0.0);
    const double t_end = 2.0;
    for (int n : {128, 256}) {
        const auto start = std::chrono::steady_clock::now();
        PdeOptions opts;
        opts.records = 11;
        const auto pde =
            evolve_wigner_pde(auto_gaussian_grid(init, schedule, Potential{}, t_end, n, n), schedule, Potential{}, t_end, opts);
        const auto ode = evolve_moments(init, schedule, pde.times);
        double worst = 0;
        for (std::size_t r = 0; r < pde.times.size(); ++r) {
            const auto& a = pde.moments[r];
            const auto& b = ode.states[r];
            worst = std::max({worst, rel(a(2, 0), b(2, 0)), rel(a(0, 2), b(0, 2)),
                              std::abs(a(1, 1) - b(1, 1)) / std::sqrt(b(2, 0) * b(0, 2))});
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        o.detail << n << "x" << n << ": second moments " << worst << ", mass drift " << pde.mass_drift() << ", "
                 << secs << " s; ";
        o.check(worst <= 1e-3, "second moments at " + std::to_string(n));
        o.check(pde.mass_drift() <= 1e-6, "mass at " + std::to_string(n));
        o.check(secs < 300, "runtime at " + std::to_string(n));
    }

    const double e96 = free_streaming_error(96), e192 = free_streaming_error(192);
    const double order = std::log2(e96 / e192);
    o.detail << "free-streaming order " << order;
    o.check(order > 1.8 && order < 2.3, "free-streaming order");

    const ModelParams free{1.0, 1e-12, 0.0, 1.0};
    const Potential pot = Potential::harmonic(1.0);
    const double period = std::numbers::pi;
    PdeOptions opts;
    opts.records = 5;
    const auto h = evolve_wigner_pde(
        auto_gaussian_grid(MomentState::gaussian(1.0, 0.25, 0.0), KernelSchedule::markov(free), pot, period, 128, 128, 7.0),
        KernelSchedule::markov(free), pot, period, opts);
    double harm = 0;
    for (std::size_t r = 0; r < h.times.size(); ++r) {
        const double c = std::cos(h.times[r]), s = std::sin(h.times[r]);
        harm = std::max(harm, std::abs(h.moments[r](2, 0) - (c * c + 0.25 * s * s)));
    }
    o.detail << ", harmonic m20 error " << harm;
    o.check(harm <= 1e-6, "harmonic oscillation");
}

// 10. Fat-tail detection.
void fat_tails(Outcome& o) {
    const std::size_t n = 100'000;
    Engine rng = make_engine(2024, 7);
    std::student_t_distribution<double> st(3.0);
    std::normal_distribution<double> g;
    std::vector<double> t3(n), gauss(n);
    for (auto& v : t3) v = st(rng);
    for (auto& v : gauss) v = g(rng);
    const auto ht = return_histogram(returns_from(t3));
    const auto hg = return_histogram(returns_from(gauss));
    o.detail << "t(3): tail z = " << ht.tail_test().z << ", " << ht.fat_tail_bins().size()
             << " bins above the reference; Gaussian: tail z = " << hg.tail_test().z << ", "
             << hg.fat_tail_bins().size() << " bins";
    o.check(ht.fat_tailed() && !ht.fat_tail_bins().empty(), "t(3) not flagged");
    o.check(!hg.fat_tailed(), "Gaussian flagged");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"quantum vs classical variance", variance_limits},
        {"moment ODE vs closed form", ode_vs_closed_form},
        {"moment ODE vs Monte Carlo", ode_vs_monte_carlo},
        {"kurtosis relaxation", kurtosis_decay},
        {"diffusion coefficient limits", coefficient_limits},
        {"ACF periodicity", acf_periodicity},
        {"calibration round trip", calibration_round_trip},
        {"empirical pipeline on GBM", gbm_pipeline},
        {"Wigner PDE", pde_checks},
        {"fat-tail detection", fat_tails},
    };
    bool ok = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = int(i) + 1;
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.failures += std::string(" [exception: ") + e.what() + "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool known = kKnownUnattainable.count(id) > 0;
        std::printf("%s %2d %s: %s (%.2f s)%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first,
                    (o.detail.str() + o.failures).c_str(), secs, known ? " [known unattainable]" : "");
        if (o.pass == known) ok = false;
    }
    return ok ? 0 : 1;
}

#include "qbm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "qbm/errors.hpp"
#include "qbm/model.hpp"

namespace qbm {

AcfWeights parse_acf_weights(const std::string& name) {
    if (name == "uniform") return AcfWeights::uniform;
    if (name == "counts" || name == "count-weighted") return AcfWeights::counts;
    throw std::invalid_argument("unknown weighting '" + name + "' (uniform | counts)");
}

namespace {

using Vec3 = Eigen::Vector3d;

// Problem in normalized units: values divided by `scale`, so xi_n = xi / sqrt(scale).
struct Problem {
    Eigen::VectorXd tau, y, w;
    double omega_max = 0;
    double eta_min = 1e-12;
    double eta_max = 1.0;

    double model(const Vec3& th, double t) const {
        return 0.5 * th[0] * th[0] * std::exp(-th[1] * t) * (1.0 + std::cos(2.0 * th[2] * t));
    }

    Vec3 project(Vec3 th) const {
        th[0] = std::max(th[0], 0.0);
        th[1] = std::clamp(th[1], eta_min, eta_max);
        th[2] = std::clamp(th[2], 0.0, omega_max * (1.0 - 1e-9));
        return th;
    }

    double sse(const Vec3& th) const {
        double s = 0;
        for (Eigen::Index i = 0; i < tau.size(); ++i) {
            const double r = w[i] * (y[i] - model(th, tau[i]));
            s += r * r;
        }
        return s;
    }

    void linearize(const Vec3& th, Eigen::MatrixXd& J, Eigen::VectorXd& r) const {
        const Eigen::Index n = tau.size();
        J.resize(n, 3);
        r.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = tau[i];
            const double e = std::exp(-th[1] * t);
            const double c = std::cos(2.0 * th[2] * t), s = std::sin(2.0 * th[2] * t);
            const double f = 0.5 * th[0] * th[0] * e * (1.0 + c);
            r[i] = w[i] * (y[i] - f);
            J(i, 0) = w[i] * th[0] * e * (1.0 + c);
            J(i, 1) = -w[i] * t * f;
            J(i, 2) = -w[i] * th[0] * th[0] * t * e * s;
        }
    }
};

struct Run {
    Vec3 theta;
    double sse = 0;
    double initial_sse = 0;
    int iterations = 0;
    bool converged = false;
    std::string diagnostic;
};

Run levenberg_marquardt(const Problem& pb, Vec3 theta, const AcfFitOptions& opts) {
    Run run;
    theta = pb.project(theta);
    double sse = pb.sse(theta);
    run.initial_sse = sse;
    double lambda = 1e-3;
    Eigen::MatrixXd J;
    Eigen::VectorXd r;
    while (run.iterations < opts.max_iterations) {
        if (sse == 0.0) {
            run.converged = true;
            break;
        }
        ++run.iterations;
        pb.linearize(theta, J, r);
        const Eigen::Matrix3d A = J.transpose() * J;
        const Vec3 g = J.transpose() * r;
        bool accepted = false;
        while (lambda < 1e20) {
            Eigen::Matrix3d Ad = A;
            for (int k = 0; k < 3; ++k) Ad(k, k) += lambda * std::max(A(k, k), 1e-30);
            const Vec3 step = Ad.ldlt().solve(g);
            const Vec3 trial = pb.project(theta + step);
            const double trial_sse = pb.sse(trial);
            if (std::isfinite(trial_sse) && trial_sse < sse) {
                const Vec3 moved = trial - theta;
                double rel_step = 0;
                for (int k = 0; k < 3; ++k)
                    rel_step = std::max(rel_step, std::abs(moved[k]) / std::max(std::abs(trial[k]), 1e-12));
                const double rel_change = (sse - trial_sse) / sse;
                theta = trial;
                sse = trial_sse;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (rel_step < opts.step_tol || rel_change < opts.residual_tol) run.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at machine precision.
            run.converged = true;
            break;
        }
        if (run.converged) break;
    }
    if (!run.converged) run.diagnostic = "iteration limit reached without meeting the tolerances";
    run.theta = theta;
    run.sse = sse;
    return run;
}

// Highest interior peak of |sum y e^{-i w tau}|^2 over w in (w_lo, w_hi).
std::optional<double> periodogram_peak(const Problem& pb, double w_lo, double w_hi, bool& dominant) {
    constexpr int kSamples = 2000;
    std::vector<double> power(kSamples + 1);
    for (int k = 0; k <= kSamples; ++k) {
        const double w = w_lo + (w_hi - w_lo) * k / kSamples;
        std::complex<double> s = 0;
        for (Eigen::Index i = 0; i < pb.tau.size(); ++i) s += pb.y[i] * std::polar(1.0, -w * pb.tau[i]);
        power[std::size_t(k)] = std::norm(s);
    }
    double best = -1, second = -1;
    int best_k = -1;
    for (int k = 1; k < kSamples; ++k) {
        const double p = power[std::size_t(k)];
        if (p > power[std::size_t(k - 1)] && p >= power[std::size_t(k + 1)]) {
            if (p > best) {
                second = best;
                best = p;
                best_k = k;
            } else if (p > second) {
                second = p;
            }
        }
    }
    dominant = best_k >= 0 && second < 0.5 * best;
    if (best_k < 0) return std::nullopt;
    return w_lo + (w_hi - w_lo) * best_k / kSamples;
}

struct AutoGuess {
    Vec3 theta;
    std::vector<double> omegas;
    bool ambiguous = false;
};

AutoGuess auto_guess(const Problem& pb, const AcfFitOptions& opts) {
    const Eigen::Index n = pb.tau.size();
    AutoGuess g;
    const double y1 = pb.y[0];
    g.theta[0] = std::sqrt(y1 > 0 ? y1 : pb.y.cwiseAbs().maxCoeff());

    // Upper envelope: first lag plus interior local maxima.
    std::vector<double> et, ey;
    std::optional<double> first_max;
    if (y1 > 0) {
        et.push_back(pb.tau[0]);
        ey.push_back(std::log(y1));
    }
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        if (pb.y[i] > pb.y[i - 1] && pb.y[i] >= pb.y[i + 1] && pb.y[i] > 0) {
            if (!first_max) first_max = pb.tau[i];
            et.push_back(pb.tau[i]);
            ey.push_back(std::log(pb.y[i]));
        }
    }
    const double span = pb.tau[n - 1] - pb.tau[0];
    double eta = 3.0 / span;
    if (et.size() >= 3) {
        eta = -fit_linear(et, ey).slope;
    } else if (et.size() == 2) {
        eta = -(ey[1] - ey[0]) / (et[1] - et[0]);
    }
    g.theta[1] = std::clamp(std::isfinite(eta) ? eta : 3.0 / span, 1e-6, pb.eta_max);

    // Omega from the first local maximum, refined by the periodogram at 2 Omega.
    bool dominant = false;
    const auto peak = periodogram_peak(pb, 2.0 * std::numbers::pi / span, 2.0 * pb.omega_max, dominant);
    std::optional<double> from_max;
    if (first_max) from_max = std::numbers::pi / *first_max;
    double omega = 0;
    if (peak && from_max && std::abs(*peak / 2.0 - *from_max) <= 0.25 * *from_max) {
        omega = *peak / 2.0;
        g.ambiguous = !dominant;
    } else {
        omega = peak ? *peak / 2.0 : (from_max ? *from_max : 0.5 * pb.omega_max);
        g.ambiguous = true;
    }
    g.theta[2] = omega;
    g.omegas.push_back(omega);
    if (from_max && *from_max != omega) g.omegas.push_back(*from_max);
    if (g.ambiguous)
        for (int k = 0; k < opts.grid_candidates; ++k)
            g.omegas.push_back((k + 0.5) / opts.grid_candidates * pb.omega_max);
    return g;
}

}  // namespace

AcfFit fit_acf(const AcfEstimate& acf, const AcfFitOptions& opts) {
    require(acf.lags.size() == acf.values.size() && acf.lags.size() == acf.counts.size(),
            "fit_acf: lag, value and count columns differ in length");
    require(opts.max_iterations > 0, "fit_acf: max_iterations must be positive");
    std::vector<double> tau, y, cnt;
    for (std::size_t i = 0; i < acf.lags.size(); ++i) {
        if (acf.lags[i] <= 0 || acf.counts[i] == 0) continue;
        if (!std::isfinite(acf.values[i])) throw DataError("fit_acf: non-finite ACF value");
        tau.push_back(acf.lags[i]);
        y.push_back(acf.values[i]);
        cnt.push_back(double(acf.counts[i]));
    }
    if (tau.size() < 10)
        throw DataError("fit_acf: need at least 10 positive lags with counts, got " + std::to_string(tau.size()));
    for (std::size_t i = 1; i < tau.size(); ++i)
        if (tau[i] <= tau[i - 1]) throw DataError("fit_acf: lags must be strictly increasing");

    double base = opts.base_minutes;
    if (base <= 0) {
        base = tau[0];
        for (std::size_t i = 1; i < tau.size(); ++i) base = std::min(base, tau[i] - tau[i - 1]);
    }

    AcfFit fit;
    fit.points = tau.size();
    double scale = 0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    if (scale == 0) {
        fit.degenerate = true;
        fit.diagnostic = "flat zero ACF: xi = 0 and Omega is unidentifiable";
        fit.std_error.fill(std::numeric_limits<double>::quiet_NaN());
        return fit;
    }

    Problem pb;
    const Eigen::Index n = Eigen::Index(tau.size());
    pb.tau = Eigen::Map<Eigen::VectorXd>(tau.data(), n);
    pb.y = Eigen::Map<Eigen::VectorXd>(y.data(), n) / scale;
    pb.w = Eigen::VectorXd::Ones(n);
    if (opts.weights == AcfWeights::counts) {
        const double cmax = *std::max_element(cnt.begin(), cnt.end());
        for (Eigen::Index i = 0; i < n; ++i) pb.w[i] = std::sqrt(cnt[std::size_t(i)] / cmax);
    }
    pb.omega_max = acf_omega_limit(base);

    std::vector<Vec3> starts;
    if (opts.guess) {
        opts.guess->validate();
        starts.push_back(Vec3(opts.guess->xi / std::sqrt(scale), opts.guess->eta, opts.guess->Omega));
    } else {
        const AutoGuess g = auto_guess(pb, opts);
        fit.grid_fallback = g.ambiguous;
        for (double om : g.omegas) starts.push_back(Vec3(g.theta[0], g.theta[1], om));
    }

    std::optional<Run> best;
    for (const Vec3& s : starts) {
        Run run = levenberg_marquardt(pb, s, opts);
        const bool better = !best || run.sse < best->sse ||
                            (run.sse == best->sse && run.theta[2] < best->theta[2]);
        if (better) best = std::move(run);
    }

    const Vec3 th = best->theta;
    fit.nm = NonMarkovParams{th[0] * std::sqrt(scale), th[1], th[2]};
    fit.residual = best->sse * scale * scale;
    fit.initial_residual = best->initial_sse * scale * scale;
    fit.iterations = best->iterations;
    fit.converged = best->converged;
    fit.diagnostic = best->diagnostic;

    Eigen::MatrixXd J;
    Eigen::VectorXd r;
    pb.linearize(th, J, r);
    const Eigen::Matrix3d A = J.transpose() * J;
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(A);
    if (n > 3 && lu.rank() == 3) {
        const Eigen::Matrix3d cov = (best->sse / double(n - 3)) * lu.inverse();
        fit.std_error = {std::sqrt(std::max(cov(0, 0), 0.0)) * std::sqrt(scale), std::sqrt(std::max(cov(1, 1), 0.0)),
                         std::sqrt(std::max(cov(2, 2), 0.0))};
    } else {
        fit.std_error.fill(std::numeric_limits<double>::quiet_NaN());
    }

    if (th[0] < 1e-8) {
        fit.degenerate = true;
        fit.converged = false;
        fit.diagnostic = "xi collapsed to zero: Omega is unidentifiable";
    }
    return fit;
}

}  // namespace qbm

#include "qbm/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace qbm {

double Axis::extent() const { return std::max(std::abs(node(0)), std::abs(node(n - 1))); }

void PhaseSpaceGrid::validate(double mass_tol) const {
    require(x.n >= 16 && p.n >= 16, "PhaseSpaceGrid: need at least 16 cells per axis");
    require(x.max > x.min && p.max > p.min, "PhaseSpaceGrid: empty axis range");
    require(w.rows() == x.n && w.cols() == p.n, "PhaseSpaceGrid: density shape does not match axes");
    require(std::abs(mass() - 1.0) <= mass_tol, "PhaseSpaceGrid: density is not normalized");
}

PhaseSpaceGrid PhaseSpaceGrid::gaussian(const Axis& x, const Axis& p, const MomentState& m) {
    const double a = m(2, 0), b = m(0, 2), c = m(1, 1);
    const double det = a * b - c * c;
    require(a > 0 && b > 0 && det > 0, "PhaseSpaceGrid::gaussian: covariance must be positive definite");
    PhaseSpaceGrid g{x, p, Eigen::MatrixXd(x.n, p.n)};
    for (int j = 0; j < p.n; ++j) {
        const double pj = p.node(j);
        for (int i = 0; i < x.n; ++i) {
            const double xi = x.node(i);
            const double q = (b * xi * xi - 2.0 * c * xi * pj + a * pj * pj) / det;
            g.w(i, j) = std::exp(-0.5 * q);
        }
    }
    g.w /= g.mass();
    return g;
}

MomentState grid_moments(const PhaseSpaceGrid& grid) {
    MomentVector<double> sums = MomentVector<double>::Zero();
    for (int j = 0; j < grid.p.n; ++j) {
        const double pj = grid.p.node(j);
        double ppow[kMaxMomentOrder + 1] = {1.0, pj, pj * pj, pj * pj * pj, pj * pj * pj * pj};
        for (int i = 0; i < grid.x.n; ++i) {
            const double w = grid.w(i, j);
            if (w == 0.0) continue;
            const double xi = grid.x.node(i);
            double xpow = w;
            for (int jx = 0; jx <= kMaxMomentOrder; ++jx) {
                for (int k = 0; k + jx <= kMaxMomentOrder; ++k) sums[moment_index(jx, k)] += xpow * ppow[k];
                xpow *= xi;
            }
        }
    }
    MomentVector<double> m = sums / sums[0];
    m[0] = 1.0;
    return MomentState(m);
}

double PdeTrajectory::mass_drift() const {
    double drift = 0.0;
    for (double m : mass) drift = std::max(drift, std::abs(m - mass.front()));
    return drift;
}

namespace {

struct Coefficients {
    double max_diffusion = 0.0;
    double max_cross = 0.0;
};

Coefficients coefficient_bounds(const KernelSchedule& schedule, double t_end) {
    const double h2 = schedule.params.hbar * schedule.params.hbar;
    Coefficients c;
    constexpr int samples = 2000;
    for (int s = 0; s <= samples; ++s) {
        const double t = t_end * s / samples;
        c.max_diffusion = std::max(c.max_diffusion, h2 * std::abs(schedule.delta(t)));
        c.max_cross = std::max(c.max_cross, h2 * std::abs(schedule.lambda(t)));
    }
    return c;
}

// Padded (nx+2) x (np+2) arrays; the ghost ring stays zero.
class CentralScheme {
public:
    CentralScheme(const PhaseSpaceGrid& grid, const KernelSchedule& schedule, const Potential& potential)
        : schedule_(schedule), nx_(grid.x.n), np_(grid.p.n) {
        const double dx = grid.x.step(), dp = grid.p.step();
        inv2dx_ = 0.5 / dx;
        inv2dp_ = 0.5 / dp;
        invdp2_ = 1.0 / (dp * dp);
        inv4dxdp_ = 0.25 / (dx * dp);
        force_ = potential.kind == PotentialKind::harmonic
                     ? schedule.params.M * potential.omega0 * potential.omega0
                     : 0.0;
        xs_.resize(nx_ + 2);
        ps_.resize(np_ + 2);
        for (int i = 0; i < nx_ + 2; ++i) xs_[i] = grid.x.node(i - 1);
        for (int j = 0; j < np_ + 2; ++j) ps_[j] = grid.p.node(j - 1);
    }

    void rhs(double t, const Eigen::MatrixXd& P, Eigen::MatrixXd& out) const {
        const auto& prm = schedule_.params;
        const double h2 = prm.hbar * prm.hbar;
        const double diff = h2 * schedule_.delta(t);
        const double cross = h2 * schedule_.lambda(t);
        const double inv_m = 1.0 / prm.M;
        const double drift = 2.0 * prm.gamma;
        for (int j = 1; j <= np_; ++j) {
            const double pj = ps_[j];
            const double stream = -pj * inv_m * inv2dx_;
            const double drift_up = drift * ps_[j + 1] * inv2dp_;
            const double drift_dn = drift * ps_[j - 1] * inv2dp_;
            const double* c = &P(0, j);
            const double* up = &P(0, j + 1);
            const double* dn = &P(0, j - 1);
            double* o = &out(0, j);
            for (int i = 1; i <= nx_; ++i) {
                double v = stream * (c[i + 1] - c[i - 1]);
                v += drift_up * up[i] - drift_dn * dn[i];
                v += diff * invdp2_ * (up[i] - 2.0 * c[i] + dn[i]);
                if (cross != 0.0) v -= cross * inv4dxdp_ * (up[i + 1] - dn[i + 1] - up[i - 1] + dn[i - 1]);
                if (force_ != 0.0) v += force_ * xs_[i] * inv2dp_ * (up[i] - dn[i]);
                o[i] = v;
            }
        }
    }

private:
    const KernelSchedule& schedule_;
    int nx_, np_;
    double inv2dx_, inv2dp_, invdp2_, inv4dxdp_, force_;
    std::vector<double> xs_, ps_;
};

double ring_mass_fraction(const Eigen::MatrixXd& P, int nx, int np) {
    double ring = 0.0;
    for (int i = 1; i <= nx; ++i) ring += std::abs(P(i, 1)) + std::abs(P(i, np));
    for (int j = 2; j < np; ++j) ring += std::abs(P(1, j)) + std::abs(P(nx, j));
    return ring / std::abs(P.sum());
}

}  // namespace

double pde_stability_bound(const PhaseSpaceGrid& grid, const KernelSchedule& schedule, const Potential& potential,
                           double t_end) {
    const auto& prm = schedule.params;
    const double dx = grid.x.step(), dp = grid.p.step();
    const double p_max = grid.p.extent();
    const double x_max = grid.x.extent();
    const Coefficients c = coefficient_bounds(schedule, t_end);
    constexpr double inf = std::numeric_limits<double>::infinity();

    double bound = dx * prm.M / p_max;
    bound = std::min(bound, prm.gamma > 0 ? dp / (2.0 * prm.gamma * p_max) : inf);
    bound = std::min(bound, c.max_diffusion > 0 ? dp * dp / (4.0 * c.max_diffusion) : inf);
    bound = std::min(bound, c.max_cross > 0 ? dx * dp / c.max_cross : inf);
    if (potential.kind == PotentialKind::harmonic && potential.omega0 > 0)
        bound = std::min(bound, dp / (prm.M * potential.omega0 * potential.omega0 * x_max));
    return bound / 2.0;
}

PdeTrajectory evolve_wigner_pde(const PhaseSpaceGrid& grid, const KernelSchedule& schedule,
                                const Potential& potential, double t_end, const PdeOptions& opts) {
    grid.validate();
    schedule.validate();
    require(t_end > 0, "evolve_wigner_pde: t_end must be > 0");
    require(opts.records >= 2, "evolve_wigner_pde: need at least 2 records");
    require(potential.kind == PotentialKind::none || potential.omega0 > 0,
            "evolve_wigner_pde: harmonic potential needs omega0 > 0");

    const double bound = pde_stability_bound(grid, schedule, potential, t_end);
    if (opts.dt > bound * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "evolve_wigner_pde: stability violation, dt = " << opts.dt << " exceeds bound " << bound;
        throw NumericalError(msg.str(), 0.0);
    }
    const double dt_max = opts.dt > 0 ? opts.dt : bound;
    const int intervals = opts.records - 1;
    const long per_interval = std::max(1L, long(std::ceil(t_end / intervals / dt_max - 1e-9)));
    const double dt = t_end / (double(intervals) * double(per_interval));

    const int nx = grid.x.n, np = grid.p.n;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(nx + 2, np + 2);
    P.block(1, 1, nx, np) = grid.w;
    Eigen::MatrixXd k1 = Eigen::MatrixXd::Zero(nx + 2, np + 2), k2 = k1, k3 = k1, k4 = k1, tmp = k1;

    const CentralScheme scheme(grid, schedule, potential);
    const double area = grid.cell_area();

    PdeTrajectory traj;
    traj.dt = dt;
    PhaseSpaceGrid current{grid.x, grid.p, grid.w};

    auto check_boundary = [&](double t) {
        const double frac = ring_mass_fraction(P, nx, np);
        if (frac > opts.boundary_tol) {
            std::ostringstream msg;
            msg << "evolve_wigner_pde: boundary mass overflow at t = " << t << " (ring fraction " << frac
                << " > " << opts.boundary_tol << ")";
            throw NumericalError(msg.str(), t);
        }
    };
    auto track_negativity = [&]() {
        const auto interior = P.block(1, 1, nx, np);
        const double peak = interior.maxCoeff();
        const double neg = std::max(0.0, -interior.minCoeff()) / peak;
        traj.max_negativity = std::max(traj.max_negativity, neg);
        return neg;
    };
    auto record = [&](double t) {
        current.w = P.block(1, 1, nx, np);
        traj.times.push_back(t);
        traj.moments.push_back(grid_moments(current));
        traj.mass.push_back(current.w.sum() * area);
        traj.negativity.push_back(track_negativity());
        if (opts.keep_snapshots) traj.snapshots.push_back(current);
    };

    check_boundary(0.0);
    record(0.0);
    long step = 0;
    for (int r = 1; r <= intervals; ++r) {
        for (long s = 0; s < per_interval; ++s, ++step) {
            const double t = double(step) * dt;
            scheme.rhs(t, P, k1);
            tmp = P + (0.5 * dt) * k1;
            scheme.rhs(t + 0.5 * dt, tmp, k2);
            tmp = P + (0.5 * dt) * k2;
            scheme.rhs(t + 0.5 * dt, tmp, k3);
            tmp = P + dt * k3;
            scheme.rhs(t + dt, tmp, k4);
            P += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            check_boundary(t + dt);
            track_negativity();
        }
        record(double(step) * dt);
    }
    traj.steps = step;
    traj.negativity_exceeded = traj.max_negativity > opts.negativity_tol;
    traj.final_grid = current;
    return traj;
}

PhaseSpaceGrid auto_gaussian_grid(const MomentState& init, const KernelSchedule& schedule,
                                  const Potential& potential, double t_end, int nx, int np, double n_sigma) {
    init.validate();
    double var_x = init(2, 0), var_p = init(0, 2);
    const auto& prm = schedule.params;
    if (potential.kind == PotentialKind::none) {
        const auto t = uniform_grid(t_end, 64);
        const auto traj = evolve_moments(init, schedule, t);
        for (const auto& s : traj.states) {
            var_x = std::max(var_x, s(2, 0));
            var_p = std::max(var_p, s(0, 2));
        }
    } else {
        // Energy bound: E(t) <= E(0) + t * max(hbar^2 Delta) / M.
        const double k = prm.M * potential.omega0 * potential.omega0;
        const Coefficients c = coefficient_bounds(schedule, t_end);
        const double energy =
            init(0, 2) / (2.0 * prm.M) + 0.5 * k * init(2, 0) + t_end * c.max_diffusion / prm.M;
        var_x = std::max(var_x, 2.0 * energy / k);
        var_p = std::max(var_p, 2.0 * prm.M * energy);
    }
    const double hx = n_sigma * std::sqrt(var_x), hp = n_sigma * std::sqrt(var_p);
    return PhaseSpaceGrid::gaussian(Axis{-hx, hx, nx}, Axis{-hp, hp, np}, init);
}

}  // namespace qbm

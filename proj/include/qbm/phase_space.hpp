#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "qbm/moments.hpp"

namespace qbm {

/// Cell-centered axis: n cells of width (max - min) / n, nodes at cell midpoints.
struct Axis {
    double min = -1.0;
    double max = 1.0;
    int n = 64;

    double step() const { return (max - min) / n; }
    double node(int i) const { return min + (i + 0.5) * step(); }
    /// Largest |node| on the axis.
    double extent() const;
};

/// Discretized Wigner / probability density W(x, p). Rows index x, columns p.
struct PhaseSpaceGrid {
    Axis x;
    Axis p;
    Eigen::MatrixXd w;

    double cell_area() const { return x.step() * p.step(); }
    double mass() const { return w.sum() * cell_area(); }

    /// Throws std::invalid_argument unless nx, np >= 16 and |mass - 1| <= mass_tol.
    void validate(double mass_tol = 1e-6) const;

    /// Centered Gaussian matched to the second moments of `m`, normalized to unit mass.
    static PhaseSpaceGrid gaussian(const Axis& x, const Axis& p, const MomentState& m);
};

/// Midpoint-rule moments through total order 4, normalized by the grid mass.
MomentState grid_moments(const PhaseSpaceGrid& grid);

enum class PotentialKind { none, harmonic };

struct Potential {
    PotentialKind kind = PotentialKind::none;
    double omega0 = 0.0;

    static Potential harmonic(double omega0) { return {PotentialKind::harmonic, omega0}; }
};

struct PdeOptions {
    double dt = 0.0;              // 0 selects the stability bound
    int records = 11;             // uniformly spaced output times including 0 and t_end
    double boundary_tol = 1e-10;  // max mass fraction allowed in the outermost ring of cells
    double negativity_tol = 1e-8; // negative density tolerated, relative to the peak
    bool keep_snapshots = false;
};

struct PdeTrajectory {
    std::vector<double> times;
    std::vector<MomentState> moments;
    std::vector<double> mass;
    std::vector<double> negativity;  // -min(W) / max(W) at each record, floored at 0
    std::vector<PhaseSpaceGrid> snapshots;
    PhaseSpaceGrid final_grid;
    double dt = 0.0;
    long steps = 0;
    double max_negativity = 0.0;
    bool negativity_exceeded = false;

    double mass_drift() const;
};

/// Largest stable time step for the explicit scheme on this grid.
double pde_stability_bound(const PhaseSpaceGrid& grid, const KernelSchedule& schedule, const Potential& potential,
                           double t_end);

/// Advances
///   dW/dt = -(p/M) dW/dx + 2 gamma d(pW)/dp + hbar^2 Delta(t) d2W/dp2 - hbar^2 Lambda(t) d2W/dxdp
///           + M omega0^2 x dW/dp   (harmonic potential only)
/// with second-order central differences and classical RK4. Throws
/// NumericalError on a stability violation or when mass reaches the boundary.
PdeTrajectory evolve_wigner_pde(const PhaseSpaceGrid& grid, const KernelSchedule& schedule,
                                const Potential& potential, double t_end, const PdeOptions& opts = {});

/// Gaussian grid sized to hold the evolved distribution up to `n_sigma`
/// standard deviations on [0, t_end].
PhaseSpaceGrid auto_gaussian_grid(const MomentState& init, const KernelSchedule& schedule,
                                  const Potential& potential, double t_end, int nx, int np, double n_sigma = 8.0);

}  // namespace qbm

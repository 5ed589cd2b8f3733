#pragma once

// Phase-space moments m(j, k) = <x^j p^k> through total order 4 and their
// exact linear evolution for the free particle (V = 0).
//
// Integrating the Kolmogorov equation
//   dW/dt = -(p/M) dW/dx + 2 gamma d(pW)/dp + hbar^2 Delta d2W/dp2 - hbar^2 Lambda d2W/dxdp
// against x^j p^k gives
//   dm(j,k)/dt = (j/M) m(j-1,k+1) - 2 gamma k m(j,k)
//              + hbar^2 Delta k(k-1) m(j,k-2) - hbar^2 Lambda j k m(j-1,k-1),
// which closes order by order.

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qbm/ode.hpp"
#include "qbm/schedule.hpp"

namespace qbm {

inline constexpr int kMaxMomentOrder = 4;
inline constexpr int kMomentCount = (kMaxMomentOrder + 1) * (kMaxMomentOrder + 2) / 2;

/// Flat position of m(j, k): grouped by total order, then by k.
constexpr int moment_index(int j, int k) {
    const int n = j + k;
    return n * (n + 1) / 2 + k;
}

template <typename Scalar>
using MomentVector = Eigen::Matrix<Scalar, kMomentCount, 1>;

template <typename Scalar>
using MomentGenerator = Eigen::Matrix<Scalar, kMomentCount, kMomentCount>;

template <typename Scalar>
class MomentStateT {
public:
    MomentStateT() : m_(MomentVector<Scalar>::Zero()) { m_[0] = Scalar(1); }
    explicit MomentStateT(const MomentVector<Scalar>& m) : m_(m) {}

    /// Centered Gaussian with <x^2> = sx2, <p^2> = sp2, <xp>_sym = sxp.
    /// Fourth moments follow Isserlis' theorem.
    static MomentStateT gaussian(Scalar sx2, Scalar sp2, Scalar sxp = Scalar(0)) {
        MomentStateT s;
        s(2, 0) = sx2;
        s(1, 1) = sxp;
        s(0, 2) = sp2;
        s(4, 0) = Scalar(3) * sx2 * sx2;
        s(3, 1) = Scalar(3) * sx2 * sxp;
        s(2, 2) = sx2 * sp2 + Scalar(2) * sxp * sxp;
        s(1, 3) = Scalar(3) * sp2 * sxp;
        s(0, 4) = Scalar(3) * sp2 * sp2;
        return s;
    }

    Scalar& operator()(int j, int k) { return m_[moment_index(j, k)]; }
    Scalar operator()(int j, int k) const {
        if (j < 0 || k < 0 || j + k > kMaxMomentOrder) return Scalar(0);
        return m_[moment_index(j, k)];
    }

    const MomentVector<Scalar>& vector() const { return m_; }
    MomentVector<Scalar>& vector() { return m_; }

    /// Excess kurtosis of the coordinate marginal, m40 / m20^2 - 3.
    Scalar kurtosis() const {
        const Scalar v = (*this)(2, 0);
        require(v > 0, "kurtosis: vanishing coordinate variance");
        return (*this)(4, 0) / (v * v) - Scalar(3);
    }

    /// Returns an empty string when the state satisfies the moment invariants,
    /// otherwise a description of the first violation.
    std::string violation() const {
        const auto& s = *this;
        if (s(0, 0) != Scalar(1)) return "m(0,0) must equal 1";
        if (!(s(2, 0) > 0)) return "m(2,0) must be > 0";
        if (!(s(0, 2) > 0)) return "m(0,2) must be > 0";
        if (s(4, 0) < s(2, 0) * s(2, 0)) return "m(4,0) must be >= m(2,0)^2";
        if (s(0, 4) < s(0, 2) * s(0, 2)) return "m(0,4) must be >= m(0,2)^2";
        if (s(2, 0) * s(0, 2) < s(1, 1) * s(1, 1)) return "m(2,0) m(0,2) must be >= m(1,1)^2";
        return {};
    }

    void validate() const {
        if (auto v = violation(); !v.empty()) throw std::invalid_argument("MomentState: " + v);
    }

private:
    MomentVector<Scalar> m_;
};

using MomentState = MomentStateT<double>;

/// Matrix A with dm/dt = A m for the free particle. `diffusion` and
/// `cross_diffusion` are hbar^2 Delta and hbar^2 Lambda.
template <typename Scalar>
MomentGenerator<Scalar> moment_generator(const ModelParamsT<Scalar>& params, Scalar diffusion,
                                         Scalar cross_diffusion) {
    MomentGenerator<Scalar> A = MomentGenerator<Scalar>::Zero();
    for (int n = 0; n <= kMaxMomentOrder; ++n) {
        for (int k = 0; k <= n; ++k) {
            const int j = n - k;
            const int row = moment_index(j, k);
            if (j >= 1) A(row, moment_index(j - 1, k + 1)) += Scalar(j) / params.M;
            A(row, row) -= Scalar(2) * params.gamma * Scalar(k);
            if (k >= 2) A(row, moment_index(j, k - 2)) += diffusion * Scalar(k * (k - 1));
            if (j >= 1 && k >= 1) A(row, moment_index(j - 1, k - 1)) -= cross_diffusion * Scalar(j * k);
        }
    }
    return A;
}

/// Time derivative of all moments for given Delta and Lambda.
template <typename Scalar>
MomentStateT<Scalar> moment_derivative(const MomentStateT<Scalar>& state, const ModelParamsT<Scalar>& params,
                                       Scalar delta, Scalar lambda) {
    const Scalar h2 = params.hbar * params.hbar;
    return MomentStateT<Scalar>(moment_generator(params, h2 * delta, h2 * lambda) * state.vector());
}

template <typename Scalar>
struct MomentTrajectoryT {
    std::vector<double> times;
    std::vector<MomentStateT<Scalar>> states;
};

using MomentTrajectory = MomentTrajectoryT<double>;

/// Integrates the closed moment system on `t_grid` (which must start at 0).
/// Throws NumericalError with the offending time if the step size underflows.
template <typename Scalar>
MomentTrajectoryT<Scalar> evolve_moments(const MomentStateT<Scalar>& init, const KernelScheduleT<Scalar>& schedule,
                                         std::span<const double> t_grid, const OdeOptions& opts = {}) {
    init.validate();
    schedule.validate();
    require(!t_grid.empty() && t_grid.front() == 0.0, "evolve_moments: time grid must start at 0");

    const Scalar h2 = schedule.params.hbar * schedule.params.hbar;
    const MomentGenerator<Scalar> drift = moment_generator(schedule.params, Scalar(0), Scalar(0));
    const MomentGenerator<Scalar> unit_diffusion =
        moment_generator(schedule.params, Scalar(1), Scalar(0)) - drift;
    const MomentGenerator<Scalar> unit_cross = moment_generator(schedule.params, Scalar(0), Scalar(1)) - drift;

    auto rhs = [&](double t, const MomentVector<Scalar>& m) -> MomentVector<Scalar> {
        const Scalar ts(t);
        MomentVector<Scalar> dm = drift * m;
        dm.noalias() += (h2 * schedule.delta(ts)) * (unit_diffusion * m);
        if (schedule.kind == KernelKind::non_markov) dm.noalias() += (h2 * schedule.lambda(ts)) * (unit_cross * m);
        return dm;
    };

    auto raw = integrate_dopri5(rhs, init.vector(), t_grid, opts);
    MomentTrajectoryT<Scalar> traj;
    traj.times.assign(t_grid.begin(), t_grid.end());
    traj.states.reserve(raw.size());
    for (auto& v : raw) traj.states.emplace_back(v);
    return traj;
}

/// Pointwise excess kurtosis m40 / m20^2 - 3 along a trajectory.
template <typename Scalar>
std::vector<Scalar> kurtosis_trajectory(const MomentTrajectoryT<Scalar>& traj) {
    std::vector<Scalar> out;
    out.reserve(traj.states.size());
    for (const auto& s : traj.states) out.push_back(s.kurtosis());
    return out;
}

/// Uniform time grid with `points` entries on [0, t_end].
inline std::vector<double> uniform_grid(double t_end, std::size_t points) {
    require(points >= 2, "uniform_grid: need at least 2 points");
    require(t_end > 0, "uniform_grid: t_end must be > 0");
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i) t[i] = t_end * double(i) / double(points - 1);
    t.back() = t_end;
    return t;
}

}  // namespace qbm

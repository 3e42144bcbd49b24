#pragma once

#include "qmaxwell/density_matrix.hpp"
#include "qmaxwell/grid.hpp"

#include <Eigen/Dense>

namespace qmax {

/// Target local density n with its derived fields. Profiles are floored at
/// n_floor_rel * max(n) (every division by n in the dual potential, V_star
/// and omega needs strict positivity on the grid) and then normalized to
/// unit mass.
class ConstraintProfile {
public:
    static ConstraintProfile from_density(GridPtr grid, const Eigen::VectorXd& raw_density,
                                          double n_floor_rel = 1e-8);

    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXd& n() const { return n_; }
    const Eigen::VectorXd& sqrt_n() const { return sqrt_n_; }
    /// D sqrt(n), an edge vector.
    const Eigen::VectorXd& grad_sqrt_n() const { return grad_sqrt_n_; }
    double mass() const { return mass_; }
    double floor_value() const { return floor_value_; }

private:
    ConstraintProfile() = default;

    GridPtr grid_;
    Eigen::VectorXd n_;
    Eigen::VectorXd sqrt_n_;
    Eigen::VectorXd grad_sqrt_n_;
    double mass_{0.0};
    double floor_value_{0.0};
};

/// Multiplicative rescaling a rho a with a = sqrt(n / n[rho]), applied as a
/// diagonal congruence on the kernel. Restores n[rho] = n exactly and
/// preserves positivity. States already satisfying the constraint are
/// returned unchanged.
DensityMatrix rescale(const DensityMatrix& rho, const ConstraintProfile& target);

/// rho(t) = a(t) (rho + t |phi><phi|) a(t); admissible for every t >= 0.
DensityMatrix perturb_rank_one(const DensityMatrix& rho, const Eigen::VectorXd& phi, double t,
                               const ConstraintProfile& target);

enum class PairPhase { real_part, imaginary_part };

/// rho(t) = a(t) (rho + t P) a(t) with P = |phi_p><phi_q| + |phi_q><phi_p|
/// (real phase) or i|phi_p><phi_q| - i|phi_q><phi_p| (imaginary phase).
/// Positivity holds inside |t| <= t0 = min(rho_p, rho_q)/2; larger t is
/// rejected. The imaginary phase leaves the local density untouched (a == 1)
/// and yields a complex Hermitian state.
DensityMatrix perturb_pair(const DensityMatrix& rho, int p, int q, double t, PairPhase phase,
                           const ConstraintProfile& target);

/// phi_eps = phi * sqrt(n / (n + eps |phi|^2)); satisfies |phi_eps| <= |phi|
/// and |phi_eps| <= sqrt(n)/eps pointwise.
Eigen::VectorXd regularize_testfn(const Eigen::VectorXd& phi, const ConstraintProfile& target,
                                  double eps);

} // namespace qmax

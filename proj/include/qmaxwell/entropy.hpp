#pragma once

#include "qmaxwell/density_matrix.hpp"

#include <Eigen/Dense>

namespace qmax {

enum class EntropyKind { boltzmann, fermi_dirac };

/// Entropy function selector. eta > 0 selects the regularized Boltzmann
/// entropy beta_eta(x) = (x+eta) log(x+eta) - x - eta log(eta); eta applies
/// to the Boltzmann kind only.
struct EntropySpec {
    EntropyKind kind{EntropyKind::boltzmann};
    double temperature{1.0};
    double eta{0.0};

    void validate() const;
    EntropySpec with_eta(double new_eta) const;
};

/// beta(x), beta_eta(x) or the Fermi-Dirac value, with 0*log 0 := 0.
double entropy_value(double x, const EntropySpec& spec);

/// beta'(x) (log x, log(x+eta), or log(x/(1-x))), used by the solvers.
double entropy_derivative(double x, const EntropySpec& spec);

/// sum_p beta_spec(rho_p); eigenvalues below 1e-300 are treated as 0.
double entropy_sum(const Eigen::VectorXd& eigenvalues, const EntropySpec& spec);

struct FreeEnergy {
    double energy;  // E = Tr(sqrt(H0) rho sqrt(H0))
    double entropy; // S = Tr(beta(rho))
    double value;   // F = E + T*S
};

FreeEnergy free_energy(const DensityMatrix& rho, const EntropySpec& spec);

/// Slack in the logarithmic Sobolev inequality for systems (d = 1):
///   gap = sum_p rho_p log rho_p
///       + (1/2) log(e/(2 pi) * E(rho)/Tr rho) * Tr rho
///       - integral(n log n).
/// Nonnegative in the continuum; reported as a diagnostic with O(h) slack.
double log_sobolev_gap(const DensityMatrix& rho);

/// Entropy well-definedness bounds at Tr rho = 1:
///   0 <= -sum_p rho_p log rho_p <= (1/2) log(e E / (2 pi)) - integral(n log n).
struct EntropyBounds {
    double neg_entropy;
    double upper_bound;
};
EntropyBounds entropy_bounds(const DensityMatrix& rho);

} // namespace qmax

#pragma once

#include "qmaxwell/grid.hpp"

#include <Eigen/Dense>

namespace qmax {

/// Local fields of a density operator: density n[rho], kinetic energy k[rho]
/// (edge field averaged back to nodes) and entropy density n[rho log rho].
struct Moments {
    Eigen::VectorXd n;
    Eigen::VectorXd k;
    Eigen::VectorXd s_loc;
};

/// Discrete density operator in spectral form.
///
/// Conventions: the operator acts on node vectors as u -> h K u, where K is
/// the stored kernel matrix, so n[rho]_i = K_ii and Tr rho = h sum_i K_ii.
/// Eigenvalues are nonincreasing and >= 0; eigenvectors are orthonormal in
/// the h-weighted inner product.
///
/// The eigenvectors of states produced by real symmetric kernels are real.
/// The imaginary-phase pair perturbation produces a complex Hermitian state;
/// such states carry an imaginary eigenvector block and an antisymmetric
/// imaginary kernel part, and every moment formula reads |psi|^2 = re^2+im^2.
class DensityMatrix {
public:
    /// Spectral decomposition of the operator u -> h K u. K must be symmetric
    /// to 1e-10 and PSD up to -1e-10 on the operator eigenvalues; eigenvalues
    /// in [-1e-10, 0) are clamped to 0.
    static DensityMatrix from_kernel(const Eigen::MatrixXd& kernel, GridPtr grid);

    /// Build from eigendata (eigenvalues nonincreasing >= 0, columns
    /// h-orthonormal). evec_im may be empty (real state) or match evec_re.
    static DensityMatrix from_spectral(GridPtr grid, Eigen::VectorXd eigenvalues,
                                       Eigen::MatrixXd evec_re,
                                       Eigen::MatrixXd evec_im = Eigen::MatrixXd());

    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const Eigen::MatrixXd& eigenvectors() const { return evec_re_; }
    const Eigen::MatrixXd& eigenvectors_imag() const { return evec_im_; }
    bool is_real() const { return evec_im_.size() == 0; }
    int num_modes() const { return static_cast<int>(eigenvalues_.size()); }

    /// Real symmetric part of the kernel; diag(kernel()) is the local density.
    const Eigen::MatrixXd& kernel() const { return kernel_re_; }
    /// Antisymmetric imaginary kernel part (empty for real states).
    const Eigen::MatrixXd& kernel_imag() const { return kernel_im_; }

    double trace() const { return eigenvalues_.sum(); }

private:
    DensityMatrix() = default;

    GridPtr grid_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd evec_re_;
    Eigen::MatrixXd evec_im_;
    Eigen::MatrixXd kernel_re_;
    Eigen::MatrixXd kernel_im_;
};

/// Alias for DensityMatrix::from_kernel.
DensityMatrix spectral_decompose(const Eigen::MatrixXd& kernel, GridPtr grid);

/// K = sum_p rho_p phi_p phi_p^T recomputed from the eigendata (real part).
Eigen::MatrixXd assemble_kernel(const DensityMatrix& rho);

/// Local moments; 0*log 0 := 0 and eigenvalues below 1e-300 are skipped in
/// the entropy sums.
Moments moments(const DensityMatrix& rho);

/// E(rho) = Tr(sqrt(H0) rho sqrt(H0)) = sum_p rho_p <D phi_p, D phi_p>_h.
double kinetic_energy(const DensityMatrix& rho);

} // namespace qmax

#include "qmaxwell/density_matrix.hpp"

#include "qmaxwell/errors.hpp"
#include "qmaxwell/kernels.hpp"
#include "qmaxwell/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qmax {

namespace {

constexpr double kSymTol = 1e-10;
constexpr double kOrthoTol = 1e-10;
constexpr double kNegativeEigTol = 1e-10;
constexpr double kEntropyFloor = 1e-300;

void check_orthonormal(const Grid& grid, const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) {
    const double h = grid.spacing();
    const bool complex = im.size() != 0;
    for (Eigen::Index p = 0; p < re.cols(); ++p) {
        for (Eigen::Index q = p; q < re.cols(); ++q) {
            double dot_re = re.col(p).dot(re.col(q));
            double dot_im = 0.0;
            if (complex) {
                dot_re += im.col(p).dot(im.col(q));
                dot_im = re.col(p).dot(im.col(q)) - im.col(p).dot(re.col(q));
            }
            const double target = (p == q) ? 1.0 : 0.0;
            if (std::abs(h * dot_re - target) > kOrthoTol || std::abs(h * dot_im) > kOrthoTol) {
                throw numerical_error("density matrix: eigenvectors are not h-orthonormal (pair " +
                                      std::to_string(p) + "," + std::to_string(q) + ")");
            }
        }
    }
}

} // namespace

DensityMatrix DensityMatrix::from_kernel(const Eigen::MatrixXd& kernel, GridPtr grid) {
    const int n = grid->num_points();
    if (kernel.rows() != n || kernel.cols() != n) {
        throw config_error("density matrix: kernel size does not match grid");
    }
    const double scale = std::max(1.0, kernel.cwiseAbs().maxCoeff());
    if ((kernel - kernel.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale) {
        throw numerical_error("density matrix: kernel is not symmetric");
    }

    const double h = grid->spacing();
    EighResult eig = eigh(0.5 * h * (kernel + kernel.transpose()));
    canonicalize_signs(eig.eigenvectors);

    if (eig.eigenvalues.minCoeff() < -kNegativeEigTol) {
        throw numerical_error("density matrix: operator eigenvalue " +
                              std::to_string(eig.eigenvalues.minCoeff()) +
                              " below -1e-10; state is not PSD");
    }

    // Reorder nonincreasing, clamp the tolerated negative window to zero and
    // rescale eigenvectors to h-orthonormality.
    DensityMatrix rho;
    rho.grid_ = std::move(grid);
    rho.eigenvalues_.resize(n);
    rho.evec_re_.resize(n, n);
    const double inv_sqrt_h = 1.0 / std::sqrt(h);
    for (int p = 0; p < n; ++p) {
        const int src = n - 1 - p;
        rho.eigenvalues_[p] = std::max(eig.eigenvalues[src], 0.0);
        rho.evec_re_.col(p) = eig.eigenvectors.col(src) * inv_sqrt_h;
    }

    kernels::weighted_outer_sum(rho.evec_re_, rho.eigenvalues_, rho.kernel_re_);
    return rho;
}

DensityMatrix DensityMatrix::from_spectral(GridPtr grid, Eigen::VectorXd eigenvalues,
                                           Eigen::MatrixXd evec_re, Eigen::MatrixXd evec_im) {
    const int n = grid->num_points();
    if (evec_re.rows() != n || eigenvalues.size() != evec_re.cols()) {
        throw config_error("density matrix: inconsistent spectral data sizes");
    }
    if (evec_im.size() != 0 && (evec_im.rows() != evec_re.rows() || evec_im.cols() != evec_re.cols())) {
        throw config_error("density matrix: imaginary block size mismatch");
    }
    for (Eigen::Index p = 0; p < eigenvalues.size(); ++p) {
        if (eigenvalues[p] < -1e-12) {
            throw numerical_error("density matrix: negative eigenvalue in spectral data");
        }
        eigenvalues[p] = std::max(eigenvalues[p], 0.0);
        if (p > 0 && eigenvalues[p] > eigenvalues[p - 1] + 1e-12) {
            throw numerical_error("density matrix: eigenvalues must be nonincreasing");
        }
    }
    check_orthonormal(*grid, evec_re, evec_im);

    DensityMatrix rho;
    rho.grid_ = std::move(grid);
    rho.eigenvalues_ = std::move(eigenvalues);
    rho.evec_re_ = std::move(evec_re);
    rho.evec_im_ = std::move(evec_im);

    kernels::weighted_outer_sum(rho.evec_re_, rho.eigenvalues_, rho.kernel_re_);
    if (!rho.is_real()) {
        Eigen::MatrixXd imim;
        kernels::weighted_outer_sum(rho.evec_im_, rho.eigenvalues_, imim);
        rho.kernel_re_ += imim;
        // K_im = sum_p rho_p (im re^T - re im^T), antisymmetric.
        rho.kernel_im_ = rho.evec_im_ * rho.eigenvalues_.asDiagonal() * rho.evec_re_.transpose();
        rho.kernel_im_ -= rho.kernel_im_.transpose().eval();
    }
    return rho;
}

DensityMatrix spectral_decompose(const Eigen::MatrixXd& kernel, GridPtr grid) {
    return DensityMatrix::from_kernel(kernel, std::move(grid));
}

Eigen::MatrixXd assemble_kernel(const DensityMatrix& rho) {
    Eigen::MatrixXd k;
    kernels::weighted_outer_sum(rho.eigenvectors(), rho.eigenvalues(), k);
    if (!rho.is_real()) {
        Eigen::MatrixXd imim;
        kernels::weighted_outer_sum(rho.eigenvectors_imag(), rho.eigenvalues(), imim);
        k += imim;
    }
    return k;
}

Moments moments(const DensityMatrix& rho) {
    const Grid& grid = *rho.grid();
    const Eigen::VectorXd& w = rho.eigenvalues();

    Moments m;
    kernels::weighted_square_sum(rho.eigenvectors(), w, m.n);

    const Eigen::MatrixXd& d = grid.gradient().matrix;
    Eigen::MatrixXd dv = d * rho.eigenvectors();
    Eigen::VectorXd kinetic_edges;
    kernels::weighted_square_sum(dv, w, kinetic_edges);

    Eigen::VectorXd entropy_weights(w.size());
    for (Eigen::Index p = 0; p < w.size(); ++p) {
        entropy_weights[p] = (w[p] < kEntropyFloor) ? 0.0 : w[p] * std::log(w[p]);
    }
    kernels::weighted_square_sum(rho.eigenvectors(), entropy_weights, m.s_loc);

    if (!rho.is_real()) {
        Eigen::VectorXd tmp;
        kernels::weighted_square_sum(rho.eigenvectors_imag(), w, tmp);
        m.n += tmp;
        Eigen::MatrixXd dvi = d * rho.eigenvectors_imag();
        kernels::weighted_square_sum(dvi, w, tmp);
        kinetic_edges += tmp;
        kernels::weighted_square_sum(rho.eigenvectors_imag(), entropy_weights, tmp);
        m.s_loc += tmp;
    }

    m.k = grid.edge_to_node_average(kinetic_edges);
    return m;
}

double kinetic_energy(const DensityMatrix& rho) {
    const Grid& grid = *rho.grid();
    const Eigen::MatrixXd& d = grid.gradient().matrix;
    const double h = grid.spacing();
    Eigen::MatrixXd dv = d * rho.eigenvectors();
    double e = 0.0;
    for (int p = 0; p < rho.num_modes(); ++p) {
        e += rho.eigenvalues()[p] * h * dv.col(p).squaredNorm();
    }
    if (!rho.is_real()) {
        Eigen::MatrixXd dvi = d * rho.eigenvectors_imag();
        for (int p = 0; p < rho.num_modes(); ++p) {
            e += rho.eigenvalues()[p] * h * dvi.col(p).squaredNorm();
        }
    }
    return e;
}

} // namespace qmax

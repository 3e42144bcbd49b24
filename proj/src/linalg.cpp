#include "qmaxwell/linalg.hpp"

#include "qmaxwell/errors.hpp"

#include <cmath>

namespace qmax {

EighResult eigh(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw numerical_error("eigh: symmetric eigendecomposition failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

void canonicalize_signs(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
            const double a = std::abs(vectors(i, c));
            if (a > best) {
                best = a;
                imax = i;
            }
        }
        if (vectors(imax, c) < 0.0) {
            vectors.col(c) = -vectors.col(c);
        }
    }
}

double trace_norm(const Eigen::MatrixXd& sym) {
    return eigh(sym).eigenvalues.cwiseAbs().sum();
}

} // namespace qmax

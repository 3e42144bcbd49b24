#pragma once

#include <Eigen/Dense>

namespace qmax {

struct EighResult {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // orthonormal columns
};

/// Dense symmetric eigendecomposition (throws numerical_error on failure).
EighResult eigh(const Eigen::MatrixXd& sym);

/// Fix the sign of each column so its largest-magnitude entry (lowest index
/// on ties) is positive. Removes the eigensolver's sign ambiguity so runs are
/// reproducible byte for byte.
void canonicalize_signs(Eigen::MatrixXd& vectors);

/// sum |eigenvalues| of a symmetric matrix (trace norm).
double trace_norm(const Eigen::MatrixXd& sym);

} // namespace qmax

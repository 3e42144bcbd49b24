#pragma once

#include <Eigen/Dense>

// Compute kernels used by the hot paths (moment assembly, kernel assembly,
// dual Newton Jacobian). Every kernel exists in two variants:
//
//   *_serial    reference implementation, plain loops
//   *_parallel  OpenMP, parallelized over output elements
//
// The parallel variants assign each output element to exactly one thread and
// keep the inner summation order identical to the serial reference, so both
// variants produce bit-identical results for any thread count. Tests assert
// exact equality; bench/ compares their throughput.

namespace qmax::kernels {

enum class Exec { serial, parallel };

/// Process-wide default used by the dispatching wrappers.
Exec default_exec();
void set_default_exec(Exec e);

/// out[i] = sum_p w[p] * V(i,p)^2.
/// V is (rows x modes); used for local density, local entropy density and
/// (applied to D*V) the edge kinetic density.
void weighted_square_sum_serial(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                                Eigen::VectorXd& out);
void weighted_square_sum_parallel(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                                  Eigen::VectorXd& out);
void weighted_square_sum(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                         Eigen::VectorXd& out, Exec exec = default_exec());

/// out = sum_p w[p] * v_p v_p^T (symmetric).
void weighted_outer_sum_serial(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                               Eigen::MatrixXd& out);
void weighted_outer_sum_parallel(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                                 Eigen::MatrixXd& out);
void weighted_outer_sum(const Eigen::MatrixXd& V, const Eigen::VectorXd& w,
                        Eigen::MatrixXd& out, Exec exec = default_exec());

/// out(i,j) = sum_{p,q} G(p,q) * V(i,p) V(i,q) V(j,p) V(j,q) (symmetric).
/// This is the divided-difference (Daleckii-Krein) response of the diagonal of
/// a spectral function to diagonal perturbations; G holds the divided
/// differences in the eigenbasis V.
void divided_difference_response_serial(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                        Eigen::MatrixXd& out);
void divided_difference_response_parallel(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                          Eigen::MatrixXd& out);
void divided_difference_response(const Eigen::MatrixXd& V, const Eigen::MatrixXd& G,
                                 Eigen::MatrixXd& out, Exec exec = default_exec());

} // namespace qmax::kernels

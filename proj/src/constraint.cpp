#include "qmaxwell/constraint.hpp"

#include "qmaxwell/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace qmax {

ConstraintProfile ConstraintProfile::from_density(GridPtr grid, const Eigen::VectorXd& raw_density,
                                                  double n_floor_rel) {
    if (raw_density.size() != grid->num_points()) {
        throw config_error("profile: density length does not match grid");
    }
    if (!(n_floor_rel > 0.0)) {
        throw config_error("profile: n_floor must be positive");
    }
    const double peak = raw_density.maxCoeff();
    if (!(peak > 0.0)) {
        throw config_error("profile: density must be positive somewhere");
    }

    ConstraintProfile p;
    p.floor_value_ = n_floor_rel * peak;
    p.n_ = raw_density.cwiseMax(p.floor_value_);
    p.n_ /= grid->integrate(p.n_);
    p.floor_value_ = p.n_.minCoeff();
    p.mass_ = grid->integrate(p.n_);
    p.sqrt_n_ = p.n_.cwiseSqrt();
    p.grad_sqrt_n_ = grid->gradient().matrix * p.sqrt_n_;
    p.grid_ = std::move(grid);
    return p;
}

DensityMatrix rescale(const DensityMatrix& rho, const ConstraintProfile& target) {
    if (!rho.is_real()) {
        throw config_error("rescale: complex states are not rescaled");
    }
    const Eigen::VectorXd current = rho.kernel().diagonal();
    if (current.minCoeff() <= 0.0) {
        throw numerical_error("rescale: state has vanishing local density at a node");
    }
    Eigen::VectorXd a = (target.n().array() / current.array()).sqrt();
    if (((a.array() - 1.0).abs() <= 1e-13).all()) {
        return rho; // already admissible to machine precision
    }
    const Eigen::MatrixXd scaled = a.asDiagonal() * rho.kernel() * a.asDiagonal();
    return DensityMatrix::from_kernel(scaled, rho.grid());
}

DensityMatrix perturb_rank_one(const DensityMatrix& rho, const Eigen::VectorXd& phi, double t,
                               const ConstraintProfile& target) {
    if (t < 0.0) {
        throw config_error("perturb_rank_one: positivity requires t >= 0");
    }
    if (phi.size() != rho.grid()->num_points()) {
        throw config_error("perturb_rank_one: phi length does not match grid");
    }
    if (t == 0.0 || phi.isZero(0.0)) return rho;
    const Eigen::MatrixXd perturbed = rho.kernel() + t * (phi * phi.transpose());
    return rescale(DensityMatrix::from_kernel(perturbed, rho.grid()), target);
}

DensityMatrix perturb_pair(const DensityMatrix& rho, int p, int q, double t, PairPhase phase,
                           const ConstraintProfile& target) {
    const int m = rho.num_modes();
    if (p < 0 || q < 0 || p >= m || q >= m) {
        throw config_error("perturb_pair: mode index out of range");
    }
    if (!rho.is_real()) {
        throw config_error("perturb_pair: input state must be real");
    }
    if (phase == PairPhase::imaginary_part && p == q) {
        throw config_error("perturb_pair: imaginary phase requires p != q");
    }
    const double rho_p = rho.eigenvalues()[p];
    const double rho_q = rho.eigenvalues()[q];
    const double t0 = 0.5 * std::min(rho_p, rho_q);
    if (std::abs(t) > t0) {
        throw config_error("perturb_pair: |t| exceeds the positivity window min(rho_p,rho_q)/2");
    }
    if (t == 0.0) return rho;

    const Eigen::VectorXd phi_p = rho.eigenvectors().col(p);
    const Eigen::VectorXd phi_q = rho.eigenvectors().col(q);

    if (phase == PairPhase::real_part) {
        Eigen::MatrixXd perturbed = rho.kernel();
        perturbed += t * (phi_p * phi_q.transpose() + phi_q * phi_p.transpose());
        return rescale(DensityMatrix::from_kernel(perturbed, rho.grid()), target);
    }

    // Imaginary phase: the perturbed local density is n - 2 t Im(phi_p phi_q*)
    // which vanishes for a real eigenbasis, so a == 1 and no rescaling
    // happens. The update only touches the (p,q) block:
    //   [[rho_p, i t], [-i t, rho_q]]
    // with eigenvalues mean +- s and complex eigenvectors mixing phi_p into
    // the imaginary part.
    const double mean = 0.5 * (rho_p + rho_q);
    const double d = 0.5 * (rho_p - rho_q);
    const double s = std::hypot(d, t);
    const double lam_plus = mean + s;
    // lam_minus = mean - s without cancellation (mean^2 - s^2 = rho_p rho_q - t^2)
    const double lam_minus = (rho_p * rho_q - t * t) / (mean + s);
    // beta_pm = lam_pm - rho_p; the difference s -+ d cancels, so use
    // s - d = t^2/(s + d) on the safe branch.
    const double beta_plus = (d >= 0.0) ? t * t / (s + d) : s - d;
    const double beta_minus = (d >= 0.0) ? -(s + d) : -t * t / (s - d);

    const int n = rho.grid()->num_points();
    struct Mode {
        double value;
        Eigen::VectorXd re;
        Eigen::VectorXd im;
    };
    std::vector<Mode> modes;
    modes.reserve(m);
    for (int j = 0; j < m; ++j) {
        if (j == p || j == q) continue;
        modes.push_back({rho.eigenvalues()[j], rho.eigenvectors().col(j), Eigen::VectorXd::Zero(n)});
    }
    for (auto [lam, beta] : {std::pair{lam_plus, beta_plus}, std::pair{lam_minus, beta_minus}}) {
        const double r = std::hypot(t, beta);
        modes.push_back({lam, (beta / r) * phi_q, (t / r) * phi_p});
    }
    std::stable_sort(modes.begin(), modes.end(),
                     [](const Mode& a, const Mode& b) { return a.value > b.value; });

    Eigen::VectorXd values(m);
    Eigen::MatrixXd re(n, m), im(n, m);
    for (int j = 0; j < m; ++j) {
        values[j] = modes[j].value;
        re.col(j) = modes[j].re;
        im.col(j) = modes[j].im;
    }
    return DensityMatrix::from_spectral(rho.grid(), values, re, im);
}

Eigen::VectorXd regularize_testfn(const Eigen::VectorXd& phi, const ConstraintProfile& target,
                                  double eps) {
    if (!(eps > 0.0)) {
        throw config_error("regularize_testfn: eps must be positive");
    }
    if (phi.size() != target.grid()->num_points()) {
        throw config_error("regularize_testfn: phi length does not match grid");
    }
    const Eigen::VectorXd& n = target.n();
    Eigen::VectorXd out(phi.size());
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
        out[i] = phi[i] * std::sqrt(n[i] / (n[i] + eps * phi[i] * phi[i]));
    }
    return out;
}

} // namespace qmax

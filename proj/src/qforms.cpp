#include "qmaxwell/qforms.hpp"

#include "qmaxwell/errors.hpp"
#include "qmaxwell/kernels.hpp"
#include "qmaxwell/linalg.hpp"

#include <array>
#include <cmath>
#include <string>

namespace qmax {

namespace {

constexpr double kLogFloor = 1e-300;

double safe_log(double x) { return std::log(std::max(x, kLogFloor)); }

/// n[rho log(eta + rho)] on nodes.
Eigen::VectorXd regularized_entropy_density(const DensityMatrix& rho, double eta) {
    Eigen::VectorXd w(rho.num_modes());
    for (int p = 0; p < rho.num_modes(); ++p) {
        const double lam = rho.eigenvalues()[p];
        w[p] = (lam < kLogFloor && eta == 0.0) ? 0.0 : lam * std::log(lam + eta);
    }
    Eigen::VectorXd out;
    kernels::weighted_square_sum(rho.eigenvectors(), w, out);
    return out;
}

} // namespace

QFormContext build_qform_context(std::shared_ptr<const Equilibrium> eq) {
    if (!eq) {
        throw config_error("qform context: null equilibrium");
    }
    const Grid& grid = *eq->problem.grid;
    const ConstraintProfile& target = eq->problem.target;

    QFormContext ctx;
    ctx.grad_n = grid.gradient().matrix * target.n();
    ctx.dsqrt_n_sq_avg =
        grid.edge_to_node_average(target.grad_sqrt_n().array().square().matrix());
    ctx.v_star = (ctx.dsqrt_n_sq_avg - eq->moments.s_loc).cwiseQuotient(target.n());
    ctx.k_over_n = eq->moments.k.cwiseQuotient(target.n());
    ctx.omega = Eigen::VectorXd::Ones(grid.num_points()) + ctx.v_star + ctx.k_over_n;
    ctx.eq = std::move(eq);
    return ctx;
}

double qform(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const QFormContext& ctx,
             QFormVariant variant, double eta) {
    if (!ctx.eq) {
        throw config_error("qform: context not built");
    }
    const Equilibrium& eq = *ctx.eq;
    const Grid& grid = *eq.problem.grid;
    const int n_pts = grid.num_points();
    if (u.size() != n_pts || v.size() != n_pts) {
        throw config_error("qform: vector length does not match grid");
    }
    const double h = grid.spacing();
    const Eigen::MatrixXd& d = grid.gradient().matrix;
    const Eigen::VectorXd& n = eq.problem.target.n();

    switch (variant) {
    case QFormVariant::qe: {
        const Eigen::VectorXd du = d * u;
        const Eigen::VectorXd dv = d * v;
        const Eigen::VectorXd psi = u.cwiseProduct(v).cwiseQuotient(n);
        const double t1 = h * du.dot(dv);
        const double t2 = -0.5 * h * (d * psi).dot(ctx.grad_n);
        const double t3 = -h * ctx.k_over_n.cwiseProduct(u).dot(v);
        return t1 + t2 + t3;
    }
    case QFormVariant::qstar_integral: {
        const Eigen::VectorXd& sqrt_n = eq.problem.target.sqrt_n();
        const Eigen::VectorXd wu = u.cwiseQuotient(sqrt_n);
        const Eigen::VectorXd wv = v.cwiseQuotient(sqrt_n);
        const Eigen::VectorXd prod =
            grid.edge_to_node_average((d * wu).cwiseProduct(d * wv));
        const double div_part = h * n.cwiseProduct(prod).sum();
        const double pot_part = h * (ctx.v_star - ctx.k_over_n).cwiseProduct(u).dot(v);
        return div_part + pot_part;
    }
    case QFormVariant::qstar_operator: {
        const double t = eq.problem.entropy.temperature;
        const Eigen::VectorXd du = d * u;
        const Eigen::VectorXd dv = d * v;
        return (h * du.dot(dv) - h * eq.dual_potential.cwiseProduct(u).dot(v)) / t;
    }
    case QFormVariant::qeta: {
        if (!(eta > 0.0)) {
            throw config_error("qform: the qeta variant requires eta > 0");
        }
        const Eigen::VectorXd sreg = regularized_entropy_density(eq.rho, eta);
        const double qe = qform(u, v, ctx, QFormVariant::qe);
        return qe - h * sreg.cwiseQuotient(n).cwiseProduct(u).dot(v);
    }
    }
    throw config_error("qform: unknown variant");
}

Eigen::VectorXd chemical_potential(const Equilibrium& eq) {
    const Grid& grid = *eq.problem.grid;
    const ConstraintProfile& target = eq.problem.target;
    if (target.n().minCoeff() <= 0.0) {
        throw numerical_error("chemical_potential: density not strictly positive");
    }
    const Eigen::VectorXd bohm =
        (grid.laplacian().matrix * target.sqrt_n()).cwiseQuotient(target.sqrt_n());
    const Eigen::VectorXd dsq =
        grid.edge_to_node_average(target.grad_sqrt_n().array().square().matrix());
    return -bohm + (dsq - eq.moments.s_loc - eq.moments.k).cwiseQuotient(target.n());
}

ChemicalPotentialComparison compare_chemical_potential(const Equilibrium& eq) {
    ChemicalPotentialComparison cmp;
    cmp.moment_formula = chemical_potential(eq);
    const Eigen::VectorXd sum = cmp.moment_formula + eq.dual_potential;
    cmp.mean_offset = sum.mean();
    cmp.max_mismatch = (sum.array() - cmp.mean_offset).abs().maxCoeff();
    return cmp;
}

double el_residual(const Equilibrium& eq, int max_mode) {
    const int pmax = std::min(max_mode, eq.rho.num_modes() - 1);
    QFormContext ctx = build_qform_context(std::make_shared<Equilibrium>(eq));
    double worst = 0.0;
    for (int p = 0; p <= pmax; ++p) {
        for (int q = 0; q <= pmax; ++q) {
            const double form = qform(eq.rho.eigenvectors().col(p), eq.rho.eigenvectors().col(q),
                                      ctx, QFormVariant::qstar_operator);
            const double expected = (p == q) ? -safe_log(eq.rho.eigenvalues()[p]) : 0.0;
            worst = std::max(worst, std::abs(form - expected));
        }
    }
    return worst;
}

double minmax_eigen(const Equilibrium& eq, int p) {
    const Grid& grid = *eq.problem.grid;
    const int n = grid.num_points();
    if (p < 0 || p >= n) {
        throw config_error("minmax_eigen: mode index out of range");
    }
    const double t = eq.problem.entropy.temperature;
    Eigen::MatrixXd ham = grid.laplacian().matrix;
    ham.diagonal() -= eq.dual_potential;
    ham /= t;

    if (p == 0) {
        return eigh(ham).eigenvalues[0];
    }
    // Orthonormal basis of the complement of span{phi_0..phi_{p-1}} in the
    // Euclidean coordinates v = sqrt(h) phi.
    Eigen::MatrixXd constraints =
        eq.rho.eigenvectors().leftCols(p) * std::sqrt(grid.spacing());
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(constraints);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd complement = q.rightCols(n - p);
    Eigen::MatrixXd projected = complement.transpose() * ham * complement;
    projected = 0.5 * (projected + projected.transpose()).eval();
    return eigh(projected).eigenvalues[0];
}

HNormResult h_norm(const Eigen::VectorXd& phi, const Equilibrium& eq) {
    const Grid& grid = *eq.problem.grid;
    if (phi.size() != grid.num_points()) {
        throw config_error("h_norm: vector length does not match grid");
    }
    HNormResult r{0.0, 0.0, false};
    for (int p = 0; p < eq.rho.num_modes(); ++p) {
        const double rho_p = eq.rho.eigenvalues()[p];
        if (rho_p <= 0.0) {
            throw numerical_error("h_norm: zero eigenvalue (full-rank violation upstream)");
        }
        const double c = grid.inner(eq.rho.eigenvectors().col(p), phi);
        r.hnorm += -std::log(rho_p) * c * c;
    }
    QFormContext ctx = build_qform_context(std::make_shared<Equilibrium>(eq));
    r.qstar = qform(phi, phi, ctx, QFormVariant::qstar_operator);
    r.satisfied = r.hnorm <= r.qstar + 1e-8;
    return r;
}

namespace {

/// Lagrange extrapolation of one-sided difference quotients to t = 0.
double richardson(const std::array<double, 3>& ts, const std::array<double, 3>& quotients) {
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
        double weight = 1.0;
        for (int j = 0; j < 3; ++j) {
            if (j == k) continue;
            weight *= ts[j] / (ts[j] - ts[k]);
        }
        acc += weight * quotients[k];
    }
    return acc;
}

} // namespace

DerivativeChecks derivative_checks(const Equilibrium& eq, const Eigen::VectorXd& phi, double eta) {
    if (!(eta > 0.0)) {
        throw config_error("derivative_checks: eta must be positive");
    }
    const Grid& grid = *eq.problem.grid;
    const ConstraintProfile& target = eq.problem.target;
    const EntropySpec spec_eta = eq.problem.entropy.with_eta(eta);

    // Pin the baseline onto the constraint first: the equilibrium satisfies
    // n[rho] = n only to the solver residual, and the perturbation path
    // rescales onto n exactly, so an unpinned baseline would put a 0+ jump
    // of that size into the difference quotients.
    const DensityMatrix base = rescale(eq.rho, target);
    const double e0 = kinetic_energy(base);
    const double s0 = entropy_sum(base.eigenvalues(), spec_eta);

    const std::array<double, 3> ts = {1e-3, 1e-4, 1e-5};
    std::array<double, 3> de{}, ds{};
    for (int k = 0; k < 3; ++k) {
        DensityMatrix perturbed = perturb_rank_one(base, phi, ts[k], target);
        de[k] = (kinetic_energy(perturbed) - e0) / ts[k];
        ds[k] = (entropy_sum(perturbed.eigenvalues(), spec_eta) - s0) / ts[k];
    }

    DerivativeChecks out{};
    out.energy_fd = richardson(ts, de);
    out.entropy_fd = richardson(ts, ds);

    QFormContext ctx = build_qform_context(std::make_shared<Equilibrium>(eq));
    out.energy_form = qform(phi, phi, ctx, QFormVariant::qe);

    // Trace formula at s = 0: Tr(log(eta+rho) P_phi) - Tr(rho log(eta+rho) |phi|^2/n).
    double term1 = 0.0;
    for (int p = 0; p < eq.rho.num_modes(); ++p) {
        const double c = grid.inner(eq.rho.eigenvectors().col(p), phi);
        term1 += std::log(eta + eq.rho.eigenvalues()[p]) * c * c;
    }
    const Eigen::VectorXd sreg = regularized_entropy_density(eq.rho, eta);
    const double term2 =
        grid.spacing() * sreg.cwiseProduct(phi.array().square().matrix()).cwiseQuotient(target.n()).sum();
    out.entropy_formula = term1 - term2;

    out.energy_rel_err =
        std::abs(out.energy_fd - out.energy_form) / std::max(std::abs(out.energy_form), 1e-30);
    out.entropy_rel_err =
        std::abs(out.entropy_fd - out.entropy_formula) / std::max(std::abs(out.entropy_formula), 1e-30);
    return out;
}

MaxwellianResidual maxwellian_residual(const Equilibrium& eq) {
    if (eq.problem.entropy.kind != EntropyKind::boltzmann) {
        throw config_error("maxwellian_residual: defined for the Boltzmann entropy");
    }
    const Grid& grid = *eq.problem.grid;
    const double h = grid.spacing();
    const double t = eq.problem.entropy.temperature;
    const Eigen::MatrixXd x = h * eq.rho.kernel();
    const double x_norm = x.norm();

    auto gibbs_residual = [&](const Eigen::VectorXd& a) {
        Eigen::MatrixXd ham = grid.laplacian().matrix;
        ham.diagonal() -= a;
        EighResult eig = eigh(ham);
        Eigen::VectorXd occ(eig.eigenvalues.size());
        for (Eigen::Index p = 0; p < occ.size(); ++p) {
            occ[p] = std::exp(-eig.eigenvalues[p] / t);
        }
        Eigen::MatrixXd gibbs;
        kernels::weighted_outer_sum(eig.eigenvectors, occ, gibbs);
        return (x - gibbs).norm() / x_norm;
    };

    MaxwellianResidual r{};
    r.operator_form = gibbs_residual(eq.dual_potential);

    const Eigen::VectorXd a_mom = chemical_potential(eq);
    Eigen::VectorXd a_shift = -a_mom;
    a_shift.array() += eq.dual_potential.mean() - a_shift.mean();
    r.moment_form = gibbs_residual(a_shift);
    return r;
}

} // namespace qmax

#include "qmaxwell/solve.hpp"

#include "qmaxwell/errors.hpp"
#include "qmaxwell/kernels.hpp"
#include "qmaxwell/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmax {

namespace {

constexpr double kGradFloor = 1e-8;   // entropy-gradient clamp: tail modes below this stay parked at zero
constexpr double kLogFloor = 1e-300;

double stable_logistic(double x) { // 1/(1+e^x)
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double occupancy(double lambda, const EntropySpec& spec) {
    if (spec.kind == EntropyKind::boltzmann) return std::exp(-lambda / spec.temperature);
    return stable_logistic(lambda / spec.temperature);
}

double occupancy_derivative(double lambda, const EntropySpec& spec) {
    if (spec.kind == EntropyKind::boltzmann) {
        return -std::exp(-lambda / spec.temperature) / spec.temperature;
    }
    const double g = stable_logistic(lambda / spec.temperature);
    return -g * (1.0 - g) / spec.temperature;
}

/// Divided differences of the occupancy over the spectrum, with the stable
/// switch to g' at the midpoint for near-degenerate pairs.
Eigen::MatrixXd divided_differences(const Eigen::VectorXd& lambda, const EntropySpec& spec) {
    const Eigen::Index n = lambda.size();
    Eigen::MatrixXd g(n, n);
    Eigen::VectorXd occ(n);
    for (Eigen::Index p = 0; p < n; ++p) occ[p] = occupancy(lambda[p], spec);
    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = p; q < n; ++q) {
            const double gap = lambda[p] - lambda[q];
            const double scale = std::max({1.0, std::abs(lambda[p]), std::abs(lambda[q])});
            double v;
            if (std::abs(gap) < 1e-8 * scale) {
                v = occupancy_derivative(0.5 * (lambda[p] + lambda[q]), spec);
            } else {
                v = (occ[p] - occ[q]) / gap;
            }
            g(p, q) = v;
            g(q, p) = v;
        }
    }
    return g;
}

/// Exact-symmetric diagonal congruence diag(a) X diag(a).
Eigen::MatrixXd diag_congruence(const Eigen::VectorXd& a, const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = a[i] * x(i, j) * a[j];
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

/// Build the returned DensityMatrix from a Euclidean eigendecomposition of
/// the operator matrix (eigenvalues ascending).
DensityMatrix state_from_operator_eig(const GridPtr& grid, const Eigen::VectorXd& lambda_asc,
                                      Eigen::MatrixXd vectors, bool values_are_occupancies,
                                      const EntropySpec& spec) {
    const int n = grid->num_points();
    canonicalize_signs(vectors);
    Eigen::VectorXd values(n);
    Eigen::MatrixXd evec(n, n);
    const double inv_sqrt_h = 1.0 / std::sqrt(grid->spacing());
    for (int p = 0; p < n; ++p) {
        // ascending Hamiltonian eigenvalues <-> nonincreasing occupancies
        const int src = values_are_occupancies ? (n - 1 - p) : p;
        values[p] = values_are_occupancies ? std::max(lambda_asc[src], 0.0)
                                           : occupancy(lambda_asc[src], spec);
        evec.col(p) = vectors.col(src) * inv_sqrt_h;
    }
    return DensityMatrix::from_spectral(grid, values, evec);
}

struct DualEval {
    Eigen::VectorXd lambda; // ascending spectrum of L - diag(A)
    Eigen::MatrixXd vectors;
    Eigen::VectorXd occ;
    Eigen::VectorXd n_model;
    Eigen::VectorXd residual;
    double residual_inf{0.0};
};

DualEval evaluate_dual(const Problem& problem, const Eigen::VectorXd& a) {
    const Grid& grid = *problem.grid;
    const double h = grid.spacing();
    Eigen::MatrixXd m = grid.laplacian().matrix;
    m.diagonal() -= a;

    DualEval ev;
    EighResult eig = eigh(m);
    ev.lambda = std::move(eig.eigenvalues);
    ev.vectors = std::move(eig.eigenvectors);
    ev.occ.resize(ev.lambda.size());
    for (Eigen::Index p = 0; p < ev.lambda.size(); ++p) {
        ev.occ[p] = occupancy(ev.lambda[p], problem.entropy);
    }
    kernels::weighted_square_sum(ev.vectors, ev.occ, ev.n_model);
    ev.n_model /= h;
    ev.residual = ev.n_model - problem.target.n();
    ev.residual_inf = ev.residual.cwiseAbs().maxCoeff();
    return ev;
}

Eigen::VectorXd initial_dual_guess(const Problem& problem) {
    const double h = problem.grid->spacing();
    const double t = problem.entropy.temperature;
    const Eigen::VectorXd& n = problem.target.n();
    Eigen::VectorXd a(n.size());
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        const double u = std::clamp(h * n[i], 1e-300, 1.0 - 1e-12);
        if (problem.entropy.kind == EntropyKind::boltzmann) {
            a[i] = t * std::log(u);
        } else {
            a[i] = t * (std::log(u) - std::log1p(-u));
        }
    }
    return a;
}

Eigen::VectorXd warmup_update(const Problem& problem, const Eigen::VectorXd& n_model) {
    const double h = problem.grid->spacing();
    const double t = problem.entropy.temperature;
    const Eigen::VectorXd& n = problem.target.n();
    Eigen::VectorXd delta(n.size());
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        const double um = std::clamp(h * n_model[i], 1e-300, 1.0 - 1e-12);
        const double ut = std::clamp(h * n[i], 1e-300, 1.0 - 1e-12);
        if (problem.entropy.kind == EntropyKind::boltzmann) {
            delta[i] = t * (std::log(ut) - std::log(um));
        } else {
            delta[i] = t * ((std::log(ut) - std::log1p(-ut)) - (std::log(um) - std::log1p(-um)));
        }
    }
    return delta;
}

Eigen::VectorXd clamped_log_weights(const Eigen::VectorXd& eigen_desc, const EntropySpec& spec) {
    Eigen::VectorXd w(eigen_desc.size());
    for (Eigen::Index p = 0; p < eigen_desc.size(); ++p) {
        w[p] = spec.temperature * std::log(std::max(eigen_desc[p], kLogFloor) + spec.eta);
    }
    return w;
}

} // namespace

Eigen::VectorXd recover_dual_potential(const DensityMatrix& rho, const EntropySpec& spec) {
    const Grid& grid = *rho.grid();
    const double h = grid.spacing();
    Eigen::MatrixXd v = rho.eigenvectors() * std::sqrt(h);
    Eigen::MatrixXd w;
    kernels::weighted_outer_sum(v, clamped_log_weights(rho.eigenvalues(), spec), w);
    return (grid.laplacian().matrix + w).diagonal();
}

Equilibrium solve_dual(const Problem& problem, const DualOptions& options) {
    problem.entropy.validate();
    if (problem.entropy.eta != 0.0) {
        throw config_error("solve_dual: requires eta == 0 (use solve_primal for F_eta)");
    }
    if (!(options.tol > 0.0) || options.max_iter < 1 ||
        !(options.damping > 0.0 && options.damping < 1.0)) {
        throw config_error("solve_dual: invalid options");
    }
    const Grid& grid = *problem.grid;
    const double h = grid.spacing();

    Eigen::VectorXd a = initial_dual_guess(problem);
    DualEval ev = evaluate_dual(problem, a);

    SolveDiagnostics diag;
    diag.solver = SolverKind::dual_newton;
    diag.residual_history.push_back(ev.residual_inf);

    for (int warm = 0; warm < options.warmup_iterations && ev.residual_inf > options.tol; ++warm) {
        Eigen::VectorXd trial_a = a + warmup_update(problem, ev.n_model);
        DualEval trial = evaluate_dual(problem, trial_a);
        if (!(trial.residual_inf < ev.residual_inf)) break;
        a = std::move(trial_a);
        ev = std::move(trial);
        diag.residual_history.push_back(ev.residual_inf);
    }

    bool line_search_failed = false;
    int iter = 0;
    for (; iter < options.max_iter && ev.residual_inf > options.tol; ++iter) {
        const Eigen::MatrixXd gamma = divided_differences(ev.lambda, problem.entropy);
        Eigen::MatrixXd jac;
        kernels::divided_difference_response(ev.vectors, gamma, jac);
        jac *= -1.0 / h;

        Eigen::LDLT<Eigen::MatrixXd> ldlt(jac);
        Eigen::VectorXd step = ldlt.solve(-ev.residual);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            throw solver_error("solve_dual: singular Newton Jacobian (degenerate profile)");
        }

        double s = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            Eigen::VectorXd trial_a = a + s * step;
            DualEval trial = evaluate_dual(problem, trial_a);
            if (trial.residual_inf < ev.residual_inf) {
                a = std::move(trial_a);
                ev = std::move(trial);
                accepted = true;
                break;
            }
            s *= options.damping;
        }
        diag.residual_history.push_back(ev.residual_inf);
        if (!accepted) {
            line_search_failed = true;
            break;
        }
    }

    DensityMatrix rho = state_from_operator_eig(problem.grid, ev.lambda, ev.vectors,
                                                /*values_are_occupancies=*/false, problem.entropy);
    Equilibrium eq{problem, std::move(rho), a, Moments{}, diag};
    eq.moments = moments(eq.rho);
    eq.diagnostics.iterations = iter;
    eq.diagnostics.constraint_residual = ev.residual_inf;
    eq.diagnostics.gradient_norm = ev.residual_inf;
    eq.diagnostics.converged = ev.residual_inf <= options.tol;
    eq.diagnostics.line_search_warning = line_search_failed;
    eq.diagnostics.free_energy = free_energy(eq.rho, problem.entropy).value;
    return eq;
}

namespace {

struct PrimalState {
    Eigen::MatrixXd x;       // operator matrix h*K
    Eigen::VectorXd lambda;  // ascending
    Eigen::MatrixXd vectors; // Euclidean-orthonormal
    double f{0.0};
    Eigen::MatrixXd grad; // full Euclidean gradient L + T beta'(X)
};

double clamped_entropy_slope(double lam, const EntropySpec& spec) {
    double arg = std::max(lam, kGradFloor);
    if (spec.kind == EntropyKind::fermi_dirac) {
        arg = std::min(arg, 1.0 - kGradFloor);
        return std::log(arg) - std::log1p(-arg);
    }
    return std::log(arg + spec.eta);
}

PrimalState make_primal_state(const Problem& problem, Eigen::MatrixXd x) {
    const Grid& grid = *problem.grid;
    const EntropySpec& spec = problem.entropy;
    PrimalState st;
    st.x = std::move(x);
    EighResult eig = eigh(st.x);
    st.lambda = std::move(eig.eigenvalues);
    st.vectors = std::move(eig.eigenvectors);

    double entropy = 0.0;
    Eigen::VectorXd gw(st.lambda.size());
    for (Eigen::Index p = 0; p < st.lambda.size(); ++p) {
        const double lam = std::max(st.lambda[p], 0.0);
        entropy += entropy_value(lam, spec);
        gw[p] = spec.temperature * clamped_entropy_slope(lam, spec);
    }
    const Eigen::MatrixXd& lap = grid.laplacian().matrix;
    const double energy = lap.cwiseProduct(st.x).sum();
    st.f = energy + spec.temperature * entropy;

    Eigen::MatrixXd ent_grad;
    kernels::weighted_outer_sum(st.vectors, gw, ent_grad);
    st.grad = lap + ent_grad;
    return st;
}

/// Inverse curvature of T * Tr beta(X) in the eigenbasis: the reciprocal
/// divided differences of beta'. For the Boltzmann entropy these are the
/// logarithmic means of the eigenvalue pairs. The plain Euclidean gradient
/// step stalls on the stiff near-zero modes (curvature 1/lambda); scaling by
/// this metric makes the entropy part Newton-like while the retraction and
/// the Armijo contract stay unchanged.
Eigen::MatrixXd inverse_entropy_curvature(const Eigen::VectorXd& lambda, const EntropySpec& spec) {
    const Eigen::Index n = lambda.size();
    Eigen::MatrixXd m(n, n);
    auto curvature = [&](double lam) {
        double arg = std::max(lam, kGradFloor);
        if (spec.kind == EntropyKind::fermi_dirac) {
            arg = std::min(arg, 1.0 - kGradFloor);
            return 1.0 / arg + 1.0 / (1.0 - arg);
        }
        return 1.0 / (arg + spec.eta);
    };
    for (Eigen::Index p = 0; p < n; ++p) {
        const double lp = std::max(lambda[p], 0.0);
        for (Eigen::Index q = p; q < n; ++q) {
            const double lq = std::max(lambda[q], 0.0);
            const double gap = lp - lq;
            double v;
            if (std::abs(gap) < 1e-8 * std::max(1.0, std::max(lp, lq))) {
                v = 1.0 / curvature(0.5 * (lp + lq));
            } else {
                v = gap / (clamped_entropy_slope(lp, spec) - clamped_entropy_slope(lq, spec));
            }
            v /= spec.temperature;
            m(p, q) = v;
            m(q, p) = v;
        }
    }
    return m;
}

/// Descent direction: -P(G - diag(d)), where P is the entropy-metric scaling
/// in the eigenbasis and the diagonal shift d is solved from
/// diag(P(G - diag(d))) = 0 so the direction is tangent to diag(X) = h n.
/// At the constrained optimum G = diag(A) gives d = A and a zero direction.
Eigen::MatrixXd primal_direction(const PrimalState& st, const EntropySpec& spec) {
    const Eigen::MatrixXd metric = inverse_entropy_curvature(st.lambda, spec);
    const Eigen::MatrixXd g_eig =
        st.vectors.transpose() * st.grad * st.vectors;
    const Eigen::MatrixXd pg =
        st.vectors * metric.cwiseProduct(g_eig) * st.vectors.transpose();

    Eigen::MatrixXd response;
    kernels::divided_difference_response(st.vectors, metric, response);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(response);
    Eigen::VectorXd shift = ldlt.solve(pg.diagonal());
    if (ldlt.info() != Eigen::Success || !shift.allFinite()) {
        shift.setZero(); // fall back to the unshifted direction
    }
    const Eigen::MatrixXd shift_eig =
        st.vectors.transpose() * shift.asDiagonal() * st.vectors;
    Eigen::MatrixXd direction =
        pg - st.vectors * metric.cwiseProduct(shift_eig) * st.vectors.transpose();
    direction = -0.5 * (direction + direction.transpose()).eval();
    return direction;
}

} // namespace

Equilibrium solve_primal(const Problem& problem, const PrimalOptions& options,
                         const DensityMatrix* start) {
    problem.entropy.validate();
    if (!(options.tol > 0.0) || options.max_iter < 1) {
        throw config_error("solve_primal: invalid options");
    }
    const Grid& grid = *problem.grid;
    const double h = grid.spacing();
    const int n = grid.num_points();

    Eigen::MatrixXd x0;
    if (start != nullptr) {
        x0 = h * rescale(*start, problem.target).kernel();
    } else {
        x0 = Eigen::MatrixXd::Zero(n, n);
        x0.diagonal() = h * problem.target.n();
    }

    PrimalState cur = make_primal_state(problem, std::move(x0));

    SolveDiagnostics diag;
    diag.solver = SolverKind::primal_gradient;
    diag.residual_history.push_back(cur.f);

    double tau = options.step0 > 0.0 ? options.step0 : 1.0;
    bool converged = false;
    bool warning = false;
    int iter = 0;

    for (; iter < options.max_iter; ++iter) {
        const Eigen::MatrixXd direction = primal_direction(cur, problem.entropy);

        bool accepted = false;
        PrimalState next;
        double tau_used = std::min(2.0 * tau, 1.0);
        for (int bt = 0; bt < 60; ++bt) {
            Eigen::MatrixXd y = cur.x + tau_used * direction;
            EighResult eig = eigh(y);
            Eigen::VectorXd clipped = eig.eigenvalues.cwiseMax(0.0);
            Eigen::MatrixXd xproj;
            kernels::weighted_outer_sum(eig.eigenvectors, clipped, xproj);
            const Eigen::VectorXd d = xproj.diagonal();
            if (d.minCoeff() > 0.0) {
                Eigen::VectorXd a = (h * problem.target.n().array() / d.array()).sqrt();
                PrimalState trial = make_primal_state(problem, diag_congruence(a, xproj));
                const double move = (trial.x - cur.x).squaredNorm();
                if (trial.f <= cur.f - 1e-4 * move / tau_used) {
                    next = std::move(trial);
                    accepted = true;
                    break;
                }
            }
            tau_used *= 0.5;
        }

        if (!accepted) {
            warning = true;
            break;
        }

        const double step_norm = std::sqrt((next.x - cur.x).squaredNorm()) / tau_used;
        cur = std::move(next);
        diag.residual_history.push_back(cur.f);
        tau = tau_used;
        if (step_norm <= options.tol) {
            converged = true;
            ++iter;
            break;
        }
    }

    DensityMatrix rho = state_from_operator_eig(problem.grid, cur.lambda, cur.vectors,
                                                /*values_are_occupancies=*/true, problem.entropy);
    Equilibrium eq{problem, std::move(rho), Eigen::VectorXd(), Moments{}, diag};
    eq.moments = moments(eq.rho);
    eq.dual_potential = recover_dual_potential(eq.rho, problem.entropy);
    eq.diagnostics.iterations = iter;
    eq.diagnostics.constraint_residual =
        (eq.rho.kernel().diagonal() - problem.target.n()).cwiseAbs().maxCoeff();
    {
        const double sqrt_h = std::sqrt(h);
        Eigen::MatrixXd v = eq.rho.eigenvectors() * sqrt_h;
        Eigen::MatrixXd m;
        kernels::weighted_outer_sum(v, clamped_log_weights(eq.rho.eigenvalues(), problem.entropy), m);
        m += grid.laplacian().matrix;
        m.diagonal().setZero();
        eq.diagnostics.gradient_norm = m.norm();
    }
    eq.diagnostics.converged = converged;
    eq.diagnostics.line_search_warning = warning;
    eq.diagnostics.free_energy = free_energy(eq.rho, problem.entropy).value;
    return eq;
}

namespace {

Eigen::MatrixXd xlog_matrix(const DensityMatrix& rho, double eta) {
    const double h = rho.grid()->spacing();
    Eigen::MatrixXd v = rho.eigenvectors() * std::sqrt(h);
    Eigen::VectorXd w(rho.num_modes());
    for (int p = 0; p < rho.num_modes(); ++p) {
        const double lam = rho.eigenvalues()[p];
        w[p] = (lam < kLogFloor && eta == 0.0) ? 0.0 : lam * std::log(lam + eta);
    }
    Eigen::MatrixXd out;
    kernels::weighted_outer_sum(v, w, out);
    return out;
}

} // namespace

EtaSweepReport sweep_eta(const Problem& problem, const std::vector<double>& etas,
                         const PrimalOptions& options) {
    if (problem.entropy.kind != EntropyKind::boltzmann) {
        throw config_error("sweep_eta: the eta regularization applies to the Boltzmann entropy");
    }
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (!(etas[i] > 0.0) || (i > 0 && etas[i] >= etas[i - 1])) {
            throw config_error("sweep_eta: etas must be positive and strictly decreasing");
        }
    }

    Problem base = problem;
    base.entropy.eta = 0.0;
    EtaSweepReport report{solve_dual(base), {}};
    const Equilibrium& ref = report.reference;

    const double h = problem.grid->spacing();
    const Eigen::MatrixXd x_ref = h * ref.rho.kernel();
    const Eigen::MatrixXd xlog_ref = xlog_matrix(ref.rho, 0.0);
    const double entropy_ref = entropy_sum(ref.rho.eigenvalues(), base.entropy);

    const DensityMatrix* warm = &ref.rho;
    DensityMatrix prev = ref.rho;
    for (double eta : etas) {
        EtaSweepRow row;
        row.eta = eta;
        EntropySpec spec_eta = base.entropy.with_eta(eta);
        row.h_eta = entropy_sum(ref.rho.eigenvalues(), spec_eta) - entropy_ref;
        try {
            Problem p_eta = base;
            p_eta.entropy = spec_eta;
            Equilibrium eq = solve_primal(p_eta, options, warm);
            row.solved = eq.diagnostics.converged || eq.diagnostics.line_search_warning;

            row.trace_distance = trace_norm(h * eq.rho.kernel() - x_ref);
            const int pmax = std::min<int>(10, eq.rho.num_modes() - 1);
            double md = 0.0;
            for (int p = 0; p <= pmax; ++p) {
                md = std::max(md, std::abs(eq.rho.eigenvalues()[p] - ref.rho.eigenvalues()[p]));
            }
            row.max_eigen_diff = md;
            row.entropy_gap =
                std::abs(entropy_sum(eq.rho.eigenvalues(), spec_eta) - entropy_ref);
            row.xlog_distance = trace_norm(xlog_matrix(eq.rho, eta) - xlog_ref);

            prev = eq.rho;
            warm = &prev;
        } catch (const std::exception&) {
            row.solved = false;
            row.trace_distance = row.max_eigen_diff = row.entropy_gap = row.xlog_distance =
                std::numeric_limits<double>::quiet_NaN();
        }
        report.rows.push_back(row);
    }

    EtaSweepRow zero;
    zero.eta = 0.0;
    zero.solved = true;
    report.rows.push_back(zero);
    return report;
}

namespace {

struct OffdiagProblem2 {
    double x00, x11;   // fixed diagonal of X = h K
    double l00, l11, l01;
    const EntropySpec* spec;
    double temperature;

    double free_energy_at(double c_kernel, double h) const {
        const double x01 = h * c_kernel;
        const double energy = l00 * x00 + l11 * x11 + 2.0 * l01 * x01;
        const double mean = 0.5 * (x00 + x11);
        const double dev = std::hypot(0.5 * (x00 - x11), x01);
        const double lp = mean + dev;
        const double lm = std::max(mean - dev, 0.0);
        return energy + temperature * (entropy_value(lp, *spec) + entropy_value(lm, *spec));
    }
};

Equilibrium finalize_oracle(const Problem& problem, const Eigen::MatrixXd& kernel, int evaluations) {
    DensityMatrix rho = DensityMatrix::from_kernel(kernel, problem.grid);
    Equilibrium eq{problem, std::move(rho), Eigen::VectorXd(), Moments{}, SolveDiagnostics{}};
    eq.moments = moments(eq.rho);
    eq.dual_potential = recover_dual_potential(eq.rho, problem.entropy);
    eq.diagnostics.solver = SolverKind::oracle_scan;
    eq.diagnostics.iterations = evaluations;
    eq.diagnostics.constraint_residual =
        (eq.rho.kernel().diagonal() - problem.target.n()).cwiseAbs().maxCoeff();
    eq.diagnostics.gradient_norm = eq.diagnostics.constraint_residual;
    eq.diagnostics.converged = true;
    eq.diagnostics.free_energy = free_energy(eq.rho, problem.entropy).value;
    return eq;
}

Equilibrium oracle_minimize_2(const Problem& problem) {
    const Grid& grid = *problem.grid;
    const double h = grid.spacing();
    const Eigen::VectorXd& n = problem.target.n();
    const Eigen::MatrixXd& lap = grid.laplacian().matrix;
    OffdiagProblem2 f2{h * n[0], h * n[1], lap(0, 0), lap(1, 1), lap(0, 1),
                       &problem.entropy, problem.entropy.temperature};

    const double cmax = std::sqrt(n[0] * n[1]);
    const int scan_points = 100000;
    double best_c = 0.0;
    double best_f = std::numeric_limits<double>::infinity();
    for (int k = 0; k < scan_points; ++k) {
        const double c = -cmax + 2.0 * cmax * k / (scan_points - 1);
        const double f = f2.free_energy_at(c, h);
        if (f < best_f) {
            best_f = f;
            best_c = c;
        }
    }

    // golden-section refinement around the scan minimum
    const double dc = 2.0 * cmax / (scan_points - 1);
    double lo = std::max(best_c - dc, -cmax);
    double hi = std::min(best_c + dc, cmax);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double fa = f2.free_energy_at(x1, h);
    double fb = f2.free_energy_at(x2, h);
    int evals = scan_points + 2;
    while (hi - lo > 1e-12) {
        if (fa < fb) {
            hi = x2;
            x2 = x1;
            fb = fa;
            x1 = hi - gr * (hi - lo);
            fa = f2.free_energy_at(x1, h);
        } else {
            lo = x1;
            x1 = x2;
            fa = fb;
            x2 = lo + gr * (hi - lo);
            fb = f2.free_energy_at(x2, h);
        }
        ++evals;
    }
    const double c_star = 0.5 * (lo + hi);

    Eigen::MatrixXd kernel(2, 2);
    kernel << n[0], c_star, c_star, n[1];
    return finalize_oracle(problem, kernel, evals);
}

} // namespace

std::vector<std::pair<double, double>> oracle_scan_curve(const Problem& problem, int num_points) {
    if (problem.grid->num_points() != 2) {
        throw config_error("oracle_scan_curve: defined for N = 2");
    }
    const Grid& grid = *problem.grid;
    const double h = grid.spacing();
    const Eigen::VectorXd& n = problem.target.n();
    const Eigen::MatrixXd& lap = grid.laplacian().matrix;
    OffdiagProblem2 f2{h * n[0], h * n[1], lap(0, 0), lap(1, 1), lap(0, 1),
                       &problem.entropy, problem.entropy.temperature};
    const double cmax = std::sqrt(n[0] * n[1]);
    std::vector<std::pair<double, double>> out;
    out.reserve(num_points);
    for (int k = 0; k < num_points; ++k) {
        const double c = -cmax + 2.0 * cmax * k / (num_points - 1);
        out.emplace_back(c, f2.free_energy_at(c, h));
    }
    return out;
}

namespace {

struct OffdiagProblem3 {
    std::array<double, 3> diag; // h*n
    Eigen::Matrix3d lap;
    const EntropySpec* spec;
    double temperature;

    bool psd(double x, double y, double z) const {
        const double a = diag[0], b = diag[1], c = diag[2];
        if (a * b - x * x < 0.0) return false;
        if (a * c - y * y < 0.0) return false;
        if (b * c - z * z < 0.0) return false;
        const double det = a * (b * c - z * z) - x * (x * c - z * y) + y * (x * z - b * y);
        return det >= 0.0;
    }

    // off-diagonals are X entries (already h-scaled)
    double free_energy_at(double x, double y, double z, bool fast) const {
        Eigen::Matrix3d m;
        m << diag[0], x, y, x, diag[1], z, y, z, diag[2];
        const double energy = lap.cwiseProduct(m).sum();
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
        if (fast) {
            es.computeDirect(m, Eigen::EigenvaluesOnly);
        } else {
            es.compute(m, Eigen::EigenvaluesOnly);
        }
        double entropy = 0.0;
        for (int p = 0; p < 3; ++p) {
            entropy += entropy_value(std::max(es.eigenvalues()[p], 0.0), *spec);
        }
        return energy + temperature * entropy;
    }
};

Equilibrium oracle_minimize_3(const Problem& problem) {
    const Grid& grid = *problem.grid;
    const double h = grid.spacing();
    const Eigen::VectorXd& n = problem.target.n();
    OffdiagProblem3 f3{{h * n[0], h * n[1], h * n[2]},
                       grid.laplacian().matrix,
                       &problem.entropy,
                       problem.entropy.temperature};

    const std::array<double, 3> lim = {h * std::sqrt(n[0] * n[1]), h * std::sqrt(n[0] * n[2]),
                                       h * std::sqrt(n[1] * n[2])};
    const int grid_points = 200;

    std::vector<double> best_f(grid_points, std::numeric_limits<double>::infinity());
    std::vector<int> best_j(grid_points, 0), best_k(grid_points, 0);

#pragma omp parallel for schedule(static)
    for (int i = 0; i < grid_points; ++i) {
        const double x = -lim[0] + 2.0 * lim[0] * i / (grid_points - 1);
        double fbest = std::numeric_limits<double>::infinity();
        int jbest = 0, kbest = 0;
        for (int j = 0; j < grid_points; ++j) {
            const double y = -lim[1] + 2.0 * lim[1] * j / (grid_points - 1);
            for (int k = 0; k < grid_points; ++k) {
                const double z = -lim[2] + 2.0 * lim[2] * k / (grid_points - 1);
                if (!f3.psd(x, y, z)) continue;
                const double f = f3.free_energy_at(x, y, z, /*fast=*/true);
                if (f < fbest) {
                    fbest = f;
                    jbest = j;
                    kbest = k;
                }
            }
        }
        best_f[i] = fbest;
        best_j[i] = jbest;
        best_k[i] = kbest;
    }

    int ibest = 0;
    for (int i = 1; i < grid_points; ++i) {
        if (best_f[i] < best_f[ibest]) ibest = i;
    }
    if (!std::isfinite(best_f[ibest])) {
        throw solver_error("oracle_minimize: no feasible point found on the scan");
    }

    Eigen::Vector3d p0;
    p0 << -lim[0] + 2.0 * lim[0] * ibest / (grid_points - 1),
        -lim[1] + 2.0 * lim[1] * best_j[ibest] / (grid_points - 1),
        -lim[2] + 2.0 * lim[2] * best_k[ibest] / (grid_points - 1);

    auto objective = [&](const Eigen::Vector3d& p) {
        if (!f3.psd(p[0], p[1], p[2])) return std::numeric_limits<double>::infinity();
        return f3.free_energy_at(p[0], p[1], p[2], /*fast=*/false);
    };

    // Nelder-Mead refinement (standard reflect/expand/contract/shrink)
    std::array<Eigen::Vector3d, 4> simplex;
    std::array<double, 4> fv;
    simplex[0] = p0;
    for (int d = 0; d < 3; ++d) {
        simplex[d + 1] = p0;
        simplex[d + 1][d] += 2.0 * lim[d] / (grid_points - 1);
        if (!f3.psd(simplex[d + 1][0], simplex[d + 1][1], simplex[d + 1][2])) {
            simplex[d + 1][d] -= 4.0 * lim[d] / (grid_points - 1);
        }
    }
    for (int v = 0; v < 4; ++v) fv[v] = objective(simplex[v]);
    int evals = grid_points * grid_points * grid_points + 4;

    for (int it = 0; it < 600; ++it) {
        std::array<int, 4> order = {0, 1, 2, 3};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        std::array<Eigen::Vector3d, 4> sx;
        std::array<double, 4> sf;
        for (int v = 0; v < 4; ++v) {
            sx[v] = simplex[order[v]];
            sf[v] = fv[order[v]];
        }
        simplex = sx;
        fv = sf;

        double diam = 0.0;
        for (int v = 1; v < 4; ++v) diam = std::max(diam, (simplex[v] - simplex[0]).norm());
        if (diam < 1e-12 && fv[3] - fv[0] < 1e-14) break;

        const Eigen::Vector3d centroid = (simplex[0] + simplex[1] + simplex[2]) / 3.0;
        const Eigen::Vector3d refl = centroid + (centroid - simplex[3]);
        const double f_refl = objective(refl);
        ++evals;
        if (f_refl < fv[0]) {
            const Eigen::Vector3d expd = centroid + 2.0 * (centroid - simplex[3]);
            const double f_expd = objective(expd);
            ++evals;
            if (f_expd < f_refl) {
                simplex[3] = expd;
                fv[3] = f_expd;
            } else {
                simplex[3] = refl;
                fv[3] = f_refl;
            }
        } else if (f_refl < fv[2]) {
            simplex[3] = refl;
            fv[3] = f_refl;
        } else {
            const Eigen::Vector3d contr = centroid + 0.5 * (simplex[3] - centroid);
            const double f_contr = objective(contr);
            ++evals;
            if (f_contr < fv[3]) {
                simplex[3] = contr;
                fv[3] = f_contr;
            } else {
                for (int v = 1; v < 4; ++v) {
                    simplex[v] = simplex[0] + 0.5 * (simplex[v] - simplex[0]);
                    fv[v] = objective(simplex[v]);
                    ++evals;
                }
            }
        }
    }

    int vbest = 0;
    for (int v = 1; v < 4; ++v) {
        if (fv[v] < fv[vbest]) vbest = v;
    }
    Eigen::Vector3d p = simplex[vbest];

    // Cyclic golden-section polish, one off-diagonal at a time. The entropy
    // slope is logarithmic, so the minimizer can hug the PSD boundary closer
    // than any simplex resolves; the 1-d feasibility interval is exact (the
    // determinant is a concave quadratic in each coordinate).
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int cycle = 0; cycle < 6; ++cycle) {
        for (int axis = 0; axis < 3; ++axis) {
            const double a = f3.diag[0], b = f3.diag[1], c3 = f3.diag[2];
            double quad_a = 0.0, quad_b = 0.0, quad_c = 0.0, box = 0.0;
            const double x = p[0], y = p[1], z = p[2];
            if (axis == 0) { // det = -c3 t^2 + 2yz t + (a b c3 - a z^2 - b y^2)
                quad_a = -c3;
                quad_b = 2.0 * y * z;
                quad_c = a * b * c3 - a * z * z - b * y * y;
                box = std::sqrt(a * b);
            } else if (axis == 1) {
                quad_a = -b;
                quad_b = 2.0 * x * z;
                quad_c = a * b * c3 - a * z * z - c3 * x * x;
                box = std::sqrt(a * c3);
            } else {
                quad_a = -a;
                quad_b = 2.0 * x * y;
                quad_c = a * b * c3 - c3 * x * x - b * y * y;
                box = std::sqrt(b * c3);
            }
            const double disc = quad_b * quad_b - 4.0 * quad_a * quad_c;
            if (disc <= 0.0) continue;
            const double root = std::sqrt(disc);
            double lo = (-quad_b + root) / (2.0 * quad_a);
            double hi = (-quad_b - root) / (2.0 * quad_a);
            if (lo > hi) std::swap(lo, hi);
            lo = std::max(lo, -box);
            hi = std::min(hi, box);
            if (!(hi > lo)) continue;

            auto fline = [&](double t) {
                Eigen::Vector3d q = p;
                q[axis] = t;
                return objective(q);
            };
            double x1 = hi - gr * (hi - lo);
            double x2 = lo + gr * (hi - lo);
            double f1 = fline(x1);
            double f2v = fline(x2);
            evals += 2;
            while (hi - lo > 1e-13 * std::max(1.0, box)) {
                if (f1 < f2v) {
                    hi = x2;
                    x2 = x1;
                    f2v = f1;
                    x1 = hi - gr * (hi - lo);
                    f1 = fline(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2v;
                    x2 = lo + gr * (hi - lo);
                    f2v = fline(x2);
                }
                ++evals;
            }
            const double t_star = 0.5 * (lo + hi);
            if (fline(t_star) <= objective(p)) p[axis] = t_star;
            evals += 2;
        }
    }

    Eigen::MatrixXd kernel(3, 3);
    kernel << n[0], p[0] / h, p[1] / h, p[0] / h, n[1], p[2] / h, p[1] / h, p[2] / h, n[2];
    return finalize_oracle(problem, kernel, evals);
}

} // namespace

Equilibrium oracle_minimize(const Problem& problem) {
    problem.entropy.validate();
    const int n = problem.grid->num_points();
    if (n == 2) return oracle_minimize_2(problem);
    if (n == 3) return oracle_minimize_3(problem);
    throw config_error("oracle_minimize: exhaustive oracle is defined for N <= 3");
}

} // namespace qmax

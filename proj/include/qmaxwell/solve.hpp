#pragma once

#include "qmaxwell/constraint.hpp"
#include "qmaxwell/density_matrix.hpp"
#include "qmaxwell/entropy.hpp"

#include <Eigen/Dense>
#include <vector>

namespace qmax {

struct Problem {
    GridPtr grid;
    ConstraintProfile target;
    EntropySpec entropy;
};

enum class SolverKind { dual_newton, primal_gradient, oracle_scan };

struct SolveDiagnostics {
    SolverKind solver{SolverKind::dual_newton};
    int iterations{0};
    double constraint_residual{0.0}; // max_i |n[rho]_i - n_i|
    double gradient_norm{0.0};       // stationarity measure (see each solver)
    double free_energy{0.0};
    bool converged{false};
    bool line_search_warning{false};
    std::vector<double> residual_history;
};

/// Converged minimizer bundle.
struct Equilibrium {
    Problem problem;
    DensityMatrix rho;
    Eigen::VectorXd dual_potential; // A with rho = g((L - diag(A))/T)
    Moments moments;
    SolveDiagnostics diagnostics;
};

struct DualOptions {
    double tol{1e-10};  // constraint residual, max norm
    int max_iter{200};
    double damping{0.5}; // backtracking factor of the residual line search
    int warmup_iterations{5};
};

/// Newton iteration on the dual potential A: find A with
/// diag-moment of g((L - diag(A))/T) = n, where g(x) = exp(-x) (Boltzmann)
/// or 1/(1+exp(x)) (Fermi-Dirac). The Newton direction uses the exact
/// Frechet derivative of the spectral function (Daleckii-Krein divided
/// differences). Requires entropy.eta == 0.
Equilibrium solve_dual(const Problem& problem, const DualOptions& options = {});

struct PrimalOptions {
    double tol{1e-8};  // projected-step norm ||X_{k+1}-X_k||_F / tau
    int max_iter{5000};
    double step0{0.0}; // initial step; 0 selects h^2/8
};

/// Projected gradient descent on kernels with PSD clipping and the
/// multiplicative rescaling retraction; Armijo backtracking keeps F
/// monotone, Barzilai-Borwein steps between iterations. Accepts any valid
/// entropy spec including eta > 0 (the F_eta minimizer). `start` overrides
/// the default admissible starting state diag(n).
Equilibrium solve_primal(const Problem& problem, const PrimalOptions& options = {},
                         const DensityMatrix* start = nullptr);

struct EtaSweepRow {
    double eta{0.0};
    bool solved{false};
    double trace_distance{0.0};   // ||rho_eta - rho*||_tr
    double max_eigen_diff{0.0};   // max_{p<=10} |rho_{p,eta} - rho_p|
    double entropy_gap{0.0};      // |Tr beta_eta(rho_eta) - Tr beta(rho*)|
    double xlog_distance{0.0};    // ||rho_eta log(eta+rho_eta) - rho* log rho*||_tr
    double h_eta{0.0};            // S_eta(rho*) - S(rho*)
};

struct EtaSweepReport {
    Equilibrium reference; // eta = 0 equilibrium (dual solve)
    std::vector<EtaSweepRow> rows;
};

/// Solve the F_eta problem for each eta (positive, decreasing) by the primal
/// solver, warm-started along the sweep, and report the convergence
/// quantities of each regularized minimizer against the eta = 0 reference.
/// A trailing eta = 0 row compares the reference against itself. Individual
/// solver failures are recorded in the row (partial report).
EtaSweepReport sweep_eta(const Problem& problem, const std::vector<double>& etas,
                         const PrimalOptions& options = {});

/// Exhaustive minimization over the feasible kernels for N <= 3: scan plus
/// golden-section (N=2) or Nelder-Mead (N=3) refinement. Independent of both
/// solvers; used as the verification oracle.
Equilibrium oracle_minimize(const Problem& problem);

/// Free-energy values along the N=2 feasibility interval (test support for
/// convexity checks on the scan).
std::vector<std::pair<double, double>> oracle_scan_curve(const Problem& problem, int num_points);

/// A = diag(L + T log(X + eta)) evaluated spectrally; the a-posteriori dual
/// potential of a primal or oracle state.
Eigen::VectorXd recover_dual_potential(const DensityMatrix& rho, const EntropySpec& spec);

} // namespace qmax

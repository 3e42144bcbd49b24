#include "qmaxwell/qforms.hpp"

#include "qmaxwell/errors.hpp"
#include "qmaxwell/random_fields.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <memory>
#include <random>

using namespace qmax;
using namespace qmax::testing;

namespace {

std::shared_ptr<Equilibrium> solved_gaussian(int n) {
    static std::map<int, std::shared_ptr<Equilibrium>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    DualOptions options;
    options.tol = 1e-13; // identity checks need the noise floor well below them
    auto eq = std::make_shared<Equilibrium>(solve_dual(gaussian_problem(n), options));
    REQUIRE(eq->diagnostics.converged);
    cache[n] = eq;
    return eq;
}

} // namespace

TEST_CASE("context fields: V* nonnegative, omega >= 1") {
    auto eq = solved_gaussian(32);
    const QFormContext ctx = build_qform_context(eq);
    CHECK(ctx.v_star.minCoeff() >= 0.0);
    CHECK(ctx.omega.minCoeff() >= 1.0);
}

TEST_CASE("eigenrelation residual, operator form") {
    auto eq = solved_gaussian(32);
    CHECK(el_residual(*eq, 8) < 1e-8);

    // bilinearity: sign flips leave the diagonal comparison unchanged
    const QFormContext ctx = build_qform_context(eq);
    const Eigen::VectorXd u = eq->rho.eigenvectors().col(2);
    const Eigen::VectorXd v = eq->rho.eigenvectors().col(3);
    CHECK(qform(-u, -v, ctx, QFormVariant::qstar_operator) ==
          doctest::Approx(qform(u, v, ctx, QFormVariant::qstar_operator)).epsilon(1e-14));
}

TEST_CASE("eigenrelation residual tracks the solver tolerance") {
    const Problem problem = gaussian_problem(24);

    // A dual solve returns the exact Gibbs state of its multiplier, so the
    // operator-form residual is identically small no matter the tolerance.
    DualOptions coarse_dual;
    coarse_dual.tol = 1e-4;
    coarse_dual.max_iter = 1;
    coarse_dual.warmup_iterations = 0;
    CHECK(el_residual(solve_dual(problem, coarse_dual), 6) < 1e-8);

    // At primal iterates the residual measures genuine optimality and grows
    // as the stop is loosened.
    PrimalOptions tight, loose;
    tight.tol = 1e-10;
    tight.max_iter = 20000;
    loose.tol = 1e-2;
    loose.max_iter = 12;
    const double tight_res = el_residual(solve_primal(problem, tight), 6);
    const double loose_res = el_residual(solve_primal(problem, loose), 6);
    CHECK(loose_res >= tight_res);
    CHECK(loose_res > 1e-8);
}

TEST_CASE("min-max principle recovers -log rho_p") {
    auto eq = solved_gaussian(32);
    double previous = -std::numeric_limits<double>::infinity();
    for (int p = 0; p <= 5; ++p) {
        const double v = minmax_eigen(*eq, p);
        CHECK(std::abs(v + std::log(eq->rho.eigenvalues()[p])) < 1e-8);
        CHECK(v >= previous - 1e-10);
        previous = v;
    }
}

TEST_CASE("h-norm bound in operator form") {
    auto eq = solved_gaussian(32);
    const Grid& grid = *eq->problem.grid;

    // phi = phi_p: both sides equal -log rho_p
    for (int p : {0, 3, 7}) {
        const HNormResult r = h_norm(eq->rho.eigenvectors().col(p), *eq);
        const double expected = -std::log(eq->rho.eigenvalues()[p]);
        CHECK(r.hnorm == doctest::Approx(expected).epsilon(1e-8));
        CHECK(r.qstar == doctest::Approx(expected).epsilon(1e-8));
        CHECK(r.satisfied);
    }

    std::mt19937_64 rng(501);
    const double log_rho0 = std::log(eq->rho.eigenvalues()[0]);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd phi = random_unit_field(grid, rng);
        const HNormResult r = h_norm(phi, *eq);
        CHECK(r.satisfied);
        // Q* is bounded below by -log(rho_0) on unit vectors
        CHECK(r.qstar >= -log_rho0 * grid.inner(phi, phi) - 1e-10);
    }
}

TEST_CASE("h-norm bound against the integral form carries O(h) slack") {
    std::mt19937_64 rng(733);
    for (int n : {32, 64}) {
        auto eq = solved_gaussian(n);
        const QFormContext ctx = build_qform_context(eq);
        double worst = 0.0;
        for (int trial = 0; trial < 40; ++trial) {
            const Eigen::VectorXd phi = random_smooth_field(*eq->problem.grid, rng);
            const HNormResult r = h_norm(phi, *eq);
            const double qint = qform(phi, phi, ctx, QFormVariant::qstar_integral);
            worst = std::max(worst, r.hnorm - qint);
        }
        CHECK(worst <= 10.0 * eq->problem.grid->spacing());
    }
}

TEST_CASE("Q*_integral is nonnegative on random fields") {
    auto eq = solved_gaussian(32);
    const QFormContext ctx = build_qform_context(eq);
    std::mt19937_64 rng(601);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd phi = random_unit_field(*eq->problem.grid, rng);
        CHECK(qform(phi, phi, ctx, QFormVariant::qstar_integral) >= 0.0);
    }
    // rank-one direction sqrt(n): nonnegativity encodes F(sigma) >= F(rho*)
    CHECK(qform(eq->problem.target.sqrt_n(), eq->problem.target.sqrt_n(), ctx,
                QFormVariant::qstar_integral) >= 0.0);
}

TEST_CASE("kinetic bound corollary with O(h) slack on smooth fields") {
    auto eq = solved_gaussian(32);
    const QFormContext ctx = build_qform_context(eq);
    const Grid& grid = *eq->problem.grid;
    std::mt19937_64 rng(881);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::VectorXd phi = random_smooth_field(grid, rng);
        const Eigen::VectorXd w = phi.cwiseQuotient(eq->problem.target.sqrt_n());
        const Eigen::VectorXd dw = grid.gradient().matrix * w;
        const double divergence_part = grid.inner(
            eq->problem.target.n(),
            grid.edge_to_node_average(dw.cwiseProduct(dw)));
        const double vstar_part =
            grid.inner(ctx.v_star.cwiseProduct(phi), phi);
        const double kinetic_part = grid.inner(ctx.k_over_n.cwiseProduct(phi), phi);
        CHECK(kinetic_part <= divergence_part + vstar_part + 10.0 * grid.spacing());
    }
}

TEST_CASE("derivative checks match Q_e and the trace formula") {
    auto eq = solved_gaussian(32);
    std::mt19937_64 rng(911);
    for (int trial = 0; trial < 10; ++trial) {
        // |phi| <= M sqrt(n): the entropy-derivative lemma's admissible class,
        // and the scaling that keeps the path uniformly analytic in t
        const Eigen::VectorXd phi = random_smooth_field(*eq->problem.grid, rng)
                                        .cwiseProduct(eq->problem.target.sqrt_n());
        const DerivativeChecks d = derivative_checks(*eq, phi, 1e-2);
        CHECK(d.energy_rel_err < 1e-5);
        CHECK(d.entropy_rel_err < 1e-5);
    }

    const DerivativeChecks zero =
        derivative_checks(*eq, Eigen::VectorXd::Zero(32), 1e-2);
    CHECK(zero.energy_fd == 0.0);
    CHECK(zero.entropy_fd == 0.0);
    CHECK(zero.energy_form == 0.0);
    CHECK(zero.entropy_formula == 0.0);
}

TEST_CASE("maxwellian residuals") {
    auto eq = solved_gaussian(32);
    const MaxwellianResidual r = maxwellian_residual(*eq);
    CHECK(r.operator_form < 1e-6);

    // uniform profile: all fields constant, the moment form is exact
    const Equilibrium uniform_eq = solve_dual(uniform_problem(16));
    const MaxwellianResidual ru = maxwellian_residual(uniform_eq);
    CHECK(ru.operator_form < 1e-8);
    CHECK(ru.moment_form < 1e-8);

    // the discrete moment identity is exact: the residual sits at the
    // solver noise floor on every level
    CHECK(maxwellian_residual(*solved_gaussian(32)).moment_form < 1e-6);
    CHECK(maxwellian_residual(*solved_gaussian(64)).moment_form < 1e-6);
}

TEST_CASE("chemical potential: uniform profile gives a constant") {
    const Equilibrium eq = solve_dual(uniform_problem(16));
    const Eigen::VectorXd a = chemical_potential(eq);
    CHECK((a.array() - a.mean()).abs().maxCoeff() < 1e-8);
}

TEST_CASE("chemical potential matches the negated dual multiplier") {
    // exact discrete identity (Bohm rewriting + local trace of stationarity);
    // only the solver residual is visible
    CHECK(compare_chemical_potential(*solved_gaussian(32)).max_mismatch < 1e-6);
    CHECK(compare_chemical_potential(*solved_gaussian(64)).max_mismatch < 1e-6);
}

TEST_CASE("q-form agreement improves under refinement") {
    double previous = std::numeric_limits<double>::infinity();
    for (int n : {32, 64}) {
        auto eq = solved_gaussian(n);
        const QFormContext ctx = build_qform_context(eq);
        double worst = 0.0;
        for (int p = 0; p <= 4; ++p) {
            for (int q = 0; q <= 4; ++q) {
                const Eigen::VectorXd u = eq->rho.eigenvectors().col(p);
                const Eigen::VectorXd v = eq->rho.eigenvectors().col(q);
                worst = std::max(worst, std::abs(qform(u, v, ctx, QFormVariant::qstar_integral) -
                                                 qform(u, v, ctx, QFormVariant::qstar_operator)));
            }
        }
        CHECK(worst < previous);
        previous = worst;
    }
}

TEST_CASE("Q_eta eigenrelation at a regularized minimizer") {
    Problem problem = gaussian_problem(16);
    const double eta = 1e-3;
    problem.entropy.eta = eta;
    PrimalOptions opts;
    opts.tol = 1e-10;
    opts.max_iter = 20000;
    const Equilibrium eq = solve_primal(problem, opts);

    auto shared = std::make_shared<Equilibrium>(eq);
    const QFormContext ctx = build_qform_context(shared);
    double worst = 0.0;
    for (int p = 0; p <= 3; ++p) {
        for (int q = 0; q <= 3; ++q) {
            const double form = qform(eq.rho.eigenvectors().col(p), eq.rho.eigenvectors().col(q),
                                      ctx, QFormVariant::qeta, eta);
            const double expected =
                (p == q) ? -std::log(eta + eq.rho.eigenvalues()[p]) : 0.0;
            worst = std::max(worst, std::abs(form - expected));
        }
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("qform rejects bad inputs") {
    auto eq = solved_gaussian(32);
    const QFormContext ctx = build_qform_context(eq);
    const Eigen::VectorXd u = eq->rho.eigenvectors().col(0);
    CHECK_THROWS_AS(qform(u, u, ctx, QFormVariant::qeta, 0.0), config_error);
    CHECK_THROWS_AS(qform(Eigen::VectorXd::Ones(7), u, ctx, QFormVariant::qe), config_error);
}

TEST_CASE("log-Sobolev gap and entropy bounds at converged equilibria") {
    for (int n : {32, 64}) {
        auto eq = solved_gaussian(n);
        const double h = eq->problem.grid->spacing();
        const double gap = log_sobolev_gap(eq->rho);
        CHECK(gap >= -5.0 * h);
        const EntropyBounds b = entropy_bounds(eq->rho);
        CHECK(b.neg_entropy >= 0.0);
        // the upper bound is the log-Sobolev inequality at unit trace and
        // carries the same O(h) discretization slack
        CHECK(b.neg_entropy <= b.upper_bound + 5.0 * h);
    }
    // at N = 64 the raw bound already holds on this instance
    CHECK(entropy_bounds(solved_gaussian(64)->rho).neg_entropy <=
          entropy_bounds(solved_gaussian(64)->rho).upper_bound);
}

TEST_CASE("h_norm rejects rank-deficient states") {
    GridPtr g = make_grid(8, 20.0, Boundary::periodic);
    const ConstraintProfile target = gaussian_profile(g);
    const DensityMatrix sigma =
        spectral_decompose(target.sqrt_n() * target.sqrt_n().transpose(), g);
    Equilibrium eq{Problem{g, target, EntropySpec{}}, sigma,
                   Eigen::VectorXd::Zero(8), moments(sigma), SolveDiagnostics{}};
    CHECK_THROWS_AS(h_norm(Eigen::VectorXd::Ones(8), eq), numerical_error);
}

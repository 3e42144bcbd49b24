#include "qmaxwell/runner.hpp"

#include "qmaxwell/errors.hpp"
#include "qmaxwell/kernels.hpp"
#include "qmaxwell/linalg.hpp"
#include "qmaxwell/qforms.hpp"
#include "qmaxwell/random_fields.hpp"
#include "qmaxwell/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qmax {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Pinned thresholds of the verification battery.
constexpr double kElResidualTol = 1e-8;
constexpr double kMinmaxTol = 1e-8;
constexpr double kHNormOperatorSlack = 1e-8;
constexpr double kHNormIntegralConstant = 10.0; // violation <= C*h
constexpr double kDerivativeTol = 1e-5;
constexpr double kDerivativeEta = 1e-2;
constexpr double kMaxwellianOperatorTol = 1e-6;
constexpr double kRefinementOrderFloor = 1.0;
// The discrete product rule u(Lu) = avg|Du|^2 + (L u^2)/2 is exact for this
// grid, so the moment identities hold to machine precision at every N and
// their residuals sit at the solver noise floor instead of an O(h) curve.
// A refinement study then passes either by observed order >= 1 or by all
// values lying below this exactness floor.
constexpr double kRefinementExactnessFloor = 1e-6;
constexpr double kRefinementSolveTol = 1e-13;
constexpr double kChemicalPotentialAt64 = 0.1;
constexpr double kLogSobolevSlope = 5.0; // gap >= -5h
constexpr double kPlumbingConstraintTol = 1e-12;
constexpr double kPlumbingEigenFloor = -1e-12;
constexpr int kPlumbingGridSize = 16;

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

json provenance(bool with_timestamp) {
    json p{{"artifact", kArtifactName}, {"version", kArtifactVersion}};
    if (with_timestamp) p["timestamp"] = iso_timestamp();
    return p;
}

Equilibrium solve_by_config(const RunConfig& config, const Problem& problem) {
    if (config.solver.method == SolveMethod::primal) {
        return solve_primal(problem, primal_options_from_config(config.solver));
    }
    return solve_dual(problem, dual_options_from_config(config.solver));
}

struct CheckList {
    json checks = json::array();
    int passed{0};
    int failed{0};
    int skipped{0};

    void add(const std::string& name, bool pass, json details) {
        details["name"] = name;
        details["pass"] = pass;
        details["skipped"] = false;
        checks.push_back(std::move(details));
        (pass ? passed : failed) += 1;
    }

    void skip(const std::string& name, const std::string& reason) {
        checks.push_back(json{{"name", name}, {"pass", nullptr}, {"skipped", true}, {"reason", reason}});
        ++skipped;
    }

    json summary() const {
        return json{{"passed", passed}, {"failed", failed}, {"skipped", skipped}};
    }
};

double refinement_order(double coarse_error, double fine_error, int coarse_n, int fine_n) {
    if (!(coarse_error > 0.0) || !(fine_error > 0.0)) return std::numeric_limits<double>::infinity();
    return std::log(coarse_error / fine_error) / std::log(static_cast<double>(fine_n) / coarse_n);
}

json vector_to_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(json_number(x));
    return out;
}

} // namespace

void apply_exec_policy(const RunConfig& config) {
    if (config.threads < 0) {
        kernels::set_default_exec(kernels::Exec::serial);
        return;
    }
    kernels::set_default_exec(kernels::Exec::parallel);
#ifdef _OPENMP
    if (config.threads > 0) {
        omp_set_num_threads(config.threads);
    }
#endif
}

int run_solve(const RunConfig& config) {
    apply_exec_policy(config);
    const Problem problem = problem_from_config(config);
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    json report;
    report["config"] = config_to_json(config);
    report["provenance"] = provenance(/*with_timestamp=*/true);

    std::unique_ptr<Equilibrium> eq;
    std::string solver_message;
    try {
        eq = std::make_unique<Equilibrium>(solve_by_config(config, problem));
    } catch (const solver_error& e) {
        solver_message = e.what();
    }

    CheckList checks;
    std::vector<std::string> files = {"report.json"};
    if (eq) {
        report["equilibrium"] = equilibrium_summary(*eq);
        auto shared = std::make_shared<Equilibrium>(*eq);
        QFormContext ctx = build_qform_context(shared);
        write_spectrum_csv((dir / "spectrum.csv").string(), *eq);
        write_fields_csv((dir / "fields.csv").string(), *eq, ctx);
        files.push_back("spectrum.csv");
        files.push_back("fields.csv");

        const double tol_used = config.solver.tol > 0.0
                                    ? config.solver.tol
                                    : (config.solver.method == SolveMethod::dual ? 1e-10 : 1e-8);
        checks.add("constraint_residual", eq->diagnostics.constraint_residual <= tol_used,
                   {{"observed", json_number(eq->diagnostics.constraint_residual)},
                    {"tolerance", tol_used}});
        checks.add("full_rank", eq->rho.eigenvalues().minCoeff() > 0.0,
                   {{"min_eigenvalue", json_number(eq->rho.eigenvalues().minCoeff())},
                    {"tolerance", 0.0}});
        if (config.entropy.kind == EntropyKind::boltzmann && config.entropy.eta == 0.0) {
            const MaxwellianResidual mr = maxwellian_residual(*eq);
            checks.add("maxwellian_operator", mr.operator_form < kMaxwellianOperatorTol,
                       {{"observed", json_number(mr.operator_form)},
                        {"tolerance", kMaxwellianOperatorTol},
                        {"moment_form", json_number(mr.moment_form)}});
        } else {
            checks.skip("maxwellian_operator", "defined for the Boltzmann entropy at eta = 0");
        }
        for (const char* name :
             {"el_residual", "minmax_eigen", "h_norm", "derivative_checks", "log_sobolev_gap",
              "refinement_studies", "plumbing"}) {
            checks.skip(name, "run the verify subcommand for the full battery");
        }
    } else {
        report["solver_error"] = solver_message;
    }
    report["checks"] = checks.checks;
    report["files"] = files;
    write_json_file((dir / "report.json").string(), report);

    if (!eq || !eq->diagnostics.converged) return 2;
    return 0;
}

namespace {

struct VerifyInstances {
    std::shared_ptr<Equilibrium> base;
    std::vector<int> levels;
    std::vector<std::shared_ptr<Equilibrium>> per_level;
};

VerifyInstances solve_verify_instances(const RunConfig& config) {
    VerifyInstances inst;
    inst.base = std::make_shared<Equilibrium>(
        solve_by_config(config, problem_from_config(config)));
    inst.levels = config.verify.refinement_levels;
    DualOptions refine_options = dual_options_from_config(config.solver);
    refine_options.tol = std::min(refine_options.tol, kRefinementSolveTol);
    for (int n : inst.levels) {
        inst.per_level.push_back(std::make_shared<Equilibrium>(
            solve_dual(problem_at_resolution(config, n), refine_options)));
    }
    return inst;
}

} // namespace

int run_verify(const RunConfig& config) {
    apply_exec_policy(config);
    if (config.entropy.kind != EntropyKind::boltzmann || config.entropy.eta != 0.0) {
        throw config_error("verify: the battery is defined for the Boltzmann entropy at eta = 0");
    }
    const fs::path dir(config.output_dir);

    json report;
    report["config"] = config_to_json(config);
    report["provenance"] = provenance(/*with_timestamp=*/false);

    VerifyInstances inst;
    try {
        inst = solve_verify_instances(config);
    } catch (const solver_error& e) {
        fs::create_directories(dir);
        report["solver_error"] = e.what();
        write_json_file((dir / "verify.json").string(), report);
        return 2;
    }
    for (const auto& eq : inst.per_level) {
        if (!eq->diagnostics.converged) {
            fs::create_directories(dir);
            report["solver_error"] = "refinement solve did not converge";
            write_json_file((dir / "verify.json").string(), report);
            return 2;
        }
    }
    if (!inst.base->diagnostics.converged) {
        fs::create_directories(dir);
        report["solver_error"] = "base solve did not converge";
        write_json_file((dir / "verify.json").string(), report);
        return 2;
    }

    const Equilibrium& eq = *inst.base;
    const Grid& grid = *eq.problem.grid;
    QFormContext ctx = build_qform_context(inst.base);
    CheckList checks;

    // Euler-Lagrange eigenrelation, operator form.
    {
        const double v = el_residual(eq, config.verify.p_modes);
        checks.add("el_residual", v < kElResidualTol,
                   {{"observed", json_number(v)},
                    {"tolerance", kElResidualTol},
                    {"modes", config.verify.p_modes}});
    }

    // Min-max principle for the first eigenvalues.
    {
        const int pmax = std::min(5, grid.num_points() - 1);
        double worst = 0.0;
        for (int p = 0; p <= pmax; ++p) {
            const double v = minmax_eigen(eq, p);
            worst = std::max(worst,
                             std::abs(v + std::log(std::max(eq.rho.eigenvalues()[p], 1e-300))));
        }
        checks.add("minmax_eigen", worst < kMinmaxTol,
                   {{"observed", json_number(worst)}, {"tolerance", kMinmaxTol}, {"modes", pmax}});
    }

    // h-norm bound, operator form on white-noise fields.
    {
        std::mt19937_64 rng(config.seed ^ 0x484e4f524dull);
        double worst = -std::numeric_limits<double>::infinity();
        for (int s = 0; s < config.verify.hnorm_samples; ++s) {
            const HNormResult r = h_norm(random_unit_field(grid, rng), eq);
            worst = std::max(worst, r.hnorm - r.qstar);
        }
        checks.add("h_norm_operator", worst <= kHNormOperatorSlack,
                   {{"worst_violation", json_number(worst)},
                    {"tolerance", kHNormOperatorSlack},
                    {"samples", config.verify.hnorm_samples}});
    }

    // h-norm bound against the integral form on smooth fields: O(h) slack.
    {
        std::mt19937_64 rng(config.seed ^ 0x484e4f524d32ull);
        double worst = 0.0;
        for (int s = 0; s < config.verify.hnorm_samples; ++s) {
            const Eigen::VectorXd phi = random_smooth_field(grid, rng);
            const HNormResult r = h_norm(phi, eq);
            const double qint = qform(phi, phi, ctx, QFormVariant::qstar_integral);
            worst = std::max(worst, r.hnorm - qint);
        }
        const double c_obs = worst / grid.spacing();
        checks.add("h_norm_integral", c_obs <= kHNormIntegralConstant,
                   {{"violation", json_number(worst)},
                    {"observed_constant", json_number(c_obs)},
                    {"constant_cap", kHNormIntegralConstant},
                    {"samples", config.verify.hnorm_samples}});
    }

    // Derivative checks along rank-one paths.
    {
        std::mt19937_64 rng(config.seed ^ 0x4445524956ull);
        double worst_e = 0.0, worst_s = 0.0;
        for (int s = 0; s < config.verify.derivative_samples; ++s) {
            // |phi| <= M sqrt(n), the admissible class of the entropy lemma
            const Eigen::VectorXd phi =
                random_smooth_field(grid, rng).cwiseProduct(eq.problem.target.sqrt_n());
            const DerivativeChecks d = derivative_checks(eq, phi, kDerivativeEta);
            worst_e = std::max(worst_e, d.energy_rel_err);
            worst_s = std::max(worst_s, d.entropy_rel_err);
        }
        checks.add("derivative_energy", worst_e < kDerivativeTol,
                   {{"observed", json_number(worst_e)},
                    {"tolerance", kDerivativeTol},
                    {"samples", config.verify.derivative_samples},
                    {"eta", kDerivativeEta}});
        checks.add("derivative_entropy", worst_s < kDerivativeTol,
                   {{"observed", json_number(worst_s)},
                    {"tolerance", kDerivativeTol},
                    {"samples", config.verify.derivative_samples},
                    {"eta", kDerivativeEta}});
    }

    // Quantum Maxwellian, operator form at the base equilibrium.
    std::vector<double> maxwellian_moment;
    {
        const MaxwellianResidual r = maxwellian_residual(eq);
        checks.add("maxwellian_operator", r.operator_form < kMaxwellianOperatorTol,
                   {{"observed", json_number(r.operator_form)},
                    {"tolerance", kMaxwellianOperatorTol}});
    }

    // Refinement studies.
    std::vector<double> chem_mismatch, qform_gap, sobolev_gaps;
    for (const auto& level_eq : inst.per_level) {
        chem_mismatch.push_back(compare_chemical_potential(*level_eq).max_mismatch);
        maxwellian_moment.push_back(maxwellian_residual(*level_eq).moment_form);

        QFormContext level_ctx = build_qform_context(level_eq);
        const int pmax = std::min(5, level_eq->rho.num_modes() - 1);
        double worst = 0.0;
        for (int p = 0; p <= pmax; ++p) {
            for (int q = 0; q <= pmax; ++q) {
                const Eigen::VectorXd up = level_eq->rho.eigenvectors().col(p);
                const Eigen::VectorXd uq = level_eq->rho.eigenvectors().col(q);
                worst = std::max(worst,
                                 std::abs(qform(up, uq, level_ctx, QFormVariant::qstar_integral) -
                                          qform(up, uq, level_ctx, QFormVariant::qstar_operator)));
            }
        }
        qform_gap.push_back(worst);
        sobolev_gaps.push_back(log_sobolev_gap(level_eq->rho));
    }

    {
        std::vector<double> orders;
        bool orders_ok = true;
        bool exact = true;
        for (std::size_t i = 0; i + 1 < chem_mismatch.size(); ++i) {
            const double o = refinement_order(chem_mismatch[i], chem_mismatch[i + 1],
                                              inst.levels[i], inst.levels[i + 1]);
            orders.push_back(o);
            orders_ok = orders_ok && o >= kRefinementOrderFloor;
        }
        for (double v : chem_mismatch) exact = exact && v < kRefinementExactnessFloor;
        double at64 = chem_mismatch.empty() ? 0.0 : chem_mismatch.back();
        for (std::size_t i = 0; i < inst.levels.size(); ++i) {
            if (inst.levels[i] == 64) at64 = chem_mismatch[i];
        }
        checks.add("chemical_potential_refinement",
                   (orders_ok || exact) && at64 < kChemicalPotentialAt64,
                   {{"mismatch", vector_to_json(chem_mismatch)},
                    {"orders", vector_to_json(orders)},
                    {"order_floor", kRefinementOrderFloor},
                    {"identity_exact", exact},
                    {"exactness_floor", kRefinementExactnessFloor},
                    {"value_at_64", json_number(at64)},
                    {"value_tolerance", kChemicalPotentialAt64},
                    {"levels", inst.levels}});
    }
    {
        std::vector<double> orders;
        bool ordered = true;
        bool exact = true;
        for (std::size_t i = 0; i + 1 < maxwellian_moment.size(); ++i) {
            ordered = ordered && maxwellian_moment[i + 1] < maxwellian_moment[i];
            const double o = refinement_order(maxwellian_moment[i], maxwellian_moment[i + 1],
                                              inst.levels[i], inst.levels[i + 1]);
            orders.push_back(o);
            ordered = ordered && o >= kRefinementOrderFloor;
        }
        for (double v : maxwellian_moment) exact = exact && v < kRefinementExactnessFloor;
        checks.add("maxwellian_moment_refinement", ordered || exact,
                   {{"residual", vector_to_json(maxwellian_moment)},
                    {"orders", vector_to_json(orders)},
                    {"order_floor", kRefinementOrderFloor},
                    {"identity_exact", exact},
                    {"exactness_floor", kRefinementExactnessFloor},
                    {"levels", inst.levels}});
    }
    {
        std::vector<double> orders;
        bool ok = true;
        for (std::size_t i = 0; i + 1 < qform_gap.size(); ++i) {
            const double o =
                refinement_order(qform_gap[i], qform_gap[i + 1], inst.levels[i], inst.levels[i + 1]);
            orders.push_back(o);
            ok = ok && o >= kRefinementOrderFloor;
        }
        checks.add("qstar_form_agreement", ok,
                   {{"gap", vector_to_json(qform_gap)},
                    {"orders", vector_to_json(orders)},
                    {"order_floor", kRefinementOrderFloor},
                    {"levels", inst.levels}});
    }

    // Log-Sobolev diagnostic and entropy bounds.
    {
        bool ok = true;
        std::vector<double> slacks;
        for (std::size_t i = 0; i < inst.per_level.size(); ++i) {
            const double h_level = inst.per_level[i]->problem.grid->spacing();
            slacks.push_back(-kLogSobolevSlope * h_level);
            ok = ok && sobolev_gaps[i] >= -kLogSobolevSlope * h_level;
        }
        checks.add("log_sobolev_gap", ok,
                   {{"gap", vector_to_json(sobolev_gaps)},
                    {"lower_bound", vector_to_json(slacks)},
                    {"levels", inst.levels}});
    }
    {
        bool ok = true;
        std::vector<double> neg, upper;
        for (const auto& level_eq : inst.per_level) {
            const EntropyBounds b = entropy_bounds(level_eq->rho);
            const double h_level = level_eq->problem.grid->spacing();
            neg.push_back(b.neg_entropy);
            upper.push_back(b.upper_bound);
            // the upper bound is the log-Sobolev bound at unit trace; same slack
            ok = ok && b.neg_entropy >= 0.0 &&
                 b.neg_entropy <= b.upper_bound + kLogSobolevSlope * h_level;
        }
        checks.add("entropy_bounds", ok,
                   {{"neg_entropy", vector_to_json(neg)},
                    {"upper_bound", vector_to_json(upper)},
                    {"levels", inst.levels}});
    }

    // Full rank across the solved instances.
    {
        double worst = eq.rho.eigenvalues().minCoeff();
        for (const auto& level_eq : inst.per_level) {
            worst = std::min(worst, level_eq->rho.eigenvalues().minCoeff());
        }
        checks.add("full_rank", worst > 0.0,
                   {{"min_eigenvalue", json_number(worst)}, {"tolerance", 0.0}});
    }

    // Constraint/positivity plumbing battery.
    {
        std::mt19937_64 rng(config.seed ^ 0x504c554d42ull);
        GridConfig pg = config.grid;
        pg.n = kPlumbingGridSize;
        GridPtr pgrid = grid_from_config(pg);
        ConstraintProfile ptarget = profile_from_config(config.profile, pgrid);

        bool ok = true;
        double worst_resid = 0.0, worst_eig = 0.0, worst_a2 = 0.0;
        std::uniform_int_distribution<int> mode_dist(0, kPlumbingGridSize - 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int s = 0; s < config.verify.plumbing_samples && ok; ++s) {
            const DensityMatrix raw = random_psd_state(pgrid, rng);
            const DensityMatrix admissible = rescale(raw, ptarget);
            auto record = [&](const DensityMatrix& st, double a2) {
                const double resid =
                    (st.kernel().diagonal() - ptarget.n()).cwiseAbs().maxCoeff();
                const double eig_min = st.eigenvalues().minCoeff();
                worst_resid = std::max(worst_resid, resid);
                worst_eig = std::min(worst_eig, eig_min);
                worst_a2 = std::max(worst_a2, a2);
                ok = ok && resid <= kPlumbingConstraintTol && eig_min >= kPlumbingEigenFloor &&
                     a2 <= 2.0 + 1e-12;
            };
            record(admissible, 1.0);

            const Eigen::VectorXd phi = random_smooth_field(*pgrid, rng);
            const double t_rank = 2.0 * unit(rng);
            record(perturb_rank_one(admissible, phi, t_rank, ptarget), 1.0);

            int p = mode_dist(rng), q = mode_dist(rng);
            if (p == q) q = (q + 1) % kPlumbingGridSize;
            const double t0 =
                0.5 * std::min(admissible.eigenvalues()[p], admissible.eigenvalues()[q]);
            const double t_pair = (2.0 * unit(rng) - 1.0) * t0;
            const Eigen::VectorXd pair_density =
                ptarget.n() + 2.0 * t_pair *
                                  admissible.eigenvectors().col(p).cwiseProduct(
                                      admissible.eigenvectors().col(q));
            const double a2 = (ptarget.n().array() / pair_density.array()).maxCoeff();
            record(perturb_pair(admissible, p, q, t_pair, PairPhase::real_part, ptarget), a2);
            record(perturb_pair(admissible, p, q, t_pair, PairPhase::imaginary_part, ptarget), 1.0);
        }
        checks.add("plumbing", ok,
                   {{"worst_constraint_residual", json_number(worst_resid)},
                    {"worst_min_eigenvalue", json_number(worst_eig)},
                    {"worst_a_squared", json_number(worst_a2)},
                    {"constraint_tolerance", kPlumbingConstraintTol},
                    {"eigen_floor", kPlumbingEigenFloor},
                    {"samples", config.verify.plumbing_samples},
                    {"grid_size", kPlumbingGridSize}});
    }

    checks.skip("determinism", "byte-identity is established by comparing two verify runs");

    report["checks"] = checks.checks;
    report["summary"] = checks.summary();

    fs::create_directories(dir);
    write_json_file((dir / "verify.json").string(), report);
    return checks.failed == 0 ? 0 : 3;
}

int run_oracle_compare(const RunConfig& config) {
    apply_exec_policy(config);
    if (config.grid.n > 3) {
        throw config_error("oracle-compare: the exhaustive oracle is defined for N <= 3");
    }
    const Problem problem = problem_from_config(config);
    const Equilibrium oracle = oracle_minimize(problem);
    const Equilibrium dual = solve_dual(problem, dual_options_from_config(config.solver));

    const double delta_f =
        std::abs(oracle.diagnostics.free_energy - dual.diagnostics.free_energy);
    const double kernel_diff = (oracle.rho.kernel() - dual.rho.kernel()).cwiseAbs().maxCoeff();

    json report;
    report["config"] = config_to_json(config);
    report["provenance"] = provenance(/*with_timestamp=*/false);
    report["oracle"] = equilibrium_summary(oracle);
    report["solver"] = equilibrium_summary(dual);
    report["delta_f"] = json_number(delta_f);
    report["kernel_max_diff"] = json_number(kernel_diff);

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    write_json_file((dir / "oracle.json").string(), report);
    return dual.diagnostics.converged ? 0 : 2;
}

int run_sweep_eta(const RunConfig& config) {
    apply_exec_policy(config);
    std::vector<double> etas;
    for (int j = config.verify.eta_sweep.j_min; j <= config.verify.eta_sweep.j_max; ++j) {
        etas.push_back(std::ldexp(1.0, -j));
    }
    const Problem problem = problem_from_config(config);
    const EtaSweepReport sweep =
        sweep_eta(problem, etas, primal_options_from_config(config.solver));

    json rows = json::array();
    for (const EtaSweepRow& r : sweep.rows) {
        rows.push_back(json{{"eta", json_number(r.eta)},
                            {"solved", r.solved},
                            {"trace_distance", json_number(r.trace_distance)},
                            {"max_eigen_diff", json_number(r.max_eigen_diff)},
                            {"entropy_gap", json_number(r.entropy_gap)},
                            {"xlog_distance", json_number(r.xlog_distance)},
                            {"h_eta", json_number(r.h_eta)}});
    }

    json report;
    report["config"] = config_to_json(config);
    report["provenance"] = provenance(/*with_timestamp=*/false);
    report["reference"] = equilibrium_summary(sweep.reference);
    report["rows"] = rows;

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    write_json_file((dir / "sweep.json").string(), report);
    return sweep.reference.diagnostics.converged ? 0 : 2;
}

} // namespace qmax

#include "qmaxwell/config.hpp"

#include "qmaxwell/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace qmax {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
        throw config_error("config: '" + where + "' must be an object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.contains(it.key())) {
            throw config_error("config: unknown key '" + it.key() + "' in '" + where + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error("config: bad value for '" + key + "': " + e.what());
    }
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "dirichlet") return Boundary::dirichlet;
    throw config_error("config: boundary must be 'periodic' or 'dirichlet', got '" + s + "'");
}

ProfileFamily family_from_string(const std::string& s) {
    if (s == "gaussian") return ProfileFamily::gaussian;
    if (s == "double_gaussian") return ProfileFamily::double_gaussian;
    if (s == "bump") return ProfileFamily::bump;
    if (s == "uniform") return ProfileFamily::uniform;
    throw config_error("config: unknown profile family '" + s + "'");
}

EntropyKind kind_from_string(const std::string& s) {
    if (s == "boltzmann") return EntropyKind::boltzmann;
    if (s == "fermi_dirac") return EntropyKind::fermi_dirac;
    throw config_error("config: entropy kind must be 'boltzmann' or 'fermi_dirac'");
}

SolveMethod method_from_string(const std::string& s) {
    if (s == "dual") return SolveMethod::dual;
    if (s == "primal") return SolveMethod::primal;
    throw config_error("config: solver method must be 'dual' or 'primal'");
}

} // namespace

RunConfig config_from_json(const nlohmann::json& j) {
    check_keys(j, "<root>",
               {"grid", "profile", "entropy", "solver", "verify", "output_dir", "seed", "threads"});
    RunConfig c;

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, "grid", {"n", "length", "boundary"});
        c.grid.n = get_or<int>(g, "n", c.grid.n);
        c.grid.length = get_or<double>(g, "length", c.grid.length);
        if (g.contains("boundary")) c.grid.boundary = boundary_from_string(g.at("boundary"));
        if (c.grid.n < 2) throw config_error("config: grid.n must be >= 2");
        if (!(c.grid.length > 0.0)) throw config_error("config: grid.length must be positive");
    }

    if (j.contains("profile")) {
        const json& p = j.at("profile");
        check_keys(p, "profile", {"family", "params", "n_floor", "file"});
        if (p.contains("family")) c.profile.family = family_from_string(p.at("family"));
        c.profile.n_floor = get_or<double>(p, "n_floor", c.profile.n_floor);
        c.profile.file = get_or<std::string>(p, "file", c.profile.file);
        if (!(c.profile.n_floor > 0.0) || c.profile.n_floor >= 1.0) {
            throw config_error("config: profile.n_floor must lie in (0, 1)");
        }
        if (p.contains("params")) {
            const json& q = p.at("params");
            check_keys(q, "profile.params", {"center", "width", "center2", "width2", "weight2"});
            c.profile.params.center = get_or<double>(q, "center", c.profile.params.center);
            c.profile.params.width = get_or<double>(q, "width", c.profile.params.width);
            c.profile.params.center2 = get_or<double>(q, "center2", c.profile.params.center2);
            c.profile.params.width2 = get_or<double>(q, "width2", c.profile.params.width2);
            c.profile.params.weight2 = get_or<double>(q, "weight2", c.profile.params.weight2);
        }
    }

    if (j.contains("entropy")) {
        const json& e = j.at("entropy");
        check_keys(e, "entropy", {"kind", "temperature", "eta"});
        if (e.contains("kind")) c.entropy.kind = kind_from_string(e.at("kind"));
        c.entropy.temperature = get_or<double>(e, "temperature", c.entropy.temperature);
        c.entropy.eta = get_or<double>(e, "eta", c.entropy.eta);
        entropy_from_config(c.entropy).validate();
    }

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        check_keys(s, "solver", {"method", "tol", "max_iter", "step0"});
        if (s.contains("method")) c.solver.method = method_from_string(s.at("method"));
        c.solver.tol = get_or<double>(s, "tol", c.solver.tol);
        c.solver.max_iter = get_or<int>(s, "max_iter", c.solver.max_iter);
        c.solver.step0 = get_or<double>(s, "step0", c.solver.step0);
        if (c.solver.tol < 0.0 || c.solver.max_iter < 0) {
            throw config_error("config: solver.tol and solver.max_iter must be nonnegative");
        }
    }

    if (j.contains("verify")) {
        const json& v = j.at("verify");
        check_keys(v, "verify",
                   {"p_modes", "refinement_levels", "eta_sweep", "derivative_samples",
                    "hnorm_samples", "plumbing_samples"});
        c.verify.p_modes = get_or<int>(v, "p_modes", c.verify.p_modes);
        c.verify.refinement_levels =
            get_or<std::vector<int>>(v, "refinement_levels", c.verify.refinement_levels);
        c.verify.derivative_samples = get_or<int>(v, "derivative_samples", c.verify.derivative_samples);
        c.verify.hnorm_samples = get_or<int>(v, "hnorm_samples", c.verify.hnorm_samples);
        c.verify.plumbing_samples = get_or<int>(v, "plumbing_samples", c.verify.plumbing_samples);
        if (v.contains("eta_sweep")) {
            const json& es = v.at("eta_sweep");
            check_keys(es, "verify.eta_sweep", {"j_min", "j_max"});
            c.verify.eta_sweep.j_min = get_or<int>(es, "j_min", c.verify.eta_sweep.j_min);
            c.verify.eta_sweep.j_max = get_or<int>(es, "j_max", c.verify.eta_sweep.j_max);
        }
        if (c.verify.p_modes < 1 || c.verify.refinement_levels.empty() ||
            c.verify.eta_sweep.j_min < 2 || c.verify.eta_sweep.j_max < c.verify.eta_sweep.j_min ||
            c.verify.derivative_samples < 1 || c.verify.hnorm_samples < 1 ||
            c.verify.plumbing_samples < 1) {
            throw config_error("config: invalid verify section");
        }
        for (int lvl : c.verify.refinement_levels) {
            if (lvl < 2) throw config_error("config: refinement levels must be >= 2");
        }
    }

    c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.threads = get_or<int>(j, "threads", c.threads);
    if (c.threads < -1) throw config_error("config: threads must be >= -1");
    return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
    json j;
    j["grid"] = {{"n", c.grid.n},
                 {"length", c.grid.length},
                 {"boundary", c.grid.boundary == Boundary::periodic ? "periodic" : "dirichlet"}};
    json params = {{"center", c.profile.params.center}, {"width", c.profile.params.width}};
    if (c.profile.family == ProfileFamily::double_gaussian) {
        params["center2"] = c.profile.params.center2;
        params["width2"] = c.profile.params.width2;
        params["weight2"] = c.profile.params.weight2;
    }
    const char* family = nullptr;
    switch (c.profile.family) {
    case ProfileFamily::gaussian: family = "gaussian"; break;
    case ProfileFamily::double_gaussian: family = "double_gaussian"; break;
    case ProfileFamily::bump: family = "bump"; break;
    case ProfileFamily::uniform: family = "uniform"; break;
    }
    j["profile"] = {{"family", family}, {"params", params}, {"n_floor", c.profile.n_floor}};
    if (!c.profile.file.empty()) j["profile"]["file"] = c.profile.file;
    j["entropy"] = {{"kind", c.entropy.kind == EntropyKind::boltzmann ? "boltzmann" : "fermi_dirac"},
                    {"temperature", c.entropy.temperature},
                    {"eta", c.entropy.eta}};
    j["solver"] = {{"method", c.solver.method == SolveMethod::dual ? "dual" : "primal"},
                   {"tol", c.solver.tol},
                   {"max_iter", c.solver.max_iter},
                   {"step0", c.solver.step0}};
    j["verify"] = {{"p_modes", c.verify.p_modes},
                   {"refinement_levels", c.verify.refinement_levels},
                   {"eta_sweep", {{"j_min", c.verify.eta_sweep.j_min}, {"j_max", c.verify.eta_sweep.j_max}}},
                   {"derivative_samples", c.verify.derivative_samples},
                   {"hnorm_samples", c.verify.hnorm_samples},
                   {"plumbing_samples", c.verify.plumbing_samples}};
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw config_error("config: cannot open '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("config: parse error in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

GridPtr grid_from_config(const GridConfig& c) { return make_grid(c.n, c.length, c.boundary); }

ConstraintProfile profile_from_config(const ProfileConfig& c, const GridPtr& grid) {
    if (!c.file.empty()) {
        std::ifstream in(c.file);
        if (!in) {
            throw config_error("profile: cannot open raw profile file '" + c.file + "'");
        }
        std::vector<double> values;
        double v;
        while (in >> v) values.push_back(v);
        if (static_cast<int>(values.size()) != grid->num_points()) {
            throw config_error("profile: file '" + c.file + "' holds " +
                               std::to_string(values.size()) + " values, expected " +
                               std::to_string(grid->num_points()));
        }
        Eigen::VectorXd raw = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
        return ConstraintProfile::from_density(grid, raw, c.n_floor);
    }
    return ConstraintProfile::from_density(grid, profile_density(*grid, c.family, c.params),
                                           c.n_floor);
}

EntropySpec entropy_from_config(const EntropyConfig& c) {
    EntropySpec s{c.kind, c.temperature, c.eta};
    s.validate();
    return s;
}

Problem problem_from_config(const RunConfig& c) {
    GridPtr grid = grid_from_config(c.grid);
    return Problem{grid, profile_from_config(c.profile, grid), entropy_from_config(c.entropy)};
}

Problem problem_at_resolution(const RunConfig& c, int n) {
    GridConfig gc = c.grid;
    gc.n = n;
    GridPtr grid = grid_from_config(gc);
    if (!c.profile.file.empty()) {
        throw config_error("refinement study: raw-vector profiles are tied to one resolution");
    }
    return Problem{grid, profile_from_config(c.profile, grid), entropy_from_config(c.entropy)};
}

DualOptions dual_options_from_config(const SolverConfig& c) {
    DualOptions o;
    if (c.tol > 0.0) o.tol = c.tol;
    if (c.max_iter > 0) o.max_iter = c.max_iter;
    return o;
}

PrimalOptions primal_options_from_config(const SolverConfig& c) {
    PrimalOptions o;
    if (c.tol > 0.0) o.tol = c.tol;
    if (c.max_iter > 0) o.max_iter = c.max_iter;
    if (c.step0 > 0.0) o.step0 = c.step0;
    return o;
}

} // namespace qmax

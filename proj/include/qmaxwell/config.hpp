#pragma once

#include "qmaxwell/entropy.hpp"
#include "qmaxwell/grid.hpp"
#include "qmaxwell/profiles.hpp"
#include "qmaxwell/solve.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace qmax {

struct GridConfig {
    int n{64};
    double length{20.0};
    Boundary boundary{Boundary::periodic};
};

struct ProfileConfig {
    ProfileFamily family{ProfileFamily::gaussian};
    ProfileParams params{10.0, 2.0, 0.0, 1.0, 0.5};
    double n_floor{1e-8};
    std::string file; // raw node-vector profile (whitespace separated), overrides family
};

struct EntropyConfig {
    EntropyKind kind{EntropyKind::boltzmann};
    double temperature{1.0};
    double eta{0.0};
};

enum class SolveMethod { dual, primal };

struct SolverConfig {
    SolveMethod method{SolveMethod::dual};
    double tol{0.0};  // 0 selects the per-method default (1e-10 dual, 1e-8 primal)
    int max_iter{0};  // 0 selects the per-method default (200 dual, 5000 primal)
    double step0{0.0};
};

struct EtaSweepConfig {
    int j_min{4};  // etas 2^-j, j = j_min..j_max
    int j_max{20};
};

struct VerifyConfig {
    int p_modes{8};
    std::vector<int> refinement_levels{32, 64, 128};
    EtaSweepConfig eta_sweep;
    int derivative_samples{10};
    int hnorm_samples{100};
    int plumbing_samples{100};
};

struct RunConfig {
    GridConfig grid;
    ProfileConfig profile;
    EntropyConfig entropy;
    SolverConfig solver;
    VerifyConfig verify;
    std::string output_dir{"out"};
    std::uint64_t seed{12345};
    int threads{0}; // 0: keep defaults, -1: serial kernels, >0: OpenMP thread count
};

/// Strict parse: unknown keys and out-of-range values raise config_error.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config_file(const std::string& path);

GridPtr grid_from_config(const GridConfig& c);
ConstraintProfile profile_from_config(const ProfileConfig& c, const GridPtr& grid);
EntropySpec entropy_from_config(const EntropyConfig& c);
Problem problem_from_config(const RunConfig& c);
/// Same problem on a different resolution (refinement studies).
Problem problem_at_resolution(const RunConfig& c, int n);

DualOptions dual_options_from_config(const SolverConfig& c);
PrimalOptions primal_options_from_config(const SolverConfig& c);

} // namespace qmax

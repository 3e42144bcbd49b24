// Command-line front end: solve / verify / oracle-compare / sweep-eta.

#include "qmaxwell/errors.hpp"
#include "qmaxwell/runner.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

namespace {

struct CommonFlags {
    std::string config_path;
    std::string output_dir;
    std::int64_t seed{-1};
    int threads{-2};
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON configuration file");
    cmd->add_option("--output-dir", flags.output_dir, "override config.output_dir");
    cmd->add_option("--seed", flags.seed, "override config.seed");
    cmd->add_option("--threads", flags.threads,
                    "override config.threads (-1 serial, 0 default, >0 OpenMP threads)");
}

qmax::RunConfig build_config(const CommonFlags& flags) {
    qmax::RunConfig config;
    if (!flags.config_path.empty()) {
        config = qmax::load_config_file(flags.config_path);
    }
    if (!flags.output_dir.empty()) config.output_dir = flags.output_dir;
    if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
    if (flags.threads >= -1) config.threads = flags.threads;
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qmaxwell: constrained quantum free-energy minimizer and verifier"};
    app.require_subcommand(1);

    CommonFlags solve_flags, verify_flags, oracle_flags, sweep_flags;
    CLI::App* solve = app.add_subcommand("solve", "solve the configured problem");
    CLI::App* verify = app.add_subcommand("verify", "run the verification battery");
    CLI::App* oracle = app.add_subcommand("oracle-compare", "compare the solver to the N<=3 oracle");
    CLI::App* sweep = app.add_subcommand("sweep-eta", "entropy-regularization sweep");
    attach_common(solve, solve_flags);
    attach_common(verify, verify_flags);
    attach_common(oracle, oracle_flags);
    attach_common(sweep, sweep_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return qmax::run_solve(build_config(solve_flags));
        if (verify->parsed()) return qmax::run_verify(build_config(verify_flags));
        if (oracle->parsed()) return qmax::run_oracle_compare(build_config(oracle_flags));
        if (sweep->parsed()) return qmax::run_sweep_eta(build_config(sweep_flags));
    } catch (const qmax::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qmax::solver_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

#pragma once

#include "qmaxwell/config.hpp"

namespace qmax {

/// Exit codes shared by the CLI: 0 ok, 1 config error, 2 solver failure,
/// 3 verification failure. Config errors are thrown as config_error and
/// mapped by the caller.

/// Solve the configured problem; writes report.json, spectrum.csv, fields.csv.
int run_solve(const RunConfig& config);

/// Run the verification battery; writes verify.json (deterministic bytes for
/// a fixed config and seed).
int run_verify(const RunConfig& config);

/// Compare solve_dual against the exhaustive oracle (N <= 3); writes oracle.json.
int run_oracle_compare(const RunConfig& config);

/// Regularization sweep along eta = 2^-j; writes sweep.json.
int run_sweep_eta(const RunConfig& config);

/// Apply config.threads to the kernel execution policy.
void apply_exec_policy(const RunConfig& config);

} // namespace qmax

#pragma once

// Experiment drivers behind the CLI: each one runs the named study, writes
// its CSV/JSON artifacts into the output directory, and returns a verdict.
// Exit code 0 = PASS/complete, 1 = FAIL, 2 = abort.

#include <json.hpp>

#include "sigmaflow/harness/config.hpp"
#include "sigmaflow/harness/records.hpp"

namespace sigmaflow {

struct ExperimentResult {
  bool pass = true;
  int exit_code = 0;
  nlohmann::json verdict;
};

ExperimentResult run_experiment(const RunConfig& cfg);

// individual drivers (exposed for the acceptance suite)
ExperimentResult run_free_check(const RunConfig& cfg);
ExperimentResult run_dynamics(const RunConfig& cfg);
ExperimentResult run_meanfield_1d(const RunConfig& cfg);
ExperimentResult run_meanfield_2d(const RunConfig& cfg);
ExperimentResult run_coupling(const RunConfig& cfg);
ExperimentResult run_gff_convergence(const RunConfig& cfg);
ExperimentResult run_bubble_validation(const RunConfig& cfg);
ExperimentResult run_eo4(const RunConfig& cfg);
ExperimentResult run_ds_check(const RunConfig& cfg);
ExperimentResult run_mu_solver(const RunConfig& cfg);

/// Fixed point of the time-discretized 1d mean-field chain (the exponential
/// Euler update with drift -lambda mu Psi): mu = sum_k v_dt(k, mu). Used to
/// document the dt bias of the 1d fixed-point run.
double discrete_mu_fixed_point_1d(double m, int K, double dt, double lambda);

}  // namespace sigmaflow

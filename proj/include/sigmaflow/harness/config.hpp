#pragma once

// Run configuration: documented key=value schema (sections cosmetic),
// command-line overrides, cross-field validation with the violated
// invariant named, and a canonical digest stamped on every artifact.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sigmaflow/dynamics.hpp"
#include "sigmaflow/lattice.hpp"

namespace sigmaflow {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string experiment;

  // grid
  int d = 2, n = 16, K = 3;
  double m = 1.0, lambda = 0.0;

  // ensembles
  int N = 1, M = 16, replicas = 1;
  std::vector<int> n_list = {4, 16, 64, 256};

  // time
  double dt = 1e-3;
  uint64_t steps = 1000, burnin = 0, thin = 1;

  // reproducibility and execution
  uint64_t seed = 1;
  std::string out;          // default: $SIGMAFLOW_OUTDIR or ./out
  int workers = 1;
  uint64_t checkpoint_every = 0;
  std::string resume;

  // flags
  std::string init = "stationary-free";  // zero | warm
  bool homogeneity = true;
  bool dpd = false;
  std::string counterterm = "exact";     // none | wrong-n-plus-3
  bool dt_halving = true;
  int batches = 32;

  Grid make_grid_checked() const;
  InitScheme init_scheme() const;
  IntegratorMode integrator() const { return dpd ? IntegratorMode::Split : IntegratorMode::Direct; }
  CountertermMode ct_mode() const;

  /// Sorted key=value pairs of the effective config; `out`, `workers` and
  /// `resume` are excluded so artifacts hash identically across hosts.
  std::vector<std::pair<std::string, std::string>> canonical() const;
  uint64_t config_hash() const;  // FNV-1a 64 over the canonical lines
};

/// Parses the file (empty path = defaults only), applies --key=value
/// overrides in order, then validates. Unknown keys are rejected, not
/// ignored.
RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides);

void validate_config(const RunConfig& cfg);

const std::vector<std::string>& known_experiments();

}  // namespace sigmaflow

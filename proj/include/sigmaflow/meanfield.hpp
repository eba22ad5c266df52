#pragma once

// Self-consistent mean-field SPDE solver: M independent copies of one
// component, each coupled to its own free field, interacting only through
// the empirical law coefficient
//   mu(x) = M^{-1} sum_m (Psi_m(x)^2 - Z_m(x)^2),
// the pathwise control variate with exactly known mean (the free squares
// cancel the Wick constant). In d = 1 the model needs no renormalization
// and the Z-subtraction is dropped.

#include <cstdint>
#include <vector>

#include "sigmaflow/dynamics.hpp"
#include "sigmaflow/lattice.hpp"
#include "sigmaflow/noise.hpp"

namespace sigmaflow {

class McKeanEnsemble {
 public:
  /// renormalized: subtract the coupled Z^2 in the law coefficient (the
  /// d >= 2 form); homogeneity: project mu onto its spatial average.
  McKeanEnsemble(Grid grid, int M, bool homogeneity, bool renormalized);

  /// Stationary-free initialization: Psi_m(0) = Z_m(0) ~ GFF i.i.d., copy m
  /// drawing from stream (seed, member, m, FreeInit).
  void initialize(uint64_t seed, uint32_t member);

  const Grid& grid() const { return grid_; }
  int ncopies() const { return M_; }
  bool homogeneity() const { return homogeneity_; }
  bool renormalized() const { return renormalized_; }

  double t = 0.0;
  uint64_t step_count = 0;
  std::vector<ArrayXcd> psi, z;

 private:
  Grid grid_;
  int M_;
  bool homogeneity_, renormalized_;
};

/// Empirical law coefficient on the n^d grid (see class comment). M >= 2
/// enforced; with the homogeneity flag the result is constant in space.
ArrayXd estimate_law_coefficient(const McKeanEnsemble& ens);

class McKeanStepper {
 public:
  McKeanStepper(const McKeanEnsemble& ens, double dt, int workers);

  /// Freezes mu over the step, advances every copy by exponential Euler
  /// with drift -lambda mu Psi_m, and the coupled Z_m with the same noise.
  void advance(McKeanEnsemble& ens, const NoiseStream& base);

  /// Fixture: advance with an externally prescribed law coefficient.
  void advance_with_mu(McKeanEnsemble& ens, const ArrayXd& mu,
                       const NoiseStream& base);

 private:
  void advance_impl(McKeanEnsemble& ens, const ArrayXd& mu,
                    const NoiseStream& base);
  double dt_;
  int workers_;
  ArrayXd decay_, phi1dt_, noise_var_;
  std::vector<ArrayXcd> eta_scratch_, mode_scratch_;
  std::vector<ArrayXd> real_scratch_;
};

// ---- scripted runs ----------------------------------------------------------

struct Meanfield1dRecord {
  double t;
  double mu_mean;     // spatial mean of the law coefficient
  double mu_sd;       // spatial sd before homogeneity projection
};

struct Meanfield1dResult {
  std::vector<Meanfield1dRecord> records;
  double mu_timeavg;  // over the post-burn-in window
  double mu_se;       // batch-means standard error
};

struct Meanfield1dConfig {
  Grid grid;          // d = 1
  int M = 64;
  double dt = 1e-3;
  uint64_t steps = 1000, burnin = 100, thin = 10;
  uint64_t seed = 1;
  uint32_t member = 0;
  int workers = 1;
  int batches = 32;
};

/// d = 1 mean-field run without the Z-subtraction; at stationarity the
/// recorded law coefficient matches the 1d fixed point.
Meanfield1dResult solve_1d_meanfield(const Meanfield1dConfig& cfg);

// ---- shared-noise coupling to the N-component system ------------------------

struct CouplingConfig {
  Grid grid;
  int N = 8;           // interacting components
  int M = 8;           // mean-field copies (noise-coupled pairwise to 1..min)
  double dt = 1e-3;
  uint64_t steps = 1000, thin = 10;
  uint64_t seed = 1;
  uint32_t member = 0;  // replica index
  int workers = 1;
};

struct CouplingResult {
  double d_sup_pair1;      // sup_t ||Phi_1 - Psi_1||_{L^2}^2 at recorded times
  double d_timeavg_pair1;
  double d_sup_pairmean;   // same, averaged over the coupled pairs
  double d_timeavg_pairmean;
};

/// Runs the N-system and the mean-field ensemble on identical noise streams
/// (component i and copy i share (seed, member, i, *)) from identical
/// stationary-free draws, and records the squared L^2 coupling distance.
CouplingResult coupling_experiment(const CouplingConfig& cfg);

}  // namespace sigmaflow

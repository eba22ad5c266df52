#pragma once

// O(N)-invariant observable fields, their correlation estimators, and exact
// lattice integration-by-parts (Dyson-Schwinger) residual checks.
//
// The observables are evaluated pointwise on the n-grid, with the Wick
// constants of the free measure:
//   o2(x) = (sum_i phi_i(x)^2 - N a)/sqrt(N)
//   o4(x) = (s^2 - 2(N+2) a s + N(N+2) a^2)/N,   s = sum_i phi_i^2.
// On grids with n >= 4K+2 the spatial mean of o4 is the exact Wick-ordered
// quartic (all quadrature is exact for the band-limited integrands), so the
// free-field expectations vanish identically in law.

#include <string>
#include <vector>

#include "sigmaflow/dynamics.hpp"
#include "sigmaflow/lattice.hpp"
#include "sigmaflow/stats.hpp"

namespace sigmaflow {

/// (sum_i phi_i^2 - N a)/sqrt(N) on the grid.
ArrayXd obs2(const EnsembleState& state);

/// Retained-mode coefficients of obs2 (the estimator input).
ArrayXcd obs2_modes(const EnsembleState& state);

/// (1/N)(s^2 - 2(N+2) a s + N(N+2) a^2) on the grid.
ArrayXd obs4(const EnsembleState& state);

/// obs4 of Phi minus obs4 of the coupled free fields Z. The subtracted term
/// has exact mean zero, and since Phi and Z share their noise the two
/// fluctuate together, so this estimates E[obs4] with far smaller variance.
ArrayXd obs4_coupled_cv(const EnsembleState& state);

struct CorrelationEstimate {
  Grid grid;
  ArrayXd ghat;    // per retained mode; zero mode = variance of the mean mode
  ArrayXd stderr_; // batch-means standard errors
  size_t nsamples = 0;
};

/// G(k) as the sample second moment of the obs2 coefficients over
/// decorrelated samples. Translation averaging is implicit in working on
/// mode amplitudes; the spatial-mean mode is centered before squaring.
CorrelationEstimate two_point_spectrum(const Grid& grid,
                                       const std::vector<ArrayXcd>& samples,
                                       int batches = 32);

void write_correlation_csv(const CorrelationEstimate& est,
                           const ArrayXd& reference, const std::string& path);

// ---- Dyson-Schwinger residuals ----------------------------------------------

/// F = sum of monomials c * prod_l Phi_{comp_l}(point_l)^{pow_l}; points are
/// grid indices.
struct DsFactor {
  int component = 0;
  std::array<int, 3> point = {0, 0, 0};
  int power = 1;
};
struct DsMonomial {
  double coeff = 1.0;
  std::vector<DsFactor> factors;
};
struct DsFunctional {
  std::string name;
  std::vector<DsMonomial> monomials;  // empty product = the constant 1
};

/// Monte Carlo accumulator for E[dF/dPhi_i(x)] - E[F dS/dPhi_i(x)] with the
/// band-limited functional derivative (normalized L^2 pairing) and the
/// lattice action matching the sampled dynamics: quadratic coefficient
/// omega - c1, quartic (lambda/2N) integral of s^2. The identity holds
/// exactly in law for exact Gibbs samples; Langevin samples carry O(dt)
/// bias, removed by halving extrapolation in the harness.
class DsAccumulator {
 public:
  DsAccumulator(const Grid& grid, DsFunctional F, int component,
                std::array<int, 3> point);

  void add(const EnsembleState& state);

  struct Result {
    double mean = 0, se = 0, z = 0;
    size_t n = 0;
  };
  Result result(int batches = 32) const;

  const DsFunctional& functional() const { return F_; }

 private:
  Grid grid_;
  DsFunctional F_;
  int comp_;
  std::array<int, 3> point_;
  std::vector<double> series_;
};

/// The documented battery: constant, point, two-point, cross-component,
/// cubic, and invariant-quadratic functionals based at distinct grid points.
std::vector<DsFunctional> ds_battery(const TorusGrid& g);

/// Checks a descriptor against the state (components and points in range).
void validate_descriptor(const TorusGrid& g, int N, const DsFunctional& F);

}  // namespace sigmaflow

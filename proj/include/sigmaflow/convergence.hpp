#pragma once

// Scripted limit-theorem experiments at desk scale: coupling decay in N,
// Gaussian-free-field convergence of the invariant marginals, and the
// bubble-formula validation, with bootstrap confidence intervals on every
// fitted slope.

#include <cstdint>
#include <vector>

#include "sigmaflow/exact.hpp"
#include "sigmaflow/lattice.hpp"
#include "sigmaflow/observables.hpp"
#include "sigmaflow/stats.hpp"

namespace sigmaflow {

struct ScalingStudy {
  std::vector<double> axis;    // strictly increasing (N values)
  std::vector<double> metric;  // per-point mean
  std::vector<double> se;
  SlopeCI slope;
  bool monotone_decreasing = false;
};

/// Fits the log-log slope with a replica bootstrap; needs >= 3 axis points.
ScalingStudy make_scaling_study(const std::vector<double>& axis,
                                const std::vector<std::vector<double>>& replicas,
                                uint64_t seed, int resamples = 2000);

/// Covariance-spectrum distance of sampled mode variances from the free
/// field: D = ( sum_k w_k (V(k) - 1/(2 omega_k))^2 )^{1/2}, w_k = (1+|k|^2)^{-1},
/// with the sampling-noise floor sqrt(sum_k w_k se_k^2) reported alongside.
struct CovSpectrumDistance {
  double dist = 0;
  double floor_ = 0;
};
CovSpectrumDistance cov_spectrum_distance(const TorusGrid& g, const ArrayXd& vhat,
                                          const ArrayXd& vse);

/// Time-averaged squared H^1 distance with batch-means error and a windowed
/// stationarity gate (throws if the burn-in left a drifting series).
struct CoupledH1 {
  double mean = 0, se = 0;
};
CoupledH1 stationary_coupling_distance(const std::vector<double>& h1sq_series,
                                       int batches, bool enforce_stationarity);

/// Per-mode z-score comparison of a measured spectrum against a reference;
/// PASS when >= 95% of canonical modes sit within |z| <= 3.
struct BubbleVerdict {
  double frac_within = 0;
  double resid_norm = 0;  // l2 over canonical modes of (ghat - ref)
  bool pass = false;
  ArrayXd z;              // per retained mode
};
BubbleVerdict validate_bubble(const CorrelationEstimate& measured,
                              const SpectralFunction& reference);

}  // namespace sigmaflow

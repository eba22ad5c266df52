#pragma once

// Estimator plumbing shared by the observable and convergence modules:
// batch-means error bars, mode-variance accumulation, log-log slope fits
// with deterministic bootstrap confidence intervals, energy distance, and
// the windowed stationarity diagnostic.

#include <cstdint>
#include <vector>

#include "sigmaflow/lattice.hpp"

namespace sigmaflow {

struct ScalarStat {
  double mean = 0.0;
  double se = 0.0;
  size_t n = 0;
};

/// Batch-means standard error of a (possibly autocorrelated) series; the
/// series is split into `batches` contiguous blocks.
ScalarStat batch_means(const std::vector<double>& series, int batches);

ScalarStat mean_and_se(const std::vector<double>& values);  // iid standard error

/// Per-mode second moments with (component, batch) cells. Cells are
/// averaged as independent super-samples, which is valid once a batch spans
/// several autocorrelation times.
class ModeVarianceEstimator {
 public:
  ModeVarianceEstimator(int nmodes, int ncomponents, int nbatches);

  /// sample_index counts thinned samples per component, 0-based.
  void add(int component, size_t sample_index, size_t samples_per_component,
           const ArrayXcd& modes);

  ArrayXd vhat() const;  // per-mode variance estimate
  ArrayXd se() const;    // its standard error
  size_t cells() const;

 private:
  int nmodes_, ncomps_, nbatches_;
  // accumulated |u(k)|^2 sums and counts per (component, batch)
  Eigen::ArrayXXd sums_;   // nmodes x (ncomps*nbatches)
  std::vector<size_t> counts_;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
};
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct SlopeCI {
  double slope = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Least-squares slope of log(metric) vs log(axis) with a percentile
/// bootstrap over the per-point replica values. Resampling is driven by the
/// deterministic counter-based stream, so verdicts reproduce bit-identically.
SlopeCI bootstrap_loglog_slope(const std::vector<double>& axis,
                               const std::vector<std::vector<double>>& replicas,
                               int resamples, uint64_t seed);

/// Energy distance between two samples of spectral fields under the L^2
/// norm; nonnegative, zero iff equal laws (in the limit).
double energy_distance(const std::vector<ArrayXcd>& a,
                       const std::vector<ArrayXcd>& b);

/// Splits the series into nwindows consecutive windows and flags a drift of
/// the window means beyond zmax combined standard errors.
bool stationary_windows_ok(const std::vector<double>& series, int nwindows,
                           double zmax);

}  // namespace sigmaflow

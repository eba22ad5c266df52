#include "sigmaflow/convergence.hpp"

#include <cmath>
#include <stdexcept>

namespace sigmaflow {

ScalingStudy make_scaling_study(const std::vector<double>& axis,
                                const std::vector<std::vector<double>>& replicas,
                                uint64_t seed, int resamples) {
  if (axis.size() < 3)
    throw std::invalid_argument("scaling study needs >= 3 axis points");
  for (size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i] > axis[i - 1]))
      throw std::invalid_argument("scaling axis must be strictly increasing");
  ScalingStudy st;
  st.axis = axis;
  for (const auto& vals : replicas) {
    ScalarStat s = mean_and_se(vals);
    st.metric.push_back(s.mean);
    st.se.push_back(s.se);
  }
  st.slope = bootstrap_loglog_slope(axis, replicas, resamples, seed);
  st.monotone_decreasing = true;
  for (size_t i = 1; i < st.metric.size(); ++i)
    if (st.metric[i] >= st.metric[i - 1]) st.monotone_decreasing = false;
  return st;
}

CovSpectrumDistance cov_spectrum_distance(const TorusGrid& g, const ArrayXd& vhat,
                                          const ArrayXd& vse) {
  ArrayXd w = 1.0 / (1.0 + g.ksq());
  ArrayXd target = 1.0 / (2.0 * g.omegas());
  CovSpectrumDistance out;
  out.dist = std::sqrt((w * (vhat - target).square()).sum());
  out.floor_ = std::sqrt((w * vse.square()).sum());
  return out;
}

CoupledH1 stationary_coupling_distance(const std::vector<double>& h1sq_series,
                                       int batches, bool enforce_stationarity) {
  if (h1sq_series.size() < 8)
    throw std::invalid_argument("stationary_coupling_distance: series too short");
  if (enforce_stationarity &&
      !stationary_windows_ok(h1sq_series, 4, 3.0))
    throw std::runtime_error(
        "stationarity diagnostic failed: burn-in insufficient");
  ScalarStat s = batch_means(h1sq_series, batches);
  return CoupledH1{s.mean, s.se};
}

BubbleVerdict validate_bubble(const CorrelationEstimate& measured,
                              const SpectralFunction& reference) {
  const TorusGrid& g = *measured.grid;
  if (!g.same_geometry(*reference.grid))
    throw std::invalid_argument("validate_bubble: grid mismatch");
  BubbleVerdict v;
  v.z.resize(g.num_modes());
  int within = 0, canonical = 0;
  double resid2 = 0;
  for (int idx = 0; idx < g.num_modes(); ++idx) {
    double se = measured.stderr_[idx];
    double diff = measured.ghat[idx] - reference.values[idx];
    v.z[idx] = se > 0 ? diff / se : 0.0;
  }
  for (int idx : g.draw_order()) {  // zero mode + canonical half spectrum
    ++canonical;
    if (std::abs(v.z[idx]) <= 3.0) ++within;
    double diff = measured.ghat[idx] - reference.values[idx];
    resid2 += diff * diff;
  }
  v.frac_within = double(within) / canonical;
  v.resid_norm = std::sqrt(resid2);
  v.pass = v.frac_within >= 0.95;
  return v;
}

}  // namespace sigmaflow

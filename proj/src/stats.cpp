#include "sigmaflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sigmaflow/noise.hpp"

namespace sigmaflow {

ScalarStat mean_and_se(const std::vector<double>& values) {
  ScalarStat out;
  out.n = values.size();
  if (values.empty()) return out;
  double sum = 0, sum2 = 0;
  for (double v : values) {
    sum += v;
    sum2 += v * v;
  }
  out.mean = sum / out.n;
  if (out.n > 1) {
    double var = (sum2 - out.n * out.mean * out.mean) / (out.n - 1);
    out.se = std::sqrt(std::max(var, 0.0) / out.n);
  }
  return out;
}

ScalarStat batch_means(const std::vector<double>& series, int batches) {
  if (series.empty()) return {};
  if (batches < 2 || series.size() < size_t(2 * batches))
    return mean_and_se(series);
  size_t len = series.size() / batches;
  std::vector<double> means(batches);
  for (int b = 0; b < batches; ++b) {
    double acc = 0;
    for (size_t i = b * len; i < (b + 1) * len; ++i) acc += series[i];
    means[b] = acc / len;
  }
  ScalarStat out = mean_and_se(means);
  out.n = series.size();
  return out;
}

ModeVarianceEstimator::ModeVarianceEstimator(int nmodes, int ncomponents,
                                             int nbatches)
    : nmodes_(nmodes), ncomps_(ncomponents), nbatches_(nbatches) {
  sums_ = Eigen::ArrayXXd::Zero(nmodes, ncomponents * nbatches);
  counts_.assign(size_t(ncomponents) * nbatches, 0);
}

void ModeVarianceEstimator::add(int component, size_t sample_index,
                                size_t samples_per_component,
                                const ArrayXcd& modes) {
  size_t per_batch = std::max<size_t>(1, samples_per_component / nbatches_);
  size_t batch = std::min<size_t>(sample_index / per_batch, nbatches_ - 1);
  size_t cell = size_t(component) * nbatches_ + batch;
  sums_.col(cell) += modes.abs2();
  counts_[cell] += 1;
}

ArrayXd ModeVarianceEstimator::vhat() const {
  ArrayXd acc = ArrayXd::Zero(nmodes_);
  size_t total = 0;
  for (size_t c = 0; c < counts_.size(); ++c) {
    acc += sums_.col(c);
    total += counts_[c];
  }
  return acc / double(total);
}

size_t ModeVarianceEstimator::cells() const {
  size_t filled = 0;
  for (size_t c : counts_)
    if (c > 0) ++filled;
  return filled;
}

ArrayXd ModeVarianceEstimator::se() const {
  // sd of the filled cell means / sqrt(#cells)
  size_t filled = cells();
  ArrayXd mean = ArrayXd::Zero(nmodes_);
  for (size_t c = 0; c < counts_.size(); ++c)
    if (counts_[c] > 0) mean += sums_.col(c) / double(counts_[c]);
  mean /= double(filled);
  ArrayXd var = ArrayXd::Zero(nmodes_);
  for (size_t c = 0; c < counts_.size(); ++c)
    if (counts_[c] > 0)
      var += (sums_.col(c) / double(counts_[c]) - mean).square();
  if (filled > 1) var /= double(filled - 1);
  return (var / double(filled)).sqrt();
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_loglog: need >= 2 matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0))
      throw std::invalid_argument("fit_loglog: values must be positive");
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = double(x.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

SlopeCI bootstrap_loglog_slope(const std::vector<double>& axis,
                               const std::vector<std::vector<double>>& replicas,
                               int resamples, uint64_t seed) {
  if (axis.size() != replicas.size() || axis.size() < 3)
    throw std::invalid_argument("bootstrap_loglog_slope: need >= 3 axis points");
  std::vector<double> means(axis.size());
  for (size_t p = 0; p < axis.size(); ++p)
    means[p] = mean_and_se(replicas[p]).mean;
  SlopeCI out;
  out.slope = fit_loglog(axis, means).slope;

  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<double> resampled(axis.size());
  for (int r = 0; r < resamples; ++r) {
    bool ok = true;
    for (size_t p = 0; p < axis.size(); ++p) {
      const auto& vals = replicas[p];
      std::array<uint64_t, 4> ctr = {uint64_t(r), uint64_t(p), 0, 0};
      std::array<uint64_t, 2> key = {seed, 0x9E3779B97F4A7C15ULL};
      std::array<uint64_t, 4> w{};
      double acc = 0;
      for (size_t d = 0; d < vals.size(); ++d) {
        if (d % 4 == 0) {
          ctr[2] = d / 4;
          w = philox4x64(ctr, key);
        }
        acc += vals[w[d % 4] % vals.size()];
      }
      resampled[p] = acc / vals.size();
      if (!(resampled[p] > 0)) ok = false;
    }
    if (ok) slopes.push_back(fit_loglog(axis, resampled).slope);
  }
  if (slopes.empty()) {
    out.lo = out.hi = out.slope;
    return out;
  }
  std::sort(slopes.begin(), slopes.end());
  auto pick = [&](double q) {
    double pos = q * (slopes.size() - 1);
    size_t i = size_t(pos);
    double frac = pos - i;
    return (i + 1 < slopes.size()) ? slopes[i] * (1 - frac) + slopes[i + 1] * frac
                                   : slopes[i];
  };
  out.lo = pick(0.025);
  out.hi = pick(0.975);
  return out;
}

double energy_distance(const std::vector<ArrayXcd>& a,
                       const std::vector<ArrayXcd>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("energy_distance: empty sample");
  auto dist = [](const ArrayXcd& u, const ArrayXcd& v) {
    return std::sqrt((u - v).abs2().sum());
  };
  double ab = 0;
  for (const auto& u : a)
    for (const auto& v : b) ab += dist(u, v);
  ab /= double(a.size()) * b.size();
  double aa = 0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a.size(); ++j) aa += dist(a[i], a[j]);
  aa /= double(a.size()) * a.size();
  double bb = 0;
  for (size_t i = 0; i < b.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) bb += dist(b[i], b[j]);
  bb /= double(b.size()) * b.size();
  return 2 * ab - aa - bb;
}

bool stationary_windows_ok(const std::vector<double>& series, int nwindows,
                           double zmax) {
  if (nwindows < 2 || series.size() < size_t(4 * nwindows)) return true;
  // first window vs last window, with few long batches (conservative SEs on
  // autocorrelated input) and a practical-significance floor: a drift has to
  // be both statistically resolved and a >5% effect to flag the burn-in
  size_t len = series.size() / nwindows;
  std::vector<double> first(series.begin(), series.begin() + len);
  std::vector<double> last(series.end() - len, series.end());
  ScalarStat a = batch_means(first, 4);
  ScalarStat b = batch_means(last, 4);
  double se = std::hypot(a.se, b.se);
  double diff = std::abs(b.mean - a.mean);
  double scale = std::abs(mean_and_se(series).mean);
  if (se == 0) return true;
  return !(diff > zmax * se && diff > 0.05 * scale);
}

}  // namespace sigmaflow

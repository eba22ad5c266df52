#include <doctest.h>

#include <cmath>

#include "sigmaflow/convergence.hpp"
#include "sigmaflow/noise.hpp"

using namespace sigmaflow;

TEST_CASE("loglog slope fit and bootstrap") {
  std::vector<double> axis = {4, 16, 64, 256};
  std::vector<std::vector<double>> reps(4);
  for (size_t p = 0; p < axis.size(); ++p) {
    double truth = 3.0 / axis[p];  // slope exactly -1
    for (int r = 0; r < 8; ++r)
      reps[p].push_back(truth * (1.0 + 0.01 * ((r % 3) - 1)));
  }
  ScalingStudy st = make_scaling_study(axis, reps, 7);
  CHECK(st.slope.slope == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(st.slope.lo <= st.slope.slope);
  CHECK(st.slope.hi >= st.slope.slope);
  CHECK(st.monotone_decreasing);

  // deterministic: same seed, same interval
  ScalingStudy st2 = make_scaling_study(axis, reps, 7);
  CHECK(st.slope.lo == st2.slope.lo);
  CHECK(st.slope.hi == st2.slope.hi);

  CHECK_THROWS(make_scaling_study({4, 2, 8}, reps, 1));
  CHECK_THROWS(make_scaling_study({4, 16}, {{1.0}, {0.5}}, 1));
}

TEST_CASE("covariance spectrum distance: floor and detection") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  ArrayXd target = 1.0 / (2.0 * g->omegas());

  // exact variances: zero distance
  CovSpectrumDistance exact =
      cov_spectrum_distance(*g, target, ArrayXd::Zero(g->num_modes()));
  CHECK(exact.dist == 0.0);

  // biased variances are detected above the floor
  ArrayXd biased = target * 1.2;
  ArrayXd se = target * 0.01;
  CovSpectrumDistance d = cov_spectrum_distance(*g, biased, se);
  CHECK(d.dist > 5 * d.floor_);
}

TEST_CASE("gff sample variances: distance shrinks like 1/sqrt(count)") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  auto dist_for = [&](int count, uint64_t seed) {
    ModeVarianceEstimator vars(g->num_modes(), 1, 8);
    NoiseStream s(seed, 0, 0, Purpose::Reference);
    ArrayXcd z;
    for (int i = 0; i < count; ++i) {
      sample_stationary_z(*g, s, i, z);
      vars.add(0, i, count, z);
    }
    return cov_spectrum_distance(*g, vars.vhat(), vars.se());
  };
  CovSpectrumDistance small = dist_for(400, 5);
  CovSpectrumDistance big = dist_for(6400, 5);
  // 16x samples -> ~4x smaller noise-floor distance (wide window)
  CHECK(big.dist < small.dist / 2.0);
  CHECK(big.dist > small.dist / 10.0);
  // distance of exact samples is compatible with its own floor
  CHECK(big.dist < 3.0 * big.floor_);
}

TEST_CASE("energy distance separates laws") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  NoiseStream s1(1, 0, 0, Purpose::Reference);
  NoiseStream s2(2, 0, 0, Purpose::Reference);
  std::vector<ArrayXcd> a, b, c;
  for (int i = 0; i < 150; ++i) {
    ArrayXcd z;
    sample_stationary_z(*g, s1, i, z);
    a.push_back(z);
    sample_stationary_z(*g, s2, i, z);
    b.push_back(z);
    sample_stationary_z(*g, s2, 1000 + i, z);
    c.push_back(2.0 * z);  // inflated law
  }
  double same = energy_distance(a, b);
  double diff = energy_distance(a, c);
  CHECK(diff > 5 * std::abs(same));
}

TEST_CASE("stationarity diagnostic flags a drifting series") {
  std::vector<double> flat, drift;
  NoiseStream s(9, 0, 0, Purpose::Reference);
  for (int i = 0; i < 4000; ++i) {
    double x = s.normal_quad(i, 0)[0];
    flat.push_back(1.0 + 0.1 * x);
    drift.push_back(1.0 + 0.002 * i + 0.1 * x);
  }
  CHECK(stationary_windows_ok(flat, 4, 3.0));
  CHECK_FALSE(stationary_windows_ok(drift, 4, 3.0));

  CHECK_THROWS(stationary_coupling_distance(drift, 8, true));
  CoupledH1 ok = stationary_coupling_distance(flat, 8, true);
  CHECK(ok.mean == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("validate_bubble: free fixture passes, shifted reference fails") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  int R = g->num_modes();
  CorrelationEstimate est;
  est.grid = g;
  est.nsamples = 1000;
  ArrayXd truth = 2.0 * c2_hat(g).values;
  est.ghat = truth;
  est.stderr_ = 0.01 * truth;
  // jitter within 1 se
  for (int i = 0; i < R; ++i)
    est.ghat[i] += 0.5 * est.stderr_[i] * ((i % 2) ? 1 : -1);

  SpectralFunction ref{g, truth, "ref"};
  BubbleVerdict v = validate_bubble(est, ref);
  CHECK(v.pass);
  CHECK(v.frac_within == 1.0);

  SpectralFunction shifted{g, 1.2 * truth, "shifted"};
  BubbleVerdict bad = validate_bubble(est, shifted);
  CHECK_FALSE(bad.pass);
  CHECK(bad.resid_norm > v.resid_norm);
}

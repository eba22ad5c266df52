#include <doctest.h>

#include <cmath>

#include "sigmaflow/exact.hpp"
#include "sigmaflow/observables.hpp"
#include "sigmaflow/stats.hpp"

using namespace sigmaflow;

namespace {

EnsembleState free_draw(const Grid& g, int N, uint64_t seed, uint64_t sample) {
  EnsembleState st(g, N, IntegratorMode::Direct);
  for (int i = 0; i < N; ++i) {
    NoiseStream s(seed, 0, uint32_t(i), Purpose::Reference);
    sample_stationary_z(*g, s, sample, st.z[i]);
    st.phi[i] = st.z[i];
  }
  return st;
}

}  // namespace

TEST_CASE("obs2: fixtures and free-field mean") {
  Grid g = make_grid(2, 14, 3, 1.0, 1.0);
  int N = 6;
  EnsembleState zero(g, N, IntegratorMode::Direct);
  double a = zero.counterterms().a;
  ArrayXd o = obs2(zero);
  CHECK(o.maxCoeff() == doctest::Approx(-std::sqrt(double(N)) * a));
  CHECK(o.minCoeff() == doctest::Approx(-std::sqrt(double(N)) * a));

  // spatial+sample mean over free draws compatible with 0
  std::vector<double> means;
  for (int s = 0; s < 4000; ++s)
    means.push_back(obs2(free_draw(g, N, 2024, s)).mean());
  ScalarStat st = mean_and_se(means);
  CHECK(std::abs(st.mean) < 3 * st.se);
}

TEST_CASE("obs4: fixtures, reduction, and free-field mean") {
  Grid g = make_grid(2, 14, 3, 1.0, 1.0);
  int N = 6;
  EnsembleState zero(g, N, IntegratorMode::Direct);
  double a = zero.counterterms().a;
  ArrayXd o4 = obs4(zero);
  CHECK(o4.maxCoeff() == doctest::Approx((N + 2.0) * a * a));

  // N = 1 with a = 0 is the plain fourth power
  EnsembleState one(g, 1, IntegratorMode::Direct, CountertermMode::None);
  NoiseStream s(3, 0, 0, Purpose::Reference);
  sample_stationary_z(*g, s, 0, one.phi[0]);
  // counterterms().a is still the true constant; obs4 uses it, so instead
  // check against the explicit formula with that same a
  ArrayXd u;
  to_physical(*g, one.phi[0], u);
  double a1 = one.counterterms().a;
  ArrayXd expect = u.square().square() - 2.0 * 3.0 * a1 * u.square() + 3.0 * a1 * a1;
  CHECK((obs4(one) - expect).abs().maxCoeff() < 1e-10);

  std::vector<double> means;
  for (int smp = 0; smp < 4000; ++smp)
    means.push_back(obs4(free_draw(g, N, 77, smp)).mean());
  ScalarStat st = mean_and_se(means);
  CHECK(std::abs(st.mean) < 3 * st.se);
}

TEST_CASE("observables are O(N) invariant") {
  Grid g = make_grid(2, 14, 3, 1.0, 1.0);
  int N = 4;
  EnsembleState st = free_draw(g, N, 15, 0);

  EnsembleState perm(g, N, IntegratorMode::Direct);
  for (int i = 0; i < N; ++i) {
    perm.phi[i] = st.phi[(i + 1) % N];
    perm.z[i] = st.z[(i + 1) % N];
  }
  CHECK((obs2(perm) == obs2(st)).all());         // permutation: bitwise
  CHECK((obs4(perm) == obs4(st)).all());

  double th = 0.83;
  EnsembleState rot(g, N, IntegratorMode::Direct);
  for (int i = 0; i < N; ++i) rot.phi[i] = st.phi[i];
  rot.phi[0] = std::cos(th) * st.phi[0] - std::sin(th) * st.phi[1];
  rot.phi[1] = std::sin(th) * st.phi[0] + std::cos(th) * st.phi[1];
  CHECK((obs2(rot) - obs2(st)).abs().maxCoeff() < 1e-10);
  CHECK((obs4(rot) - obs4(st)).abs().maxCoeff() < 1e-10);
}

TEST_CASE("two-point spectrum: constants, free baseline, error scaling") {
  Grid g = make_grid(2, 14, 3, 1.0, 1.0);
  int N = 8;

  CHECK_THROWS(two_point_spectrum(g, {}));

  // constant samples: spectrum 0 away from the mean mode
  std::vector<ArrayXcd> csamples(16, ArrayXcd::Zero(g->num_modes()));
  for (auto& s : csamples) s[g->mode_index({0, 0, 0})] = 4.2;
  CorrelationEstimate cest = two_point_spectrum(g, csamples, 4);
  CHECK(cest.ghat.abs().maxCoeff() < 1e-20);

  // free draws against 2 C2 with per-mode z-scores
  auto collect = [&](size_t count, uint64_t seed) {
    std::vector<ArrayXcd> out;
    for (size_t s = 0; s < count; ++s)
      out.push_back(obs2_modes(free_draw(g, N, seed, s)));
    return out;
  };
  std::vector<ArrayXcd> samples = collect(6000, 55);
  CorrelationEstimate est = two_point_spectrum(g, samples, 32);
  ArrayXd ref = 2.0 * c2_hat(g).values;
  int bad = 0;
  for (int idx : g->draw_order())
    if (std::abs(est.ghat[idx] - ref[idx]) > 3 * est.stderr_[idx]) ++bad;
  CHECK(double(bad) / g->draw_order().size() < 0.05);

  // standard errors shrink like 1/sqrt(count)
  CorrelationEstimate small = two_point_spectrum(g, collect(1500, 56), 32);
  double r = small.stderr_.mean() / est.stderr_.mean();
  CHECK(r > 1.4);
  CHECK(r < 2.9);
}

TEST_CASE("ds battery on exact Gaussian samples: residuals at 3 sigma") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  int N = 3;
  auto battery = ds_battery(*g);
  CHECK(battery.size() >= 5);
  std::vector<DsAccumulator> accs;
  for (const auto& F : battery)
    accs.emplace_back(g, F, 0, std::array<int, 3>{0, 0, 0});
  for (int s = 0; s < 3000; ++s) {
    EnsembleState st = free_draw(g, N, 2222, s);
    for (auto& acc : accs) acc.add(st);
  }
  for (auto& acc : accs) {
    auto r = acc.result(30);
    INFO(acc.functional().name);
    CHECK(std::abs(r.z) <= 3.0);
  }
}

TEST_CASE("ds residual rejects malformed descriptors") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  DsFunctional bad{"bad", {DsMonomial{1.0, {{5, {0, 0, 0}, 1}}}}};
  CHECK_THROWS_AS(validate_descriptor(*g, 3, bad), std::invalid_argument);
  DsFunctional bad2{"bad2", {DsMonomial{1.0, {{0, {99, 0, 0}, 1}}}}};
  CHECK_THROWS_AS(validate_descriptor(*g, 3, bad2), std::invalid_argument);
  DsFunctional bad3{"bad3", {DsMonomial{1.0, {{0, {0, 0, 0}, 9}}}}};
  CHECK_THROWS_AS(validate_descriptor(*g, 3, bad3), std::invalid_argument);
}

TEST_CASE("gaussian integration by parts: two-point identity, analytic check") {
  // E[dF/dPhi(x)] with F = Phi(y) equals D_K(x-y); E[F dS/dPhi(x)] must
  // match it in sample mean
  Grid g = make_grid(2, 12, 2, 1.5, 0.0);
  std::array<int, 3> x = {0, 0, 0}, y = {3, 5, 0};
  DsFunctional F{"pt", {DsMonomial{1.0, {{0, y, 1}}}}};
  DsAccumulator acc(g, F, 0, x);
  for (int s = 0; s < 5000; ++s) acc.add(free_draw(g, 2, 31, s));
  auto r = acc.result(25);
  CHECK(std::abs(r.z) <= 3.0);
  // and the dF part alone is exactly the Dirichlet kernel
  CHECK(dirichlet_kernel(*g, x, y) ==
        doctest::Approx(dirichlet_kernel(*g, y, x)));
}

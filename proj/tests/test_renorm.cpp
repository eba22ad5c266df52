#include <doctest.h>

#include <cmath>

#include "sigmaflow/exact.hpp"
#include "sigmaflow/noise.hpp"
#include "sigmaflow/renorm.hpp"

using namespace sigmaflow;

TEST_CASE("wick constant a: enumerated values and monotonicity") {
  Grid g0 = make_grid(2, 4, 0, 1.0, 0.0);
  CHECK(wick_constant_a(*g0) == doctest::Approx(0.5).epsilon(1e-15));

  // 9 modes: 1/2 + 4/4 + 4/6 = 13/6
  Grid g1 = make_grid(2, 8, 1, 1.0, 0.0);
  CHECK(wick_constant_a(*g1) == doctest::Approx(13.0 / 6.0).epsilon(1e-15));

  Grid g2 = make_grid(2, 12, 2, 1.0, 0.0);
  Grid g4 = make_grid(2, 20, 4, 1.0, 0.0);
  CHECK(wick_constant_a(*g4) > wick_constant_a(*g2));

  Grid gm = make_grid(2, 12, 2, 2.0, 0.0);
  CHECK(wick_constant_a(*gm) < wick_constant_a(*g2));
}

TEST_CASE("second-order constant b") {
  CHECK_THROWS(second_order_constant_b(make_grid(2, 8, 1, 1.0, 0.0)));

  Grid g0 = make_grid(3, 4, 0, 1.0, 0.0);
  CHECK(second_order_constant_b(g0) == doctest::Approx(0.5).epsilon(1e-13));

  Grid g1 = make_grid(3, 6, 1, 1.0, 0.0);
  Grid g2 = make_grid(3, 8, 2, 1.0, 0.0);
  CHECK(second_order_constant_b(g2) > second_order_constant_b(g1));

  // log-divergence: sublinear in K (unlike a, which grows like K in d=3),
  // with doubling increments flattening toward a constant
  double b4 = second_order_constant_b(make_grid(3, 10, 4, 1.0, 0.0));
  double b8 = second_order_constant_b(make_grid(3, 18, 8, 1.0, 0.0));
  double b16 = second_order_constant_b(make_grid(3, 34, 16, 1.0, 0.0));
  CHECK(b8 / 8.0 < b4 / 4.0);
  CHECK(b16 / 16.0 < b8 / 8.0);
  CHECK((b16 - b8) / (b8 - b4) < 1.35);
  CHECK(b16 / std::log(16.0) < 120.0);  // recorded desk-scale bound

  double a4 = wick_constant_a(*make_grid(3, 10, 4, 1.0, 0.0));
  double a16 = wick_constant_a(*make_grid(3, 34, 16, 1.0, 0.0));
  CHECK(a16 / a4 > 3.0);  // a does grow linearly in K
}

TEST_CASE("b matches a direct double-loop evaluation") {
  for (int K : {1, 2, 3}) {
    Grid g = make_grid(3, 2 * K + 2, K, 1.2, 0.0);
    double direct = 0;
    for (int idx = 0; idx < g->num_modes(); ++idx) {
      auto k = g->modes()[idx];
      double conv = 0;
      for (int jdx = 0; jdx < g->num_modes(); ++jdx) {
        auto j = g->modes()[jdx];
        std::array<int, 3> diff = {k[0] - j[0], k[1] - j[1], k[2] - j[2]};
        if (std::abs(diff[0]) > K || std::abs(diff[1]) > K || std::abs(diff[2]) > K)
          continue;
        conv += 1.0 / (2.0 * g->omega(jdx)) /
                (2.0 * g->omega(g->mode_index(diff)));
      }
      direct += 2.0 * conv / g->omega(idx);
    }
    double fast = second_order_constant_b(g);
    CHECK(fast == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("wick square") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  double a = wick_constant_a(*g);

  Field zero(g);
  Field w = wick_square(zero, a);
  ArrayXd u = to_physical(w);
  CHECK(u.maxCoeff() == doctest::Approx(-a));
  CHECK(u.minCoeff() == doctest::Approx(-a));

  NoiseStream s(17, 0, 0, Purpose::Reference);
  Field z = sample_stationary_z(g, s, 0);
  Field plain = wick_square(z, 0.0);
  Field sq = dealiased_product(z, z);
  CHECK((plain.modes() - sq.modes()).abs().maxCoeff() == 0.0);

  // spatial+sample mean of :Z^2: is 0
  int draws = 20000;
  double acc = 0, acc2 = 0;
  for (int rep = 0; rep < draws; ++rep) {
    Field zz = sample_stationary_z(g, s, rep);
    double v = wick_square(zz, a).modes()[g->mode_index({0, 0, 0})].real();
    acc += v;
    acc2 += v * v;
  }
  double mean = acc / draws;
  double se = std::sqrt((acc2 / draws - mean * mean) / draws);
  CHECK(std::abs(mean) < 3 * se);
}

TEST_CASE("renormalized mu fixed point is zero on a (d,K,m) matrix") {
  for (int d : {1, 2, 3}) {
    for (int K : {1, 2, 4}) {
      for (double m : {0.5, 1.0, 5.0}) {
        if (d == 3 && K == 4) continue;  // keep the matrix quick
        Grid g = make_grid(d, 2 * K + 2, K, m, 0.0);
        CHECK(std::abs(mu_fixed_point_renormalized(*g)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("renormalized residual details") {
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  ArrayXd omegas = g->omegas();
  // F(1) strictly negative on a nonempty grid
  double F1 = 0;
  for (int i = 0; i < omegas.size(); ++i)
    F1 += 0.5 * (1.0 / (omegas[i] + 1.0) - 1.0 / omegas[i]);
  F1 -= 1.0;
  CHECK(F1 < 0);

  // residual strictly decreasing (sampled)
  auto F = [&](double mu) {
    double s = 0;
    for (int i = 0; i < omegas.size(); ++i)
      s += 0.5 * (1.0 / (omegas[i] + mu) - 1.0 / omegas[i]);
    return s - mu;
  };
  double prev = F(-0.4);
  for (double mu : {-0.2, 0.0, 0.5, 1.0, 3.0}) {
    CHECK(F(mu) < prev);
    prev = F(mu);
  }

  // empty mode multiset: F(mu) = -mu, root 0
  CHECK(std::abs(mu_fixed_point_renormalized(ArrayXd(), 1.0)) <= 1e-12);
}

TEST_CASE("1d mu fixed point") {
  CHECK_THROWS(mu_fixed_point_1d(-1.0, 4));
  CHECK_THROWS(mu_fixed_point_1d_analytic(0.0));

  // K=0: 1/(2(1+mu)) = mu, so mu = (-1+sqrt(3))/2
  CHECK(mu_fixed_point_1d(1.0, 0) ==
        doctest::Approx(0.36602540378443865).epsilon(1e-12));

  // frozen bisection-oracle values (m = 1)
  CHECK(mu_fixed_point_1d_analytic(1.0) ==
        doctest::Approx(1.0874533605302145).epsilon(1e-10));
  CHECK(mu_fixed_point_1d(1.0, 32) ==
        doctest::Approx(1.0631155157965910).epsilon(1e-10));

  // truncated roots increase monotonically to the analytic value
  double analytic = mu_fixed_point_1d_analytic(1.0);
  double prev = -1;
  for (int K : {0, 1, 2, 4, 8, 16, 32, 64, 128}) {
    double mu = mu_fixed_point_1d(1.0, K);
    CHECK(mu > prev);
    CHECK(mu < analytic);
    prev = mu;
  }
  CHECK(analytic - prev < 0.007);
}

#include <doctest.h>

#include <cmath>

#include "sigmaflow/exact.hpp"

using namespace sigmaflow;

namespace {

double brute_c2(const TorusGrid& g, const std::array<int, 3>& k) {
  double acc = 0;
  for (int jdx = 0; jdx < g.num_modes(); ++jdx) {
    auto j = g.modes()[jdx];
    std::array<int, 3> diff = {k[0] - j[0], k[1] - j[1], k[2] - j[2]};
    bool ok = true;
    for (int dim = 0; dim < 3; ++dim)
      if (std::abs(diff[dim]) > g.cutoff()) ok = false;
    if (!ok) continue;
    acc += 1.0 / (2.0 * g.omega(jdx)) / (2.0 * g.omega(g.mode_index(diff)));
  }
  return acc;
}

}  // namespace

TEST_CASE("gff_hat") {
  Grid g = make_grid(2, 8, 1, 1.0, 0.0);
  SpectralFunction c = gff_hat(g);
  CHECK(c.at({0, 0, 0}) == doctest::Approx(0.5));
  CHECK(c.at({1, 1, 0}) == doctest::Approx(1.0 / 6.0));
  for (int idx = 0; idx < g->num_modes(); ++idx)
    CHECK(c.values[idx] == c.values[g->conjugate_index(idx)]);
}

TEST_CASE("c2_hat values and dual route") {
  Grid g0 = make_grid(2, 4, 0, 1.0, 0.0);
  CHECK(c2_hat(g0).at({0, 0, 0}) == doctest::Approx(0.25).epsilon(1e-14));

  Grid g1 = make_grid(2, 8, 1, 1.0, 0.0);
  CHECK(c2_hat(g1).at({0, 0, 0}) == doctest::Approx(11.0 / 18.0).epsilon(1e-13));

  for (int d : {1, 2}) {
    Grid g = make_grid(d, 12, 3, 0.8, 0.0);
    SpectralFunction c2 = c2_hat(g);
    for (int idx = 0; idx < g->num_modes(); ++idx) {
      double ref = brute_c2(*g, g->modes()[idx]);
      CHECK(c2.values[idx] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("bubble two point") {
  Grid g0 = make_grid(2, 4, 0, 1.0, 0.0);
  CHECK(bubble_two_point(g0).at({0, 0, 0}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  // large m: G -> 2 C2, gap bounded by (2 C2)^2
  Grid gm = make_grid(2, 12, 2, 100.0, 0.0);
  SpectralFunction c2 = c2_hat(gm);
  SpectralFunction bb = bubble_two_point(gm);
  double gap = (bb.values - 2.0 * c2.values).abs().maxCoeff();
  double bound = std::pow(2.0 * c2.values.maxCoeff(), 2);
  CHECK(gap <= bound);
  CHECK(bound < 1e-5);

  // finite N below the infinite-N curve, converging at O(1/N)
  Grid g = make_grid(2, 12, 2, 1.0, 0.0);
  SpectralFunction inf = bubble_two_point(g);
  double prev_gap = 1e9;
  for (int N : {10, 100, 1000}) {
    SpectralFunction fin = bubble_two_point(g, N);
    CHECK((fin.values <= inf.values + 1e-15).all());
    double gap = (inf.values - fin.values).maxCoeff();
    CHECK(gap < prev_gap / 5.0);  // O(1/N): each decade shrinks ~10x
    prev_gap = gap;
  }
}

TEST_CASE("eo4 limit") {
  Grid g0 = make_grid(2, 4, 0, 1.0, 0.0);
  CHECK(eo4_limit(g0) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));

  CHECK_THROWS(eo4_limit(make_grid(3, 6, 1, 1.0, 0.0)));

  double prev = 0;
  for (int K : {1, 2, 4}) {
    Grid g = make_grid(2, 4 * K + 2, K, 1.0, 0.0);
    double v = eo4_limit(g);
    CHECK(v < prev);
    prev = v;
  }

  Grid gm = make_grid(2, 12, 2, 500.0, 0.0);
  double v = eo4_limit(gm);
  CHECK(v < 0);
  CHECK(v > -1e-4);
}

TEST_CASE("eo4 continuum reference brackets the cutoff series") {
  Eo4Reference ref = eo4_continuum_reference(1.0, 16);
  Eo4Reference finer = eo4_continuum_reference(1.0, 32);
  CHECK(finer.value < ref.value);                      // monotone in cutoff
  CHECK(std::abs(finer.value - ref.value) < ref.tail_bound + finer.tail_bound);
}

TEST_CASE("geometric bubble resummation") {
  Grid g0 = make_grid(2, 4, 0, 1.0, 0.0);
  SpectralFunction c2 = c2_hat(g0);

  BubblePartialSum L0 = geometric_bubble_check(g0, 0);
  CHECK(L0.partial.at({0, 0, 0}) == doctest::Approx(2.0 * c2.at({0, 0, 0})));
  CHECK(L0.diverged[0] == 0);

  BubblePartialSum deep = geometric_bubble_check(g0, 60);
  CHECK(deep.partial.at({0, 0, 0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // small m: 2 C2(0) >= 1, ratio test fails at the zero mode
  Grid gsmall = make_grid(2, 12, 2, 0.05, 0.0);
  BubblePartialSum flagged = geometric_bubble_check(gsmall, 3);
  CHECK(flagged.diverged[gsmall->mode_index({0, 0, 0})] == 1);
}

TEST_CASE("spectral functions are even and positive") {
  Grid g = make_grid(2, 12, 3, 0.9, 0.0);
  for (const SpectralFunction& f :
       {gff_hat(g), c2_hat(g), bubble_two_point(g), bubble_two_point(g, 8)}) {
    CHECK(f.values.minCoeff() > 0.0);
    for (int idx = 0; idx < g->num_modes(); ++idx)
      CHECK(f.values[idx] ==
            doctest::Approx(f.values[g->conjugate_index(idx)]).epsilon(1e-12));
  }
}

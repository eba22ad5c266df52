#include "sigmaflow/exact.hpp"

#include <cmath>
#include <stdexcept>

namespace sigmaflow {

SpectralFunction gff_hat(const Grid& grid) {
  SpectralFunction f{grid, 1.0 / (2.0 * grid->omegas()), "gff_hat"};
  return f;
}

SpectralFunction c2_hat(const Grid& grid) {
  Field kernel(grid, gff_hat(grid).values.cast<Complex>());
  Field sq = dealiased_product(kernel, kernel);
  // the kernel is even and real, so its square's coefficients are real
  return SpectralFunction{grid, sq.modes().real(), "c2_hat"};
}

SpectralFunction bubble_two_point(const Grid& grid, int N) {
  if (N < 0) throw std::invalid_argument("bubble_two_point: N must be >= 1 or infinite");
  SpectralFunction c2 = c2_hat(grid);
  double coef = (N == kBubbleInfiniteN) ? 2.0 : 2.0 * (N + 2.0) / N;
  SpectralFunction out{grid, 2.0 * c2.values / (1.0 + coef * c2.values),
                       N == kBubbleInfiniteN ? "bubble_inf" : "bubble_N"};
  return out;
}

double eo4_limit(const Grid& grid) {
  if (grid->dim() != 2) throw std::invalid_argument("eo4_limit: d must be 2");
  SpectralFunction c2 = c2_hat(grid);
  return (-4.0 * c2.values.square() / (1.0 + 2.0 * c2.values)).sum();
}

Eo4Reference eo4_continuum_reference(double m, int K_ref) {
  // All terms are negative and every term becomes more negative as the
  // cutoff grows, so the partial sums decrease monotonically in K. The
  // summand decays like |k|^-4 up to logs, so doubling increments shrink
  // roughly 4x; the tail is estimated from the last doubling with a 2x
  // safety margin.
  auto eval = [m](int K) {
    Grid g = make_grid(2, 2 * K + 2, K, m, 0.0);
    SpectralFunction c2 = c2_hat(g);
    return (-4.0 * c2.values.square() / (1.0 + 2.0 * c2.values)).sum();
  };
  if (K_ref < 4) throw std::invalid_argument("eo4_continuum_reference: K_ref too small");
  double coarse = eval(K_ref / 2);
  double value = eval(K_ref);
  double tail = (coarse - value) * (1.0 / 3.0) * 2.0;
  return Eo4Reference{value, tail, K_ref};
}

BubblePartialSum geometric_bubble_check(const Grid& grid, int order_L) {
  if (order_L < 0) throw std::invalid_argument("geometric_bubble_check: L must be >= 0");
  SpectralFunction c2 = c2_hat(grid);
  ArrayXd twoc2 = 2.0 * c2.values;
  ArrayXd partial = ArrayXd::Zero(grid->num_modes());
  ArrayXd term = twoc2;
  for (int l = 0; l <= order_L; ++l) {
    partial += term;
    term *= -twoc2;
  }
  BubblePartialSum out{{grid, partial, "bubble_partial"}, {}};
  out.diverged.resize(grid->num_modes());
  for (int i = 0; i < grid->num_modes(); ++i)
    out.diverged[i] = (twoc2[i] >= 1.0) ? 1 : 0;
  return out;
}

}  // namespace sigmaflow

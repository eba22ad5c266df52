#pragma once

// Closed-form large-N reference values on the cutoff mode lattice:
// the free covariance C_hat, its self-convolution (the Fourier data of the
// pointwise-squared kernel), the bubble-resummed two-point function of the
// quadratic observable, and the limiting quartic-observable expectation.
// Everything here is cutoff-consistent: convolutions run over retained
// modes only, matching the theory the sampler actually simulates.

#include <string>
#include <vector>

#include "sigmaflow/lattice.hpp"

namespace sigmaflow {

/// Real even function of the retained modes.
struct SpectralFunction {
  Grid grid;
  ArrayXd values;  // indexed like grid->modes()
  std::string label;

  double at(const std::array<int, 3>& k) const {
    return values[grid->mode_index(k)];
  }
};

/// C_hat(k) = 1/(2(|k|^2+m)).
SpectralFunction gff_hat(const Grid& grid);

/// (C_hat * C_hat)(k) = sum_{j, k-j retained} C_hat(j) C_hat(k-j), evaluated
/// by squaring the kernel on the padded grid (exact up to rounding).
SpectralFunction c2_hat(const Grid& grid);

constexpr int kBubbleInfiniteN = 0;

/// N = kBubbleInfiniteN: 2 C2/(1+2 C2); finite N: 2 C2/(1+2((N+2)/N) C2),
/// i.e. the resummed identity with the 6-point remainder dropped. lambda is
/// fixed at 1 in these formulas.
SpectralFunction bubble_two_point(const Grid& grid, int N = kBubbleInfiniteN);

/// -4 sum_k C2(k)^2/(1+2 C2(k)) over retained modes; d = 2 only.
double eo4_limit(const Grid& grid);

/// The same sum over the full plane, approximated with cutoff K_ref plus a
/// rigorous tail bound (the terms are positive and decay like |k|^-4 up to
/// logs, so the tail is bounded by comparison with the integral).
struct Eo4Reference {
  double value;
  double tail_bound;
  int K_ref;
};
Eo4Reference eo4_continuum_reference(double m, int K_ref);

/// Partial geometric resummation 2 C2 sum_{l<=L} (-2 C2)^l. Converges to
/// bubble_two_point where 2 C2 < 1; `diverged` flags modes where the ratio
/// test fails.
struct BubblePartialSum {
  SpectralFunction partial;
  std::vector<uint8_t> diverged;
};
BubblePartialSum geometric_bubble_check(const Grid& grid, int order_L);

}  // namespace sigmaflow

#pragma once

// Renormalization constants on the cutoff lattice (exact finite mode sums),
// Wick-ordering helpers, and the self-consistent mass fixed-point solvers.

#include "sigmaflow/lattice.hpp"

namespace sigmaflow {

struct Counterterms {
  double a = 0.0;  // first-order Wick constant, sum_k 1/(2(|k|^2+m))
  double b = 0.0;  // second-order constant, 3D only
};

/// a = sum_{|k|_inf <= K} 1/(2(|k|^2+m)). Grows like log K in d=2 and like
/// K in d=3.
double wick_constant_a(const TorusGrid& g);

/// b = sum_k 2 (C_hat*C_hat)(k)/(|k|^2+m): the equal-time full-product
/// surrogate for the second-order constant; d = 3 only, grows like log K.
double second_order_constant_b(const Grid& grid);

/// a always; b only in d = 3.
Counterterms make_counterterms(const Grid& grid);

/// :f^2: = dealiased f*f minus a on the zero mode.
Field wick_square(const Field& f, double a);

/// Root of F(mu) = 1/2 sum_k (1/(omega_k+mu) - 1/omega_k) - mu on (-m, inf),
/// bisected to |F| <= 1e-12. F(0) = 0 and F is strictly decreasing, so the
/// returned value is 0 to solver tolerance.
double mu_fixed_point_renormalized(const TorusGrid& g);

/// Fixture overload on an explicit multiset of omegas (may be empty).
double mu_fixed_point_renormalized(const ArrayXd& omegas, double m);

/// Unique positive root of G(mu) = 1/2 sum_{|k|<=K} 1/(k^2+m+mu) - mu.
double mu_fixed_point_1d(double m, int K);

/// Full-sum version via sum_{k in Z} 1/(k^2+c^2) = (pi/c) coth(pi c).
double mu_fixed_point_1d_analytic(double m);

}  // namespace sigmaflow

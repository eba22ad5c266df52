#include "sigmaflow/renorm.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "sigmaflow/exact.hpp"

namespace sigmaflow {

double wick_constant_a(const TorusGrid& g) {
  return (1.0 / (2.0 * g.omegas())).sum();
}

double second_order_constant_b(const Grid& grid) {
  if (grid->dim() != 3)
    throw std::invalid_argument("second_order_constant_b: d must be 3");
  SpectralFunction c2 = c2_hat(grid);
  return (2.0 * c2.values / grid->omegas()).sum();
}

Counterterms make_counterterms(const Grid& grid) {
  Counterterms ct;
  ct.a = wick_constant_a(*grid);
  if (grid->dim() == 3) ct.b = second_order_constant_b(grid);
  return ct;
}

Field wick_square(const Field& f, double a) {
  Field sq = dealiased_product(f, f);
  sq.modes()[f.grid()->mode_index({0, 0, 0})] -= a;
  return sq;
}

namespace {

// Monotone bisection: residual is strictly decreasing on the bracket.
double bisect_decreasing(const std::function<double(double)>& F, double lo,
                         double hi, double tol) {
  double flo = F(lo);
  double fhi = F(hi);
  while (fhi > 0) {  // expand until sign change
    hi = lo + 2.0 * (hi - lo);
    fhi = F(hi);
  }
  if (flo < 0) throw std::logic_error("bisect: bracket has no root");
  for (int it = 0; it < 400; ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = F(mid);
    if (std::abs(fm) <= tol) return mid;
    if (fm > 0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double mu_fixed_point_renormalized(const ArrayXd& omegas, double m) {
  auto F = [&](double mu) {
    double s = 0;
    for (int i = 0; i < omegas.size(); ++i)
      s += 1.0 / (omegas[i] + mu) - 1.0 / omegas[i];
    return 0.5 * s - mu;
  };
  return bisect_decreasing(F, -0.5 * m, m + 1.0, 1e-12);
}

double mu_fixed_point_renormalized(const TorusGrid& g) {
  return mu_fixed_point_renormalized(g.omegas(), g.mass());
}

double mu_fixed_point_1d(double m, int K) {
  if (!(m > 0)) throw std::invalid_argument("mu_fixed_point_1d: m must be > 0");
  if (K < 0) throw std::invalid_argument("mu_fixed_point_1d: K must be >= 0");
  auto G = [&](double mu) {
    double s = 1.0 / (m + mu);
    for (int k = 1; k <= K; ++k) s += 2.0 / (double(k) * k + m + mu);
    return 0.5 * s - mu;
  };
  return bisect_decreasing(G, 0.0, m + 2.0, 1e-12);
}

double mu_fixed_point_1d_analytic(double m) {
  if (!(m > 0)) throw std::invalid_argument("mu_fixed_point_1d_analytic: m must be > 0");
  auto G = [&](double mu) {
    double c = std::sqrt(m + mu);
    return M_PI / (2.0 * c) / std::tanh(M_PI * c) - mu;
  };
  return bisect_decreasing(G, 0.0, m + 2.0, 1e-12);
}

}  // namespace sigmaflow

#include "sigmaflow/observables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

namespace sigmaflow {

namespace {

// Summed in a canonical (sorted) order per point, so the observables are
// bitwise invariant under any permutation of the components.
ArrayXd sum_of_squares_sorted(const TorusGrid& g, int N,
                              const std::function<ArrayXcd(int)>& field) {
  Eigen::ArrayXXd sq(g.num_points(), N);
  ArrayXd buf(g.num_points());
  for (int i = 0; i < N; ++i) {
    to_physical(g, field(i), buf);
    sq.col(i) = buf.square();
  }
  ArrayXd s(g.num_points());
  std::vector<double> row(N);
  for (int x = 0; x < g.num_points(); ++x) {
    for (int i = 0; i < N; ++i) row[i] = sq(x, i);
    std::sort(row.begin(), row.end());
    double acc = 0;
    for (double v : row) acc += v;
    s[x] = acc;
  }
  return s;
}

ArrayXd sum_of_squares(const EnsembleState& state) {
  return sum_of_squares_sorted(*state.grid(), state.ncomp(),
                               [&](int i) { return state.phi_of(i); });
}

ArrayXd wick_quartic(const ArrayXd& s, int N, double a) {
  return (s.square() - 2.0 * (N + 2.0) * a * s + N * (N + 2.0) * a * a) / N;
}

}  // namespace

ArrayXd obs2(const EnsembleState& state) {
  int N = state.ncomp();
  double a = state.counterterms().a;
  return (sum_of_squares(state) - N * a) / std::sqrt(double(N));
}

ArrayXcd obs2_modes(const EnsembleState& state) {
  ArrayXcd out;
  to_spectral(*state.grid(), obs2(state), out);
  return out;
}

ArrayXd obs4(const EnsembleState& state) {
  return wick_quartic(sum_of_squares(state), state.ncomp(),
                      state.counterterms().a);
}

ArrayXd obs4_coupled_cv(const EnsembleState& state) {
  int N = state.ncomp();
  double a = state.counterterms().a;
  ArrayXd sz = sum_of_squares_sorted(*state.grid(), N,
                                     [&](int i) { return state.z[i]; });
  return obs4(state) - wick_quartic(sz, N, a);
}

CorrelationEstimate two_point_spectrum(const Grid& grid,
                                       const std::vector<ArrayXcd>& samples,
                                       int batches) {
  if (samples.size() < 2)
    throw std::invalid_argument("two_point_spectrum: need >= 2 samples");
  const TorusGrid& g = *grid;
  int R = g.num_modes();
  int zero = g.mode_index({0, 0, 0});

  Complex zero_mean = 0;
  for (const auto& s : samples) zero_mean += s[zero];
  zero_mean /= double(samples.size());

  CorrelationEstimate est;
  est.grid = grid;
  est.nsamples = samples.size();
  est.ghat.resize(R);
  est.stderr_.resize(R);
  std::vector<double> series(samples.size());
  for (int k = 0; k < R; ++k) {
    for (size_t s = 0; s < samples.size(); ++s) {
      Complex v = samples[s][k];
      if (k == zero) v -= zero_mean;
      series[s] = std::norm(v);
    }
    ScalarStat stat = batch_means(series, batches);
    est.ghat[k] = stat.mean;
    est.stderr_[k] = stat.se;
  }
  return est;
}

void write_correlation_csv(const CorrelationEstimate& est,
                           const ArrayXd& reference, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  const TorusGrid& g = *est.grid;
  std::fprintf(f, "k1,k2,k3,ghat,stderr,exact,z\n");
  for (int idx = 0; idx < g.num_modes(); ++idx) {
    auto k = g.modes()[idx];
    double z = est.stderr_[idx] > 0
                   ? (est.ghat[idx] - reference[idx]) / est.stderr_[idx]
                   : 0.0;
    std::fprintf(f, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g\n", k[0], k[1], k[2],
                 est.ghat[idx], est.stderr_[idx], reference[idx], z);
  }
  std::fclose(f);
}

// ---- Dyson-Schwinger --------------------------------------------------------

namespace {

double eval_point(const TorusGrid& g, const ArrayXd& phys,
                  const std::array<int, 3>& pt) {
  int n = g.points_per_side();
  int pos = 0;
  for (int dim = 0; dim < g.dim(); ++dim) pos = pos * n + ((pt[dim] % n) + n) % n;
  return phys[pos];
}

}  // namespace

void validate_descriptor(const TorusGrid& g, int N, const DsFunctional& F) {
  for (const auto& mono : F.monomials) {
    for (const auto& fac : mono.factors) {
      if (fac.component < 0 || fac.component >= N)
        throw std::invalid_argument("descriptor component out of range: " + F.name);
      if (fac.power < 1 || fac.power > 6)
        throw std::invalid_argument("descriptor power unsupported: " + F.name);
      for (int dim = 0; dim < g.dim(); ++dim)
        if (fac.point[dim] < 0 || fac.point[dim] >= g.points_per_side())
          throw std::invalid_argument("descriptor point off grid: " + F.name);
    }
  }
}

DsAccumulator::DsAccumulator(const Grid& grid, DsFunctional F, int component,
                             std::array<int, 3> point)
    : grid_(grid), F_(std::move(F)), comp_(component), point_(point) {}

void DsAccumulator::add(const EnsembleState& state) {
  const TorusGrid& g = *grid_;
  int N = state.ncomp();
  validate_descriptor(g, N, F_);

  std::vector<ArrayXd> phys(N);
  for (int i = 0; i < N; ++i) to_physical(g, state.phi_of(i), phys[i]);

  // F and dF/dPhi_comp(point): band-limited derivative of a point value is
  // the Dirichlet kernel
  double Fval = 0, dF = 0;
  for (const auto& mono : F_.monomials) {
    double prod = mono.coeff;
    for (const auto& fac : mono.factors)
      prod *= std::pow(eval_point(g, phys[fac.component], fac.point), fac.power);
    Fval += prod;
    for (size_t l = 0; l < mono.factors.size(); ++l) {
      const auto& fac = mono.factors[l];
      if (fac.component != comp_) continue;
      double term = mono.coeff * fac.power *
                    std::pow(eval_point(g, phys[fac.component], fac.point),
                             fac.power - 1) *
                    dirichlet_kernel(g, point_, fac.point);
      for (size_t l2 = 0; l2 < mono.factors.size(); ++l2) {
        if (l2 == l) continue;
        const auto& f2 = mono.factors[l2];
        term *= std::pow(eval_point(g, phys[f2.component], f2.point), f2.power);
      }
      dF += term;
    }
  }

  // action gradient dS/dPhi_i at the base point:
  //   2 (omega - c1) phi_i  + (2 lambda / N) P_K[s phi_i]
  ArrayXcd grad = 2.0 * (g.omegas() - state.cterm_coef()).cast<Complex>() *
                  state.phi_of(comp_);
  if (g.coupling() != 0.0) {
    ArrayXd s = ArrayXd::Zero(g.num_points());
    for (int j = 0; j < N; ++j) s += phys[j].square();
    ArrayXd prod = s * phys[comp_];
    ArrayXcd cubic;
    to_spectral(g, prod, cubic);
    grad += (2.0 * g.coupling() / N) * cubic;
  }
  ArrayXd grad_phys;
  to_physical(g, grad, grad_phys);
  double Sgrad = eval_point(g, grad_phys, point_);

  series_.push_back(dF - Fval * Sgrad);
}

DsAccumulator::Result DsAccumulator::result(int batches) const {
  ScalarStat stat = batch_means(series_, batches);
  Result r;
  r.mean = stat.mean;
  r.se = stat.se;
  r.z = stat.se > 0 ? stat.mean / stat.se : 0.0;
  r.n = series_.size();
  return r;
}

std::vector<DsFunctional> ds_battery(const TorusGrid& g) {
  int n = g.points_per_side();
  std::array<int, 3> x0 = {0, 0, 0};
  std::array<int, 3> x1 = {n / 3, 0, 0};
  std::array<int, 3> x2 = {n / 2, g.dim() >= 2 ? n / 4 : 0, 0};

  std::vector<DsFunctional> fs;
  fs.push_back({"const", {DsMonomial{1.0, {}}}});
  fs.push_back({"point", {DsMonomial{1.0, {{0, x1, 1}}}}});
  fs.push_back({"same_point", {DsMonomial{1.0, {{0, x0, 1}}}}});
  fs.push_back({"two_point", {DsMonomial{1.0, {{0, x1, 1}, {0, x2, 1}}}}});
  fs.push_back({"cross", {DsMonomial{1.0, {{1, x1, 1}}}}});
  fs.push_back({"cubic", {DsMonomial{1.0, {{0, x1, 3}}}}});
  fs.push_back(
      {"invariant2",
       {DsMonomial{1.0, {{0, x1, 2}}}, DsMonomial{1.0, {{1, x1, 2}}}}});
  return fs;
}

}  // namespace sigmaflow

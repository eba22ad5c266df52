#pragma once

// Discrete torus geometry and the spectral toolbox built on it.
//
// Conventions (single source of truth for the whole code base):
//   * characters e^{i k.x} with k in Z^d, |k_i| <= K, on x_j = 2*pi*j/n;
//   * normalized measure: <f,g> = n^{-d} sum_x f(x) g(x), so the characters
//     are orthonormal and Parseval reads n^{-d} sum_x u^2 = sum_k |u_hat|^2;
//   * spectral Laplacian, omega_k = |k|^2 + m;
//   * real fields are stored as Hermitian-symmetric coefficients on the
//     full retained box (2K+1)^d, u_hat(-k) = conj(u_hat(k)).
//
// Products of band-limited fields are evaluated pointwise on a grid large
// enough that no aliased image can land on a retained mode (3K+2 points per
// side for a pairwise product, 4K+2 for the cubic drift), then truncated
// back to the retained box in one step.

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace sigmaflow {

using Complex = std::complex<double>;
using Eigen::ArrayXcd;
using Eigen::ArrayXd;

class TorusGrid;
class Field;
using Grid = std::shared_ptr<const TorusGrid>;

/// Creates a grid and its FFT plans. n must be even, 0 <= K <= n/2 - 1,
/// m > 0, lambda >= 0. Runs with a cubic drift additionally need n >= 4K+2;
/// that constraint is enforced at config load, not here, so that free-field
/// fixtures can use small grids.
Grid make_grid(int d, int n, int K, double m, double lambda);

class TorusGrid {
 public:
  ~TorusGrid();
  TorusGrid(const TorusGrid&) = delete;
  TorusGrid& operator=(const TorusGrid&) = delete;

  int dim() const { return d_; }
  int points_per_side() const { return n_; }
  int cutoff() const { return K_; }
  double mass() const { return m_; }
  double coupling() const { return lambda_; }

  int num_modes() const { return num_modes_; }   // (2K+1)^d
  int num_points() const { return num_points_; } // n^d

  // Mode table, lexicographic in (k_1,...,k_d) over [-K,K]^d. This ordering
  // is part of the checkpoint format.
  const std::vector<std::array<int, 3>>& modes() const { return modes_; }
  int mode_index(const std::array<int, 3>& k) const;
  int conjugate_index(int idx) const { return conj_index_[idx]; }
  bool is_self_conjugate(int idx) const { return conj_index_[idx] == idx; }

  double ksq(int idx) const { return ksq_[idx]; }
  double omega(int idx) const { return ksq_[idx] + m_; }
  const ArrayXd& ksq() const { return ksq_; }
  ArrayXd omegas() const { return ksq_ + m_; }

  // Canonical half spectrum: the zero mode first, then one representative of
  // each conjugate pair (the lexicographically positive one). Fixes the
  // order in which Gaussian draws are consumed.
  const std::vector<int>& draw_order() const { return draw_order_; }

  bool same_geometry(const TorusGrid& o) const {
    return d_ == o.d_ && n_ == o.n_ && K_ == o.K_;
  }

 private:
  TorusGrid(int d, int n, int K, double m, double lambda);
  friend Grid make_grid(int, int, int, double, double);

  int d_, n_, K_;
  double m_, lambda_;
  int num_modes_, num_points_;
  int pad_n_;  // pairwise-product grid, smallest even >= 3K+2

  std::vector<std::array<int, 3>> modes_;
  std::vector<int> conj_index_;
  ArrayXd ksq_;
  std::vector<int> draw_order_;

  struct Plans;
  std::unique_ptr<Plans> plans_;

  friend void to_physical_raw(const TorusGrid&, const ArrayXcd&, double*);
  friend void to_spectral(const TorusGrid&, const ArrayXd&, ArrayXcd&);
  friend Field dealiased_product(const Field&, const Field&);
};

/// One real scalar field as Hermitian-symmetric coefficients on the
/// retained modes of its grid.
class Field {
 public:
  explicit Field(Grid grid)
      : grid_(std::move(grid)), coef_(ArrayXcd::Zero(grid_->num_modes())) {}
  Field(Grid grid, ArrayXcd coef);

  const Grid& grid() const { return grid_; }
  const ArrayXcd& modes() const { return coef_; }
  ArrayXcd& modes() { return coef_; }

  Complex at_mode(const std::array<int, 3>& k) const {
    return coef_[grid_->mode_index(k)];
  }

 private:
  Grid grid_;
  ArrayXcd coef_;
};

// ---- transforms -----------------------------------------------------------

/// u(x_j) = sum_k u_hat(k) e^{i k.x_j} on the n^d grid (row-major, first
/// coordinate slowest).
ArrayXd to_physical(const Field& f);

/// u_hat(k) = n^{-d} sum_x u(x) e^{-i k.x}, truncated to retained modes and
/// symmetrized so the Hermitian invariant holds exactly.
Field to_spectral(const Grid& grid, const ArrayXd& u);

// Low-level variants used in the steppers (no Field wrapper, no allocation).
void to_physical(const TorusGrid& g, const ArrayXcd& modes, ArrayXd& out);
void to_physical_raw(const TorusGrid& g, const ArrayXcd& modes, double* out);
void to_spectral(const TorusGrid& g, const ArrayXd& u, ArrayXcd& out);

// ---- symbols, products, norms ---------------------------------------------

/// omega_k = |k|^2 + m.
double symbol_omega(const TorusGrid& g, const std::array<int, 3>& k);

/// Spectral truncation of the exact pointwise product, evaluated on the
/// padded grid so no aliased image reaches a retained mode.
Field dealiased_product(const Field& f, const Field& g);

/// ( sum_k (1+|k|^2)^s |u_hat(k)|^2 )^{1/2}; s = 0 is the L^2 norm under the
/// normalized measure.
double sobolev_norm(const Field& f, double s);
double sobolev_norm(const TorusGrid& g, const ArrayXcd& modes, double s);

/// Exact symmetrization u_hat(-k) <- conj(u_hat(k)); cheap, applied after
/// any operation that could break the invariant at rounding level.
void enforce_hermitian(const TorusGrid& g, ArrayXcd& modes);

bool is_hermitian(const TorusGrid& g, const ArrayXcd& modes, double tol = 0.0);

/// Band-limited point evaluation kernel D_K(x_a - x_b) =
/// prod_dim (1 + 2 sum_{q<=K} cos(q theta)); the derivative of a point value
/// with respect to the field in the normalized L^2 pairing.
double dirichlet_kernel(const TorusGrid& g, const std::array<int, 3>& ja,
                        const std::array<int, 3>& jb);

// ---- scratch-buffer plumbing ----------------------------------------------

/// Per-thread FFT scratch keyed by (transform size, slot); fftw_malloc
/// aligned. All transforms above use this pool; callers never manage
/// buffers. Ops needing two simultaneous buffers use distinct slots.
struct SpectralScratch;
SpectralScratch& spectral_scratch(int npoints, int slot = 0);

}  // namespace sigmaflow

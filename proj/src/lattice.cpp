#include "sigmaflow/lattice.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace sigmaflow {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

}  // namespace

// One in-place c2c plan pair per transform size.
struct TorusGrid::Plans {
  fftw_plan fwd_n = nullptr, bwd_n = nullptr;
  fftw_plan fwd_pad = nullptr, bwd_pad = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    for (fftw_plan p : {fwd_n, bwd_n, fwd_pad, bwd_pad})
      if (p) fftw_destroy_plan(p);
  }
};

struct SpectralScratch {
  explicit SpectralScratch(int npoints) : size(npoints) {
    buf = static_cast<fftw_complex*>(
        fftw_malloc(sizeof(fftw_complex) * npoints));
  }
  ~SpectralScratch() { fftw_free(buf); }
  SpectralScratch(const SpectralScratch&) = delete;
  int size;
  fftw_complex* buf;
};

SpectralScratch& spectral_scratch(int npoints, int slot) {
  thread_local std::unordered_map<int64_t, std::unique_ptr<SpectralScratch>> pool;
  auto& entry = pool[int64_t(npoints) * 8 + slot];
  if (!entry) entry = std::make_unique<SpectralScratch>(npoints);
  return *entry;
}

namespace {

fftw_plan make_plan(int d, int n, int sign) {
  // Plans are created on a throwaway fftw_malloc'd buffer; execution later
  // runs on pool buffers with the same alignment class.
  int npoints = ipow(n, d);
  fftw_complex* tmp =
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * npoints));
  int dims[3] = {n, n, n};
  fftw_plan p = fftw_plan_dft(d, dims, tmp, tmp, sign, FFTW_ESTIMATE);
  fftw_free(tmp);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  return p;
}

}  // namespace

Grid make_grid(int d, int n, int K, double m, double lambda) {
  return Grid(new TorusGrid(d, n, K, m, lambda));
}

TorusGrid::TorusGrid(int d, int n, int K, double m, double lambda)
    : d_(d), n_(n), K_(K), m_(m), lambda_(lambda) {
  if (d < 1 || d > 3) throw std::invalid_argument("dimension d must be 1, 2 or 3");
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("n must be even and >= 2");
  if (K < 0 || K > n / 2 - 1)
    throw std::invalid_argument("cutoff K must satisfy 0 <= K <= n/2 - 1");
  if (!(m > 0)) throw std::invalid_argument("mass m must be > 0");
  if (lambda < 0) throw std::invalid_argument("coupling lambda must be >= 0");

  num_points_ = ipow(n, d);
  int side = 2 * K + 1;
  num_modes_ = ipow(side, d);
  pad_n_ = 3 * K + 2;
  if (pad_n_ % 2) ++pad_n_;

  modes_.resize(num_modes_);
  conj_index_.resize(num_modes_);
  ksq_.resize(num_modes_);
  for (int idx = 0; idx < num_modes_; ++idx) {
    int rem = idx;
    std::array<int, 3> k = {0, 0, 0};
    for (int dim = d - 1; dim >= 0; --dim) {
      k[dim] = rem % side - K;
      rem /= side;
    }
    modes_[idx] = k;
    ksq_[idx] = double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2];
  }
  for (int idx = 0; idx < num_modes_; ++idx) {
    std::array<int, 3> mk = {-modes_[idx][0], -modes_[idx][1], -modes_[idx][2]};
    conj_index_[idx] = mode_index(mk);
  }

  // zero mode first, then lexicographically positive representatives
  draw_order_.push_back(mode_index({0, 0, 0}));
  for (int idx = 0; idx < num_modes_; ++idx) {
    const auto& k = modes_[idx];
    int first_nonzero = 0;
    for (int dim = 0; dim < d_; ++dim) {
      if (k[dim] != 0) {
        first_nonzero = k[dim];
        break;
      }
    }
    if (first_nonzero > 0) draw_order_.push_back(idx);
  }

  plans_ = std::make_unique<Plans>();
  std::lock_guard<std::mutex> lock(planner_mutex());
  plans_->fwd_n = make_plan(d_, n_, FFTW_FORWARD);
  plans_->bwd_n = make_plan(d_, n_, FFTW_BACKWARD);
  plans_->fwd_pad = make_plan(d_, pad_n_, FFTW_FORWARD);
  plans_->bwd_pad = make_plan(d_, pad_n_, FFTW_BACKWARD);
}

TorusGrid::~TorusGrid() = default;

int TorusGrid::mode_index(const std::array<int, 3>& k) const {
  int side = 2 * K_ + 1;
  int idx = 0;
  for (int dim = 0; dim < d_; ++dim) {
    if (k[dim] < -K_ || k[dim] > K_)
      throw std::out_of_range("mode outside retained set");
    idx = idx * side + (k[dim] + K_);
  }
  return idx;
}

Field::Field(Grid grid, ArrayXcd coef) : grid_(std::move(grid)), coef_(std::move(coef)) {
  if (coef_.size() != grid_->num_modes())
    throw std::invalid_argument("coefficient array size does not match grid");
  enforce_hermitian(*grid_, coef_);
}

namespace {

// Embed/extract between the retained box and a length-nbox c2c array
// (mode k lives at ((k mod nbox)+nbox)%nbox per dimension, row-major).
void embed_modes(const TorusGrid& g, const ArrayXcd& modes, int nbox,
                 fftw_complex* box) {
  int npts = ipow(nbox, g.dim());
  std::memset(box, 0, sizeof(fftw_complex) * npts);
  const auto& mk = g.modes();
  for (int idx = 0; idx < g.num_modes(); ++idx) {
    int pos = 0;
    for (int dim = 0; dim < g.dim(); ++dim) {
      int w = ((mk[idx][dim] % nbox) + nbox) % nbox;
      pos = pos * nbox + w;
    }
    box[pos][0] = modes[idx].real();
    box[pos][1] = modes[idx].imag();
  }
}

void extract_modes(const TorusGrid& g, const fftw_complex* box, int nbox,
                   double scale, ArrayXcd& modes) {
  const auto& mk = g.modes();
  modes.resize(g.num_modes());
  for (int idx = 0; idx < g.num_modes(); ++idx) {
    int pos = 0;
    for (int dim = 0; dim < g.dim(); ++dim) {
      int w = ((mk[idx][dim] % nbox) + nbox) % nbox;
      pos = pos * nbox + w;
    }
    modes[idx] = Complex(box[pos][0] * scale, box[pos][1] * scale);
  }
}

}  // namespace

void enforce_hermitian(const TorusGrid& g, ArrayXcd& modes) {
  for (int idx : g.draw_order()) {
    int c = g.conjugate_index(idx);
    if (c == idx) {
      modes[idx] = Complex(modes[idx].real(), 0.0);
    } else {
      Complex avg = 0.5 * (modes[idx] + std::conj(modes[c]));
      modes[idx] = avg;
      modes[c] = std::conj(avg);
    }
  }
}

bool is_hermitian(const TorusGrid& g, const ArrayXcd& modes, double tol) {
  for (int idx = 0; idx < g.num_modes(); ++idx) {
    Complex diff = modes[idx] - std::conj(modes[g.conjugate_index(idx)]);
    if (std::abs(diff) > tol) return false;
  }
  return true;
}

void to_physical_raw(const TorusGrid& g, const ArrayXcd& modes, double* out) {
  auto& ws = spectral_scratch(g.num_points());
  embed_modes(g, modes, g.points_per_side(), ws.buf);
  fftw_execute_dft(g.plans_->bwd_n, ws.buf, ws.buf);
  for (int i = 0; i < g.num_points(); ++i) out[i] = ws.buf[i][0];
}

void to_physical(const TorusGrid& g, const ArrayXcd& modes, ArrayXd& out) {
  out.resize(g.num_points());
  to_physical_raw(g, modes, out.data());
}

ArrayXd to_physical(const Field& f) {
  ArrayXd out;
  to_physical(*f.grid(), f.modes(), out);
  return out;
}

void to_spectral(const TorusGrid& g, const ArrayXd& u, ArrayXcd& out) {
  if (u.size() != g.num_points())
    throw std::invalid_argument("physical array size does not match grid");
  auto& ws = spectral_scratch(g.num_points());
  for (int i = 0; i < g.num_points(); ++i) {
    ws.buf[i][0] = u[i];
    ws.buf[i][1] = 0.0;
  }
  fftw_execute_dft(g.plans_->fwd_n, ws.buf, ws.buf);
  extract_modes(g, ws.buf, g.points_per_side(), 1.0 / g.num_points(), out);
  enforce_hermitian(g, out);
}

Field to_spectral(const Grid& grid, const ArrayXd& u) {
  ArrayXcd out;
  to_spectral(*grid, u, out);
  return Field(grid, std::move(out));
}

double symbol_omega(const TorusGrid& g, const std::array<int, 3>& k) {
  return g.ksq(g.mode_index(k)) + g.mass();
}

Field dealiased_product(const Field& f, const Field& g) {
  const TorusGrid& gr = *f.grid();
  if (!gr.same_geometry(*g.grid()) || gr.mass() != g.grid()->mass() ||
      gr.coupling() != g.grid()->coupling())
    throw std::invalid_argument("dealiased_product: grid mismatch");

  int pad = gr.pad_n_;
  int pts = ipow(pad, gr.dim());
  auto& wf = spectral_scratch(pts, 0);
  auto& wg = spectral_scratch(pts, 1);

  embed_modes(gr, f.modes(), pad, wf.buf);
  fftw_execute_dft(gr.plans_->bwd_pad, wf.buf, wf.buf);
  embed_modes(gr, g.modes(), pad, wg.buf);
  fftw_execute_dft(gr.plans_->bwd_pad, wg.buf, wg.buf);
  for (int i = 0; i < pts; ++i) {
    wf.buf[i][0] = wf.buf[i][0] * wg.buf[i][0];
    wf.buf[i][1] = 0.0;
  }
  fftw_execute_dft(gr.plans_->fwd_pad, wf.buf, wf.buf);
  ArrayXcd out;
  extract_modes(gr, wf.buf, pad, 1.0 / pts, out);
  enforce_hermitian(gr, out);
  return Field(f.grid(), std::move(out));
}

double sobolev_norm(const TorusGrid& g, const ArrayXcd& modes, double s) {
  double acc = 0;
  for (int idx = 0; idx < g.num_modes(); ++idx)
    acc += std::pow(1.0 + g.ksq(idx), s) * std::norm(modes[idx]);
  return std::sqrt(acc);
}

double sobolev_norm(const Field& f, double s) {
  return sobolev_norm(*f.grid(), f.modes(), s);
}

double dirichlet_kernel(const TorusGrid& g, const std::array<int, 3>& ja,
                        const std::array<int, 3>& jb) {
  double prod = 1.0;
  for (int dim = 0; dim < g.dim(); ++dim) {
    double theta = 2.0 * M_PI * (ja[dim] - jb[dim]) / g.points_per_side();
    double s = 1.0;
    for (int q = 1; q <= g.cutoff(); ++q) s += 2.0 * std::cos(q * theta);
    prod *= s;
  }
  return prod;
}

}  // namespace sigmaflow

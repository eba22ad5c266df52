#include "sigmaflow/dynamics.hpp"

#include <omp.h>

#include <cstdio>
#include <cstring>

namespace sigmaflow {

namespace {

double mass_shift_coef(const TorusGrid& g, int N, const Counterterms& ct,
                       CountertermMode mode) {
  double lam = g.coupling();
  double acoef;
  switch (mode) {
    case CountertermMode::Exact:
      acoef = (N + 2.0) / N;
      break;
    case CountertermMode::None:
      return 0.0;
    case CountertermMode::WrongNPlus3:
      acoef = (N + 3.0) / N;
      break;
    default:
      acoef = (N + 2.0) / N;
  }
  double c1 = acoef * lam * ct.a;
  if (g.dim() == 3) c1 -= 3.0 * (N + 2.0) / (double(N) * N) * lam * lam * ct.b;
  return c1;
}

}  // namespace

EnsembleState::EnsembleState(Grid grid, int N, IntegratorMode mode,
                             CountertermMode ct_mode)
    : grid_(std::move(grid)), N_(N), mode_(mode), ct_mode_(ct_mode) {
  if (N < 1) throw std::invalid_argument("EnsembleState: N must be >= 1");
  ct_ = make_counterterms(grid_);
  c1_ = mass_shift_coef(*grid_, N_, ct_, ct_mode_);
  int R = grid_->num_modes();
  z.assign(N_, ArrayXcd::Zero(R));
  if (mode_ == IntegratorMode::Direct)
    phi.assign(N_, ArrayXcd::Zero(R));
  else
    y.assign(N_, ArrayXcd::Zero(R));
}

void EnsembleState::initialize(InitScheme scheme, uint64_t seed, uint32_t member) {
  if (scheme == InitScheme::Warm)
    throw std::invalid_argument("warm start goes through state_from_checkpoint");
  for (int i = 0; i < N_; ++i) {
    NoiseStream s(seed, member, uint32_t(i), Purpose::FreeInit);
    sample_stationary_z(*grid_, s, 0, z[i]);
    if (mode_ == IntegratorMode::Direct) {
      if (scheme == InitScheme::StationaryFree)
        phi[i] = z[i];
      else
        phi[i].setZero();
    } else {
      if (scheme == InitScheme::StationaryFree)
        y[i].setZero();
      else
        y[i] = -z[i];
    }
  }
  t = 0.0;
  step_count = 0;
}

std::vector<ArrayXcd> drift_interacting(const EnsembleState& state) {
  const TorusGrid& g = *state.grid();
  int N = state.ncomp();
  double lam = g.coupling();
  std::vector<ArrayXcd> drift(N);
  if (lam == 0.0 && state.cterm_coef() == 0.0) {
    for (int i = 0; i < N; ++i) drift[i] = ArrayXcd::Zero(g.num_modes());
    return drift;
  }
  std::vector<ArrayXd> phys(N);
  ArrayXd ssum = ArrayXd::Zero(g.num_points());
  for (int j = 0; j < N; ++j) {
    to_physical(g, state.phi_of(j), phys[j]);
    ssum += phys[j].square();
  }
  ArrayXd prod(g.num_points());
  for (int i = 0; i < N; ++i) {
    prod = ssum * phys[i];
    to_spectral(g, prod, drift[i]);
    drift[i] = -(lam / N) * drift[i] + state.cterm_coef() * state.phi_of(i);
  }
  return drift;
}

std::vector<ArrayXcd> drift_remainder(const EnsembleState& state) {
  const TorusGrid& g = *state.grid();
  if (state.mode() != IntegratorMode::Split)
    throw std::invalid_argument("drift_remainder: state is not in split mode");
  int N = state.ncomp();
  double lam = g.coupling();
  double a = (state.counterterm_mode() == CountertermMode::None)
                 ? 0.0
                 : state.counterterms().a;
  std::vector<ArrayXd> yp(N), zp(N);
  for (int j = 0; j < N; ++j) {
    to_physical(g, state.y[j], yp[j]);
    to_physical(g, state.z[j], zp[j]);
  }
  std::vector<ArrayXcd> drift(N);
  ArrayXd acc(g.num_points());
  for (int i = 0; i < N; ++i) {
    acc.setZero();
    for (int j = 0; j < N; ++j) {
      double dij = (i == j) ? 1.0 : 0.0;
      acc += yp[j].square() * yp[i];                      // Y_j^2 Y_i
      acc += yp[j].square() * zp[i];                      // Y_j^2 Z_i
      acc += 2.0 * yp[j] * yp[i] * zp[j];                 // 2 Y_j Y_i Z_j
      acc += 2.0 * yp[j] * (zp[i] * zp[j] - dij * a);     // 2 Y_j :Z_i Z_j:
      acc += (zp[j].square() - a) * yp[i];                // :Z_j^2: Y_i
      acc += zp[i] * zp[j].square() - a * zp[i] * (1.0 + 2.0 * dij);  // :Z_i Z_j^2:
    }
    to_spectral(g, acc, drift[i]);
    drift[i] *= -(lam / N);
  }
  return drift;
}

Stepper::Stepper(const EnsembleState& state, double dt, int workers)
    : dt_(dt), workers_(workers < 1 ? 1 : workers) {
  if (!(dt > 0)) throw std::invalid_argument("Stepper: dt must be > 0");
  const TorusGrid& g = *state.grid();
  ArrayXd omega = g.omegas();
  decay_ = (-dt * omega).exp();
  phi1dt_ = (1.0 - decay_) / omega;
  noise_var_ = (1.0 - (-2.0 * dt * omega).exp()) / (2.0 * omega);
  phys_.resize(g.num_points(), state.ncomp());
  ssum_.resize(g.num_points());
  eta_scratch_.assign(workers_, ArrayXcd(g.num_modes()));
  mode_scratch_.assign(workers_, ArrayXcd(g.num_modes()));
  real_scratch_.assign(workers_, ArrayXd(g.num_points()));
}

void Stepper::advance(EnsembleState& state, const NoiseStream& base) {
  advance_impl(state, &base, nullptr);
}

void Stepper::advance_with_noise(EnsembleState& state,
                                 const std::vector<ArrayXcd>& eta) {
  advance_impl(state, nullptr, &eta);
}

void Stepper::advance_impl(EnsembleState& state, const NoiseStream* base,
                           const std::vector<ArrayXcd>* eta_ext) {
  const TorusGrid& g = *state.grid();
  int N = state.ncomp();
  double lam = g.coupling();
  double lamN = lam / N;
  double c1 = state.cterm_coef();
  uint64_t step = state.step_count;
  int blown = -1;

  auto eta_for = [&](int i, int w) -> const ArrayXcd& {
    if (eta_ext) return (*eta_ext)[i];
    base->with_component(uint32_t(i)).fill_gaussian(g, noise_var_, step,
                                                    eta_scratch_[w]);
    return eta_scratch_[w];
  };

  bool free_run = (lam == 0.0 && c1 == 0.0);

  if (state.mode() == IntegratorMode::Direct) {
    if (!free_run) {
#pragma omp parallel for schedule(static) num_threads(workers_)
      for (int j = 0; j < N; ++j)
        to_physical_raw(g, state.phi[j], phys_.col(j).data());
      ssum_.setZero();
      for (int j = 0; j < N; ++j) ssum_ += phys_.col(j).square();
    }
#pragma omp parallel for schedule(static) num_threads(workers_)
    for (int i = 0; i < N; ++i) {
      int w = omp_get_thread_num();
      const ArrayXcd& eta = eta_for(i, w);
      if (free_run) {
        state.phi[i] = decay_ * state.phi[i] + eta;
      } else {
        real_scratch_[w] = ssum_ * phys_.col(i).array();
        to_spectral(g, real_scratch_[w], mode_scratch_[w]);
        state.phi[i] = decay_ * state.phi[i] +
                       phi1dt_ * (-lamN * mode_scratch_[w] + c1 * state.phi[i]) +
                       eta;
      }
      state.z[i] = decay_ * state.z[i] + eta;
      if (!state.phi[i].allFinite() || !state.z[i].allFinite()) blown = i;
    }
  } else {
    // split mode: Z first (exact linear update), then the deterministic
    // remainder step with Z at t+dt
#pragma omp parallel for schedule(static) num_threads(workers_)
    for (int i = 0; i < N; ++i) {
      int w = omp_get_thread_num();
      const ArrayXcd& eta = eta_for(i, w);
      state.z[i] = decay_ * state.z[i] + eta;
    }
#pragma omp parallel for schedule(static) num_threads(workers_)
    for (int j = 0; j < N; ++j) {
      int w = omp_get_thread_num();
      mode_scratch_[w] = state.z[j] + state.y[j];
      to_physical_raw(g, mode_scratch_[w], phys_.col(j).data());
    }
    ssum_.setZero();
    for (int j = 0; j < N; ++j) ssum_ += phys_.col(j).square();
#pragma omp parallel for schedule(static) num_threads(workers_)
    for (int i = 0; i < N; ++i) {
      int w = omp_get_thread_num();
      real_scratch_[w] = ssum_ * phys_.col(i).array();
      to_spectral(g, real_scratch_[w], mode_scratch_[w]);
      // remainder drift in collapsed form: -(lam/N) s phi_i + c1 phi_i
      ArrayXcd phi_i = state.z[i] + state.y[i];
      state.y[i] = decay_ * state.y[i] +
                   phi1dt_ * (-lamN * mode_scratch_[w] + c1 * phi_i);
      if (!state.y[i].allFinite() || !state.z[i].allFinite()) blown = i;
    }
  }

  state.step_count = step + 1;
  state.t += dt_;
  if (blown >= 0) throw BlowUpError(state.step_count, blown);
}

// ---- checkpoints -----------------------------------------------------------

namespace {
constexpr char kMagic[4] = {'S', 'G', 'F', 'L'};
constexpr uint16_t kVersion = 1;

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

template <typename T>
void write_pod(std::FILE* f, const T& v) {
  if (std::fwrite(&v, sizeof(T), 1, f) != 1)
    throw std::runtime_error("checkpoint write failed");
}

template <typename T>
T read_pod(std::FILE* f) {
  T v;
  if (std::fread(&v, sizeof(T), 1, f) != 1)
    throw std::runtime_error("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const EnsembleState& state, uint64_t seed,
                     const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  const TorusGrid& g = *state.grid();
  std::fwrite(kMagic, 1, 4, f.get());
  write_pod(f.get(), kVersion);
  write_pod(f.get(), uint32_t(g.dim()));
  write_pod(f.get(), uint32_t(g.points_per_side()));
  write_pod(f.get(), uint32_t(g.cutoff()));
  write_pod(f.get(), uint32_t(state.ncomp()));
  write_pod(f.get(), g.mass());
  write_pod(f.get(), g.coupling());
  write_pod(f.get(), state.t);
  int R = g.num_modes();
  for (int i = 0; i < state.ncomp(); ++i) {
    ArrayXcd phi = state.phi_of(i);
    if (std::fwrite(phi.data(), sizeof(Complex), R, f.get()) != size_t(R))
      throw std::runtime_error("checkpoint write failed");
  }
  for (int i = 0; i < state.ncomp(); ++i) {
    if (std::fwrite(state.z[i].data(), sizeof(Complex), R, f.get()) != size_t(R))
      throw std::runtime_error("checkpoint write failed");
  }
  write_pod(f.get(), seed);
  write_pod(f.get(), state.step_count);
}

Checkpoint load_checkpoint(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint magic mismatch");
  uint16_t version = read_pod<uint16_t>(f.get());
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version");
  uint32_t d = read_pod<uint32_t>(f.get());
  uint32_t n = read_pod<uint32_t>(f.get());
  uint32_t K = read_pod<uint32_t>(f.get());
  uint32_t N = read_pod<uint32_t>(f.get());
  double m = read_pod<double>(f.get());
  double lambda = read_pod<double>(f.get());
  double t = read_pod<double>(f.get());
  Checkpoint cp;
  cp.grid = make_grid(int(d), int(n), int(K), m, lambda);
  cp.N = int(N);
  cp.t = t;
  int R = cp.grid->num_modes();
  cp.phi.assign(cp.N, ArrayXcd(R));
  cp.z.assign(cp.N, ArrayXcd(R));
  for (auto& arr : cp.phi)
    if (std::fread(arr.data(), sizeof(Complex), R, f.get()) != size_t(R))
      throw std::runtime_error("checkpoint truncated");
  for (auto& arr : cp.z)
    if (std::fread(arr.data(), sizeof(Complex), R, f.get()) != size_t(R))
      throw std::runtime_error("checkpoint truncated");
  cp.seed = read_pod<uint64_t>(f.get());
  cp.step_count = read_pod<uint64_t>(f.get());
  return cp;
}

EnsembleState state_from_checkpoint(const Checkpoint& cp, IntegratorMode mode,
                                    CountertermMode ct_mode) {
  EnsembleState state(cp.grid, cp.N, mode, ct_mode);
  state.t = cp.t;
  state.step_count = cp.step_count;
  for (int i = 0; i < cp.N; ++i) {
    state.z[i] = cp.z[i];
    if (mode == IntegratorMode::Direct)
      state.phi[i] = cp.phi[i];
    else
      state.y[i] = cp.phi[i] - cp.z[i];
  }
  return state;
}

}  // namespace sigmaflow

#pragma once

// Time integration of the N-component renormalized Langevin system.
//
// Direct integrator, per component and mode:
//   phi <- e^{-omega dt} phi + ((1-e^{-omega dt})/omega) drift_hat + eta,
// with eta the exact Ornstein-Uhlenbeck increment and the coupled free
// field Z advanced with the same eta. The drift is
//   drift_i = -(lambda/N) P_K[ s phi_i ] + c1 phi_i,
//   s(x) = sum_j phi_j(x)^2,  c1 = ((N+2)/N) lambda a - (3(N+2)/N^2) lambda^2 b,
// (b only in d = 3). The cubic product is evaluated pointwise on the n-grid
// and truncated once, which is exact for n >= 4K+2.
//
// Split integrator (Da Prato-Debussche cross-check): Phi = Z + Y with Y
// stored; Z advances first with the exact linear update, then Y advances by
// the deterministic exponential Euler step with the remainder drift
// evaluated at (Y_n, Z_{n+1}). The two integrators agree pathwise to O(dt).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigmaflow/lattice.hpp"
#include "sigmaflow/noise.hpp"
#include "sigmaflow/renorm.hpp"

namespace sigmaflow {

enum class InitScheme { StationaryFree, Zero, Warm };
enum class IntegratorMode { Direct, Split };
enum class CountertermMode { Exact, None, WrongNPlus3 };

struct BlowUpError : std::runtime_error {
  BlowUpError(uint64_t step, int component)
      : std::runtime_error("nonfinite field at step " + std::to_string(step) +
                           ", component " + std::to_string(component)),
        step(step),
        component(component) {}
  uint64_t step;
  int component;
};

class EnsembleState {
 public:
  EnsembleState(Grid grid, int N, IntegratorMode mode,
                CountertermMode ct_mode = CountertermMode::Exact);

  /// Draws the documented initial data. Component i uses stream
  /// (seed, member, i, FreeInit) for its free field, so the components are
  /// i.i.d. and exchangeable by construction.
  void initialize(InitScheme scheme, uint64_t seed, uint32_t member);

  const Grid& grid() const { return grid_; }
  int ncomp() const { return N_; }
  IntegratorMode mode() const { return mode_; }
  CountertermMode counterterm_mode() const { return ct_mode_; }
  const Counterterms& counterterms() const { return ct_; }

  /// Mass-shift coefficient actually applied in the drift (reflects the
  /// negative-control overrides).
  double cterm_coef() const { return c1_; }

  double t = 0.0;
  uint64_t step_count = 0;

  std::vector<ArrayXcd> z;
  std::vector<ArrayXcd> y;    // split mode only
  std::vector<ArrayXcd> phi;  // direct mode only

  /// Phi_i; in split mode derived as Z_i + Y_i.
  ArrayXcd phi_of(int i) const {
    return mode_ == IntegratorMode::Direct ? phi[i] : ArrayXcd(z[i] + y[i]);
  }

 private:
  Grid grid_;
  int N_;
  IntegratorMode mode_;
  CountertermMode ct_mode_;
  Counterterms ct_;
  double c1_;
};

/// The interacting drift for all components (spectral).
std::vector<ArrayXcd> drift_interacting(const EnsembleState& state);

/// The six-term remainder drift of the split decomposition, assembled
/// literally from the lattice Wick products (independent algebraic route;
/// equals drift_interacting at Phi = Z + Y up to rounding).
std::vector<ArrayXcd> drift_remainder(const EnsembleState& state);

/// Reusable stepper: precomputed symbols, per-worker scratch. Worker count
/// never changes results; the shared sum s(x) is reduced in fixed order.
class Stepper {
 public:
  Stepper(const EnsembleState& state, double dt, int workers);

  void advance(EnsembleState& state, const NoiseStream& base);

  /// Test hook: advance with explicit per-component noise increments.
  void advance_with_noise(EnsembleState& state,
                          const std::vector<ArrayXcd>& eta);

  double dt() const { return dt_; }

 private:
  void advance_impl(EnsembleState& state, const NoiseStream* base,
                    const std::vector<ArrayXcd>* eta_ext);

  double dt_;
  int workers_;
  ArrayXd decay_, phi1dt_, noise_var_;
  Eigen::ArrayXXd phys_;  // n^d x N, phi_j on the grid
  ArrayXd ssum_;
  std::vector<ArrayXcd> eta_scratch_, mode_scratch_;
  std::vector<ArrayXd> real_scratch_;
};

// ---- checkpoints -----------------------------------------------------------
// Binary layout (little-endian): magic "SGFL", version u16, d,n,K,N u32,
// m,lambda,t f64, then N x (retained-mode count) complex f64 for Phi then Z
// in mode-table order, then the stream counters (seed u64, step u64).

void save_checkpoint(const EnsembleState& state, uint64_t seed,
                     const std::string& path);

struct Checkpoint {
  Grid grid;
  int N;
  double t;
  uint64_t step_count;
  uint64_t seed;
  std::vector<ArrayXcd> phi, z;
};
Checkpoint load_checkpoint(const std::string& path);

/// Rebuilds an EnsembleState from a checkpoint under the requested
/// integrator mode (Y = Phi - Z in split mode).
EnsembleState state_from_checkpoint(const Checkpoint& cp, IntegratorMode mode,
                                    CountertermMode ct_mode);

}  // namespace sigmaflow

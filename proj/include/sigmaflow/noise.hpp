#pragma once

// Reproducible space-time white noise and the free (Ornstein-Uhlenbeck)
// field. Every Gaussian draw is a pure function of
// (master seed, member, component, purpose, step, block): a Philox4x64-10
// block cipher produces uniforms, the inverse normal CDF maps them to
// normals. No generator state exists, so any worker may evaluate any draw
// in any order and trajectories are bit-identical across thread counts.

#include <array>
#include <cstdint>

#include "sigmaflow/lattice.hpp"

namespace sigmaflow {

/// Keyed slots so distinct uses of the same (member, component, step) can
/// never collide. Values are part of the reproducibility contract.
enum class Purpose : uint32_t {
  FieldInit = 1,   // interacting-field initial draws
  FreeInit = 2,    // coupled free-field initial draws
  Dynamics = 3,    // per-step driving noise
  Reference = 4,   // exact GFF reference draws (estimators)
  Bootstrap = 5,   // resampling in the verdict machinery
};

/// Philox4x64-10 keyed block; exposed for tests.
std::array<uint64_t, 4> philox4x64(const std::array<uint64_t, 4>& counter,
                                   const std::array<uint64_t, 2>& key);

/// Wichura's PPND16 inverse normal CDF, |error| ~ 1e-16 for p in (0,1).
double inverse_normal_cdf(double p);

class NoiseStream {
 public:
  NoiseStream(uint64_t seed, uint32_t member, uint32_t component, Purpose purpose)
      : seed_(seed), member_(member), component_(component), purpose_(purpose) {}

  uint64_t seed() const { return seed_; }
  uint32_t member() const { return member_; }
  uint32_t component() const { return component_; }
  Purpose purpose() const { return purpose_; }

  NoiseStream with_component(uint32_t c) const {
    NoiseStream s = *this;
    s.component_ = c;
    return s;
  }
  NoiseStream with_purpose(Purpose p) const {
    NoiseStream s = *this;
    s.purpose_ = p;
    return s;
  }

  /// Test hook: a silenced stream draws exact zeros (deterministic part of
  /// an update only).
  NoiseStream silenced() const {
    NoiseStream s = *this;
    s.silent_ = true;
    return s;
  }
  bool silent() const { return silent_; }

  std::array<double, 4> normal_quad(uint64_t step, uint64_t block) const;

  /// Fills a Hermitian-symmetric spectral array with independent complex
  /// Gaussians, E|out(k)|^2 = variance[k] (zero mode real). Draws are
  /// consumed in the grid's canonical draw order.
  void fill_gaussian(const TorusGrid& g, const ArrayXd& variance,
                     uint64_t step, ArrayXcd& out) const;

 private:
  uint64_t seed_;
  uint32_t member_, component_;
  Purpose purpose_;
  bool silent_ = false;
};

/// One spectral white-noise increment: E|dW(k)|^2 = dt for every retained k.
ArrayXcd white_increment(const TorusGrid& g, double dt,
                         const NoiseStream& stream, uint64_t step);

/// Exact-in-law linear update per mode,
///   z(k) <- e^{-omega_k dt} z(k) + eta(k),  E|eta(k)|^2 = (1-e^{-2 omega_k dt})/(2 omega_k);
/// the marginal law is exact for the linear equation at any dt.
void ou_step(const TorusGrid& g, ArrayXcd& z, double dt,
             const NoiseStream& stream, uint64_t step);
Field ou_step(const Field& z, double dt, const NoiseStream& stream, uint64_t step);

/// One exact draw of the cutoff Gaussian free field,
/// E|z(k)|^2 = 1/(2(|k|^2+m)).
Field sample_stationary_z(const Grid& grid, const NoiseStream& stream,
                          uint64_t step = 0);
void sample_stationary_z(const TorusGrid& g, const NoiseStream& stream,
                         uint64_t step, ArrayXcd& out);

}  // namespace sigmaflow

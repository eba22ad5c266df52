#include "sigmaflow/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace sigmaflow {

namespace {

constexpr uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline uint64_t mulhi64(uint64_t a, uint64_t b) {
  return static_cast<uint64_t>((static_cast<__uint128_t>(a) * b) >> 64);
}

inline void philox_round(std::array<uint64_t, 4>& x,
                         const std::array<uint64_t, 2>& k) {
  uint64_t hi0 = mulhi64(kPhiloxM0, x[0]);
  uint64_t lo0 = kPhiloxM0 * x[0];
  uint64_t hi1 = mulhi64(kPhiloxM1, x[2]);
  uint64_t lo1 = kPhiloxM1 * x[2];
  x[0] = hi1 ^ x[1] ^ k[0];
  x[1] = lo1;
  x[2] = hi0 ^ x[3] ^ k[1];
  x[3] = lo0;
}

// strictly inside (0,1): max is (2^53-1+0.5)/2^53, min is 2^-54
inline double to_unit(uint64_t x) {
  return (x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

}  // namespace

std::array<uint64_t, 4> philox4x64(const std::array<uint64_t, 4>& counter,
                                   const std::array<uint64_t, 2>& key) {
  std::array<uint64_t, 4> x = counter;
  std::array<uint64_t, 2> k = key;
  for (int round = 0; round < 10; ++round) {
    philox_round(x, k);
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return x;
}

// PPND16 (Wichura, AS 241).
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("inverse_normal_cdf: p must be in (0,1)");
  static const double A[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2,
      1.9715909503065514427e3,  1.3731693765509461125e4,
      4.5921953931549871457e4,  6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double B[8] = {
      1.0,                      4.2313330701600911252e1,
      6.8718700749205790830e2,  5.3941960214247511077e3,
      2.1213794301586595867e4,  3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static const double C[8] = {
      1.42343711074968357734e0,  4.63033784615654529590e0,
      5.76949722146069140550e0,  3.64784832476320460504e0,
      1.27045825245236838258e0,  2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double D[8] = {
      1.0,                       2.05319162663775882187e0,
      1.67638483018380384940e0,  6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double E[8] = {
      6.65790464350110377720e0,  5.46378491116411436990e0,
      1.78482653991729133580e0,  2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double F[8] = {
      1.0,                       5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};
  auto ratpoly = [](const double* num, const double* den, double r) {
    double n = num[7], d = den[7];
    for (int i = 6; i >= 0; --i) {
      n = n * r + num[i];
      d = d * r + den[i];
    }
    return n / d;
  };
  double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q * ratpoly(A, B, r);
  }
  double r = (q < 0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0)
    val = ratpoly(C, D, r - 1.6);
  else
    val = ratpoly(E, F, r - 5.0);
  return (q < 0) ? -val : val;
}

std::array<double, 4> NoiseStream::normal_quad(uint64_t step, uint64_t block) const {
  if (silent_) return {0.0, 0.0, 0.0, 0.0};
  std::array<uint64_t, 4> ctr = {
      step, block, (uint64_t(member_) << 32) | component_,
      uint64_t(static_cast<uint32_t>(purpose_))};
  std::array<uint64_t, 2> key = {seed_, seed_ * kWeyl0 + kWeyl1};
  auto words = philox4x64(ctr, key);
  return {inverse_normal_cdf(to_unit(words[0])),
          inverse_normal_cdf(to_unit(words[1])),
          inverse_normal_cdf(to_unit(words[2])),
          inverse_normal_cdf(to_unit(words[3]))};
}

void NoiseStream::fill_gaussian(const TorusGrid& g, const ArrayXd& variance,
                                uint64_t step, ArrayXcd& out) const {
  out.setZero(g.num_modes());
  if (silent_) return;
  const auto& order = g.draw_order();
  std::array<double, 4> quad{};
  for (size_t o = 0; o < order.size(); ++o) {
    if (o % 2 == 0) quad = normal_quad(step, o / 2);
    const double* n2 = quad.data() + 2 * (o % 2);
    int idx = order[o];
    double v = variance[idx];
    if (g.is_self_conjugate(idx)) {
      out[idx] = Complex(n2[0] * std::sqrt(v), 0.0);
    } else {
      double s = std::sqrt(0.5 * v);
      out[idx] = Complex(n2[0] * s, n2[1] * s);
      out[g.conjugate_index(idx)] = std::conj(out[idx]);
    }
  }
}

ArrayXcd white_increment(const TorusGrid& g, double dt,
                         const NoiseStream& stream, uint64_t step) {
  if (!(dt > 0)) throw std::invalid_argument("white_increment: dt must be > 0");
  ArrayXcd out;
  ArrayXd variance = ArrayXd::Constant(g.num_modes(), dt);
  stream.fill_gaussian(g, variance, step, out);
  return out;
}

void ou_step(const TorusGrid& g, ArrayXcd& z, double dt,
             const NoiseStream& stream, uint64_t step) {
  if (!(dt > 0)) throw std::invalid_argument("ou_step: dt must be > 0");
  ArrayXd omega = g.omegas();
  ArrayXd variance = (1.0 - (-2.0 * dt * omega).exp()) / (2.0 * omega);
  ArrayXcd eta;
  stream.fill_gaussian(g, variance, step, eta);
  z = (-dt * omega).exp() * z + eta;
}

Field ou_step(const Field& z, double dt, const NoiseStream& stream, uint64_t step) {
  Field out = z;
  ou_step(*z.grid(), out.modes(), dt, stream, step);
  return out;
}

void sample_stationary_z(const TorusGrid& g, const NoiseStream& stream,
                         uint64_t step, ArrayXcd& out) {
  ArrayXd variance = 1.0 / (2.0 * g.omegas());
  stream.fill_gaussian(g, variance, step, out);
}

Field sample_stationary_z(const Grid& grid, const NoiseStream& stream, uint64_t step) {
  Field f(grid);
  sample_stationary_z(*grid, stream, step, f.modes());
  return f;
}

}  // namespace sigmaflow

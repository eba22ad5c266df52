#include "sigmaflow/meanfield.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

#include "sigmaflow/stats.hpp"

namespace sigmaflow {

McKeanEnsemble::McKeanEnsemble(Grid grid, int M, bool homogeneity,
                               bool renormalized)
    : grid_(std::move(grid)),
      M_(M),
      homogeneity_(homogeneity),
      renormalized_(renormalized) {
  if (M < 2) throw std::invalid_argument("McKeanEnsemble: M must be >= 2");
  psi.assign(M_, ArrayXcd::Zero(grid_->num_modes()));
  z.assign(M_, ArrayXcd::Zero(grid_->num_modes()));
}

void McKeanEnsemble::initialize(uint64_t seed, uint32_t member) {
  for (int m = 0; m < M_; ++m) {
    NoiseStream s(seed, member, uint32_t(m), Purpose::FreeInit);
    sample_stationary_z(*grid_, s, 0, z[m]);
    psi[m] = z[m];
  }
  t = 0.0;
  step_count = 0;
}

ArrayXd estimate_law_coefficient(const McKeanEnsemble& ens) {
  const TorusGrid& g = *ens.grid();
  ArrayXd mu = ArrayXd::Zero(g.num_points());
  ArrayXd buf(g.num_points());
  for (int m = 0; m < ens.ncopies(); ++m) {
    to_physical(g, ens.psi[m], buf);
    mu += buf.square();
    if (ens.renormalized()) {
      to_physical(g, ens.z[m], buf);
      mu -= buf.square();
    }
  }
  mu /= ens.ncopies();
  if (ens.homogeneity()) mu.setConstant(mu.mean());
  return mu;
}

McKeanStepper::McKeanStepper(const McKeanEnsemble& ens, double dt, int workers)
    : dt_(dt), workers_(workers < 1 ? 1 : workers) {
  if (!(dt > 0)) throw std::invalid_argument("McKeanStepper: dt must be > 0");
  const TorusGrid& g = *ens.grid();
  ArrayXd omega = g.omegas();
  decay_ = (-dt * omega).exp();
  phi1dt_ = (1.0 - decay_) / omega;
  noise_var_ = (1.0 - (-2.0 * dt * omega).exp()) / (2.0 * omega);
  eta_scratch_.assign(workers_, ArrayXcd(g.num_modes()));
  mode_scratch_.assign(workers_, ArrayXcd(g.num_modes()));
  real_scratch_.assign(workers_, ArrayXd(g.num_points()));
}

void McKeanStepper::advance(McKeanEnsemble& ens, const NoiseStream& base) {
  advance_impl(ens, estimate_law_coefficient(ens), base);
}

void McKeanStepper::advance_with_mu(McKeanEnsemble& ens, const ArrayXd& mu,
                                    const NoiseStream& base) {
  advance_impl(ens, mu, base);
}

void McKeanStepper::advance_impl(McKeanEnsemble& ens, const ArrayXd& mu,
                                 const NoiseStream& base) {
  const TorusGrid& g = *ens.grid();
  int M = ens.ncopies();
  double lam = g.coupling();
  uint64_t step = ens.step_count;
  int blown = -1;

#pragma omp parallel for schedule(static) num_threads(workers_)
  for (int m = 0; m < M; ++m) {
    int w = omp_get_thread_num();
    base.with_component(uint32_t(m)).fill_gaussian(g, noise_var_, step,
                                                   eta_scratch_[w]);
    if (lam == 0.0) {
      ens.psi[m] = decay_ * ens.psi[m] + eta_scratch_[w];
    } else {
      to_physical_raw(g, ens.psi[m], real_scratch_[w].data());
      real_scratch_[w] *= mu;
      to_spectral(g, real_scratch_[w], mode_scratch_[w]);
      ens.psi[m] =
          decay_ * ens.psi[m] - lam * phi1dt_ * mode_scratch_[w] + eta_scratch_[w];
    }
    ens.z[m] = decay_ * ens.z[m] + eta_scratch_[w];
    if (!ens.psi[m].allFinite()) blown = m;
  }
  ens.step_count = step + 1;
  ens.t += dt_;
  if (blown >= 0) throw BlowUpError(ens.step_count, blown);
}

Meanfield1dResult solve_1d_meanfield(const Meanfield1dConfig& cfg) {
  if (cfg.grid->dim() != 1)
    throw std::invalid_argument("solve_1d_meanfield: d must be 1");
  McKeanEnsemble ens(cfg.grid, cfg.M, /*homogeneity=*/true,
                     /*renormalized=*/false);
  ens.initialize(cfg.seed, cfg.member);
  McKeanStepper stepper(ens, cfg.dt, cfg.workers);
  NoiseStream base(cfg.seed, cfg.member, 0, Purpose::Dynamics);

  Meanfield1dResult out;
  std::vector<double> window;
  for (uint64_t s = 0; s < cfg.steps; ++s) {
    stepper.advance(ens, base);
    if (s % cfg.thin == 0) {
      // record pre-projection spatial statistics
      McKeanEnsemble raw(cfg.grid, cfg.M, /*homogeneity=*/false, false);
      raw.psi = ens.psi;
      raw.z = ens.z;
      ArrayXd mu = estimate_law_coefficient(raw);
      double mean = mu.mean();
      double sd = std::sqrt((mu - mean).square().mean());
      out.records.push_back({ens.t, mean, sd});
      if (s >= cfg.burnin) window.push_back(mean);
    }
  }
  ScalarStat stat = batch_means(window, cfg.batches);
  out.mu_timeavg = stat.mean;
  out.mu_se = stat.se;
  return out;
}

CouplingResult coupling_experiment(const CouplingConfig& cfg) {
  EnsembleState sys(cfg.grid, cfg.N, IntegratorMode::Direct);
  sys.initialize(InitScheme::StationaryFree, cfg.seed, cfg.member);
  McKeanEnsemble mf(cfg.grid, cfg.M, /*homogeneity=*/true, /*renormalized=*/true);
  mf.initialize(cfg.seed, cfg.member);

  int pairs = std::min(cfg.N, cfg.M);
  // identical initial draws for the coupled pairs by stream construction
  for (int i = 0; i < pairs; ++i) {
    if ((sys.phi[i] != mf.psi[i]).any())
      throw std::logic_error("coupling_experiment: initial draws diverge");
  }

  Stepper sys_stepper(sys, cfg.dt, cfg.workers);
  McKeanStepper mf_stepper(mf, cfg.dt, cfg.workers);
  NoiseStream base(cfg.seed, cfg.member, 0, Purpose::Dynamics);

  double sup1 = 0, acc1 = 0, supm = 0, accm = 0;
  size_t nrec = 0;
  for (uint64_t s = 0; s < cfg.steps; ++s) {
    sys_stepper.advance(sys, base);
    mf_stepper.advance(mf, base);
    if (s % cfg.thin == 0) {
      double pairsum = 0;
      double d1 = 0;
      for (int i = 0; i < pairs; ++i) {
        double d = std::pow(
            sobolev_norm(*cfg.grid, ArrayXcd(sys.phi[i] - mf.psi[i]), 0.0), 2);
        pairsum += d;
        if (i == 0) d1 = d;
      }
      pairsum /= pairs;
      sup1 = std::max(sup1, d1);
      acc1 += d1;
      supm = std::max(supm, pairsum);
      accm += pairsum;
      ++nrec;
    }
  }
  return CouplingResult{sup1, acc1 / nrec, supm, accm / nrec};
}

}  // namespace sigmaflow

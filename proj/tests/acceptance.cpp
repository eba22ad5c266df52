// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line. Tolerances and thresholds are pinned here, in code.
// Budgeted for a small machine (2 cores): the full suite runs in well under
// an hour.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sigmaflow/convergence.hpp"
#include "sigmaflow/harness/experiments.hpp"
#include "sigmaflow/meanfield.hpp"
#include "sigmaflow/observables.hpp"

using namespace sigmaflow;

namespace {

std::string outdir(const std::string& tag) {
  std::string d = "/tmp/sigmaflow_accept/" + tag;
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

void report(int idx, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[ACCEPT] C%d %s: %s (%s)\n", idx, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

RunConfig cfg_from(std::vector<std::string> kv) {
  return load_config("", kv);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

char buf[512];

}  // namespace

TEST_CASE("criterion 1: free-field exactness") {
  RunConfig cfg = cfg_from({"experiment=free-check", "--d=2", "--n=32", "--K=7",
                            "--m=1", "--lambda=0", "--N=1", "--dt=0.005",
                            "--steps=104000", "--burnin=4000", "--batches=25",
                            "--seed=3", "--workers=2",
                            "--out=" + outdir("c1")});
  ExperimentResult res = run_free_check(cfg);
  std::snprintf(buf, sizeof buf, "max|z|=%.2f over 225 modes, bitwise=%s",
                res.verdict["max_abs_z"].get<double>(),
                res.verdict["phi_equals_z_bitwise"].get<bool>() ? "yes" : "no");
  report(1, "free-field exactness", res.pass, buf);
  CHECK(res.pass);
}

TEST_CASE("criterion 2: mu fixed points") {
  RunConfig solver = cfg_from({"experiment=mu-solver", "--d=1", "--n=16",
                               "--K=3", "--m=1", "--out=" + outdir("c2a")});
  ExperimentResult rs = run_mu_solver(solver);

  RunConfig mf = cfg_from({"experiment=meanfield-1d", "--d=1", "--n=130",
                           "--K=32", "--m=1", "--lambda=1", "--M=256",
                           "--dt=0.002", "--steps=55000", "--burnin=5000",
                           "--thin=10", "--seed=4", "--workers=2",
                           "--out=" + outdir("c2b")});
  ExperimentResult rm = run_meanfield_1d(mf);

  bool pass = rs.pass && rm.pass;
  std::snprintf(buf, sizeof buf,
                "matrix max|mu*|=%.1e, analytic=%.6f, sim=%.4f+-%.4f "
                "(trunc bias %.4f)",
                rs.verdict["matrix_max_abs_mu"].get<double>(),
                rs.verdict["mu_analytic_m1"].get<double>(),
                rm.verdict["mu_sim"].get<double>(),
                rm.verdict["mu_se"].get<double>(),
                rm.verdict["truncation_bias"].get<double>());
  report(2, "mu fixed points", pass, buf);
  CHECK(rs.pass);
  CHECK(rm.pass);
}

TEST_CASE("criterion 3: mean-field coupling decay") {
  RunConfig cfg = cfg_from({"experiment=coupling", "--d=2", "--n=24", "--K=5",
                            "--m=2", "--lambda=1", "--dt=0.002", "--steps=1000",
                            "--thin=10", "--replicas=8", "--n_list=4,16,64,256",
                            "--seed=7", "--workers=2",
                            "--out=" + outdir("c3")});
  ExperimentResult res = run_coupling(cfg);
  std::snprintf(buf, sizeof buf, "slope=%.3f ci=[%.3f,%.3f], monotone=%s",
                res.verdict["study"]["slope"].get<double>(),
                res.verdict["study"]["slope_ci"][0].get<double>(),
                res.verdict["study"]["slope_ci"][1].get<double>(),
                res.verdict["monotone_decreasing"].get<bool>() ? "yes" : "no");
  report(3, "mean-field coupling decay", res.pass, buf);
  CHECK(res.pass);
}

TEST_CASE("criterion 4: GFF convergence of the invariant marginals") {
  RunConfig cfg = cfg_from({"experiment=gff-convergence", "--d=2", "--n=16",
                            "--K=3", "--m=5", "--lambda=1", "--dt=0.002",
                            "--steps=22500", "--burnin=2500", "--thin=20",
                            "--replicas=4", "--n_list=4,16,64,256", "--seed=7",
                            "--workers=2", "--out=" + outdir("c4")});
  ExperimentResult res = run_gff_convergence(cfg);
  std::snprintf(buf, sizeof buf,
                "h1 slope=%.3f, cov slope=%.3f, control dist %.2e vs %.2e",
                res.verdict["h1_study"]["slope"].get<double>(),
                res.verdict["cov_study"]["slope"].get<double>(),
                res.verdict["control_covdist"].get<double>(),
                res.verdict["renormalized_covdist_at_nmax"].get<double>());
  report(4, "GFF convergence", res.pass, buf);
  CHECK(res.pass);
}

TEST_CASE("criteria 5 and 6: bubble formula and the quartic limit") {
  RunConfig cfg = cfg_from({"experiment=bubble-validation", "--d=2", "--n=24",
                            "--K=5", "--m=5", "--lambda=1", "--dt=0.002",
                            "--steps=200000", "--burnin=4000", "--thin=100",
                            "--n_list=64,256", "--batches=32", "--seed=7",
                            "--workers=2", "--out=" + outdir("c5")});
  ExperimentResult res = run_bubble_validation(cfg);

  bool c5 = res.verdict["frac_within_3"][1].get<double>() >= 0.95 &&
            res.verdict["resid_shrinks"].get<bool>() &&
            res.verdict["free_baseline_pass"].get<bool>() &&
            res.verdict["control_none_fails"].get<bool>() &&
            res.verdict["control_wrong_fails"].get<bool>();
  std::snprintf(buf, sizeof buf,
                "N=256: %.1f%% modes |z|<=3, resid %.3e -> %.3e, free ok=%s, "
                "controls fail=%s/%s",
                100 * res.verdict["frac_within_3"][1].get<double>(),
                res.verdict["resid_norm"][0].get<double>(),
                res.verdict["resid_norm"][1].get<double>(),
                res.verdict["free_baseline_pass"].get<bool>() ? "yes" : "no",
                res.verdict["control_none_fails"].get<bool>() ? "yes" : "no",
                res.verdict["control_wrong_fails"].get<bool>() ? "yes" : "no");
  report(5, "bubble two-point formula", c5, buf);

  bool c6 = std::abs(res.verdict["obs4"]["z_hi"].get<double>()) <= 3.0 &&
            res.verdict["obs4"]["gap_shrinks"].get<bool>() &&
            std::abs(res.verdict["free_obs4_z"].get<double>()) <= 3.0;
  std::snprintf(buf, sizeof buf,
                "E[O4]: z=%.2f vs limit %.4f, gap %.3f -> %.3f, free z=%.2f",
                res.verdict["obs4"]["z_hi"].get<double>(),
                res.verdict["obs4"]["ref"].get<double>(),
                res.verdict["obs4"]["gap_lo"].get<double>(),
                res.verdict["obs4"]["gap_hi"].get<double>(),
                res.verdict["free_obs4_z"].get<double>());
  report(6, "quartic observable limit", c6, buf);
  CHECK(c5);
  CHECK(c6);
  CHECK(res.pass);
}

TEST_CASE("criterion 7: Dyson-Schwinger residuals") {
  RunConfig cfg = cfg_from({"experiment=ds-check", "--d=2", "--n=16", "--K=3",
                            "--m=1", "--lambda=1", "--N=8", "--dt=0.004",
                            "--steps=60000", "--burnin=3000", "--thin=25",
                            "--dt_halving=true", "--seed=21", "--workers=2",
                            "--out=" + outdir("c7")});
  ExperimentResult res = run_ds_check(cfg);
  double max_gauss = 0, max_extrap = 0;
  int n_gauss = 0, n_extrap = 0;
  for (const auto& r : res.verdict["residuals"]) {
    double z = std::abs(r["z"].get<double>());
    if (r["kind"] == "gaussian") {
      max_gauss = std::max(max_gauss, z);
      ++n_gauss;
    } else if (r["kind"] == "extrapolated") {
      max_extrap = std::max(max_extrap, z);
      ++n_extrap;
    }
  }
  std::snprintf(buf, sizeof buf,
                "gaussian battery (%d): max|z|=%.2f; interacting "
                "extrapolated (%d): max|z|=%.2f",
                n_gauss, max_gauss, n_extrap, max_extrap);
  report(7, "Dyson-Schwinger residuals", res.pass, buf);
  CHECK(n_gauss >= 5);
  CHECK(res.pass);
}

TEST_CASE("criterion 8: infrastructure properties") {
  bool pass = true;
  std::string detail;

  // bit-identical reruns across 1, 4 and 8 workers
  {
    auto run_csv = [&](int workers, const std::string& tag) {
      RunConfig cfg = cfg_from(
          {"experiment=dynamics", "--d=2", "--n=24", "--K=5", "--m=1",
           "--lambda=1", "--N=8", "--dt=0.002", "--steps=200", "--thin=20",
           "--seed=99", "--workers=" + std::to_string(workers),
           "--out=" + outdir(tag)});
      run_dynamics(cfg);
      return slurp(cfg.out + "/records.csv");
    };
    std::string w1 = run_csv(1, "c8w1");
    std::string w4 = run_csv(4, "c8w4");
    std::string w8 = run_csv(8, "c8w8");
    bool ok = (w1 == w4) && (w1 == w8);
    pass = pass && ok;
    detail += std::string("workers 1/4/8 ") + (ok ? "identical" : "DIFFER");
  }

  // checkpoint/resume identity
  {
    std::string full = outdir("c8full"), half = outdir("c8half"),
                resumed = outdir("c8res");
    std::vector<std::string> base = {"experiment=dynamics", "--d=2", "--n=24",
                                     "--K=5",  "--m=1",     "--lambda=1",
                                     "--N=4",  "--dt=0.002", "--thin=10",
                                     "--seed=31"};
    auto with = [&](std::vector<std::string> extra) {
      auto v = base;
      v.insert(v.end(), extra.begin(), extra.end());
      return cfg_from(v);
    };
    run_dynamics(with({"--steps=200", "--out=" + full}));
    run_dynamics(with({"--steps=100", "--out=" + half}));
    run_dynamics(with({"--steps=100", "--out=" + resumed, "--init=warm",
                       "--resume=" + half + "/checkpoint_final.bin"}));
    bool ok = slurp(full + "/checkpoint_final.bin") ==
              slurp(resumed + "/checkpoint_final.bin");
    pass = pass && ok;
    detail += std::string(", resume ") + (ok ? "identical" : "DIFFERS");
  }

  // dealiased product equals brute-force convolution on all small grids
  {
    bool ok = true;
    for (int d : {1, 2}) {
      for (int n = 6; n <= 16; n += 2) {
        for (int K = 1; 4 * K + 2 <= n; ++K) {
          Grid g = make_grid(d, n, K, 1.1, 0.0);
          NoiseStream s(5, 0, 0, Purpose::Reference);
          Field f = sample_stationary_z(g, s, 1);
          Field h = sample_stationary_z(g, s.with_component(1), 2);
          Field p = dealiased_product(f, h);
          for (int ik = 0; ik < g->num_modes() && ok; ++ik) {
            auto k = g->modes()[ik];
            Complex acc = 0;
            for (int ij = 0; ij < g->num_modes(); ++ij) {
              auto j = g->modes()[ij];
              std::array<int, 3> diff = {k[0] - j[0], k[1] - j[1], k[2] - j[2]};
              bool in = true;
              for (int dim = 0; dim < 3; ++dim)
                if (std::abs(diff[dim]) > g->cutoff()) in = false;
              if (in) acc += f.modes()[ij] * h.modes()[g->mode_index(diff)];
            }
            if (std::abs(p.modes()[ik] - acc) > 1e-12) ok = false;
          }
        }
      }
    }
    pass = pass && ok;
    detail += std::string(", dealiasing ") + (ok ? "exact" : "WRONG");
  }

  // O(N)-rotation equivariance of the drift to 1e-10
  {
    Grid g = make_grid(2, 24, 5, 1.0, 1.0);
    int N = 6;
    EnsembleState st(g, N, IntegratorMode::Direct);
    st.initialize(InitScheme::StationaryFree, 17, 0);
    auto drift = drift_interacting(st);
    double th = 0.37;
    EnsembleState rot(g, N, IntegratorMode::Direct);
    for (int i = 0; i < N; ++i) rot.phi[i] = st.phi[i];
    rot.phi[2] = std::cos(th) * st.phi[2] - std::sin(th) * st.phi[4];
    rot.phi[4] = std::sin(th) * st.phi[2] + std::cos(th) * st.phi[4];
    auto drift_r = drift_interacting(rot);
    double err = 0;
    err = std::max(err, (drift_r[2] - (std::cos(th) * drift[2] -
                                       std::sin(th) * drift[4]))
                            .abs()
                            .maxCoeff());
    err = std::max(err, (drift_r[4] - (std::sin(th) * drift[2] +
                                       std::cos(th) * drift[4]))
                            .abs()
                            .maxCoeff());
    for (int i : {0, 1, 3, 5})
      err = std::max(err, (drift_r[i] - drift[i]).abs().maxCoeff());
    bool ok = err <= 1e-10;
    pass = pass && ok;
    char t[64];
    std::snprintf(t, sizeof t, ", equivariance err=%.1e", err);
    detail += t;
  }

  report(8, "infrastructure properties", pass, detail);
  CHECK(pass);
}

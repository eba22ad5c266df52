#include <CLI11.hpp>

#include <cstdio>
#include <exception>

#include "sigmaflow/harness/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "sigmaflow: pseudo-spectral simulator and validator for the coupled "
      "N-component Langevin dynamics on the torus"};
  app.allow_extras();  // --key=value config overrides

  std::string experiment, config_path;
  app.add_option("experiment", experiment, "experiment name")->required();
  app.add_option("--config", config_path, "key=value config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    std::vector<std::string> overrides = app.remaining();
    overrides.push_back("experiment=" + experiment);
    sigmaflow::RunConfig cfg = sigmaflow::load_config(config_path, overrides);
    sigmaflow::ExperimentResult res = sigmaflow::run_experiment(cfg);
    std::printf("%s: %s (out: %s)\n", cfg.experiment.c_str(),
                res.pass ? "PASS" : "FAIL", cfg.out.c_str());
    return res.exit_code;
  } catch (const sigmaflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

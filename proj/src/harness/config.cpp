#include "sigmaflow/harness/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sigmaflow {

const std::vector<std::string>& known_experiments() {
  static const std::vector<std::string> names = {
      "free-check",  "dynamics",          "meanfield-1d", "meanfield-2d",
      "coupling",    "gff-convergence",   "bubble-validation",
      "eo4",         "ds-check",          "mu-solver"};
  return names;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  size_t b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_num(const std::string& key, const std::string& v) {
  std::istringstream iss(v);
  T out;
  iss >> out;
  if (iss.fail() || !iss.eof())
    throw ConfigError("key '" + key + "': cannot parse '" + v + "'");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_num<int>(key, trim(item)));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "experiment") cfg.experiment = value;
  else if (key == "d") cfg.d = parse_num<int>(key, value);
  else if (key == "n") cfg.n = parse_num<int>(key, value);
  else if (key == "K") cfg.K = parse_num<int>(key, value);
  else if (key == "m") cfg.m = parse_num<double>(key, value);
  else if (key == "lambda") cfg.lambda = parse_num<double>(key, value);
  else if (key == "N") cfg.N = parse_num<int>(key, value);
  else if (key == "M") cfg.M = parse_num<int>(key, value);
  else if (key == "replicas") cfg.replicas = parse_num<int>(key, value);
  else if (key == "n_list") cfg.n_list = parse_int_list(key, value);
  else if (key == "dt") cfg.dt = parse_num<double>(key, value);
  else if (key == "steps") cfg.steps = parse_num<uint64_t>(key, value);
  else if (key == "burnin") cfg.burnin = parse_num<uint64_t>(key, value);
  else if (key == "thin") cfg.thin = parse_num<uint64_t>(key, value);
  else if (key == "seed") cfg.seed = parse_num<uint64_t>(key, value);
  else if (key == "out") cfg.out = value;
  else if (key == "workers") cfg.workers = parse_num<int>(key, value);
  else if (key == "checkpoint_every") cfg.checkpoint_every = parse_num<uint64_t>(key, value);
  else if (key == "resume") cfg.resume = value;
  else if (key == "init") cfg.init = value;
  else if (key == "homogeneity") cfg.homogeneity = parse_bool(key, value);
  else if (key == "dpd") cfg.dpd = parse_bool(key, value);
  else if (key == "counterterm") cfg.counterterm = value;
  else if (key == "dt_halving") cfg.dt_halving = parse_bool(key, value);
  else if (key == "batches") cfg.batches = parse_num<int>(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

Grid RunConfig::make_grid_checked() const {
  return make_grid(d, n, K, m, lambda);
}

InitScheme RunConfig::init_scheme() const {
  if (init == "stationary-free") return InitScheme::StationaryFree;
  if (init == "zero") return InitScheme::Zero;
  if (init == "warm") return InitScheme::Warm;
  throw ConfigError("key 'init': expected stationary-free|zero|warm, got '" + init + "'");
}

CountertermMode RunConfig::ct_mode() const {
  if (counterterm == "exact") return CountertermMode::Exact;
  if (counterterm == "none") return CountertermMode::None;
  if (counterterm == "wrong-n-plus-3") return CountertermMode::WrongNPlus3;
  throw ConfigError("key 'counterterm': expected exact|none|wrong-n-plus-3, got '" +
                    counterterm + "'");
}

void validate_config(const RunConfig& cfg) {
  const auto& names = known_experiments();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end())
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");

  if (cfg.d < 1 || cfg.d > 3) throw ConfigError("invariant violated: d in {1,2,3}");
  if (cfg.n < 2 || cfg.n % 2 != 0) throw ConfigError("invariant violated: n even and >= 2");
  if (cfg.K < 1 || cfg.K > cfg.n / 2 - 1)
    throw ConfigError("invariant violated: 1 <= K <= n/2 - 1");
  if (!(cfg.m > 0)) throw ConfigError("invariant violated: m > 0");
  if (cfg.lambda < 0) throw ConfigError("invariant violated: lambda >= 0");
  if (cfg.lambda > 0 && cfg.n < 4 * cfg.K + 2)
    throw ConfigError(
        "invariant violated: runs with cubic drift need n >= 4K+2 "
        "(alias-free cubic products); got n=" + std::to_string(cfg.n) +
        ", 4K+2=" + std::to_string(4 * cfg.K + 2));
  if (!(cfg.dt > 0)) throw ConfigError("invariant violated: dt > 0");
  if (cfg.thin < 1) throw ConfigError("invariant violated: thin >= 1");
  if (cfg.N < 1) throw ConfigError("invariant violated: N >= 1");
  if (cfg.replicas < 1) throw ConfigError("invariant violated: replicas >= 1");
  if (cfg.workers < 1) throw ConfigError("invariant violated: workers >= 1");
  if (cfg.batches < 2) throw ConfigError("invariant violated: batches >= 2");

  if ((cfg.experiment == "meanfield-1d") && cfg.d != 1)
    throw ConfigError("experiment meanfield-1d requires d = 1");
  if ((cfg.experiment == "meanfield-2d" || cfg.experiment == "coupling" ||
       cfg.experiment == "gff-convergence" ||
       cfg.experiment == "bubble-validation" || cfg.experiment == "eo4") &&
      cfg.d != 2)
    throw ConfigError("experiment " + cfg.experiment + " requires d = 2");
  if (cfg.experiment.rfind("meanfield", 0) == 0 && cfg.M < 2)
    throw ConfigError("invariant violated: mean-field ensembles need M >= 2");
  if (cfg.experiment == "coupling" && cfg.M < 2)
    throw ConfigError("invariant violated: coupling needs M >= 2");
  if (cfg.experiment == "coupling" || cfg.experiment == "gff-convergence") {
    if (cfg.n_list.size() < 3)
      throw ConfigError("invariant violated: scaling studies need >= 3 n_list points");
    for (size_t i = 1; i < cfg.n_list.size(); ++i)
      if (cfg.n_list[i] <= cfg.n_list[i - 1])
        throw ConfigError("invariant violated: n_list strictly increasing");
  }
  if (cfg.init != "stationary-free" && cfg.init != "zero" && cfg.init != "warm")
    throw ConfigError("key 'init': expected stationary-free|zero|warm");
  if (cfg.init == "warm" && cfg.resume.empty())
    throw ConfigError("init=warm requires resume=<checkpoint path>");
  (void)RunConfig(cfg).ct_mode();  // validates the counterterm string
}

RunConfig load_config(const std::string& path,
                      const std::vector<std::string>& overrides) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[' && t.back() == ']') continue;  // cosmetic section
      size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) +
                          ": expected key = value");
      apply(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
  }
  for (const auto& ov : overrides) {
    std::string t = ov;
    if (t.rfind("--", 0) == 0) t = t.substr(2);
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + ov + "': expected --key=value");
    apply(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  if (cfg.out.empty()) {
    const char* env = std::getenv("SIGMAFLOW_OUTDIR");
    cfg.out = env ? env : "out";
  }
  validate_config(cfg);
  return cfg;
}

std::vector<std::pair<std::string, std::string>> RunConfig::canonical() const {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::vector<std::pair<std::string, std::string>> kv = {
      {"experiment", experiment},
      {"d", std::to_string(d)},
      {"n", std::to_string(n)},
      {"K", std::to_string(K)},
      {"m", num(m)},
      {"lambda", num(lambda)},
      {"N", std::to_string(N)},
      {"M", std::to_string(M)},
      {"replicas", std::to_string(replicas)},
      {"dt", num(dt)},
      {"steps", std::to_string(steps)},
      {"burnin", std::to_string(burnin)},
      {"thin", std::to_string(thin)},
      {"seed", std::to_string(seed)},
      {"checkpoint_every", std::to_string(checkpoint_every)},
      {"init", init},
      {"homogeneity", homogeneity ? "true" : "false"},
      {"dpd", dpd ? "true" : "false"},
      {"counterterm", counterterm},
      {"dt_halving", dt_halving ? "true" : "false"},
      {"batches", std::to_string(batches)},
  };
  std::string list;
  for (size_t i = 0; i < n_list.size(); ++i)
    list += (i ? "," : "") + std::to_string(n_list[i]);
  kv.emplace_back("n_list", list);
  std::sort(kv.begin(), kv.end());
  return kv;
}

uint64_t RunConfig::config_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto eat = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : canonical()) {
    eat(k);
    eat("=");
    eat(v);
    eat("\n");
  }
  return h;
}

}  // namespace sigmaflow

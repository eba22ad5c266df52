#include "sigmaflow/harness/records.hpp"

#include <filesystem>
#include <fstream>

#include "sigmaflow/renorm.hpp"

namespace sigmaflow {

CsvWriter::CsvWriter(const std::string& path, const std::string& header) {
  f_ = std::fopen(path.c_str(), "w");
  if (!f_) throw std::runtime_error("cannot open " + path);
  std::fprintf(f_, "%s\n", header.c_str());
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::row(std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    std::fprintf(f_, first ? "%.17g" : ",%.17g", v);
    first = false;
  }
  std::fputc('\n', f_);
}

void CsvWriter::raw(const std::string& line) {
  std::fprintf(f_, "%s\n", line.c_str());
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunPaths prepare_output(const RunConfig& cfg) {
  RunPaths paths{cfg.out};
  std::filesystem::create_directories(paths.dir);

  nlohmann::json j;
  for (const auto& [k, v] : cfg.canonical()) j["config"][k] = v;
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(cfg.config_hash()));
  j["config_hash"] = hash;
  j["seed"] = cfg.seed;

  Grid grid = cfg.make_grid_checked();
  Counterterms ct = make_counterterms(grid);
  j["constants"]["a"] = ct.a;
  j["constants"]["b"] = ct.b;
  j["constants"]["K"] = cfg.K;
  j["constants"]["m"] = cfg.m;

  write_json(paths.file("config.json"), j);
  return paths;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

void write_meta(const RunPaths& paths, double wall_seconds,
                const nlohmann::json& extra) {
  nlohmann::json j = extra;
  j["wall_seconds"] = wall_seconds;
  write_json(paths.file("meta.json"), j);
}

}  // namespace sigmaflow

#pragma once

// Artifact plumbing: CSV data files with stable schemas, JSON config echo
// and verdicts, and the wall-clock sidecar kept out of the reproducible
// files.

#include <cstdio>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigmaflow/harness/config.hpp"

namespace sigmaflow {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;

  void row(std::initializer_list<double> values);
  void raw(const std::string& line);

 private:
  std::FILE* f_;
};

struct RunPaths {
  std::string dir;
  std::string file(const std::string& name) const { return dir + "/" + name; }
};

/// Creates the output directory, echoes the effective config (with hash and
/// renormalization constants) to config.json, and returns the paths.
RunPaths prepare_output(const RunConfig& cfg);

void write_json(const std::string& path, const nlohmann::json& j);

/// Wall-clock and similar nonreproducible metadata; separate sidecar so the
/// data files stay byte-stable across reruns.
void write_meta(const RunPaths& paths, double wall_seconds,
                const nlohmann::json& extra = {});

std::string format_g17(double v);

}  // namespace sigmaflow

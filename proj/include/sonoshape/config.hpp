#pragma once

#include <map>
#include <string>
#include <vector>

#include "sonoshape/optimize.hpp"
#include "sonoshape/problem.hpp"

namespace sonoshape {

// Sectioned key/value configuration ([section] headers, key = value lines,
// '#' comments). All physical quantities in SI units.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

  const std::string& raw_text() const { return raw_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::string raw_;
  std::string origin_;
};

struct OutputOptions {
  int snapshot_every = 0;  // 0 disables VTK snapshots
  Vec2 probe{0.0, 0.0};
};

// Builders from a parsed config.
MeshSpec mesh_spec_from_config(const Config& cfg);
ModelParams params_from_config(const Config& cfg);
BoundaryExcitation excitation_from_config(const Config& cfg);
CostFunctionalSpec cost_from_config(const Config& cfg, const Mesh& mesh, double T, int steps);
ProblemSetup problem_from_config(const Config& cfg);
OptimizationOptions optimization_from_config(const Config& cfg);
OutputOptions output_from_config(const Config& cfg);
DeformationField taylor_field_from_config(const Config& cfg, const Mesh& mesh);
std::vector<double> taylor_d_values_from_config(const Config& cfg);

}  // namespace sonoshape

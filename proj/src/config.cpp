#include "sonoshape/config.hpp"

#include <fstream>
#include <sstream>

#include "sonoshape/errors.hpp"

namespace sonoshape {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.raw_ = text;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.data_[section][key] = value;
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  if (s == data_.end() || !s->second.count(key))
    throw ConfigError(origin_ + ": missing [" + section + "] " + key);
  return s->second.at(key);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string v = get_string(section, key);
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ": [" + section + "] " + key + " = '" + v +
                      "' is not a number");
  }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int Config::get_int(const std::string& section, const std::string& key) const {
  const double x = get_double(section, key);
  const int i = static_cast<int>(x);
  if (x != i)
    throw ConfigError(origin_ + ": [" + section + "] " + key + " must be an integer");
  return i;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + ": [" + section + "] " + key + " must be a boolean");
}

std::vector<double> Config::get_doubles(const std::string& section,
                                        const std::string& key) const {
  const std::string v = get_string(section, key);
  std::istringstream in(v);
  std::vector<double> out;
  double x;
  while (in >> x) out.push_back(x);
  if (out.empty())
    throw ConfigError(origin_ + ": [" + section + "] " + key + " has no numbers");
  return out;
}

MeshSpec mesh_spec_from_config(const Config& cfg) {
  MeshSpec spec;
  const std::string shape = cfg.get_string("mesh", "shape");
  if (shape == "unit_square")
    spec.shape = MeshShape::UnitSquare;
  else if (shape == "disk")
    spec.shape = MeshShape::Disk;
  else if (shape == "annular_sector")
    spec.shape = MeshShape::AnnularSector;
  else
    throw ConfigError("unsupported mesh shape '" + shape + "'");
  spec.resolution = cfg.get_int("mesh", "resolution");
  spec.radius = cfg.get_double("mesh", "radius", spec.radius);
  spec.r_inner = cfg.get_double("mesh", "r_inner", spec.r_inner);
  spec.r_outer = cfg.get_double("mesh", "r_outer", spec.r_outer);
  spec.angle0 = cfg.get_double("mesh", "angle0", spec.angle0);
  spec.angle1 = cfg.get_double("mesh", "angle1", spec.angle1);
  spec.hold_all_margin = cfg.get_double("mesh", "hold_all_margin", spec.hold_all_margin);
  return spec;
}

ModelParams params_from_config(const Config& cfg) {
  const std::string preset = cfg.get_string("model", "preset", "linear");
  const double c = cfg.get_double("model", "c");
  const double b = cfg.get_double("model", "b");
  const double rho = cfg.get_double("model", "rho", 1.0);
  ModelParams p;
  if (preset == "westervelt")
    p = ModelParams::westervelt(c, b, cfg.get_double("model", "beta_a"), rho);
  else if (preset == "kuznetsov")
    p = ModelParams::kuznetsov(c, b, cfg.get_double("model", "beta_a"), rho);
  else if (preset == "linear")
    p = ModelParams::linear_damped(c, b, rho);
  else
    throw ConfigError("unsupported model preset '" + preset + "'");
  if (cfg.has("model", "k")) p.k = cfg.get_double("model", "k");
  if (cfg.has("model", "sigma")) p.sigma = cfg.get_double("model", "sigma");
  return p;
}

BoundaryExcitation excitation_from_config(const Config& cfg) {
  BoundaryExcitation g;
  const std::string profile = cfg.get_string("excitation", "profile", "arc");
  if (profile == "arc") {
    g.profile = make_arc_profile(cfg.get_double("excitation", "center_angle"),
                                 cfg.get_double("excitation", "half_width"),
                                 cfg.get_double("excitation", "inner_taper", 0.25));
  } else if (profile == "side") {
    g.profile = make_side_profile(
        cfg.get_string("excitation", "side_axis", "y") == "y",
        cfg.get_double("excitation", "side_center"),
        cfg.get_double("excitation", "side_half_width"));
  } else {
    throw ConfigError("unsupported excitation profile '" + profile + "'");
  }
  const std::string signal = cfg.get_string("excitation", "signal", "ramped_sine");
  const double amplitude = cfg.get_double("excitation", "amplitude");
  if (signal == "ramped_sine") {
    g.signal = TimeSignal::ramped_sine(amplitude, cfg.get_double("excitation", "frequency"),
                                       cfg.get_double("excitation", "ramp"));
  } else if (signal == "gaussian_pulse") {
    g.signal = TimeSignal::gaussian_pulse(amplitude,
                                          cfg.get_double("excitation", "pulse_center"),
                                          cfg.get_double("excitation", "pulse_width"),
                                          cfg.get_double("excitation", "ramp"));
  } else {
    throw ConfigError("unsupported excitation signal '" + signal + "'");
  }
  const double off = cfg.get_double("excitation", "off_time", -1.0);
  if (off >= 0.0)
    g.signal.with_switch_off(off, cfg.get_double("excitation", "off_ramp", 0.25));
  g.validate();
  return g;
}

CostFunctionalSpec cost_from_config(const Config& cfg, const Mesh& mesh, double T,
                                    int steps) {
  const std::string variant_name = cfg.get_string("cost", "variant");
  CostVariant variant;
  if (variant_name == "potential_tracking")
    variant = CostVariant::PotentialTracking;
  else if (variant_name == "final_time")
    variant = CostVariant::FinalTime;
  else if (variant_name == "pressure_tracking")
    variant = CostVariant::PressureTracking;
  else
    throw ConfigError("unsupported cost variant '" + variant_name + "'");

  CostFunctionalSpec spec = make_focal_region(
      mesh, variant, {cfg.get_double("cost", "focal_x"), cfg.get_double("cost", "focal_y")},
      cfg.get_double("cost", "focal_radius"), cfg.get_double("cost", "t0", 0.0),
      cfg.get_double("cost", "t1", T), cfg.get_bool("cost", "sharp_indicator", false));

  const std::string target = cfg.get_string("cost", "target", "zero");
  if (target == "zero") {
    // empty targets mean zero
  } else if (target == "constant") {
    const double value = cfg.get_double("cost", "target_value");
    if (variant == CostVariant::FinalTime) {
      spec.target_snapshot.assign(mesh.vertices.size(), value);
    } else {
      spec.target_trajectory.assign(steps + 1,
                                    std::vector<double>(mesh.vertices.size(), value));
    }
  } else if (target == "snapshot_file") {
    std::ifstream in(cfg.get_string("cost", "target_file"));
    if (!in) throw ConfigError("cannot open target file");
    std::vector<double> snap;
    double x;
    while (in >> x) snap.push_back(x);
    if (snap.size() != mesh.vertices.size())
      throw ConfigError("target file size does not match the mesh");
    if (variant == CostVariant::FinalTime)
      spec.target_snapshot = snap;
    else
      spec.target_trajectory.assign(steps + 1, snap);
  } else {
    throw ConfigError("unsupported target kind '" + target + "'");
  }
  spec.validate(mesh, T);
  return spec;
}

ProblemSetup problem_from_config(const Config& cfg) {
  ProblemSetup setup;
  setup.mesh = build_structured_mesh(mesh_spec_from_config(cfg));
  setup.params = params_from_config(cfg);
  setup.excitation = excitation_from_config(cfg);
  setup.T = cfg.get_double("time", "T");
  setup.steps = cfg.get_int("time", "steps");
  if (setup.steps < 1) throw ConfigError("[time] steps must be positive");
  setup.cost = cost_from_config(cfg, setup.mesh, setup.T, setup.steps);
  setup.solve_opts.picard_tol = cfg.get_double("solver", "picard_tol", 1e-10);
  setup.solve_opts.picard_max = cfg.get_int("solver", "picard_max", 25);
  return setup;
}

OptimizationOptions optimization_from_config(const Config& cfg) {
  OptimizationOptions o;
  o.max_iters = cfg.get_int("optimization", "max_iters", o.max_iters);
  o.step0 = cfg.get_double("optimization", "step0", o.step0);
  o.armijo_c1 = cfg.get_double("optimization", "armijo_c1", o.armijo_c1);
  o.backtrack = cfg.get_double("optimization", "backtrack", o.backtrack);
  o.max_backtracks = cfg.get_int("optimization", "max_backtracks", o.max_backtracks);
  o.grad_tol = cfg.get_double("optimization", "grad_tol", o.grad_tol);
  o.step_tol = cfg.get_double("optimization", "step_tol", o.step_tol);
  o.smoothing_passes = cfg.get_int("optimization", "smoothing_passes", o.smoothing_passes);
  o.min_angle_deg = cfg.get_double("optimization", "min_angle_deg", o.min_angle_deg);
  return o;
}

OutputOptions output_from_config(const Config& cfg) {
  OutputOptions o;
  o.snapshot_every = cfg.get_int("output", "snapshot_every", 0);
  o.probe = {cfg.get_double("output", "probe_x", 0.0),
             cfg.get_double("output", "probe_y", 0.0)};
  return o;
}

DeformationField taylor_field_from_config(const Config& cfg, const Mesh& mesh) {
  const Vec2 center{cfg.get_double("taylor", "bump_x"), cfg.get_double("taylor", "bump_y")};
  const Vec2 amp{cfg.get_double("taylor", "bump_ax"), cfg.get_double("taylor", "bump_ay")};
  return make_bump_field(center, cfg.get_double("taylor", "bump_radius"), amp, mesh);
}

std::vector<double> taylor_d_values_from_config(const Config& cfg) {
  if (!cfg.has("taylor", "d_values")) return {0.1, 0.05, 0.025, 0.0125};
  auto d = cfg.get_doubles("taylor", "d_values");
  for (size_t i = 0; i + 1 < d.size(); ++i)
    if (!(d[i] > d[i + 1]) || !(d[i + 1] > 0.0))
      throw ConfigError("[taylor] d_values must be positive and decreasing");
  return d;
}

}  // namespace sonoshape

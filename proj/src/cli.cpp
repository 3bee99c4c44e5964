#include "sonoshape/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>

#include "sonoshape/adjoint.hpp"
#include "sonoshape/config.hpp"
#include "sonoshape/errors.hpp"
#include "sonoshape/io.hpp"
#include "sonoshape/optimize.hpp"
#include "sonoshape/shape_derivative.hpp"
#include "sonoshape/transform.hpp"

namespace sonoshape {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "sonoshape 0.1.0";

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 20240801;
};

int nearest_vertex(const Mesh& mesh, const Vec2& p) {
  int best = 0;
  double bd = (mesh.vertices[0] - p).norm2();
  for (int v = 1; v < mesh.vertex_count(); ++v) {
    const double d = (mesh.vertices[v] - p).norm2();
    if (d < bd) {
      bd = d;
      best = v;
    }
  }
  return best;
}

void write_status(const fs::path& dir, const json& status) {
  std::ofstream out(dir / "status.json");
  out << status.dump(2) << "\n";
}

void prepare_run_dir(const fs::path& dir, const Config* cfg) {
  fs::create_directories(dir);
  {
    std::ofstream v(dir / "version.txt");
    v << kVersion << "\n";
  }
  if (cfg) {
    std::ofstream echo(dir / "config_echo.ini");
    echo << cfg->raw_text();
  }
}

void export_trajectory(const fs::path& dir, const std::string& name, const FeSpace& space,
                       const StateSolution& sol, const ModelParams& params,
                       const OutputOptions& out_opts) {
  const int probe = nearest_vertex(*space.mesh, out_opts.probe);
  std::vector<std::vector<double>> rows;
  for (size_t s = 0; s < sol.time.size(); ++s) {
    double margin = 1.0;
    for (double v : sol.dpsi[s]) margin = std::min(margin, 1.0 - 2.0 * params.k * v);
    rows.push_back({sol.time[s], sol.energy.empty() ? 0.0 : sol.energy[s], margin,
                    sol.psi[s][probe], sol.dpsi[s][probe]});
  }
  write_csv(dir / (name + ".csv"), {"time", "energy", "degeneracy_margin", "probe_psi",
                                    "probe_dpsi"},
            rows);
  if (out_opts.snapshot_every > 0) {
    const auto pressure = acoustic_pressure(sol, params);
    for (size_t s = 0; s < sol.time.size(); s += out_opts.snapshot_every) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "_%06zu.vtk", s);
      write_vtk(dir / (name + buf), *space.mesh,
                {{"psi", sol.psi[s]}, {"pressure", pressure[s]}});
    }
  }
}

void export_adjoint_trajectory(const fs::path& dir, const FeSpace& space,
                               const AdjointSolution& adj, const OutputOptions& out_opts) {
  const int probe = nearest_vertex(*space.mesh, out_opts.probe);
  std::vector<std::vector<double>> rows;
  for (size_t s = 0; s < adj.time.size(); ++s)
    rows.push_back({adj.time[s], adj.p[s][probe], adj.dp[s][probe]});
  write_csv(dir / "trajectory_adjoint.csv", {"time", "probe_p", "probe_dp"}, rows);
  if (out_opts.snapshot_every > 0) {
    for (size_t s = 0; s < adj.time.size(); s += out_opts.snapshot_every) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "p_adjoint_%06zu.vtk", s);
      write_vtk(dir / buf, *space.mesh, {{"p", adj.p[s]}, {"dp", adj.dp[s]}});
    }
  }
}

int run_solve(const CliArgs& args, const Config& cfg, const fs::path& dir, json& status) {
  const ProblemSetup setup = problem_from_config(cfg);
  const OutputOptions out_opts = output_from_config(cfg);
  const FeSpace space = make_space(setup.mesh);
  const ForwardResult fwd = run_forward(space, setup);
  export_trajectory(dir, "trajectory", space, fwd.state, setup.params, out_opts);
  status["iterations"] = fwd.state.steps();
  status["final_J"] = fwd.J;
  status["degeneracy_margin"] = fwd.state.degeneracy_margin;
  return 0;
}

int run_adjoint(const CliArgs& args, const Config& cfg, const fs::path& dir, json& status) {
  const ProblemSetup setup = problem_from_config(cfg);
  const OutputOptions out_opts = output_from_config(cfg);
  const FeSpace space = make_space(setup.mesh);
  const ForwardResult fwd = run_forward(space, setup);
  const AdjointData data = adjoint_data(setup.cost, fwd.state, setup.params, space);
  const AdjointSolution adj =
      solve_adjoint(space, setup.params, fwd.state, setup.excitation, data, setup.solve_opts);
  export_trajectory(dir, "trajectory", space, fwd.state, setup.params, out_opts);
  export_adjoint_trajectory(dir, space, adj, out_opts);
  status["iterations"] = fwd.state.steps();
  status["final_J"] = fwd.J;
  return 0;
}

int run_gradient(const CliArgs& args, const Config& cfg, const fs::path& dir, json& status) {
  const ProblemSetup setup = problem_from_config(cfg);
  const FeSpace space = make_space(setup.mesh);
  const BoundaryGeometry bg = compute_boundary_geometry(setup.mesh);
  const ForwardResult fwd = run_forward(space, setup);
  const AdjointData data = adjoint_data(setup.cost, fwd.state, setup.params, space);
  const AdjointSolution adj =
      solve_adjoint(space, setup.params, fwd.state, setup.excitation, data, setup.solve_opts);
  const BoundaryDensity density =
      shape_gradient_density(space, fwd.state, adj, setup.excitation, setup.params, bg);

  std::vector<std::vector<double>> rows;
  for (size_t l = 0; l < bg.vertex.size(); ++l) {
    const int v = bg.vertex[l];
    rows.push_back({double(v), setup.mesh.vertices[v].x, setup.mesh.vertices[v].y,
                    bg.normal[l].x, bg.normal[l].y, bg.curvature[l], bg.arc_weight[l],
                    density.value[l], double(density.excluded[l])});
  }
  write_csv(dir / "gradient_density.csv",
            {"vertex", "x", "y", "nx", "ny", "curvature", "arc_weight", "density",
             "excluded"},
            rows);
  std::vector<double> nodal(space.dofs, 0.0);
  for (size_t l = 0; l < bg.vertex.size(); ++l) nodal[bg.vertex[l]] = density.value[l];
  write_vtk(dir / "gradient_density.vtk", setup.mesh, {{"density", nodal}});
  status["final_J"] = fwd.J;
  return 0;
}

int run_taylor(const CliArgs& args, const Config& cfg, const fs::path& dir, json& status) {
  const ProblemSetup setup = problem_from_config(cfg);
  const DeformationField h = taylor_field_from_config(cfg, setup.mesh);
  const std::vector<double> d_values = taylor_d_values_from_config(cfg);
  const TaylorResult res = taylor_test(setup, h, d_values, args.threads);

  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < res.d_values.size(); ++i)
    rows.push_back({res.d_values[i], res.J_d[i], res.remainder[i],
                    i == 0 ? 0.0 : res.order[i - 1]});
  write_csv(dir / "taylor.csv", {"d", "J_d", "remainder", "order"}, rows);

  double summary_order = 0.0;
  if (res.order.size() >= 2)
    summary_order = std::min(res.order[res.order.size() - 1], res.order[res.order.size() - 2]);
  else if (!res.order.empty())
    summary_order = res.order.back();
  std::cout << "taylor-test: J0=" << format_double(res.J0) << " dJ=" << format_double(res.dJ)
            << " fd=" << format_double(res.fd_smallest)
            << " rel_gap=" << format_double(res.rel_gap_smallest)
            << " order=" << format_double(summary_order) << "\n";
  status["final_J"] = res.J0;
  status["dJ"] = res.dJ;
  status["rel_gap"] = res.rel_gap_smallest;
  status["order"] = summary_order;
  return 0;
}

int run_optimize(const CliArgs& args, const Config& cfg, const fs::path& dir, json& status) {
  const ProblemSetup setup = problem_from_config(cfg);
  const OptimizationOptions opts = optimization_from_config(cfg);
  const OptimizationHistory hist = run_optimization(setup, opts);

  std::vector<std::vector<double>> rows;
  for (const auto& r : hist.rows)
    rows.push_back({double(r.iter), r.J, r.dJ_direction, r.step, double(r.backtracks),
                    r.degeneracy_margin, double(r.mesh_checksum)});
  write_csv(dir / "history.csv",
            {"iter", "J", "dJ_direction", "step", "backtracks", "degeneracy_margin",
             "mesh_checksum"},
            rows);
  write_mesh_text(hist.final_mesh, dir / "final_mesh.txt");
  status["iterations"] = hist.accepted_steps;
  status["final_J"] = hist.rows.back().J;
  status["stop_reason"] = hist.stop_reason;
  return 0;
}

// Built-in invariant suite: fast structural checks on compact fixtures.
int run_check(const CliArgs& args, const Config& cfg, const fs::path& dir, json& status) {
  (void)cfg;
  int failures = 0;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << detail << ")\n";
    if (!ok) ++failures;
  };
  std::mt19937_64 rng(args.seed);

  {  // transform identities at d = 0 and first-order rates
    Mesh mesh = build_structured_mesh(MeshShape::Disk, 6);
    const DeformationField h =
        make_bump_field({0.4, 0.2}, 0.5, {0.3, -0.2}, mesh);
    std::uniform_int_distribution<int> tri_pick(0, mesh.triangle_count() - 1);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Vec2> pts;
    for (int i = 0; i < 100; ++i) {
      const auto& tr = mesh.triangles[tri_pick(rng)];
      double u = uni(rng), v = uni(rng);
      if (u + v > 1.0) {
        u = 1.0 - u;
        v = 1.0 - v;
      }
      pts.push_back(mesh.vertices[tr[0]] +
                    u * (mesh.vertices[tr[1]] - mesh.vertices[tr[0]]) +
                    v * (mesh.vertices[tr[2]] - mesh.vertices[tr[0]]));
    }
    const auto tc0 = eval_transform(h, 0.0, pts);
    double err0 = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      err0 = std::max(err0, std::abs(tc0.det[i] - 1.0));
      err0 = std::max(err0, (tc0.metric[i] - Mat2::identity()).max_abs());
      err0 = std::max(err0, (tc0.inv_jac_t[i] - Mat2::identity()).max_abs());
    }
    const double d = 1e-6;
    const auto tcd = eval_transform(h, d, pts);
    const auto rates = transform_derivatives_at_zero(h, pts);
    double err1 = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      err1 = std::max(err1, std::abs((tcd.det[i] - 1.0) / d - rates.det_rate[i]));
      const Mat2 mfd = (tcd.metric[i] - Mat2::identity()) * (1.0 / d);
      const Mat2 mp = eval_metric_derivative(h, std::span(&pts[i], 1))[0];
      err1 = std::max(err1, (mfd - mp).max_abs());
    }
    report("transform identities", err0 <= 1e-12 && err1 <= 1e-5,
           "d0_err=" + format_double(err0) + " rate_err=" + format_double(err1));
  }

  {  // discrete curvature of a circle
    MeshSpec spec;
    spec.shape = MeshShape::Disk;
    spec.radius = 2.0;
    spec.resolution = 16;
    const Mesh mesh = build_structured_mesh(spec);
    const BoundaryGeometry bg = compute_boundary_geometry(mesh);
    double err = 0.0;
    for (size_t l = 0; l < bg.vertex.size(); ++l)
      err = std::max(err, std::abs(bg.curvature[l] - 0.5));
    report("boundary curvature", err <= 5e-3, "max|kappa-1/R|=" + format_double(err));
  }

  {  // integration-by-parts identity under refinement
    const ScalarTestField a{[](const Vec2& x) { return 1.0 + x.x; },
                            [](const Vec2&) { return Vec2{1.0, 0.0}; },
                            {}};
    const ScalarTestField u{[](const Vec2& x) { return x.x * x.x; },
                            [](const Vec2& x) { return Vec2{2.0 * x.x, 0.0}; },
                            [](const Vec2&) { return Mat2{2.0, 0.0, 0.0, 0.0}; }};
    const ScalarTestField v{[](const Vec2& x) { return x.y * x.y; },
                            [](const Vec2& x) { return Vec2{0.0, 2.0 * x.y}; },
                            [](const Vec2&) { return Mat2{0.0, 0.0, 0.0, 2.0}; }};
    double res_coarse, res_fine;
    {
      const Mesh mesh = build_structured_mesh(MeshShape::UnitSquare, 8);
      const FeSpace space = make_space(mesh);
      const auto h = make_bump_field({0.6, 0.5}, 0.45, {0.2, 0.1}, mesh);
      res_coarse = lemma_identity_residual(space, a, u, v, h);
    }
    {
      const Mesh mesh = build_structured_mesh(MeshShape::UnitSquare, 16);
      const FeSpace space = make_space(mesh);
      const auto h = make_bump_field({0.6, 0.5}, 0.45, {0.2, 0.1}, mesh);
      res_fine = lemma_identity_residual(space, a, u, v, h);
    }
    report("integration-by-parts identity", res_fine < res_coarse && res_fine < 1e-3,
           "coarse=" + format_double(res_coarse) + " fine=" + format_double(res_fine));
  }

  {  // adjoint duality for the linear model
    ProblemSetup setup;
    setup.mesh = build_structured_mesh(MeshShape::Disk, 8);
    setup.params = ModelParams::linear_damped(1.0, 0.05);
    setup.excitation.profile = make_arc_profile(3.14159265358979, 0.9, 0.3);
    setup.excitation.signal = TimeSignal::ramped_sine(0.05, 1.0, 0.5);
    setup.T = 1.5;
    setup.steps = 120;
    setup.cost = make_focal_region(setup.mesh, CostVariant::PotentialTracking, {0.35, 0.0},
                                   0.2, 0.0, setup.T);
    const FeSpace space = make_space(setup.mesh);
    const ForwardResult fwd = run_forward(space, setup);
    const AdjointData data = adjoint_data(setup.cost, fwd.state, setup.params, space);
    const AdjointSolution adj = solve_adjoint(space, setup.params, fwd.state,
                                              setup.excitation, data, setup.solve_opts);
    BoundaryExcitation unit = setup.excitation;
    unit.signal.with_amplitude(1.0);
    const double dJ_adj = boundary_amplitude_gradient(space, adj, unit, setup.params);
    const double eps = 0.05 * 1e-3;
    auto J_at = [&](double amp) {
      ProblemSetup s2 = setup;
      s2.excitation.signal.with_amplitude(amp);
      return run_forward(space, s2).J;
    };
    const double fd = (J_at(0.05 + eps) - J_at(0.05 - eps)) / (2.0 * eps);
    const double rel = std::abs(dJ_adj - fd) / std::max(std::abs(fd), 1e-300);
    report("adjoint duality", rel <= 1e-3, "rel_err=" + format_double(rel));
  }

  status["failures"] = failures;
  return failures == 0 ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"time-domain nonlinear acoustics and adjoint shape optimization"};
  app.require_subcommand(1);

  CliArgs args;
  std::string subname;
  for (const char* name : {"solve", "adjoint", "gradient", "taylor-test", "optimize",
                           "check"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "configuration file")->required();
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--threads", args.threads, "worker threads for independent solves");
    sub->add_option("--seed", args.seed, "seed for randomized checks");
    sub->callback([&subname, name]() { subname = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const fs::path dir = args.out_dir.empty() ? fs::path("runs") / subname : fs::path(args.out_dir);
  json status;
  status["status"] = "error";
  status["iterations"] = 0;
  status["final_J"] = 0.0;

  Config cfg;
  try {
    prepare_run_dir(dir, nullptr);
  } catch (const std::exception& e) {
    std::cerr << "IoError: " << e.what() << "\n";
    return 1;
  }
  try {
    cfg = Config::parse_file(args.config_path);
  } catch (const ConfigError& e) {
    std::cerr << "ConfigError: " << e.what() << "\n";
    status["error_class"] = "ConfigError";
    status["message"] = e.what();
    write_status(dir, status);
    return 2;
  }
  prepare_run_dir(dir, &cfg);

  int code = 0;
  try {
    if (subname == "solve")
      code = run_solve(args, cfg, dir, status);
    else if (subname == "adjoint")
      code = run_adjoint(args, cfg, dir, status);
    else if (subname == "gradient")
      code = run_gradient(args, cfg, dir, status);
    else if (subname == "taylor-test")
      code = run_taylor(args, cfg, dir, status);
    else if (subname == "optimize")
      code = run_optimize(args, cfg, dir, status);
    else if (subname == "check")
      code = run_check(args, cfg, dir, status);
    if (code == 0) status["status"] = "ok";
  } catch (const ConfigError& e) {
    std::cerr << "ConfigError: " << e.what() << "\n";
    status["error_class"] = "ConfigError";
    status["message"] = e.what();
    write_status(dir, status);
    return 2;
  } catch (const DegeneracyError& e) {
    std::cerr << "DegeneracyError: " << e.what() << "\n";
    status["error_class"] = "DegeneracyError";
    status["message"] = e.what();
    write_status(dir, status);
    return 1;
  } catch (const NonConvergenceError& e) {
    std::cerr << "NonConvergenceError: " << e.what() << "\n";
    status["error_class"] = "NonConvergenceError";
    status["message"] = e.what();
    write_status(dir, status);
    return 1;
  } catch (const BlowUpError& e) {
    std::cerr << "BlowUpError: " << e.what() << "\n";
    status["error_class"] = "BlowUpError";
    status["message"] = e.what();
    write_status(dir, status);
    return 1;
  } catch (const Error& e) {
    std::cerr << "Error: " << e.what() << "\n";
    status["error_class"] = "Error";
    status["message"] = e.what();
    write_status(dir, status);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    status["error_class"] = "InternalError";
    status["message"] = e.what();
    write_status(dir, status);
    return 1;
  }
  write_status(dir, status);
  return code;
}

}  // namespace sonoshape

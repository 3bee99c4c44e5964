#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sonoshape/adjoint.hpp"
#include "sonoshape/config.hpp"
#include "sonoshape/optimize.hpp"
#include "sonoshape/shape_derivative.hpp"
#include "sonoshape/transform.hpp"

namespace py = pybind11;
using namespace sonoshape;

namespace {

py::array_t<double> vertices_array(const Mesh& mesh) {
  py::array_t<double> out({mesh.vertex_count(), 2});
  auto buf = out.mutable_unchecked<2>();
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    buf(v, 0) = mesh.vertices[v].x;
    buf(v, 1) = mesh.vertices[v].y;
  }
  return out;
}

py::array_t<int> triangles_array(const Mesh& mesh) {
  py::array_t<int> out({mesh.triangle_count(), 3});
  auto buf = out.mutable_unchecked<2>();
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (int l = 0; l < 3; ++l) buf(t, l) = mesh.triangles[t][l];
  return out;
}

std::vector<Vec2> to_points(const py::array_t<double, py::array::c_style>& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 2)
    throw py::value_error("expected an (n, 2) array of points");
  auto buf = arr.unchecked<2>();
  std::vector<Vec2> pts(arr.shape(0));
  for (py::ssize_t i = 0; i < arr.shape(0); ++i) pts[i] = {buf(i, 0), buf(i, 1)};
  return pts;
}

MeshShape shape_from_name(const std::string& name) {
  if (name == "unit_square") return MeshShape::UnitSquare;
  if (name == "disk") return MeshShape::Disk;
  if (name == "annular_sector") return MeshShape::AnnularSector;
  throw py::value_error("unknown mesh shape '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "time-domain nonlinear acoustics and adjoint shape optimization";
  m.attr("__version__") = "0.1.0";

  py::class_<Mesh>(m, "Mesh")
      .def_property_readonly("vertices", &vertices_array)
      .def_property_readonly("triangles", &triangles_array)
      .def_property_readonly("vertex_count", &Mesh::vertex_count)
      .def_property_readonly("triangle_count", &Mesh::triangle_count)
      .def_property_readonly("boundary_edge_count", &Mesh::boundary_edge_count)
      .def("boundary_perimeter", &Mesh::boundary_perimeter)
      .def("min_angle_deg", &Mesh::min_angle_deg);

  py::class_<DeformationField>(m, "DeformationField")
      .def_property_readonly("values", [](const DeformationField& h) {
        py::array_t<double> out({static_cast<py::ssize_t>(h.values.size()),
                                 static_cast<py::ssize_t>(2)});
        auto buf = out.mutable_unchecked<2>();
        for (size_t v = 0; v < h.values.size(); ++v) {
          buf(v, 0) = h.values[v].x;
          buf(v, 1) = h.values[v].y;
        }
        return out;
      });

  py::class_<ProblemSetup>(m, "Problem")
      .def_property_readonly("mesh", [](const ProblemSetup& p) { return p.mesh; });

  m.def(
      "build_structured_mesh",
      [](const std::string& shape, int resolution, double radius, double margin) {
        MeshSpec spec;
        spec.shape = shape_from_name(shape);
        spec.resolution = resolution;
        spec.radius = radius;
        spec.hold_all_margin = margin;
        return build_structured_mesh(spec);
      },
      py::arg("shape"), py::arg("resolution"), py::arg("radius") = 1.0,
      py::arg("margin") = 0.5);

  m.def("boundary_geometry", [](const Mesh& mesh) {
    const BoundaryGeometry bg = compute_boundary_geometry(mesh);
    py::dict out;
    out["vertex"] = bg.vertex;
    out["curvature"] = bg.curvature;
    out["arc_weight"] = bg.arc_weight;
    std::vector<double> nx, ny;
    for (const auto& n : bg.normal) {
      nx.push_back(n.x);
      ny.push_back(n.y);
    }
    out["normal_x"] = nx;
    out["normal_y"] = ny;
    out["corner"] = std::vector<int>(bg.corner.begin(), bg.corner.end());
    return out;
  });

  m.def(
      "make_bump_field",
      [](std::pair<double, double> center, double radius,
         std::pair<double, double> amplitude, const Mesh& mesh) {
        return make_bump_field({center.first, center.second}, radius,
                               {amplitude.first, amplitude.second}, mesh);
      },
      py::arg("center"), py::arg("radius"), py::arg("amplitude"), py::arg("mesh"));

  m.def(
      "eval_transform",
      [](const DeformationField& h, double d,
         const py::array_t<double, py::array::c_style>& points, const Mesh* mesh) {
        const auto pts = to_points(points);
        const auto tc = eval_transform(h, d, pts, {}, mesh);
        py::dict out;
        out["det"] = tc.det;
        py::array_t<double> metric({static_cast<py::ssize_t>(pts.size()),
                                    static_cast<py::ssize_t>(2),
                                    static_cast<py::ssize_t>(2)});
        auto mb = metric.mutable_unchecked<3>();
        for (size_t i = 0; i < pts.size(); ++i) {
          mb(i, 0, 0) = tc.metric[i].a00;
          mb(i, 0, 1) = tc.metric[i].a01;
          mb(i, 1, 0) = tc.metric[i].a10;
          mb(i, 1, 1) = tc.metric[i].a11;
        }
        out["metric"] = metric;
        return out;
      },
      py::arg("field"), py::arg("d"), py::arg("points"), py::arg("mesh") = nullptr);

  m.def("load_problem", [](const std::string& path) {
    return problem_from_config(Config::parse_file(path));
  });
  m.def("problem_from_string", [](const std::string& text) {
    return problem_from_config(Config::parse_string(text));
  });

  m.def("solve_forward", [](const ProblemSetup& setup) {
    const FeSpace space = make_space(setup.mesh);
    const ForwardResult fwd = run_forward(space, setup);
    py::dict out;
    out["J"] = fwd.J;
    out["time"] = fwd.state.time;
    out["energy"] = fwd.state.energy;
    out["degeneracy_margin"] = fwd.state.degeneracy_margin;
    out["psi_final"] = fwd.state.psi.back();
    return out;
  });

  m.def("shape_gradient", [](const ProblemSetup& setup) {
    const FeSpace space = make_space(setup.mesh);
    const BoundaryGeometry bg = compute_boundary_geometry(setup.mesh);
    const ForwardResult fwd = run_forward(space, setup);
    const AdjointData data = adjoint_data(setup.cost, fwd.state, setup.params, space);
    const AdjointSolution adj = solve_adjoint(space, setup.params, fwd.state,
                                              setup.excitation, data, setup.solve_opts);
    const BoundaryDensity density =
        shape_gradient_density(space, fwd.state, adj, setup.excitation, setup.params, bg);
    py::dict out;
    out["J"] = fwd.J;
    out["vertex"] = bg.vertex;
    out["density"] = density.value;
    return out;
  });

  m.def(
      "taylor_test",
      [](const ProblemSetup& setup, const DeformationField& h,
         const std::vector<double>& d_values, int threads) {
        const TaylorResult res = taylor_test(setup, h, d_values, threads);
        py::dict out;
        out["J0"] = res.J0;
        out["dJ"] = res.dJ;
        out["d"] = res.d_values;
        out["J_d"] = res.J_d;
        out["remainder"] = res.remainder;
        out["order"] = res.order;
        out["fd_smallest"] = res.fd_smallest;
        out["rel_gap_smallest"] = res.rel_gap_smallest;
        return out;
      },
      py::arg("problem"), py::arg("field"), py::arg("d_values"), py::arg("threads") = 1);

  m.def(
      "run_optimization",
      [](const ProblemSetup& setup, int max_iters, double step0) {
        OptimizationOptions opts;
        opts.max_iters = max_iters;
        opts.step0 = step0;
        const OptimizationHistory hist = run_optimization(setup, opts);
        py::dict out;
        std::vector<double> J;
        for (const auto& row : hist.rows) J.push_back(row.J);
        out["J"] = J;
        out["accepted_steps"] = hist.accepted_steps;
        out["stop_reason"] = hist.stop_reason;
        return out;
      },
      py::arg("problem"), py::arg("max_iters") = 5, py::arg("step0") = 0.25);
}

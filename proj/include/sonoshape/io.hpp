#pragma once

#include <map>
#include <string>
#include <vector>

#include "sonoshape/geometry.hpp"

namespace sonoshape {

// Plain-text mesh format:
//   acoustic-mesh v1
//   <vertex count>
//   <triangle count>
//   <boundary-edge count>
//   one vertex "x y" per line, one triangle "i j k" per line,
//   one boundary edge "a b parent_tri" per line,
//   optional trailing entity "bbox xmin ymin xmax ymax"
void write_mesh_text(const Mesh& mesh, const std::string& path);
Mesh read_mesh_text(const std::string& path);

// VTK legacy ASCII unstructured grid with optional point data.
void write_vtk(const std::string& path, const Mesh& mesh,
               const std::map<std::string, std::vector<double>>& point_scalars = {},
               const std::map<std::string, std::vector<Vec2>>& point_vectors = {});

// CSV with fixed 17-significant-digit formatting.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double x);

}  // namespace sonoshape

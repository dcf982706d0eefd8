#pragma once

#include <string>
#include <utility>
#include <vector>

#include "surfpf/trace_fe.hpp"

namespace surfpf {

/// A named nodal field to be traced onto Gamma_h.
struct NamedField {
  std::string name;
  const Eigen::VectorXd* values;
};

/// Legacy ASCII VTK unstructured grid of Gamma_h. Every triangle gets its own
/// three points (no vertex sharing), and each field is written as POINT_DATA
/// with the trace values at those points. Throws IoError.
void write_vtk_snapshot(const TraceSpace& space, const std::vector<NamedField>& fields, const std::string& path);

struct VtkSurface {
  std::vector<Vec3> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::pair<std::string, std::vector<double>>> fields;

  const std::vector<double>* field(const std::string& name) const;
};

/// Reads files produced by write_vtk_snapshot. Throws IoError on malformed input.
VtkSurface read_vtk_surface(const std::string& path);

}  // namespace surfpf

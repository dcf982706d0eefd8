#include "surfpf/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "surfpf/errors.hpp"

namespace surfpf {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_vtk_snapshot(const TraceSpace& space, const std::vector<NamedField>& fields, const std::string& path) {
  const DiscreteSurface& g = space.gamma();
  const int nt = g.n_triangles();
  for (const NamedField& f : fields)
    if (f.values == nullptr || f.values->size() != space.n_dofs())
      throw Error("field '" + f.name + "' does not match the trace space");

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# vtk DataFile Version 3.0\n"
      << "surface snapshot\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << 3 * nt << " double\n";
  for (const CutTriangle& tri : g.triangles)
    for (const Vec3& p : tri.x) out << num(p[0]) << ' ' << num(p[1]) << ' ' << num(p[2]) << '\n';
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (int k = 0; k < nt; ++k) out << "3 " << 3 * k << ' ' << 3 * k + 1 << ' ' << 3 * k + 2 << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int k = 0; k < nt; ++k) out << "5\n";
  if (!fields.empty()) {
    out << "POINT_DATA " << 3 * nt << '\n';
    for (const NamedField& f : fields) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (int k = 0; k < nt; ++k) {
        const auto v = space.triangle_values(*f.values, k);
        out << num(v[0]) << '\n' << num(v[1]) << '\n' << num(v[2]) << '\n';
      }
    }
  }
  if (!out) throw IoError("write to " + path + " failed");
}

const std::vector<double>* VtkSurface::field(const std::string& name) const {
  for (const auto& [n, v] : fields)
    if (n == name) return &v;
  return nullptr;
}

VtkSurface read_vtk_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  for (int i = 0; i < 3; ++i)
    if (!std::getline(in, line)) throw IoError(path + ": truncated header");
  if (line != "ASCII") throw IoError(path + ": only ASCII files are supported");

  VtkSurface s;
  std::size_t n_point_data = 0;
  std::string word;
  auto fail = [&](const std::string& what) { throw IoError(path + ": " + what); };
  while (in >> word) {
    if (word == "DATASET") {
      in >> word;
      if (word != "UNSTRUCTURED_GRID") fail("unsupported dataset " + word);
    } else if (word == "POINTS") {
      std::size_t n;
      in >> n >> word;
      s.points.resize(n);
      for (auto& p : s.points) in >> p[0] >> p[1] >> p[2];
    } else if (word == "CELLS") {
      std::size_t n, size;
      in >> n >> size;
      s.triangles.resize(n);
      for (auto& t : s.triangles) {
        int count;
        in >> count;
        if (count != 3) fail("non-triangle cell");
        in >> t[0] >> t[1] >> t[2];
        for (int v : t)
          if (v < 0 || static_cast<std::size_t>(v) >= s.points.size()) fail("cell index out of range");
      }
    } else if (word == "CELL_TYPES") {
      std::size_t n;
      in >> n;
      for (std::size_t i = 0; i < n; ++i) {
        int type;
        in >> type;
        if (type != 5) fail("unexpected cell type");
      }
    } else if (word == "POINT_DATA") {
      in >> n_point_data;
      if (n_point_data != s.points.size()) fail("POINT_DATA size mismatch");
    } else if (word == "SCALARS") {
      std::string name, type;
      in >> name >> type;
      std::getline(in, line);
      in >> word >> line;
      if (word != "LOOKUP_TABLE") fail("missing LOOKUP_TABLE");
      std::vector<double> values(n_point_data);
      for (double& v : values) {
        // operator>> rejects nan/inf spellings, so go through strtod.
        in >> word;
        v = std::strtod(word.c_str(), nullptr);
      }
      s.fields.emplace_back(name, std::move(values));
    } else {
      fail("unexpected token " + word);
    }
    if (!in) fail("malformed section");
  }
  return s;
}

}  // namespace surfpf

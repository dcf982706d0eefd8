#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "surfpf/mesh.hpp"

namespace surfpf {

using Triangle = std::array<Vec3, 3>;

double triangle_area(const Triangle& tri);

/// Affine geometry of one tetrahedron: barycentric coordinates and their
/// (constant) gradients.
struct TetGeometry {
  std::array<Vec3, 4> x;
  std::array<Vec3, 4> grad_lambda;
  Eigen::Matrix3d inverse_jacobian;
  double volume = 0.0;

  static TetGeometry from(const std::array<Vec3, 4>& x);
  std::array<double, 4> barycentric(const Vec3& p) const;
  double longest_edge() const;
  Vec3 longest_edge_direction() const;
};

/// Marching-tetrahedra section of the zero set of the linear interpolant of
/// four vertex values. Zero values count as negative. One or three negative
/// vertices give one triangle; two give a planar quad split along its
/// shorter diagonal. Triangles are oriented so that their normals point
/// toward phi > 0.
struct CutPolygon {
  int count = 0;
  std::array<Triangle, 2> triangles;
};

CutPolygon extract_cut(const std::array<Vec3, 4>& x, const std::array<double, 4>& phi);

struct QuadratureRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
};

/// Symmetric triangle rules exact for polynomials of degree `order` (1..4).
QuadratureRule surface_quadrature(const Triangle& tri, int order);

/// Tetrahedron rules exact for degree 1 (centroid) or 2 (four points).
QuadratureRule tet_quadrature(const std::array<Vec3, 4>& x, int order);

/// The eight children of the red (regular) split of a tet, in terms of the
/// ten P2 node indices (vertices 0..3, then edge midpoints in kTetEdges
/// order). The inner octahedron is cut along its shortest diagonal.
std::array<std::array<int, 4>, 8> red_children(const std::array<Vec3, 10>& nodes);

std::array<Vec3, 10> p2_nodes(const std::array<Vec3, 4>& x);

/// Normal field n_h = grad I2(phi) / |grad I2(phi)| where I2 is the P2 nodal
/// interpolant of the level set on each band tet.
class DiscreteNormalField {
 public:
  DiscreteNormalField() = default;
  DiscreteNormalField(const BackgroundMesh& mesh, const Band& band, const LevelsetInterpolant& phi_h);

  Vec3 gradient(int band_index, const Vec3& x) const;
  /// Throws DegenerateGradient if the gradient stays below 1e-12 after the
  /// point is nudged by 1e-10 h along the longest tet edge.
  Vec3 normal(int band_index, const Vec3& x) const;

  const TetGeometry& geometry(int band_index) const { return geometry_[band_index]; }
  const std::array<double, 10>& values(int band_index) const { return values_[band_index]; }

 private:
  std::vector<TetGeometry> geometry_;
  std::vector<std::array<double, 10>> values_;
};

struct CutTriangle {
  Triangle x;
  /// Position of the parent tet in Band::tet_ids.
  int band_index = 0;
};

/// Gamma_h: the zero set of the P1 interpolant of phi on the once-refined
/// band tets, stored as triangles grouped by parent tet.
struct DiscreteSurface {
  std::vector<CutTriangle> triangles;
  /// triangles of band tet i are [offsets[i], offsets[i+1]).
  std::vector<int> offsets;
  double dropped_area = 0.0;
  double area_eps = 0.0;

  double area() const;
  int n_triangles() const { return static_cast<int>(triangles.size()); }
};

/// Slivers with area below area_eps_factor * h^2 are dropped and tallied.
DiscreteSurface extract_surface(const BackgroundMesh& mesh, const Band& band,
                                const LevelsetInterpolant& phi_h, double area_eps_factor = 1e-14);

/// Sum of triangle areas.
double surface_area(const DiscreteSurface& surface);

}  // namespace surfpf

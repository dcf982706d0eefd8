#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "surfpf/levelset.hpp"

namespace surfpf {

using Tet = std::array<int, 4>;

/// Conforming tetrahedral tessellation of a box.
///
/// The coarse mesh is a Kuhn split of a grid of cells; refinement is by
/// newest-vertex bisection on the Kuhn ordering, so three bisections of a tet
/// produce eight similar tets of half the size. One refinement "level" is
/// therefore three bisection generations.
struct BackgroundMesh {
  Box box;
  std::array<int, 3> cells{2, 2, 2};
  std::vector<Vec3> vertices;
  /// Positively oriented vertex lists.
  std::vector<Tet> tets;
  /// Vertex lists in bisection order (refinement edge is (v[0], v[tag])).
  std::vector<Tet> ordered;
  std::vector<std::uint8_t> tag;
  std::vector<int> generation;
  /// Cell edge length of the finest requested level (max over axes).
  double h_band = 0.0;
  int target_level = 0;

  int n_tets() const { return static_cast<int>(tets.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int level_of(int t) const { return generation[t] / 3; }
  double signed_volume(int t) const;
  double volume(int t) const;
  double diameter(int t) const;
  /// Cell edge length at the given level.
  double h_at_level(int level) const;
};

/// Kuhn split of cells[0] x cells[1] x cells[2] boxes into 6 tets each.
BackgroundMesh build_initial_mesh(const Box& box, std::array<int, 3> cells = {2, 2, 2});

struct RefinementOptions {
  int target_level = 0;
  std::size_t max_tets = 20'000'000;
};

/// Bisects every tet that the surface may intersect until it reaches
/// target_level, closing hanging edges to keep the mesh conforming. A tet is
/// marked when phi changes sign over its vertices and edge midpoints, or when
/// the first-order distance estimate |phi|/|grad phi| at its centroid is below
/// its diameter.
BackgroundMesh refine_toward_surface(const BackgroundMesh& mesh, const ImplicitSurface& surface,
                                     const RefinementOptions& options);

/// Audit: every interior face is shared by exactly two tets and every
/// boundary face lies on the box boundary. Returns the number of violations.
int conformity_violations(const BackgroundMesh& mesh);

/// Edge numbering used for P2 nodes and red refinement: edge e joins
/// kTetEdges[e][0] and kTetEdges[e][1].
inline constexpr std::array<std::array<int, 2>, 6> kTetEdges{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Values of the level set at the 10 P2 nodes of every tet: 4 vertices in
/// tets[t] order then the 6 edge midpoints in kTetEdges order. Nodal values
/// define both the P1 interpolant on the once-refined tets and the P2
/// interpolant on the parent tet.
class LevelsetInterpolant {
 public:
  LevelsetInterpolant(const BackgroundMesh& mesh, const ImplicitSurface& surface);

  std::array<double, 10> tet_values(int t) const;
  double vertex_value(int v) const { return vertex_phi_[v]; }
  const ImplicitSurface& surface() const { return *surface_; }

 private:
  const BackgroundMesh* mesh_;
  const ImplicitSurface* surface_;
  std::vector<double> vertex_phi_;
};

/// Tie rule for nodal level-set values: zero counts as negative.
inline bool is_negative(double v) { return v <= 0.0; }

/// Tets whose once-refined children carry a sign change of phi_h, and the
/// vertices of those tets (the degrees of freedom).
struct Band {
  std::vector<int> tet_ids;
  std::vector<int> vertex_ids;
  double h = 0.0;
};

/// Throws EmptyBand if no tet is cut.
Band select_band(const BackgroundMesh& mesh, const LevelsetInterpolant& phi_h);

}  // namespace surfpf

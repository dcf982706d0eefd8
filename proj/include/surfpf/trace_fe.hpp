#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "surfpf/cut_surface.hpp"
#include "surfpf/linear_solver.hpp"

namespace surfpf {

/// Contiguous numbering of the band vertices.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const Band& band, int n_vertices);

  int n_dofs() const { return static_cast<int>(vertex_of_.size()); }
  /// -1 for vertices outside the band.
  int global_of(int vertex) const { return global_of_[vertex]; }
  int vertex_of(int dof) const { return vertex_of_[dof]; }

 private:
  std::vector<int> global_of_;
  std::vector<int> vertex_of_;
};

enum class FieldTag { Generic, OrderParameter, Concentration, ChemicalPotential };

/// Nodal coefficients of a P1 bulk function on the band.
struct FieldVector {
  Eigen::VectorXd values;
  FieldTag tag = FieldTag::Generic;

  Eigen::Index size() const { return values.size(); }
  bool all_finite() const { return values.allFinite(); }
};

struct DiscretizationOptions {
  int level = 3;
  std::array<int, 3> cells{2, 2, 2};
  std::size_t max_tets = 20'000'000;
  int surface_order = 2;
  int volume_order = 2;
};

/// P1 trace finite element space on the band together with the discrete
/// surface it is integrated over. Owns the whole geometric pipeline and is
/// immutable once built.
class TraceSpace {
 public:
  static std::unique_ptr<TraceSpace> build(const ImplicitSurface& surface, const DiscretizationOptions& options);

  TraceSpace(const TraceSpace&) = delete;
  TraceSpace& operator=(const TraceSpace&) = delete;

  const ImplicitSurface& surface() const { return surface_; }
  const BackgroundMesh& mesh() const { return mesh_; }
  const Band& band() const { return band_; }
  const DiscreteSurface& gamma() const { return gamma_; }
  const DiscreteNormalField& normals() const { return normals_; }
  const DofMap& dofs() const { return dofs_; }
  const DiscretizationOptions& options() const { return options_; }
  int n_dofs() const { return dofs_.n_dofs(); }
  double h() const { return band_.h; }
  const std::array<int, 4>& local_dofs(int band_index) const { return local_dofs_[band_index]; }
  int n_band_tets() const { return static_cast<int>(band_.tet_ids.size()); }

  /// M_ij = int_{Gamma_h} psi_i psi_j ds.
  SparseOperator assemble_surface_mass() const;
  /// A_ij = int_{Gamma_h} P_h grad psi_j . P_h grad psi_i ds with P_h = I - n_h n_h^T.
  SparseOperator assemble_tangential_stiffness() const;
  /// Weighted variant, weight = map(u_h) at each surface quadrature point.
  /// Throws NegativeWeight if a weight falls below -1e-12.
  SparseOperator assemble_tangential_stiffness(const Eigen::VectorXd& field,
                                               const std::function<double(double)>& map) const;
  /// S_ij = int_{Omega_h^Gamma} (n_h . grad psi_j)(n_h . grad psi_i) dx over whole band tets.
  SparseOperator assemble_normal_stabilization() const;

  using SpaceFn = std::function<double(const Vec3&)>;
  /// b_i = int_{Gamma_h} g psi_i ds.
  Eigen::VectorXd assemble_surface_load(const SpaceFn& g) const;

  /// Nodal values by direct evaluation at the band vertices.
  FieldVector interpolate(const SpaceFn& u, FieldTag tag = FieldTag::Generic) const;
  /// Nodal values u(p(x_i)) with p the closest-point projection onto Gamma.
  FieldVector interpolate_normal_extension(const SpaceFn& u, FieldTag tag = FieldTag::Generic) const;
  /// i.i.d. uniform [0, 1) nodal values from mt19937_64(seed), 53-bit mantissa.
  FieldVector random_field(std::uint64_t seed, FieldTag tag = FieldTag::Generic) const;

  /// Values of the P1 function u_h at the three vertices of triangle k.
  std::array<double, 3> triangle_values(const Eigen::VectorXd& u, int triangle) const;
  /// Value of u_h at point x inside band tet band_index.
  double evaluate(const Eigen::VectorXd& u, int band_index, const Vec3& x) const;

  /// Calls f(band_index, x, weight) for every surface quadrature point.
  void for_each_surface_point(const std::function<void(int, const Vec3&, double)>& f,
                              int order = 0) const;

 private:
  TraceSpace(const ImplicitSurface& surface, const DiscretizationOptions& options);

  struct WeightedPoint {
    int band_index;
    std::array<double, 4> lambda;
    double weight;
    std::array<double, 10> gram;  // upper triangle of (P g_i . P g_j)
  };

  SparseOperator empty_operator(bool symmetric) const;
  void scatter(SparseOperator& op, int band_index, const Eigen::Matrix4d& local) const;
  const std::vector<WeightedPoint>& weighted_points() const;

  ImplicitSurface surface_;
  DiscretizationOptions options_;
  BackgroundMesh mesh_;
  Band band_;
  DiscreteSurface gamma_;
  DiscreteNormalField normals_;
  DofMap dofs_;
  std::vector<std::array<int, 4>> local_dofs_;
  SparseMatrix pattern_;
  std::vector<std::array<int, 16>> scatter_index_;
  mutable std::vector<WeightedPoint> weighted_points_;
};

}  // namespace surfpf

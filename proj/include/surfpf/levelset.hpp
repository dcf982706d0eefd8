#pragma once

#include <array>
#include <functional>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace surfpf {

using Vec3 = Eigen::Vector3d;

/// Axis-aligned box stored as [xmin, xmax, ymin, ymax, zmin, zmax].
struct Box {
  std::array<double, 6> bounds{-1, 1, -1, 1, -1, 1};

  double lo(int axis) const { return bounds[2 * axis]; }
  double hi(int axis) const { return bounds[2 * axis + 1]; }
  double extent(int axis) const { return hi(axis) - lo(axis); }
  double volume() const { return extent(0) * extent(1) * extent(2); }
  bool contains(const Vec3& x, double tol = 0.0) const;
  Vec3 clamp(const Vec3& x) const;
  bool valid() const;
};

Box sphere_box();   // [-5/3, 5/3]^3
Box spindle_box();  // [-5, 5] x [-4/3, 4/3]^2
Box cell_box();     // [-2, 2] x [-4/3, 4/3]^2

struct SurfacePoint {
  Vec3 x;
  Vec3 n;
};

/// Closed surface given as the zero level set of phi. Built-in shapes are
/// negative inside and positive outside. Immutable after construction, so
/// evaluation is safe from concurrent workers.
class ImplicitSurface {
 public:
  enum class Kind { Sphere, Spindle, IdealizedCell, Custom };
  using ScalarFn = std::function<double(const Vec3&)>;
  using GradFn = std::function<Vec3(const Vec3&)>;

  static ImplicitSurface sphere(double radius = 1.0, const Vec3& center = Vec3::Zero(),
                                const Box& box = sphere_box());
  static ImplicitSurface spindle(const Box& box = spindle_box());
  static ImplicitSurface idealized_cell(const Box& box = cell_box());
  static ImplicitSurface custom(ScalarFn phi, GradFn grad, const Box& box);

  Kind kind() const { return kind_; }
  const Box& box() const { return box_; }
  double radius() const { return radius_; }
  const Vec3& center() const { return center_; }
  std::string name() const;

  /// Lower bound c0 on |grad phi| expected near the surface.
  double min_gradient() const { return c0_; }
  void set_min_gradient(double c0) { c0_ = c0; }

  double phi(const Vec3& x) const;

  /// Analytic gradient. Returns the zero vector at removable singularities
  /// (sphere center); use is_degenerate() to detect those points.
  Vec3 grad_phi(const Vec3& x) const;
  bool is_degenerate(const Vec3& x) const;

  /// grad phi / |grad phi|; throws DegenerateGradient when |grad phi| < c0.
  Vec3 normal(const Vec3& x) const;

  /// Quasi-normal Newton iteration p <- p - phi(p) grad phi(p) / |grad phi(p)|^2,
  /// halving the step whenever |phi| fails to decrease.
  SurfacePoint project(const Vec3& x, int max_iter = 100, double tol = 1e-12) const;

 private:
  ImplicitSurface(Kind kind, const Box& box) : kind_(kind), box_(box) {}

  Kind kind_;
  Box box_;
  double radius_ = 1.0;
  Vec3 center_ = Vec3::Zero();
  double c0_ = 1e-3;
  ScalarFn custom_phi_;
  GradFn custom_grad_;
};

/// Sampled audit of the gradient lower bound in the band |phi|/|grad phi| < width.
struct GradientAudit {
  int samples_in_band = 0;
  int degenerate = 0;
  double min_norm = 0.0;
};

GradientAudit audit_gradient_bound(const ImplicitSurface& surface, int n_samples, double width);

/// True if phi does not take negative values on the box boundary (sampled on
/// an n x n grid per face), i.e. the surface does not cross the boundary.
bool surface_inside_box(const ImplicitSurface& surface, int n = 64, double tol = 1e-12);

/// Point i of the 3D Halton sequence (bases 2, 3, 5) mapped into the box.
Vec3 halton_point(const Box& box, int i);

}  // namespace surfpf

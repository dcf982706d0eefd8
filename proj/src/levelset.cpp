#include "surfpf/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "surfpf/errors.hpp"

namespace surfpf {

namespace {

constexpr double kPi = std::numbers::pi;

double spindle_phi(const Vec3& x) {
  // Two-branch formula, sign flipped so the inside is negative.
  if (x[0] > 5.0) return 25.0;
  const double c = std::cos(x[0] * kPi / 10.0);
  return 16.0 * (x[1] * x[1] + x[2] * x[2]) - c * c;
}

Vec3 spindle_grad(const Vec3& x) {
  if (x[0] > 5.0) return Vec3::Zero();
  return {kPi / 10.0 * std::sin(x[0] * kPi / 5.0), 32.0 * x[1], 32.0 * x[2]};
}

double cell_phi(const Vec3& x) {
  const double s = 1.0 + 0.5 * std::sin(kPi * x[0]);
  return 0.25 * x[0] * x[0] + x[1] * x[1] + 4.0 * x[2] * x[2] / (s * s) - 1.0;
}

Vec3 cell_grad(const Vec3& x) {
  const double s = 1.0 + 0.5 * std::sin(kPi * x[0]);
  const double ds = 0.5 * kPi * std::cos(kPi * x[0]);
  return {0.5 * x[0] - 8.0 * x[2] * x[2] * ds / (s * s * s), 2.0 * x[1], 8.0 * x[2] / (s * s)};
}

double radical_inverse(int i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * (i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

bool Box::contains(const Vec3& x, double tol) const {
  for (int a = 0; a < 3; ++a)
    if (x[a] < lo(a) - tol || x[a] > hi(a) + tol) return false;
  return true;
}

Vec3 Box::clamp(const Vec3& x) const {
  return {std::clamp(x[0], lo(0), hi(0)), std::clamp(x[1], lo(1), hi(1)),
          std::clamp(x[2], lo(2), hi(2))};
}

bool Box::valid() const {
  for (int a = 0; a < 3; ++a)
    if (!(hi(a) > lo(a)) || !std::isfinite(lo(a)) || !std::isfinite(hi(a))) return false;
  return true;
}

Box sphere_box() { return Box{{-5.0 / 3, 5.0 / 3, -5.0 / 3, 5.0 / 3, -5.0 / 3, 5.0 / 3}}; }
Box spindle_box() { return Box{{-5.0, 5.0, -4.0 / 3, 4.0 / 3, -4.0 / 3, 4.0 / 3}}; }
Box cell_box() { return Box{{-2.0, 2.0, -4.0 / 3, 4.0 / 3, -4.0 / 3, 4.0 / 3}}; }

ImplicitSurface ImplicitSurface::sphere(double radius, const Vec3& center, const Box& box) {
  if (!(radius > 0)) throw ConfigError("sphere radius must be positive");
  ImplicitSurface s(Kind::Sphere, box);
  s.radius_ = radius;
  s.center_ = center;
  return s;
}

ImplicitSurface ImplicitSurface::spindle(const Box& box) { return {Kind::Spindle, box}; }

ImplicitSurface ImplicitSurface::idealized_cell(const Box& box) {
  return {Kind::IdealizedCell, box};
}

ImplicitSurface ImplicitSurface::custom(ScalarFn phi, GradFn grad, const Box& box) {
  if (!phi || !grad) throw ConfigError("custom surface needs both phi and grad phi");
  ImplicitSurface s(Kind::Custom, box);
  s.custom_phi_ = std::move(phi);
  s.custom_grad_ = std::move(grad);
  return s;
}

std::string ImplicitSurface::name() const {
  switch (kind_) {
    case Kind::Sphere: return "sphere";
    case Kind::Spindle: return "spindle";
    case Kind::IdealizedCell: return "cell";
    case Kind::Custom: return "custom";
  }
  return "unknown";
}

double ImplicitSurface::phi(const Vec3& x) const {
  switch (kind_) {
    case Kind::Sphere: return (x - center_).norm() - radius_;
    case Kind::Spindle: return spindle_phi(box_.clamp(x));
    case Kind::IdealizedCell: return cell_phi(x);
    case Kind::Custom: return custom_phi_(x);
  }
  return 0.0;
}

Vec3 ImplicitSurface::grad_phi(const Vec3& x) const {
  switch (kind_) {
    case Kind::Sphere: {
      const Vec3 d = x - center_;
      const double r = d.norm();
      if (r == 0.0) return Vec3::Zero();
      return d / r;
    }
    case Kind::Spindle: return spindle_grad(box_.clamp(x));
    case Kind::IdealizedCell: return cell_grad(x);
    case Kind::Custom: return custom_grad_(x);
  }
  return Vec3::Zero();
}

bool ImplicitSurface::is_degenerate(const Vec3& x) const { return grad_phi(x).norm() < c0_; }

Vec3 ImplicitSurface::normal(const Vec3& x) const {
  const Vec3 g = grad_phi(x);
  const double n = g.norm();
  if (n < c0_) throw DegenerateGradient("|grad phi| below lower bound at a surface normal query");
  return g / n;
}

SurfacePoint ImplicitSurface::project(const Vec3& x, int max_iter, double tol) const {
  Vec3 p = x;
  double f = phi(p);
  for (int it = 0; it < max_iter && std::abs(f) > tol; ++it) {
    const Vec3 g = grad_phi(p);
    const double g2 = g.squaredNorm();
    if (g2 < c0_ * c0_) throw DegenerateGradient("degenerate gradient during projection");
    const Vec3 step = f * g / g2;
    double damping = 1.0;
    Vec3 trial = p - step;
    double ft = phi(trial);
    while (std::abs(ft) >= std::abs(f) && damping > 1e-6) {
      damping *= 0.5;
      trial = p - damping * step;
      ft = phi(trial);
    }
    p = trial;
    f = ft;
  }
  if (std::abs(f) > tol) throw NoConvergence("closest-point projection did not converge", std::abs(f), max_iter);
  return {p, normal(p)};
}

GradientAudit audit_gradient_bound(const ImplicitSurface& surface, int n_samples, double width) {
  GradientAudit audit;
  audit.min_norm = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= n_samples; ++i) {
    const Vec3 x = halton_point(surface.box(), i);
    const Vec3 g = surface.grad_phi(x);
    const double gn = g.norm();
    const double f = std::abs(surface.phi(x));
    if (gn > 0 && f / gn >= width) continue;
    if (gn == 0 && f >= width) continue;
    ++audit.samples_in_band;
    audit.min_norm = std::min(audit.min_norm, gn);
    if (gn < surface.min_gradient()) ++audit.degenerate;
  }
  return audit;
}

bool surface_inside_box(const ImplicitSurface& surface, int n, double tol) {
  const Box& b = surface.box();
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
          Vec3 x;
          x[axis] = side == 0 ? b.lo(axis) : b.hi(axis);
          x[u] = b.lo(u) + b.extent(u) * i / n;
          x[v] = b.lo(v) + b.extent(v) * j / n;
          if (surface.phi(x) < -tol) return false;
        }
      }
    }
  }
  return true;
}

Vec3 halton_point(const Box& box, int i) {
  return {box.lo(0) + box.extent(0) * radical_inverse(i, 2),
          box.lo(1) + box.extent(1) * radical_inverse(i, 3),
          box.lo(2) + box.extent(2) * radical_inverse(i, 5)};
}

}  // namespace surfpf

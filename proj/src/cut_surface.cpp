#include "surfpf/cut_surface.hpp"

#include <algorithm>
#include <cmath>

#include "surfpf/errors.hpp"

namespace surfpf {

double triangle_area(const Triangle& tri) {
  return 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
}

TetGeometry TetGeometry::from(const std::array<Vec3, 4>& x) {
  TetGeometry g;
  g.x = x;
  Eigen::Matrix3d jac;
  jac.col(0) = x[1] - x[0];
  jac.col(1) = x[2] - x[0];
  jac.col(2) = x[3] - x[0];
  g.volume = std::abs(jac.determinant()) / 6.0;
  g.inverse_jacobian = jac.inverse();
  g.grad_lambda[0] = Vec3::Zero();
  for (int i = 0; i < 3; ++i) {
    g.grad_lambda[i + 1] = g.inverse_jacobian.row(i).transpose();
    g.grad_lambda[0] -= g.grad_lambda[i + 1];
  }
  return g;
}

std::array<double, 4> TetGeometry::barycentric(const Vec3& p) const {
  const Vec3 l = inverse_jacobian * (p - x[0]);
  return {1.0 - l[0] - l[1] - l[2], l[0], l[1], l[2]};
}

double TetGeometry::longest_edge() const {
  double d = 0;
  for (const auto& e : kTetEdges) d = std::max(d, (x[e[0]] - x[e[1]]).norm());
  return d;
}

Vec3 TetGeometry::longest_edge_direction() const {
  Vec3 best = Vec3::UnitX();
  double d = -1;
  for (const auto& e : kTetEdges) {
    const Vec3 v = x[e[1]] - x[e[0]];
    if (v.norm() > d) {
      d = v.norm();
      best = v / d;
    }
  }
  return best;
}

CutPolygon extract_cut(const std::array<Vec3, 4>& x, const std::array<double, 4>& phi) {
  CutPolygon cut;
  std::array<int, 4> neg{}, pos{};
  int nn = 0, np = 0;
  for (int i = 0; i < 4; ++i) {
    if (is_negative(phi[i])) neg[nn++] = i;
    else pos[np++] = i;
  }
  if (nn == 0 || np == 0) return cut;

  auto root = [&](int a, int b) -> Vec3 {
    const double t = phi[a] / (phi[a] - phi[b]);
    return x[a] + t * (x[b] - x[a]);
  };

  if (nn == 1 || np == 1) {
    const int lone = nn == 1 ? neg[0] : pos[0];
    const auto& others = nn == 1 ? pos : neg;
    cut.count = 1;
    cut.triangles[0] = {root(lone, others[0]), root(lone, others[1]), root(lone, others[2])};
  } else {
    const int a = neg[0], b = neg[1], c = pos[0], d = pos[1];
    const Vec3 ac = root(a, c), ad = root(a, d), bd = root(b, d), bc = root(b, c);
    cut.count = 2;
    if ((ac - bd).squaredNorm() <= (ad - bc).squaredNorm()) {
      cut.triangles[0] = {ac, ad, bd};
      cut.triangles[1] = {ac, bd, bc};
    } else {
      cut.triangles[0] = {ad, bd, bc};
      cut.triangles[1] = {ad, bc, ac};
    }
  }

  const TetGeometry geo = TetGeometry::from(x);
  Vec3 grad = Vec3::Zero();
  for (int i = 0; i < 4; ++i) grad += phi[i] * geo.grad_lambda[i];
  for (int k = 0; k < cut.count; ++k) {
    Triangle& t = cut.triangles[k];
    if ((t[1] - t[0]).cross(t[2] - t[0]).dot(grad) < 0) std::swap(t[1], t[2]);
  }
  return cut;
}

QuadratureRule surface_quadrature(const Triangle& tri, int order) {
  struct Point {
    double l0, l1, l2, w;
  };
  std::vector<Point> ref;
  switch (order) {
    case 1: ref = {{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0}}; break;
    case 2: {
      const double a = 1.0 / 6, b = 2.0 / 3, w = 1.0 / 3;
      ref = {{b, a, a, w}, {a, b, a, w}, {a, a, b, w}};
      break;
    }
    case 3:
    case 4: {
      const double a1 = 0.445948490915965, b1 = 1 - 2 * a1, w1 = 0.223381589678011;
      const double a2 = 0.091576213509771, b2 = 1 - 2 * a2, w2 = 0.109951743655322;
      ref = {{b1, a1, a1, w1}, {a1, b1, a1, w1}, {a1, a1, b1, w1},
             {b2, a2, a2, w2}, {a2, b2, a2, w2}, {a2, a2, b2, w2}};
      break;
    }
    default: throw ConfigError("surface quadrature order must be in 1..4");
  }
  const double area = triangle_area(tri);
  QuadratureRule rule;
  for (const auto& p : ref) {
    rule.points.push_back(p.l0 * tri[0] + p.l1 * tri[1] + p.l2 * tri[2]);
    rule.weights.push_back(p.w * area);
  }
  return rule;
}

QuadratureRule tet_quadrature(const std::array<Vec3, 4>& x, int order) {
  QuadratureRule rule;
  const double vol = std::abs((x[1] - x[0]).dot((x[2] - x[0]).cross(x[3] - x[0]))) / 6.0;
  if (order == 1) {
    rule.points.push_back(0.25 * (x[0] + x[1] + x[2] + x[3]));
    rule.weights.push_back(vol);
  } else if (order == 2) {
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    for (int i = 0; i < 4; ++i) {
      Vec3 p = Vec3::Zero();
      for (int j = 0; j < 4; ++j) p += (i == j ? a : b) * x[j];
      rule.points.push_back(p);
      rule.weights.push_back(0.25 * vol);
    }
  } else {
    throw ConfigError("volume quadrature order must be 1 or 2");
  }
  return rule;
}

std::array<Vec3, 10> p2_nodes(const std::array<Vec3, 4>& x) {
  std::array<Vec3, 10> n;
  for (int i = 0; i < 4; ++i) n[i] = x[i];
  for (int e = 0; e < 6; ++e) n[4 + e] = 0.5 * (x[kTetEdges[e][0]] + x[kTetEdges[e][1]]);
  return n;
}

std::array<std::array<int, 4>, 8> red_children(const std::array<Vec3, 10>& nodes) {
  // Midpoint node ids: 4=m01 5=m02 6=m03 7=m12 8=m13 9=m23.
  std::array<std::array<int, 4>, 8> c{};
  c[0] = {0, 4, 5, 6};
  c[1] = {4, 1, 7, 8};
  c[2] = {5, 7, 2, 9};
  c[3] = {6, 8, 9, 3};
  const std::array<std::array<int, 2>, 3> diagonals{{{4, 9}, {5, 8}, {6, 7}}};
  int best = 0;
  double best_len = std::numeric_limits<double>::infinity();
  for (int d = 0; d < 3; ++d) {
    const double len = (nodes[diagonals[d][0]] - nodes[diagonals[d][1]]).squaredNorm();
    if (len < best_len) {
      best_len = len;
      best = d;
    }
  }
  const auto [p, q] = diagonals[best];
  const auto& r = diagonals[(best + 1) % 3];
  const auto& s = diagonals[(best + 2) % 3];
  const std::array<int, 4> ring{r[0], s[0], r[1], s[1]};
  for (int k = 0; k < 4; ++k) c[4 + k] = {p, q, ring[k], ring[(k + 1) % 4]};
  return c;
}

DiscreteNormalField::DiscreteNormalField(const BackgroundMesh& mesh, const Band& band,
                                         const LevelsetInterpolant& phi_h) {
  geometry_.reserve(band.tet_ids.size());
  values_.reserve(band.tet_ids.size());
  for (int t : band.tet_ids) {
    std::array<Vec3, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = mesh.vertices[mesh.tets[t][i]];
    geometry_.push_back(TetGeometry::from(x));
    values_.push_back(phi_h.tet_values(t));
  }
}

Vec3 DiscreteNormalField::gradient(int band_index, const Vec3& x) const {
  const TetGeometry& g = geometry_[band_index];
  const auto& v = values_[band_index];
  const auto l = g.barycentric(x);
  Vec3 grad = Vec3::Zero();
  for (int i = 0; i < 4; ++i) grad += v[i] * (4.0 * l[i] - 1.0) * g.grad_lambda[i];
  for (int e = 0; e < 6; ++e) {
    const int a = kTetEdges[e][0], b = kTetEdges[e][1];
    grad += v[4 + e] * 4.0 * (l[a] * g.grad_lambda[b] + l[b] * g.grad_lambda[a]);
  }
  return grad;
}

Vec3 DiscreteNormalField::normal(int band_index, const Vec3& x) const {
  Vec3 grad = gradient(band_index, x);
  double n = grad.norm();
  if (n < 1e-12) {
    const TetGeometry& g = geometry_[band_index];
    grad = gradient(band_index, x + 1e-10 * g.longest_edge() * g.longest_edge_direction());
    n = grad.norm();
    if (n < 1e-12) throw DegenerateGradient("discrete normal undefined: P2 level-set gradient vanishes");
  }
  return grad / n;
}

double DiscreteSurface::area() const {
  double a = 0;
  for (const auto& t : triangles) a += triangle_area(t.x);
  return a;
}

double surface_area(const DiscreteSurface& surface) { return surface.area(); }

DiscreteSurface extract_surface(const BackgroundMesh& mesh, const Band& band,
                                const LevelsetInterpolant& phi_h, double area_eps_factor) {
  DiscreteSurface surface;
  surface.area_eps = area_eps_factor * band.h * band.h;
  surface.offsets.reserve(band.tet_ids.size() + 1);
  surface.offsets.push_back(0);
  for (int b = 0; b < static_cast<int>(band.tet_ids.size()); ++b) {
    const int t = band.tet_ids[b];
    std::array<Vec3, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = mesh.vertices[mesh.tets[t][i]];
    const auto nodes = p2_nodes(x);
    const auto values = phi_h.tet_values(t);
    for (const auto& child : red_children(nodes)) {
      std::array<Vec3, 4> cx;
      std::array<double, 4> cv;
      for (int i = 0; i < 4; ++i) {
        cx[i] = nodes[child[i]];
        cv[i] = values[child[i]];
      }
      const CutPolygon cut = extract_cut(cx, cv);
      for (int k = 0; k < cut.count; ++k) {
        const double a = triangle_area(cut.triangles[k]);
        if (a < surface.area_eps) {
          surface.dropped_area += a;
          continue;
        }
        surface.triangles.push_back({cut.triangles[k], b});
      }
    }
    surface.offsets.push_back(static_cast<int>(surface.triangles.size()));
  }
  return surface;
}

}  // namespace surfpf

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "surfpf/cut_surface.hpp"
#include "surfpf/errors.hpp"
#include "surfpf/trace_fe.hpp"

using namespace surfpf;

namespace {

const std::array<Vec3, 4> kUnitTet{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};

Vec3 unit_normal(const Triangle& t) { return (t[1] - t[0]).cross(t[2] - t[0]).normalized(); }

double signed_distance_sphere(const Vec3& x) { return x.norm() - 1.0; }

std::unique_ptr<TraceSpace> sphere_space(int level) {
  DiscretizationOptions o;
  o.level = level;
  return TraceSpace::build(ImplicitSurface::sphere(), o);
}

}  // namespace

TEST_CASE("no sign change gives no cut") {
  CHECK(extract_cut(kUnitTet, {1, 2, 3, 4}).count == 0);
  CHECK(extract_cut(kUnitTet, {-1, -2, -3, -4}).count == 0);
}

TEST_CASE("one negative vertex gives a triangle at the linear roots") {
  const CutPolygon c = extract_cut(kUnitTet, {-1, 1, 1, 1});
  REQUIRE(c.count == 1);
  // Roots at the edge midpoints from vertex 0: equilateral with side sqrt(2)/2.
  const Triangle& t = c.triangles[0];
  for (const Vec3& p : t) {
    CHECK(std::abs(p.sum() - 0.5) < 1e-15);
    CHECK(p.minCoeff() >= 0.0);
  }
  CHECK(triangle_area(t) == doctest::Approx(std::sqrt(3.0) / 8.0));
  // Oriented toward phi > 0, i.e. away from the origin.
  CHECK(unit_normal(t).dot(Vec3(1, 1, 1)) > 0);
}

TEST_CASE("uneven values move the roots along the edges") {
  const CutPolygon c = extract_cut(kUnitTet, {-3, 1, 1, 1});
  REQUIRE(c.count == 1);
  for (const Vec3& p : c.triangles[0]) CHECK(p.sum() == doctest::Approx(0.75));
}

TEST_CASE("three negative vertices are the mirrored case") {
  const CutPolygon c = extract_cut(kUnitTet, {1, -1, -1, -1});
  REQUIRE(c.count == 1);
  CHECK(unit_normal(c.triangles[0]).dot(Vec3(1, 1, 1)) < 0);
}

TEST_CASE("two negative vertices give a quad of the plane section") {
  // phi = x + y - 1/2 on the unit tet: section is a sqrt(2)/2 x 1/2 rectangle.
  std::array<double, 4> phi;
  for (int i = 0; i < 4; ++i) phi[i] = kUnitTet[i][0] + kUnitTet[i][1] - 0.5;
  const CutPolygon c = extract_cut(kUnitTet, phi);
  REQUIRE(c.count == 2);
  const double area = triangle_area(c.triangles[0]) + triangle_area(c.triangles[1]);
  CHECK(area == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-12));
  const Vec3 n = Vec3(1, 1, 0).normalized();
  for (const auto& t : c.triangles) {
    CHECK((unit_normal(t) - n).norm() < 1e-12);
    for (const Vec3& p : t) CHECK(std::abs(p[0] + p[1] - 0.5) < 1e-15);
  }
}

TEST_CASE("zero values count as negative") {
  // A vertex exactly on the surface sits on the negative side.
  const CutPolygon c = extract_cut(kUnitTet, {0, 1, 1, 1});
  REQUIRE(c.count == 1);
  CHECK(triangle_area(c.triangles[0]) == 0.0);
  CHECK(extract_cut(kUnitTet, {0, -1, -1, -1}).count == 0);
}

TEST_CASE("triangle quadrature") {
  const Triangle ref{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  const QuadratureRule one = surface_quadrature(ref, 1);
  REQUIRE(one.points.size() == 1);
  CHECK(one.weights[0] == doctest::Approx(0.5));
  CHECK((one.points[0] - Vec3(1.0 / 3, 1.0 / 3, 0)).norm() < 1e-15);

  for (int order = 1; order <= 4; ++order) {
    const QuadratureRule q = surface_quadrature(ref, order);
    double w = 0;
    for (double wi : q.weights) w += wi;
    CHECK(w == doctest::Approx(0.5).epsilon(1e-14));
  }
  // int x y = 1/24 and int x^2 y^2 = 1/180 on the reference triangle.
  for (int order = 2; order <= 4; ++order) {
    const QuadratureRule q = surface_quadrature(ref, order);
    double s = 0;
    for (std::size_t i = 0; i < q.points.size(); ++i) s += q.weights[i] * q.points[i][0] * q.points[i][1];
    CHECK(s == doctest::Approx(1.0 / 24).epsilon(1e-13));
  }
  const QuadratureRule q4 = surface_quadrature(ref, 4);
  double s = 0;
  for (std::size_t i = 0; i < q4.points.size(); ++i)
    s += q4.weights[i] * std::pow(q4.points[i][0] * q4.points[i][1], 2);
  CHECK(s == doctest::Approx(1.0 / 180).epsilon(1e-13));
  CHECK_THROWS(surface_quadrature(ref, 5));
}

TEST_CASE("tetrahedron quadrature") {
  for (int order : {1, 2}) {
    const QuadratureRule q = tet_quadrature(kUnitTet, order);
    double w = 0, x = 0, xx = 0;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      w += q.weights[i];
      x += q.weights[i] * q.points[i][0];
      xx += q.weights[i] * q.points[i][0] * q.points[i][1];
    }
    CHECK(w == doctest::Approx(1.0 / 6));
    CHECK(x == doctest::Approx(1.0 / 24));
    if (order == 2) CHECK(xx == doctest::Approx(1.0 / 120));
  }
}

TEST_CASE("red refinement partitions the tetrahedron") {
  const auto nodes = p2_nodes(kUnitTet);
  double v = 0;
  for (const auto& c : red_children(nodes)) {
    std::array<Vec3, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = nodes[c[i]];
    const double vol = TetGeometry::from(x).volume;
    CHECK(vol == doctest::Approx(1.0 / 48));
    v += vol;
  }
  CHECK(v == doctest::Approx(1.0 / 6));
}

TEST_CASE("discrete normals are exact for affine and quadratic level sets") {
  Box b;
  b.bounds = {-1, 1, -1, 1, -1, 1};
  const auto plane = ImplicitSurface::custom([](const Vec3& x) { return x[0] + 2 * x[1] - x[2] - 0.1; },
                                             [](const Vec3&) { return Vec3(1, 2, -1); }, b);
  const auto quad = ImplicitSurface::custom(
      [](const Vec3& x) { return x[0] * x[0] + 2 * x[1] * x[1] + 3 * x[2] * x[2] - 0.5; },
      [](const Vec3& x) { return Vec3(2 * x[0], 4 * x[1], 6 * x[2]); }, b);
  for (const auto* s : {&plane, &quad}) {
    const BackgroundMesh m = refine_toward_surface(build_initial_mesh(b), *s, {2});
    const LevelsetInterpolant phi(m, *s);
    const Band band = select_band(m, phi);
    const DiscreteNormalField normals(m, band, phi);
    const DiscreteSurface g = extract_surface(m, band, phi);
    REQUIRE(g.n_triangles() > 0);
    for (const CutTriangle& t : g.triangles) {
      const Vec3 c = (t.x[0] + t.x[1] + t.x[2]) / 3;
      CHECK((normals.normal(t.band_index, c) - s->normal(c)).norm() < 1e-11);
    }
  }
}

TEST_CASE("sphere area converges at second order") {
  std::vector<double> err;
  for (int level : {3, 4, 5}) {
    const auto space = sphere_space(level);
    err.push_back(std::abs(space->gamma().area() - 4 * std::numbers::pi));
    CHECK(space->gamma().dropped_area <= 1e-10);
    CHECK(surface_area(space->gamma()) == doctest::Approx(space->gamma().area()));
  }
  CHECK(err.back() <= 1e-2);
  for (std::size_t i = 1; i < err.size(); ++i) {
    CHECK(err[i - 1] / err[i] >= 3.0);
    CHECK(err[i - 1] / err[i] <= 5.0);
  }
}

TEST_CASE("geometric errors of Gamma_h decay with h") {
  std::vector<double> dist, angle;
  for (int level : {3, 4, 5}) {
    const auto space = sphere_space(level);
    double dmax = 0, amax = 0;
    space->for_each_surface_point(
        [&](int band_index, const Vec3& x, double) {
          dmax = std::max(dmax, std::abs(signed_distance_sphere(x)));
          const Vec3 n = space->normals().normal(band_index, x);
          amax = std::max(amax, std::acos(std::min(1.0, n.dot(x.normalized()))));
        },
        2);
    dist.push_back(dmax);
    angle.push_back(amax);
  }
  for (std::size_t i = 1; i < dist.size(); ++i) {
    CAPTURE(i);
    CHECK(dist[i - 1] / dist[i] >= 3.0);
    CHECK(dist[i - 1] / dist[i] <= 5.0);
    // P2 normals: the angle error drops by at least the linear rate.
    CHECK(angle[i - 1] / angle[i] >= 2.0);
  }
  CHECK(dist.back() < 1e-3);
}

TEST_CASE("surface triangles stay inside their parent tets") {
  const auto space = sphere_space(3);
  const auto& g = space->gamma();
  REQUIRE(static_cast<int>(g.offsets.size()) == space->n_band_tets() + 1);
  for (int b = 0; b < space->n_band_tets(); ++b) {
    const TetGeometry& geo = space->normals().geometry(b);
    for (int k = g.offsets[b]; k < g.offsets[b + 1]; ++k) {
      CHECK(g.triangles[k].band_index == b);
      for (const Vec3& p : g.triangles[k].x)
        for (double l : geo.barycentric(p)) CHECK(l >= -1e-12);
    }
  }
}

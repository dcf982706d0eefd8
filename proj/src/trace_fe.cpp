#include "surfpf/trace_fe.hpp"

#include <algorithm>
#include <random>

#include "surfpf/errors.hpp"

namespace surfpf {

namespace {

constexpr std::array<std::array<int, 2>, 10> kUpper{
    {{0, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 3}}};

}  // namespace

DofMap::DofMap(const Band& band, int n_vertices) : global_of_(n_vertices, -1), vertex_of_(band.vertex_ids) {
  for (int i = 0; i < static_cast<int>(vertex_of_.size()); ++i) global_of_[vertex_of_[i]] = i;
}

std::unique_ptr<TraceSpace> TraceSpace::build(const ImplicitSurface& surface, const DiscretizationOptions& options) {
  return std::unique_ptr<TraceSpace>(new TraceSpace(surface, options));
}

TraceSpace::TraceSpace(const ImplicitSurface& surface, const DiscretizationOptions& options)
    : surface_(surface), options_(options) {
  if (options.surface_order < 1 || options.surface_order > 4)
    throw ConfigError("quadrature.surface_order must be in 1..4");
  if (options.volume_order < 1 || options.volume_order > 2)
    throw ConfigError("quadrature.volume_order must be 1 or 2");

  mesh_ = refine_toward_surface(build_initial_mesh(surface_.box(), options.cells), surface_,
                                {options.level, options.max_tets});
  const LevelsetInterpolant phi_h(mesh_, surface_);
  band_ = select_band(mesh_, phi_h);
  gamma_ = extract_surface(mesh_, band_, phi_h);
  normals_ = DiscreteNormalField(mesh_, band_, phi_h);
  dofs_ = DofMap(band_, mesh_.n_vertices());

  const int n = dofs_.n_dofs();
  local_dofs_.reserve(band_.tet_ids.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(16 * band_.tet_ids.size());
  for (int t : band_.tet_ids) {
    std::array<int, 4> ld{};
    for (int i = 0; i < 4; ++i) ld[i] = dofs_.global_of(mesh_.tets[t][i]);
    local_dofs_.push_back(ld);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) triplets.emplace_back(ld[i], ld[j], 0.0);
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(triplets.begin(), triplets.end());
  pattern_.makeCompressed();

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  scatter_index_.reserve(local_dofs_.size());
  for (const auto& ld : local_dofs_) {
    std::array<int, 16> idx{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const int* pos = std::lower_bound(inner + outer[ld[i]], inner + outer[ld[i] + 1], ld[j]);
        idx[4 * i + j] = static_cast<int>(pos - inner);
      }
    scatter_index_.push_back(idx);
  }
}

SparseOperator TraceSpace::empty_operator(bool symmetric) const {
  SparseOperator op;
  op.matrix = pattern_;
  std::fill(op.matrix.valuePtr(), op.matrix.valuePtr() + op.matrix.nonZeros(), 0.0);
  op.symmetric = symmetric;
  return op;
}

void TraceSpace::scatter(SparseOperator& op, int band_index, const Eigen::Matrix4d& local) const {
  double* values = op.matrix.valuePtr();
  const auto& idx = scatter_index_[band_index];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) values[idx[4 * i + j]] += local(i, j);
}

void TraceSpace::for_each_surface_point(const std::function<void(int, const Vec3&, double)>& f, int order) const {
  if (order <= 0) order = options_.surface_order;
  for (int b = 0; b < n_band_tets(); ++b) {
    for (int k = gamma_.offsets[b]; k < gamma_.offsets[b + 1]; ++k) {
      const QuadratureRule rule = surface_quadrature(gamma_.triangles[k].x, order);
      for (std::size_t q = 0; q < rule.points.size(); ++q) f(b, rule.points[q], rule.weights[q]);
    }
  }
}

SparseOperator TraceSpace::assemble_surface_mass() const {
  SparseOperator op = empty_operator(true);
  for (int b = 0; b < n_band_tets(); ++b) {
    const TetGeometry& geo = normals_.geometry(b);
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (int k = gamma_.offsets[b]; k < gamma_.offsets[b + 1]; ++k) {
      const QuadratureRule rule = surface_quadrature(gamma_.triangles[k].x, options_.surface_order);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto l = geo.barycentric(rule.points[q]);
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) local(i, j) += rule.weights[q] * l[i] * l[j];
      }
    }
    scatter(op, b, local);
  }
  return op;
}

SparseOperator TraceSpace::assemble_tangential_stiffness() const {
  SparseOperator op = empty_operator(true);
  for (int b = 0; b < n_band_tets(); ++b) {
    const TetGeometry& geo = normals_.geometry(b);
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (int k = gamma_.offsets[b]; k < gamma_.offsets[b + 1]; ++k) {
      const QuadratureRule rule = surface_quadrature(gamma_.triangles[k].x, options_.surface_order);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec3 n = normals_.normal(b, rule.points[q]);
        std::array<Vec3, 4> pg;
        for (int i = 0; i < 4; ++i) pg[i] = geo.grad_lambda[i] - n.dot(geo.grad_lambda[i]) * n;
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) local(i, j) += rule.weights[q] * pg[i].dot(pg[j]);
      }
    }
    scatter(op, b, local);
  }
  return op;
}

const std::vector<TraceSpace::WeightedPoint>& TraceSpace::weighted_points() const {
  if (!weighted_points_.empty()) return weighted_points_;
  std::vector<WeightedPoint> points;
  for (int b = 0; b < n_band_tets(); ++b) {
    const TetGeometry& geo = normals_.geometry(b);
    for (int k = gamma_.offsets[b]; k < gamma_.offsets[b + 1]; ++k) {
      const QuadratureRule rule = surface_quadrature(gamma_.triangles[k].x, options_.surface_order);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec3 n = normals_.normal(b, rule.points[q]);
        std::array<Vec3, 4> pg;
        for (int i = 0; i < 4; ++i) pg[i] = geo.grad_lambda[i] - n.dot(geo.grad_lambda[i]) * n;
        WeightedPoint p{b, geo.barycentric(rule.points[q]), rule.weights[q], {}};
        for (int e = 0; e < 10; ++e) p.gram[e] = pg[kUpper[e][0]].dot(pg[kUpper[e][1]]);
        points.push_back(p);
      }
    }
  }
  weighted_points_ = std::move(points);
  return weighted_points_;
}

SparseOperator TraceSpace::assemble_tangential_stiffness(const Eigen::VectorXd& field,
                                                         const std::function<double(double)>& map) const {
  if (field.size() != n_dofs()) throw Error("weight field has the wrong length");
  SparseOperator op = empty_operator(true);
  const auto& points = weighted_points();
  std::size_t q = 0;
  for (int b = 0; b < n_band_tets(); ++b) {
    const auto& ld = local_dofs_[b];
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (; q < points.size() && points[q].band_index == b; ++q) {
      const WeightedPoint& p = points[q];
      double u = 0;
      for (int i = 0; i < 4; ++i) u += p.lambda[i] * field[ld[i]];
      const double w = map(u);
      if (w < -1e-12) throw NegativeWeight("negative stiffness weight at a surface quadrature point");
      for (int e = 0; e < 10; ++e) {
        const auto [i, j] = kUpper[e];
        const double v = w * p.weight * p.gram[e];
        local(i, j) += v;
        if (i != j) local(j, i) += v;
      }
    }
    scatter(op, b, local);
  }
  return op;
}

SparseOperator TraceSpace::assemble_normal_stabilization() const {
  SparseOperator op = empty_operator(true);
  for (int b = 0; b < n_band_tets(); ++b) {
    const TetGeometry& geo = normals_.geometry(b);
    const QuadratureRule rule = tet_quadrature(geo.x, options_.volume_order);
    Eigen::Matrix4d local = Eigen::Matrix4d::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Vec3 n = normals_.normal(b, rule.points[q]);
      std::array<double, 4> dn;
      for (int i = 0; i < 4; ++i) dn[i] = n.dot(geo.grad_lambda[i]);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) local(i, j) += rule.weights[q] * dn[i] * dn[j];
    }
    scatter(op, b, local);
  }
  return op;
}

Eigen::VectorXd TraceSpace::assemble_surface_load(const SpaceFn& g) const {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_dofs());
  for_each_surface_point([&](int b, const Vec3& x, double w) {
    const auto l = normals_.geometry(b).barycentric(x);
    const double gx = g(x) * w;
    const auto& ld = local_dofs_[b];
    for (int i = 0; i < 4; ++i) rhs[ld[i]] += gx * l[i];
  });
  return rhs;
}

FieldVector TraceSpace::interpolate(const SpaceFn& u, FieldTag tag) const {
  FieldVector f{Eigen::VectorXd(n_dofs()), tag};
  for (int i = 0; i < n_dofs(); ++i) f.values[i] = u(mesh_.vertices[dofs_.vertex_of(i)]);
  return f;
}

FieldVector TraceSpace::interpolate_normal_extension(const SpaceFn& u, FieldTag tag) const {
  FieldVector f{Eigen::VectorXd(n_dofs()), tag};
  for (int i = 0; i < n_dofs(); ++i) f.values[i] = u(surface_.project(mesh_.vertices[dofs_.vertex_of(i)]).x);
  return f;
}

FieldVector TraceSpace::random_field(std::uint64_t seed, FieldTag tag) const {
  std::mt19937_64 gen(seed);
  FieldVector f{Eigen::VectorXd(n_dofs()), tag};
  for (int i = 0; i < n_dofs(); ++i) f.values[i] = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return f;
}

std::array<double, 3> TraceSpace::triangle_values(const Eigen::VectorXd& u, int triangle) const {
  const CutTriangle& tri = gamma_.triangles[triangle];
  return {evaluate(u, tri.band_index, tri.x[0]), evaluate(u, tri.band_index, tri.x[1]),
          evaluate(u, tri.band_index, tri.x[2])};
}

double TraceSpace::evaluate(const Eigen::VectorXd& u, int band_index, const Vec3& x) const {
  const auto l = normals_.geometry(band_index).barycentric(x);
  const auto& ld = local_dofs_[band_index];
  return l[0] * u[ld[0]] + l[1] * u[ld[1]] + l[2] * u[ld[2]] + l[3] * u[ld[3]];
}

}  // namespace surfpf

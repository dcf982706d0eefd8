#include "surfpf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "surfpf/errors.hpp"

namespace surfpf {

namespace {

Eigen::VectorXd nodal_f0(const Eigen::VectorXd& u, double xi) {
  return u.unaryExpr([xi](double v) { return f0(v, xi); });
}

double quadratic_form(const SparseOperator& op, const Eigen::VectorXd& u) { return u.dot(op.matrix * u); }

// Area of the part of a triangle where the linear function with vertex
// values f exceeds zero.
double positive_fraction(const std::array<double, 3>& f) {
  int np = 0;
  for (double v : f) np += v > 0.0;
  if (np == 0) return 0.0;
  if (np == 3) return 1.0;
  const bool lone_positive = np == 1;
  int lone = 0;
  for (int i = 0; i < 3; ++i)
    if ((f[i] > 0.0) == lone_positive) lone = i;
  const double a = f[lone], b = f[(lone + 1) % 3], c = f[(lone + 2) % 3];
  const double corner = (a / (a - b)) * (a / (a - c));
  return lone_positive ? corner : 1.0 - corner;
}

}  // namespace

double lyapunov_energy(const Operators& ops, const Eigen::VectorXd& u, const ModelParams& params) {
  const double ee = params.epsilon * params.epsilon;
  return ops.lumped_mass.dot(nodal_f0(u, params.xi)) + 0.5 * ee * quadratic_form(ops.stiffness, u);
}

double numerical_energy_ac(const Operators& ops, const Eigen::VectorXd& u_k, const Eigen::VectorXd& u_km1,
                           const ModelParams& params) {
  const double ee = params.epsilon * params.epsilon;
  const Eigen::VectorXd d = u_k - u_km1;
  const double bulk = ops.lumped_mass.dot(nodal_f0(u_k, params.xi)) + 0.5 * ee * quadratic_form(ops.stiffness, u_k) +
                      params.beta_s * quadratic_form(ops.mass, d);
  return params.alpha * bulk + ee * ops.h * quadratic_form(ops.stabilization, u_k);
}

double total_mass(const Operators& ops, const Eigen::VectorXd& c) { return ops.lumped_mass.dot(c); }

double l2_error(const TraceSpace& space, const Eigen::VectorXd& u_h, const TraceSpace::SpaceFn& exact,
                int quadrature_order) {
  double sum = 0.0;
  space.for_each_surface_point(
      [&](int b, const Vec3& x, double w) {
        const double e = space.evaluate(u_h, b, x) - exact(x);
        sum += w * e * e;
      },
      quadrature_order);
  return std::sqrt(sum);
}

void ErrorNorms::add(double dt, double error_l2) {
  max_ = std::max(max_, error_l2);
  sum_ += dt * error_l2 * error_l2;
  time_ += dt;
  ++samples_;
}

double ErrorNorms::l2_l2() const { return time_ > 0 ? std::sqrt(sum_ / time_) : 0.0; }

double band_area(const TraceSpace& space, const Eigen::VectorXd& u, double lo, double hi) {
  const DiscreteSurface& g = space.gamma();
  double area = 0.0;
  for (int k = 0; k < g.n_triangles(); ++k) {
    const auto v = space.triangle_values(u, k);
    const double a = triangle_area(g.triangles[k].x);
    const double above_lo = positive_fraction({v[0] - lo, v[1] - lo, v[2] - lo});
    const double above_hi = positive_fraction({v[0] - hi, v[1] - hi, v[2] - hi});
    area += a * (above_lo - above_hi);
  }
  return area;
}

double phase_area_fraction(const TraceSpace& space, const Eigen::VectorXd& u, double threshold) {
  const DiscreteSurface& g = space.gamma();
  double above = 0.0, total = 0.0;
  for (int k = 0; k < g.n_triangles(); ++k) {
    const auto v = space.triangle_values(u, k);
    const double a = triangle_area(g.triangles[k].x);
    above += a * positive_fraction({v[0] - threshold, v[1] - threshold, v[2] - threshold});
    total += a;
  }
  return total > 0 ? above / total : 0.0;
}

double contour_length(const TraceSpace& space, const Eigen::VectorXd& u, double level) {
  const DiscreteSurface& g = space.gamma();
  double length = 0.0;
  for (int k = 0; k < g.n_triangles(); ++k) {
    const auto v = space.triangle_values(u, k);
    const Triangle& x = g.triangles[k].x;
    std::array<Vec3, 2> ends;
    int n = 0;
    for (int e = 0; e < 3; ++e) {
      const int i = e, j = (e + 1) % 3;
      const double fi = v[i] - level, fj = v[j] - level;
      if ((fi > 0) != (fj > 0)) {
        const double t = fi / (fi - fj);
        if (n < 2) ends[n] = x[i] + t * (x[j] - x[i]);
        ++n;
      }
    }
    if (n == 2) length += (ends[1] - ends[0]).norm();
  }
  return length;
}

double interface_width_estimate(const TraceSpace& space, const Eigen::VectorXd& u) {
  const double area = band_area(space, u, 0.05, 0.95);
  if (!(area > 0)) throw NoInterface("no transition region with 0.05 < u < 0.95");
  const double length = contour_length(space, u, 0.5);
  if (!(length > 0)) throw NoInterface("the level line u = 0.5 is empty");
  return area / length;
}

std::string format_record(const TimeSeriesRecord& r) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  return num(r.t) + ',' + num(r.lyapunov_energy) + ',' + opt(r.numerical_energy) + ',' + opt(r.total_mass) + ',' +
         num(r.phase_area_fraction) + ',' + num(r.min_u) + ',' + num(r.max_u) + ',' + opt(r.interface_width) + ',' +
         std::to_string(r.solver_iters);
}

DiagnosticsWriter::DiagnosticsWriter(const std::string& path) : path_(path) {
  std::ofstream out(path_, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path_ + " for writing");
  out << kHeader << '\n';
}

void DiagnosticsWriter::write(const TimeSeriesRecord& record) {
  if (!records_.empty() && !(record.t > records_.back().t))
    throw Error("diagnostics records must have strictly increasing t");
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to " + path_);
  out << format_record(record) << '\n';
  if (!out) throw IoError("write to " + path_ + " failed");
  records_.push_back(record);
}

TimeSeriesRecord make_record(const Stepper& stepper, const TraceSpace& space, const Operators& ops,
                             int solver_iters) {
  const StepperState& s = stepper.state();
  const Eigen::VectorXd& u = s.u.values;
  TimeSeriesRecord r;
  r.t = s.t;
  r.lyapunov_energy = lyapunov_energy(ops, u, stepper.params());
  if (stepper.model() == Model::AllenCahn)
    r.numerical_energy = numerical_energy_ac(ops, u, s.u_prev.values, stepper.params());
  else
    r.total_mass = total_mass(ops, u);
  r.phase_area_fraction = phase_area_fraction(space, u);
  r.min_u = u.minCoeff();
  r.max_u = u.maxCoeff();
  try {
    r.interface_width = interface_width_estimate(space, u);
  } catch (const NoInterface&) {
  }
  r.solver_iters = solver_iters;
  return r;
}

}  // namespace surfpf

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "surfpf/diagnostics.hpp"
#include "surfpf/errors.hpp"

using namespace surfpf;
namespace fs = std::filesystem;

namespace {

struct Setup {
  std::unique_ptr<TraceSpace> space;
  Operators ops;
};

Setup sphere_setup(int level) {
  DiscretizationOptions o;
  o.level = level;
  Setup s;
  s.space = TraceSpace::build(ImplicitSurface::sphere(), o);
  s.ops = Operators::assemble(*s.space);
  return s;
}

double height(const Vec3& x) { return x[2] / x.norm(); }

Eigen::VectorXd tanh_profile(const TraceSpace& space, double delta) {
  return space.interpolate_normal_extension([delta](const Vec3& x) { return 0.5 * (1 + std::tanh(x[2] / delta)); })
      .values;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("Lyapunov energy of constant states") {
  const Setup s = sphere_setup(4);
  const ModelParams p;
  const int n = s.ops.n_dofs();
  CHECK(lyapunov_energy(s.ops, Eigen::VectorXd::Zero(n), p) == 0.0);
  CHECK(lyapunov_energy(s.ops, Eigen::VectorXd::Ones(n), p) == doctest::Approx(0.0).epsilon(1e-14));
  // f0(1/2) = 1/64 over the area of Gamma_h, close to 4 pi / 64.
  const double half = lyapunov_energy(s.ops, Eigen::VectorXd::Constant(n, 0.5), p);
  CHECK(half == doctest::Approx(s.space->gamma().area() / 64).epsilon(1e-12));
  CHECK(half == doctest::Approx(0.19635).epsilon(1e-2));
}

TEST_CASE("Lyapunov and numerical energies against their definitions") {
  const Setup s = sphere_setup(3);
  ModelParams p;
  p.epsilon = 0.2;
  p.alpha = 1.5;
  p.beta_s = 3.0;
  p.xi = 2.0;
  const Eigen::VectorXd u = s.space->random_field(1).values, v = s.space->random_field(2).values;
  const double ee = p.epsilon * p.epsilon;
  double bulk = 0;
  for (int i = 0; i < u.size(); ++i) bulk += s.ops.lumped_mass[i] * f0(u[i], p.xi);
  const double grad = 0.5 * ee * u.dot(s.ops.stiffness.apply(u));
  CHECK(lyapunov_energy(s.ops, u, p) == doctest::Approx(bulk + grad).epsilon(1e-12));
  const Eigen::VectorXd d = u - v;
  const double expected = p.alpha * (bulk + grad + p.beta_s * d.dot(s.ops.mass.apply(d))) +
                          ee * s.ops.h * u.dot(s.ops.stabilization.apply(u));
  CHECK(numerical_energy_ac(s.ops, u, v, p) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(numerical_energy_ac(s.ops, Eigen::VectorXd::Ones(u.size()), Eigen::VectorXd::Ones(u.size()), p) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("mass and L2 errors") {
  const Setup s = sphere_setup(3);
  const double area = s.space->gamma().area();
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(s.ops.n_dofs(), 0.3);
  CHECK(total_mass(s.ops, c) == doctest::Approx(0.3 * area).epsilon(1e-12));
  const double delta = 0.01;
  const Eigen::VectorXd offset = Eigen::VectorXd::Constant(s.ops.n_dofs(), 1.0 + delta);
  CHECK(l2_error(*s.space, offset, [](const Vec3&) { return 1.0; }) ==
        doctest::Approx(delta * std::sqrt(area)).epsilon(1e-10));
  // Linear functions are reproduced on every triangle.
  const auto lin = [](const Vec3& x) { return 0.2 + x[0] - 0.5 * x[2]; };
  CHECK(l2_error(*s.space, s.space->interpolate(lin).values, lin) < 1e-12);
}

TEST_CASE("running error norms") {
  ErrorNorms n;
  CHECK(n.samples() == 0);
  CHECK(n.l2_l2() == 0.0);
  n.add(0.5, 1.0);
  n.add(0.5, 3.0);
  n.add(1.0, 2.0);
  CHECK(n.samples() == 3);
  CHECK(n.linf_l2() == 3.0);
  // (0.5 + 4.5 + 4) / 2
  CHECK(n.l2_l2() == doctest::Approx(std::sqrt(4.5)));
}

TEST_CASE("phase fraction, band area and contour length") {
  const Setup s = sphere_setup(4);
  const Eigen::VectorXd z = s.space->interpolate_normal_extension(height).values;
  const double area = s.space->gamma().area();
  CHECK(phase_area_fraction(*s.space, z, 0.0) == doctest::Approx(0.5).epsilon(1e-3));
  // On the unit sphere the area above height a is 2 pi (1 - a).
  CHECK(phase_area_fraction(*s.space, z, 0.5) == doctest::Approx(0.25).epsilon(1e-2));
  CHECK(band_area(*s.space, z, -1.5, 1.5) == doctest::Approx(area).epsilon(1e-12));
  CHECK(band_area(*s.space, z, -0.5, 0.5) == doctest::Approx(0.5 * area).epsilon(1e-2));
  CHECK(contour_length(*s.space, z, 0.0) == doctest::Approx(2 * std::numbers::pi).epsilon(1e-2));
  CHECK(contour_length(*s.space, z, 0.6) == doctest::Approx(2 * std::numbers::pi * 0.8).epsilon(1e-2));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(s.ops.n_dofs());
  CHECK(phase_area_fraction(*s.space, one) == 1.0);
  CHECK(phase_area_fraction(*s.space, Eigen::VectorXd::Zero(s.ops.n_dofs())) == 0.0);
  CHECK(contour_length(*s.space, one) == 0.0);
}

TEST_CASE("interface width tracks the profile width") {
  const Setup s = sphere_setup(5);
  const double w1 = interface_width_estimate(*s.space, tanh_profile(*s.space, 0.05));
  const double w2 = interface_width_estimate(*s.space, tanh_profile(*s.space, 0.1));
  // Thin profile on a great circle: width = 2 atanh(0.9) delta.
  CHECK(w1 == doctest::Approx(2 * std::atanh(0.9) * 0.05).epsilon(0.1));
  CHECK(w2 / w1 == doctest::Approx(2.0).epsilon(0.1));
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(s.ops.n_dofs(), 0.7);
  CHECK_THROWS_AS(interface_width_estimate(*s.space, flat), NoInterface);
  CHECK_THROWS_AS(interface_width_estimate(*s.space, Eigen::VectorXd::Ones(s.ops.n_dofs())), NoInterface);
}

TEST_CASE("Cahn-Hilliard conserves mass from random data") {
  const Setup s = sphere_setup(4);
  ModelParams p;
  p.epsilon = 0.05;
  Stepper st(Model::CahnHilliard, *s.space, s.ops, p, SolverConfig::cahn_hilliard_default());
  st.initialize(s.space->random_field(1).values);
  const double m0 = total_mass(s.ops, st.state().u.values);
  double drift = 0;
  for (int k = 0; k < 100; ++k) {
    st.advance(0.01);
    drift = std::max(drift, std::abs(total_mass(s.ops, st.state().u.values) - m0));
  }
  CHECK(drift / m0 <= 1e-8);
}

TEST_CASE("records and the CSV writer") {
  const Setup s = sphere_setup(3);
  Stepper st(Model::AllenCahn, *s.space, s.ops, ModelParams{}, SolverConfig::allen_cahn_default());
  st.initialize(s.space->interpolate_normal_extension([](const Vec3& x) { return 0.5 + 0.5 * height(x); }).values);
  const TimeSeriesRecord r0 = make_record(st, *s.space, s.ops, 0);
  CHECK(r0.t == 0.0);
  CHECK(r0.numerical_energy.has_value());
  CHECK_FALSE(r0.total_mass.has_value());
  CHECK(r0.interface_width.has_value());
  CHECK(r0.min_u >= 0.0);
  CHECK(r0.max_u <= 1.0);
  CHECK(r0.phase_area_fraction == doctest::Approx(0.5).epsilon(1e-2));

  const fs::path dir = fs::temp_directory_path() / "surfpf_test_diagnostics";
  fs::create_directories(dir);
  const fs::path csv = dir / "diagnostics.csv";
  DiagnosticsWriter w(csv.string());
  w.write(r0);
  const StepReport rep = st.advance(0.1);
  const TimeSeriesRecord r1 = make_record(st, *s.space, s.ops, rep.iterations);
  w.write(r1);
  CHECK_THROWS(w.write(r0));
  CHECK(w.records().size() == 2);

  const auto lines = read_lines(csv);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == DiagnosticsWriter::kHeader);
  CHECK(lines[1] == format_record(r0));
  // Columns: 9 fields, an empty mass for Allen-Cahn, round-trip values.
  std::vector<std::string> cols;
  std::stringstream ss(lines[2]);
  for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
  if (lines[2].back() == ',') cols.push_back("");
  REQUIRE(cols.size() == 9);
  CHECK(cols[3].empty());
  CHECK(std::stod(cols[0]) == r1.t);
  CHECK(std::stod(cols[1]) == r1.lyapunov_energy);
  CHECK(std::stoi(cols[8]) == rep.iterations);

  TimeSeriesRecord blank;
  blank.t = 1.5;
  CHECK(format_record(blank) == "1.5,0,,,0,0,0,,0");
  CHECK_THROWS_AS(DiagnosticsWriter((dir / "missing" / "x.csv").string()), IoError);
  fs::remove_all(dir);
}

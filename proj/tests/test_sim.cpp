#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "surfpf/errors.hpp"
#include "surfpf/expression.hpp"
#include "surfpf/sim.hpp"
#include "surfpf/vtk.hpp"

using namespace surfpf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("surfpf_test_sim_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

RunConfig small_run(const fs::path& out, const std::string& extra = "") {
  return parse_config("mesh.level = 2\n"
                      "model.epsilon = 0.1\n"
                      "time.schedule = [0.3:0.1]\n"
                      "output.out_dir = " +
                      out.string() + "\n" + extra);
}

}  // namespace

TEST_CASE("config tokenizer") {
  const ConfigEntries e = tokenize_config(
      "# comment\n"
      "model.epsilon = 0.05   # trailing\n"
      "\n"
      "time.schedule = [1:0.1,\n"
      "                 2:0.5]\n");
  REQUIRE(e.size() == 2);
  CHECK(e[0].first == "model.epsilon");
  CHECK(e[0].second == "0.05");
  CHECK(e[1].first == "time.schedule");
  CHECK_THROWS_AS(tokenize_config("model.epsilon = 1\nmodel.epsilon = 2\n"), ConfigError);
  CHECK_THROWS_AS(tokenize_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(tokenize_config("time.schedule = [1:0.1,\n"), ConfigError);
}

TEST_CASE("config keys and values") {
  const RunConfig c = parse_config(
      "surface.kind = sphere\n"
      "surface.radius = 0.9\n"
      "surface.center = [0.1, 0, -0.1]\n"
      "domain.box = [-5/3, 5/3, -5/3, 5/3, -5/3, 5/3]\n"
      "mesh.level = 3\n"
      "model.type = cahn_hilliard\n"
      "model.epsilon = 0.02\n"
      "model.beta_s = 0.5\n"
      "model.first_step_beta = true\n"
      "initial.kind = expression\n"
      "initial.expression = 0.5 + 0.1*sin(3*x)*z\n"
      "solver.rel_tol = 1e-9\n"
      "output.vtk_every = 5\n");
  CHECK(c.radius == 0.9);
  CHECK((c.center - Vec3(0.1, 0, -0.1)).norm() == 0.0);
  REQUIRE(c.box.has_value());
  CHECK(c.box->lo(0) == doctest::Approx(-5.0 / 3));
  CHECK(c.level == 3);
  CHECK(c.model == Model::CahnHilliard);
  CHECK(c.params.epsilon == 0.02);
  CHECK(c.params.first_step_beta);
  CHECK(c.initial.kind == InitialCondition::Kind::Expression);
  // Solver defaults follow the model even when solver.* keys come first.
  CHECK(c.solver_config().method == SolverMethod::GMRES);
  CHECK(c.solver_config().rel_tol == 1e-9);
  CHECK(c.vtk_every == 5);

  CHECK_THROWS_AS(parse_config("model.epsilonn = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.epsilon = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.epsilon = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("surface.kind = torus\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("run.experiment = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("initial.kind = expression\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("initial.expression = sin(\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("model.type = ch\nsolver.method = cg\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/surfpf.cfg"), IoError);

  const auto& keys = config_keys();
  for (const char* k : {"run.experiment", "model.beta_s", "time.schedule", "validation.levels", "sweep.betas"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
}

TEST_CASE("time schedules") {
  CHECK(expand_schedule({{1.0, 0.25}}) == std::vector<double>{0.25, 0.25, 0.25, 0.25});
  const auto steps = expand_schedule({{1.0, 0.3}});
  REQUIRE(steps.size() == 4);
  CHECK(steps.back() == doctest::Approx(0.1));
  CHECK(expand_schedule({{1, 0.5}, {3, 1}}).size() == 4);

  const RunConfig a = parse_config("time.schedule = [10:1, 60:5]\n");
  CHECK(a.end_time() == 60);
  CHECK(expand_schedule(a.schedule).size() == 20);
  const RunConfig b = parse_config("time.schedule = [10:1, 60:5]\ntime.t_end = 20\n");
  REQUIRE(b.schedule.size() == 2);
  CHECK(b.schedule[1].end == 20);
  const RunConfig d = parse_config("time.t_end = 2\ntime.dt = 0.5\n");
  CHECK(expand_schedule(d.schedule) == std::vector<double>{0.5, 0.5, 0.5, 0.5});
  CHECK_THROWS_AS(parse_config("time.schedule = [2:0.1, 1:0.1]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("time.schedule = [1:0]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("time.schedule = []\n"), ConfigError);
}

TEST_CASE("experiment presets") {
  const RunConfig sphere = preset(Experiment::SphereAc, true);
  const std::vector<std::pair<double, double>> table{{10, 1}, {60, 5}, {1060, 10}, {3560, 50}, {13560, 100}, {22560, 200}};
  REQUIRE(sphere.schedule.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(sphere.schedule[i].end == table[i].first);
    CHECK(sphere.schedule[i].dt == table[i].second);
  }
  CHECK(sphere.level == 6);
  CHECK(sphere.params.epsilon == 0.01);
  CHECK(sphere.initial.kind == InitialCondition::Kind::Random);
  CHECK(preset(Experiment::SphereAc, false).end_time() == 400);

  const RunConfig cell = preset(Experiment::CellAc, true);
  REQUIRE(cell.schedule.size() == 3);
  CHECK(cell.schedule[0].end == 200);
  CHECK(cell.schedule[1].dt == 5);
  CHECK(cell.schedule[2].end == 23000);
  CHECK(cell.schedule[2].dt == 10);

  for (Experiment e : {Experiment::SphereCh, Experiment::SpindleCh, Experiment::CellCh}) {
    const RunConfig c = preset(e, true);
    CHECK(c.model == Model::CahnHilliard);
    REQUIRE(c.schedule.size() == 2);
    CHECK(c.schedule[0].end == 1);
    CHECK(c.schedule[0].dt == 0.01);
    CHECK(c.schedule[1].dt == 1);
  }
  CHECK(preset(Experiment::SphereCh, true).end_time() == 25000);
  CHECK(preset(Experiment::CellCh, true).end_time() == 36000);
  CHECK(preset(Experiment::SpindleAc, true).end_time() == 400);
  CHECK(preset(Experiment::SpindleAc, true).schedule[0].dt == 1);

  const RunConfig v = preset(Experiment::AcValidation, true);
  CHECK(v.levels == std::vector<int>{2, 3, 4, 5});
  CHECK(v.params.epsilon == 0.1);
  CHECK(v.validation_t_end == 5);
  CHECK(preset(Experiment::BetaSweep, false, Model::CahnHilliard).schedule[0].dt == 1);
  CHECK(preset(Experiment::BetaSweep, false, Model::AllenCahn).schedule[0].dt == 10);

  // File entries override the preset.
  const RunConfig o = parse_config("run.experiment = sphere_ac\nmesh.level = 3\ntime.t_end = 5\n");
  CHECK(o.experiment == Experiment::SphereAc);
  CHECK(o.level == 3);
  CHECK(o.end_time() == 5);
  CHECK(parse_experiment("cell_ch") == Experiment::CellCh);
  CHECK(to_string(Experiment::BetaSweep) == "beta_sweep");
}

TEST_CASE("expressions") {
  const Vec3 p(0.5, -2.0, 3.0);
  CHECK(Expression::parse("x + y * z")(p) == doctest::Approx(-5.5));
  CHECK(Expression::parse("(x + y) * z")(p) == doctest::Approx(-4.5));
  CHECK(Expression::parse("2^3^2")(p) == doctest::Approx(512));
  CHECK(Expression::parse("-x^2")(p) == doctest::Approx(-0.25));
  CHECK(Expression::parse("x1 - x2 + x3")(p) == doctest::Approx(5.5));
  CHECK(Expression::parse("sin(pi/2) + cos(0) + exp(0) + log(e)")(p) == doctest::Approx(4));
  CHECK(Expression::parse("sqrt(abs(y)) * tanh(0) + atan(1)")(p) == doctest::Approx(std::numbers::pi / 4));
  CHECK(Expression::parse("min(x, y) + max(x, z) + pow(2, 3) + atan2(1, 1)")(p) ==
        doctest::Approx(-2 + 3 + 8 + std::numbers::pi / 4));
  CHECK(Expression::parse("1e-3 * 2E2")(p) == doctest::Approx(0.2));
  CHECK(Expression::parse(" 0.5 ").text() == " 0.5 ");
  for (const char* bad : {"", "x +", "foo(x)", "sin x", "(x", "x)", "min(x)", "w", "1..2", "x $ y"})
    CHECK_THROWS_AS(Expression::parse(bad), ConfigError);
}

TEST_CASE("VTK snapshots round trip") {
  DiscretizationOptions o;
  o.level = 2;
  const auto space = TraceSpace::build(ImplicitSurface::idealized_cell(), o);
  const Eigen::VectorXd u = space->random_field(5).values;
  const Eigen::VectorXd z = space->interpolate([](const Vec3& x) { return x[2]; }).values;
  const fs::path dir = scratch("vtk");
  fs::create_directories(dir);
  const fs::path file = dir / "s.vtk";
  write_vtk_snapshot(*space, {{"eta", &u}, {"z", &z}}, file.string());
  const VtkSurface v = read_vtk_surface(file.string());
  const int n_tri = space->gamma().n_triangles();
  CHECK(static_cast<int>(v.triangles.size()) == n_tri);
  CHECK(v.points.size() == 3 * v.triangles.size());
  REQUIRE(v.field("eta") != nullptr);
  REQUIRE(v.field("z") != nullptr);
  CHECK(v.field("mu") == nullptr);
  const auto& eta = *v.field("eta");
  for (int k = 0; k < n_tri; ++k) {
    const auto vals = space->triangle_values(u, k);
    for (int i = 0; i < 3; ++i) {
      REQUIRE(eta[3 * k + i] == vals[i]);
      CHECK(v.points[v.triangles[k][i]] == space->gamma().triangles[k].x[i]);
    }
  }
  CHECK_THROWS_AS(read_vtk_surface((dir / "missing.vtk").string()), IoError);
  std::ofstream(dir / "bad.vtk") << "# vtk DataFile Version 3.0\nnonsense\n";
  CHECK_THROWS_AS(read_vtk_surface((dir / "bad.vtk").string()), IoError);
  CHECK_THROWS_AS(write_vtk_snapshot(*space, {{"eta", &u}}, (dir / "no" / "x.vtk").string()), IoError);
  fs::remove_all(dir);
}

TEST_CASE("a run writes diagnostics and snapshots") {
  const fs::path dir = scratch("run");
  const RunSummary s = run_simulation(small_run(dir, "output.vtk_every = 2\n"));
  CHECK(s.status == RunStatus::Completed);
  CHECK(s.steps == 3);
  CHECK(s.t_final == doctest::Approx(0.3));
  CHECK(s.records.size() == 4);
  CHECK(s.n_dofs > 0);
  const auto lines = lines_of(dir / "diagnostics.csv");
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == DiagnosticsWriter::kHeader);
  CHECK(fs::exists(dir / "snap_000000.vtk"));
  CHECK(fs::exists(dir / "snap_000002.vtk"));
  CHECK(fs::exists(dir / "snap_000003.vtk"));
  CHECK_FALSE(fs::exists(dir / "snap_000001.vtk"));
  CHECK_FALSE(fs::exists(dir / "final_state.vtk"));
  double prev = -1;
  for (const auto& r : s.records) {
    CHECK(r.t > prev);
    prev = r.t;
  }
  fs::remove_all(dir);
}

TEST_CASE("csv_every thins the file but keeps the last row") {
  const fs::path dir = scratch("every");
  run_simulation(small_run(dir, "output.csv_every = 2\n"));
  // t = 0, step 2, and the final step 3.
  CHECK(lines_of(dir / "diagnostics.csv").size() == 4);
  fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical outputs") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  run_simulation(small_run(a, "output.vtk_every = 3\n"));
  run_simulation(small_run(b, "output.vtk_every = 3\n"));
  CHECK(slurp(a / "diagnostics.csv") == slurp(b / "diagnostics.csv"));
  CHECK(slurp(a / "snap_000003.vtk") == slurp(b / "snap_000003.vtk"));
  const fs::path c = scratch("det_c");
  run_simulation(small_run(c, "run.seed = 2\n"));
  CHECK(slurp(a / "diagnostics.csv") != slurp(c / "diagnostics.csv"));
  for (const auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("a uniform Cahn-Hilliard state is stationary in the snapshots") {
  const fs::path dir = scratch("uniform");
  const RunSummary s = run_simulation(small_run(dir,
                                                "model.type = ch\n"
                                                "initial.kind = constant\n"
                                                "initial.value = 0.5\n"
                                                "output.vtk_every = 1\n"));
  CHECK(s.status == RunStatus::Completed);
  for (int k = 0; k <= 3; ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%06d.vtk", k);
    const VtkSurface v = read_vtk_surface((dir / name).string());
    REQUIRE(v.field("c") != nullptr);
    REQUIRE(v.field("mu") != nullptr);
    for (double c : *v.field("c")) CHECK(std::abs(c - 0.5) < 1e-10);
    for (double m : *v.field("mu")) CHECK(std::abs(m) < 1e-10);
  }
  fs::remove_all(dir);
}

TEST_CASE("observer stop, divergence flag and exit codes") {
  const fs::path dir = scratch("status");
  const RunSummary stopped =
      run_simulation(small_run(dir), [](const Stepper&, const TimeSeriesRecord& r) { return r.t < 0.15; });
  CHECK(stopped.status == RunStatus::Stopped);
  CHECK(stopped.steps == 2);

  const RunSummary diverged = run_simulation(small_run(dir, "run.divergence_factor = 1e-9\n"));
  CHECK(diverged.status == RunStatus::Diverged);
  CHECK(fs::exists(dir / "final_state.vtk"));

  CHECK(exit_code(RunStatus::Completed) == 0);
  CHECK(exit_code(RunStatus::Stopped) == 0);
  CHECK(exit_code(RunStatus::SolverFailed) == 3);
  CHECK(exit_code(RunStatus::NonFinite) == 4);
  CHECK(exit_code(RunStatus::Diverged) == 4);
  CHECK(exit_code(RunStatus::WallTimeExceeded) == 6);
  CHECK(exit_code_for_exception(ConfigError("x")) == 2);
  CHECK(exit_code_for_exception(IoError("x")) == 5);
  CHECK(exit_code_for_exception(SolverFailure("x")) == 3);
  CHECK(exit_code_for_exception(NonFiniteState("x")) == 4);
  CHECK(exit_code_for_exception(std::runtime_error("x")) == 1);
  CHECK(to_string(RunStatus::Diverged) != to_string(RunStatus::Completed));
  fs::remove_all(dir);
}

TEST_CASE("validation study writes per-level errors and rates") {
  const fs::path dir = scratch("validation");
  RunConfig c = parse_config("run.experiment = ac_validation\n"
                             "validation.levels = 2..3\n"
                             "validation.t_end = 0.5\n"
                             "output.out_dir = " +
                             dir.string() + "\n");
  const auto errs = run_validation(c);
  REQUIRE(errs.size() == 2);
  CHECK(errs[0].dt == 0.125);
  CHECK(errs[1].dt == 0.0625);
  CHECK(errs[1].u_l2_l2 < errs[0].u_l2_l2);
  CHECK(errs[1].n_dofs > errs[0].n_dofs);
  const auto lines = lines_of(dir / "convergence.csv");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "level,n_dofs,h,dt,u_linf_l2,u_l2_l2,rate_u_linf_l2,rate_u_l2_l2");
  CHECK(fs::exists(dir / "diagnostics_level2.csv"));
  CHECK(fs::exists(dir / "diagnostics_level3.csv"));
  CHECK(observed_rate(4.0, 1.0) == doctest::Approx(2.0));
  CHECK(parse_config("validation.levels = [2, 4]\n").levels == std::vector<int>{2, 4});
  fs::remove_all(dir);
}

TEST_CASE("beta sweep runs each value in its own directory") {
  const fs::path dir = scratch("sweep");
  RunConfig c = small_run(dir, "sweep.betas = [0, 1]\nsweep.workers = 2\n");
  c.experiment = Experiment::BetaSweep;
  const auto results = run_sweep(c);
  REQUIRE(results.size() == 2);
  CHECK(results[0].beta == 0.0);
  CHECK(results[1].beta == 1.0);
  for (const auto& r : results) CHECK(r.summary.status == RunStatus::Completed);
  CHECK(fs::exists(dir / "beta_0" / "diagnostics.csv"));
  CHECK(fs::exists(dir / "beta_1" / "diagnostics.csv"));
  CHECK(lines_of(dir / "sweep_summary.csv").size() == 3);
  fs::remove_all(dir);
}

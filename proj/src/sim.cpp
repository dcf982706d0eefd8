#include "surfpf/sim.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "surfpf/errors.hpp"
#include "surfpf/expression.hpp"
#include "surfpf/manufactured.hpp"
#include "surfpf/vtk.hpp"

namespace surfpf {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

bool record_finite(const TimeSeriesRecord& r) {
  auto ok = [](const std::optional<double>& v) { return !v || std::isfinite(*v); };
  return std::isfinite(r.lyapunov_energy) && ok(r.numerical_energy) && ok(r.total_mass) &&
         std::isfinite(r.phase_area_fraction) && std::isfinite(r.min_u) && std::isfinite(r.max_u) &&
         ok(r.interface_width);
}

void write_state(const Stepper& stepper, const TraceSpace& space, const std::string& path) {
  const StepperState& s = stepper.state();
  if (stepper.model() == Model::AllenCahn)
    write_vtk_snapshot(space, {{"eta", &s.u.values}}, path);
  else
    write_vtk_snapshot(space, {{"c", &s.u.values}, {"mu", &s.mu.values}}, path);
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06d.vtk", step);
  return buf;
}

}  // namespace

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::NonFinite: return "non_finite";
    case RunStatus::SolverFailed: return "solver_failed";
    case RunStatus::WallTimeExceeded: return "wall_time_exceeded";
    case RunStatus::Stopped: return "stopped";
  }
  return "unknown";
}

int exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::Completed:
    case RunStatus::Stopped: return 0;
    case RunStatus::SolverFailed: return 3;
    case RunStatus::NonFinite:
    case RunStatus::Diverged: return 4;
    case RunStatus::WallTimeExceeded: return 6;
  }
  return 1;
}

int exit_code_for_exception(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 5;
  if (dynamic_cast<const NoConvergence*>(&e) || dynamic_cast<const BreakdownError*>(&e) ||
      dynamic_cast<const SolverFailure*>(&e))
    return 3;
  if (dynamic_cast<const NonFiniteState*>(&e)) return 4;
  return 1;
}

Eigen::VectorXd initial_field(const RunConfig& config, const TraceSpace& space) {
  switch (config.initial.kind) {
    case InitialCondition::Kind::Random: return space.random_field(config.seed).values;
    case InitialCondition::Kind::Constant: return Eigen::VectorXd::Constant(space.n_dofs(), config.initial.value);
    case InitialCondition::Kind::LinearX3PlusHalf:
      return space.interpolate([](const Vec3& x) { return x[2] + 0.5; }).values;
    case InitialCondition::Kind::Expression: {
      const Expression e = Expression::parse(config.initial.expression);
      return space.interpolate([&e](const Vec3& x) { return e(x); }).values;
    }
    case InitialCondition::Kind::Manufactured:
      return space.interpolate([](const Vec3& x) { return manufactured::exact(x, 0.0); }).values;
  }
  throw ConfigError("unsupported initial condition");
}

RunSummary run_simulation(const RunConfig& config, const StepObserver& observer) {
  config.validate();
  const auto start = Clock::now();
  make_dir(config.out_dir);

  const ImplicitSurface surface = config.make_surface();
  const auto space = TraceSpace::build(surface, config.discretization(config.level));
  const Operators ops = Operators::assemble(*space);
  Stepper stepper(config.model, *space, ops, config.params, config.solver_config());
  stepper.initialize(initial_field(config, *space));

  RunSummary summary;
  summary.n_dofs = space->n_dofs();
  summary.h = space->h();

  DiagnosticsWriter csv(join(config.out_dir, "diagnostics.csv"));
  TimeSeriesRecord rec = make_record(stepper, *space, ops, 0);
  csv.write(rec);
  summary.records.push_back(rec);
  const double e0 = std::max(std::abs(rec.lyapunov_energy), 1e-300);
  if (config.vtk_every > 0) write_state(stepper, *space, join(config.out_dir, snapshot_name(0)));

  const std::vector<double> steps = expand_schedule(config.schedule);
  const int n = static_cast<int>(steps.size());
  for (int k = 0; k < n; ++k) {
    StepReport report;
    try {
      report = stepper.advance(steps[k]);
    } catch (const NonFiniteState& e) {
      summary.status = RunStatus::NonFinite;
      summary.message = e.what();
    } catch (const NoConvergence& e) {
      summary.status = RunStatus::SolverFailed;
      summary.message = e.what();
    } catch (const BreakdownError& e) {
      summary.status = RunStatus::SolverFailed;
      summary.message = e.what();
    } catch (const SolverFailure& e) {
      summary.status = RunStatus::SolverFailed;
      summary.message = e.what();
    }
    if (summary.status != RunStatus::Completed) break;
    ++summary.steps;

    rec = make_record(stepper, *space, ops, report.iterations);
    summary.records.push_back(rec);
    if (!record_finite(rec)) {
      summary.status = RunStatus::NonFinite;
      summary.message = "non-finite diagnostics at t = " + num(rec.t);
    } else if (config.divergence_factor > 0 && rec.lyapunov_energy > config.divergence_factor * e0) {
      summary.status = RunStatus::Diverged;
      summary.message = "energy exceeded " + short_num(config.divergence_factor) + "x its initial value at t = " +
                        short_num(rec.t);
    }
    const bool last = k + 1 == n || summary.status != RunStatus::Completed;
    if ((k + 1) % config.csv_every == 0 || last) csv.write(rec);
    if (config.vtk_every > 0 && ((k + 1) % config.vtk_every == 0 || k + 1 == n))
      write_state(stepper, *space, join(config.out_dir, snapshot_name(k + 1)));
    if (summary.status != RunStatus::Completed) break;
    if (observer && !observer(stepper, rec)) {
      summary.status = RunStatus::Stopped;
      break;
    }
    if (config.max_wall_time > 0 && seconds_since(start) > config.max_wall_time && k + 1 < n) {
      summary.status = RunStatus::WallTimeExceeded;
      summary.message = "wall time limit reached at t = " + short_num(rec.t);
      break;
    }
  }
  summary.t_final = stepper.state().t;
  if (summary.status != RunStatus::Completed && summary.status != RunStatus::Stopped)
    write_state(stepper, *space, join(config.out_dir, "final_state.vtk"));
  summary.wall_seconds = seconds_since(start);
  return summary;
}

double observed_rate(double coarse, double fine) { return std::log2(coarse / fine); }

std::vector<LevelErrors> run_validation(const RunConfig& config) {
  config.validate();
  if (config.experiment != Experiment::AcValidation && config.experiment != Experiment::ChValidation)
    throw ConfigError("validation needs run.experiment = ac_validation or ch_validation");
  make_dir(config.out_dir);
  const ImplicitSurface surface = config.make_surface();
  const ModelParams& p = config.params;
  const bool ch = config.model == Model::CahnHilliard;

  std::vector<LevelErrors> out;
  for (int level : config.levels) {
    const auto start = Clock::now();
    const auto space = TraceSpace::build(surface, config.discretization(level));
    const TraceSpace& S = *space;
    const Operators ops = Operators::assemble(S);
    Stepper stepper(config.model, S, ops, p, config.solver_config());
    if (ch)
      stepper.set_forcing([&](double t) {
        return S.assemble_surface_load([&](const Vec3& x) { return manufactured::ch_forcing(x, t, p); });
      });
    else
      stepper.set_forcing([&](double t) {
        return S.assemble_surface_load([&](const Vec3& x) { return manufactured::ac_forcing(x, t, p); });
      });
    stepper.initialize(S.interpolate([](const Vec3& x) { return manufactured::exact(x, 0.0); }).values);

    DiagnosticsWriter csv(join(config.out_dir, "diagnostics_level" + std::to_string(level) + ".csv"));
    csv.write(make_record(stepper, S, ops, 0));

    const double dt = std::ldexp(1.0, -(1 + level));
    const int n = static_cast<int>(std::lround(config.validation_t_end / dt));
    ErrorNorms eu, em;
    for (int k = 0; k < n; ++k) {
      const StepReport r = stepper.advance(dt);
      const double t = stepper.state().t;
      eu.add(dt, l2_error(S, stepper.state().u.values, [t](const Vec3& x) { return manufactured::exact(x, t); }));
      if (ch)
        em.add(dt, l2_error(S, stepper.state().mu.values,
                            [&](const Vec3& x) { return manufactured::ch_potential(x, t, p); }));
      if ((k + 1) % config.csv_every == 0 || k + 1 == n) csv.write(make_record(stepper, S, ops, r.iterations));
    }
    LevelErrors e;
    e.level = level;
    e.n_dofs = S.n_dofs();
    e.h = S.h();
    e.dt = dt;
    e.u_linf_l2 = eu.linf_l2();
    e.u_l2_l2 = eu.l2_l2();
    e.mu_linf_l2 = em.linf_l2();
    e.mu_l2_l2 = em.l2_l2();
    e.wall_seconds = seconds_since(start);
    out.push_back(e);
  }

  std::ofstream f(join(config.out_dir, "convergence.csv"), std::ios::trunc);
  if (!f) throw IoError("cannot write convergence.csv in " + config.out_dir);
  f << "level,n_dofs,h,dt,u_linf_l2,u_l2_l2,rate_u_linf_l2,rate_u_l2_l2";
  if (ch) f << ",mu_linf_l2,mu_l2_l2,rate_mu_linf_l2,rate_mu_l2_l2";
  f << '\n';
  for (std::size_t i = 0; i < out.size(); ++i) {
    const LevelErrors& e = out[i];
    auto rate = [&](double LevelErrors::*m) {
      return i == 0 ? std::string() : num(observed_rate(out[i - 1].*m, e.*m));
    };
    f << e.level << ',' << e.n_dofs << ',' << num(e.h) << ',' << num(e.dt) << ',' << num(e.u_linf_l2) << ','
      << num(e.u_l2_l2) << ',' << rate(&LevelErrors::u_linf_l2) << ',' << rate(&LevelErrors::u_l2_l2);
    if (ch)
      f << ',' << num(e.mu_linf_l2) << ',' << num(e.mu_l2_l2) << ',' << rate(&LevelErrors::mu_linf_l2) << ','
        << rate(&LevelErrors::mu_l2_l2);
    f << '\n';
  }
  if (!f) throw IoError("write to convergence.csv failed");
  return out;
}

std::vector<SweepResult> run_sweep(const RunConfig& config) {
  config.validate();
  make_dir(config.out_dir);
  std::vector<SweepResult> results(config.betas.size());
  std::vector<std::exception_ptr> errors(config.betas.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < results.size(); i = next++) {
      RunConfig c = config;
      c.experiment = Experiment::Custom;
      c.params.beta_s = config.betas[i];
      c.out_dir = join(config.out_dir, "beta_" + short_num(config.betas[i]));
      results[i].beta = config.betas[i];
      try {
        results[i].summary = run_simulation(c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers =
      std::min<std::size_t>(config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw, results.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::ofstream f(join(config.out_dir, "sweep_summary.csv"), std::ios::trunc);
  if (!f) throw IoError("cannot write sweep_summary.csv in " + config.out_dir);
  f << "beta_s,status,steps,t_final,max_energy_ratio,message\n";
  for (const auto& r : results) {
    double max_ratio = 0.0;
    const double e0 = r.summary.records.empty() ? 1.0 : r.summary.records.front().lyapunov_energy;
    for (const auto& rec : r.summary.records) max_ratio = std::max(max_ratio, rec.lyapunov_energy / e0);
    f << num(r.beta) << ',' << to_string(r.summary.status) << ',' << r.summary.steps << ','
      << num(r.summary.t_final) << ',' << num(max_ratio) << ",\"" << r.summary.message << "\"\n";
  }
  if (!f) throw IoError("write to sweep_summary.csv failed");
  return results;
}

int run_experiment(const RunConfig& config) {
  switch (config.experiment) {
    case Experiment::AcValidation:
    case Experiment::ChValidation: {
      const auto levels = run_validation(config);
      for (std::size_t i = 0; i < levels.size(); ++i) {
        const LevelErrors& e = levels[i];
        std::printf("level %d  dofs %d  u: %.4e %.4e", e.level, e.n_dofs, e.u_linf_l2, e.u_l2_l2);
        if (config.model == Model::CahnHilliard) std::printf("  mu: %.4e %.4e", e.mu_linf_l2, e.mu_l2_l2);
        if (i > 0) {
          const LevelErrors& c = levels[i - 1];
          std::printf("  rates u: %.2f %.2f", observed_rate(c.u_linf_l2, e.u_linf_l2),
                      observed_rate(c.u_l2_l2, e.u_l2_l2));
          if (config.model == Model::CahnHilliard)
            std::printf("  mu: %.2f %.2f", observed_rate(c.mu_linf_l2, e.mu_linf_l2),
                        observed_rate(c.mu_l2_l2, e.mu_l2_l2));
        }
        std::printf("  (%.1f s)\n", e.wall_seconds);
      }
      return 0;
    }
    case Experiment::BetaSweep: {
      for (const auto& r : run_sweep(config))
        std::printf("beta_s %-6g %-18s steps %-6d t %-8g %s\n", r.beta, to_string(r.summary.status).c_str(),
                    r.summary.steps, r.summary.t_final, r.summary.message.c_str());
      return 0;
    }
    default: {
      const RunSummary s = run_simulation(config);
      std::printf("%s: %d steps, t = %g, %d dofs, %.1f s", to_string(s.status).c_str(), s.steps, s.t_final, s.n_dofs,
                  s.wall_seconds);
      if (!s.message.empty()) std::printf(" (%s)", s.message.c_str());
      std::printf("\n");
      return exit_code(s.status);
    }
  }
}

}  // namespace surfpf

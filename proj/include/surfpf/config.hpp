#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surfpf/levelset.hpp"
#include "surfpf/linear_solver.hpp"
#include "surfpf/models.hpp"

namespace surfpf {

enum class Experiment {
  Custom,
  AcValidation,
  ChValidation,
  SphereAc,
  SphereCh,
  SpindleAc,
  SpindleCh,
  CellAc,
  CellCh,
  BetaSweep
};

Experiment parse_experiment(const std::string& s);
std::string to_string(Experiment e);

/// Piecewise-constant time steps: dt applies on (previous end, end].
struct ScheduleInterval {
  double end = 0.0;
  double dt = 0.0;
};

/// Step sizes of a schedule in order. The last step of each interval is
/// shortened if dt does not divide its length.
std::vector<double> expand_schedule(const std::vector<ScheduleInterval>& schedule, double t0 = 0.0);

struct InitialCondition {
  enum class Kind { Random, Constant, LinearX3PlusHalf, Expression, Manufactured };
  Kind kind = Kind::Random;
  double value = 0.5;
  std::string expression;
};

struct RunConfig {
  Experiment experiment = Experiment::Custom;
  bool full = false;

  // surface.* and domain.box
  ImplicitSurface::Kind surface_kind = ImplicitSurface::Kind::Sphere;
  double radius = 1.0;
  Vec3 center = Vec3::Zero();
  std::optional<Box> box;

  // mesh.*
  int level = 3;
  std::array<int, 3> cells{2, 2, 2};
  std::size_t max_tets = 20'000'000;

  // quadrature.*
  int surface_order = 2;
  int volume_order = 2;

  // model.*
  Model model = Model::AllenCahn;
  ModelParams params;

  // time.*
  std::vector<ScheduleInterval> schedule{{1.0, 0.1}};

  InitialCondition initial;
  std::uint64_t seed = 1;

  // solver.*; unset fields fall back to the defaults of the model.
  std::optional<SolverConfig> solver;

  // output.*
  int vtk_every = 0;
  int csv_every = 1;
  std::string out_dir = "out";

  // run.*
  double max_wall_time = 0.0;      // seconds, 0 = unlimited
  double divergence_factor = 0.0;  // stop once E_lyap > factor * E_lyap(0), 0 = off

  // validation.*
  std::vector<int> levels{2, 3, 4};
  double validation_t_end = 5.0;

  // sweep.*
  std::vector<double> betas{0.0, 0.1, 0.2, 0.5, 1.0, 10.0};
  int workers = 0;  // 0 = hardware concurrency

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
  ImplicitSurface make_surface() const;
  DiscretizationOptions discretization(int level) const;
  SolverConfig solver_config() const;
  double end_time() const;
};

/// Raw "section.key = value" pairs in file order.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Splits config text into entries. '#' starts a comment; values in [ ] may
/// span several lines. Throws ConfigError on malformed lines or duplicates.
ConfigEntries tokenize_config(const std::string& text);

/// Applies the preset of run.experiment (desk or full variant), then every
/// entry on top of it, then validates. Unknown keys are rejected.
RunConfig parse_config(const std::string& text, bool full = false);
RunConfig load_config(const std::string& path, bool full = false);

/// Preset defaults for an experiment. The model only matters for the sweep.
RunConfig preset(Experiment e, bool full, Model model = Model::AllenCahn);

/// Sets one key; throws ConfigError for unknown keys or bad values.
void apply_entry(RunConfig& config, const std::string& key, const std::string& value);

/// Every key accepted by apply_entry.
const std::vector<std::string>& config_keys();

}  // namespace surfpf

#include "surfpf/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "surfpf/errors.hpp"
#include "surfpf/expression.hpp"

namespace surfpf {

namespace {

const std::vector<std::pair<std::string, Experiment>> kExperiments{
    {"custom", Experiment::Custom},         {"ac_validation", Experiment::AcValidation},
    {"ch_validation", Experiment::ChValidation}, {"sphere_ac", Experiment::SphereAc},
    {"sphere_ch", Experiment::SphereCh},    {"spindle_ac", Experiment::SpindleAc},
    {"spindle_ch", Experiment::SpindleCh},  {"cell_ac", Experiment::CellAc},
    {"cell_ch", Experiment::CellCh},        {"beta_sweep", Experiment::BetaSweep}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  // Rational literals such as -5/3 are allowed for box bounds.
  const auto slash = t.find('/');
  if (slash != std::string::npos) return to_double(key, t.substr(0, slash)) / to_double(key, t.substr(slash + 1));
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d))
    throw ConfigError(key + ": '" + v + "' is not a finite number");
  return d;
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const long long i = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end != '\0' || errno == ERANGE) throw ConfigError(key + ": '" + v + "' is not an integer");
  return i;
}

int to_int(const std::string& key, const std::string& v, int lo, int hi) {
  const long long i = to_integer(key, v);
  if (i < lo || i > hi)
    throw ConfigError(key + ": " + v + " is outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(i);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = lower(trim(v));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": '" + v + "' is not a boolean");
}

std::vector<std::string> to_list(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw ConfigError(key + ": expected a [ ... ] list");
  std::vector<std::string> items;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key + ": empty list item");
    items.push_back(item);
  }
  return items;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : to_list(key, v)) out.push_back(to_double(key, item));
  return out;
}

std::string unquote(const std::string& v) {
  std::string t = trim(v);
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
  return t;
}

/// "[a..b]" or "[a, b, c]" or "a..b".
std::vector<int> to_levels(const std::string& key, const std::string& v) {
  std::string t = trim(v);
  if (!t.empty() && t.front() == '[' && t.find("..") != std::string::npos) t = trim(t.substr(1, t.size() - 2));
  const auto dots = t.find("..");
  std::vector<int> out;
  if (dots != std::string::npos) {
    const int a = to_int(key, t.substr(0, dots), 0, 12);
    const int b = to_int(key, t.substr(dots + 2), 0, 12);
    if (b < a) throw ConfigError(key + ": empty level range");
    for (int l = a; l <= b; ++l) out.push_back(l);
  } else {
    for (const auto& item : to_list(key, t)) out.push_back(to_int(key, item, 0, 12));
  }
  return out;
}

std::vector<ScheduleInterval> to_schedule(const std::string& key, const std::string& v) {
  std::vector<ScheduleInterval> out;
  for (const auto& item : to_list(key, v)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": items must be end:dt");
    out.push_back({to_double(key, item.substr(0, colon)), to_double(key, item.substr(colon + 1))});
  }
  return out;
}

void truncate_schedule(std::vector<ScheduleInterval>& s, double t_end) {
  if (!(t_end > 0)) throw ConfigError("time.t_end must be positive");
  std::vector<ScheduleInterval> out;
  for (const auto& iv : s) {
    if (!out.empty() && out.back().end >= t_end) break;
    out.push_back({std::min(iv.end, t_end), iv.dt});
  }
  if (out.empty()) throw ConfigError("time.t_end set before any time step");
  out.back().end = t_end;
  s = std::move(out);
}

SolverConfig& solver_of(RunConfig& c) {
  if (!c.solver) c.solver = c.solver_config();
  return *c.solver;
}

InitialCondition parse_initial(const std::string& key, const std::string& v) {
  InitialCondition ic;
  const std::string t = lower(trim(v));
  if (t == "random")
    ic.kind = InitialCondition::Kind::Random;
  else if (t == "constant")
    ic.kind = InitialCondition::Kind::Constant;
  else if (t == "linear_x3_plus_half")
    ic.kind = InitialCondition::Kind::LinearX3PlusHalf;
  else if (t == "expression")
    ic.kind = InitialCondition::Kind::Expression;
  else if (t == "manufactured")
    ic.kind = InitialCondition::Kind::Manufactured;
  else
    throw ConfigError(key + ": unknown initial condition '" + v + "'");
  return ic;
}

using Setter = void (*)(RunConfig&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m{
      {"run.experiment", [](RunConfig& c, const std::string& k, const std::string& v) {
         if (parse_experiment(trim(v)) != c.experiment)
           throw ConfigError(k + " cannot change the experiment after its preset was applied");
       }},
      {"run.seed",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long s = to_integer(k, v);
         if (s < 0) throw ConfigError(k + " must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"run.max_wall_time", [](RunConfig& c, const std::string& k, const std::string& v) { c.max_wall_time = to_double(k, v); }},
      {"run.divergence_factor",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.divergence_factor = to_double(k, v); }},
      {"surface.kind",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "sphere")
           c.surface_kind = ImplicitSurface::Kind::Sphere;
         else if (t == "spindle")
           c.surface_kind = ImplicitSurface::Kind::Spindle;
         else if (t == "cell" || t == "idealized_cell")
           c.surface_kind = ImplicitSurface::Kind::IdealizedCell;
         else
           throw ConfigError(k + ": unknown surface '" + v + "'");
       }},
      {"surface.radius", [](RunConfig& c, const std::string& k, const std::string& v) { c.radius = to_double(k, v); }},
      {"surface.center",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto d = to_doubles(k, v);
         if (d.size() != 3) throw ConfigError(k + " needs 3 entries");
         c.center = Vec3(d[0], d[1], d[2]);
       }},
      {"domain.box",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto d = to_doubles(k, v);
         if (d.size() != 6) throw ConfigError(k + " needs 6 entries [xmin,xmax,ymin,ymax,zmin,zmax]");
         Box b;
         std::copy(d.begin(), d.end(), b.bounds.begin());
         c.box = b;
       }},
      {"mesh.level", [](RunConfig& c, const std::string& k, const std::string& v) { c.level = to_int(k, v, 0, 12); }},
      {"mesh.cells",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const auto items = to_list(k, v);
         if (items.size() != 3) throw ConfigError(k + " needs 3 entries");
         for (int a = 0; a < 3; ++a) c.cells[a] = to_int(k, items[a], 1, 64);
       }},
      {"mesh.max_tets",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const long long n = to_integer(k, v);
         if (n < 48) throw ConfigError(k + " must be at least 48");
         c.max_tets = static_cast<std::size_t>(n);
       }},
      {"quadrature.surface_order",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.surface_order = to_int(k, v, 1, 8); }},
      {"quadrature.volume_order",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.volume_order = to_int(k, v, 1, 8); }},
      {"model.type",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const std::string t = lower(trim(v));
         if (t == "ac" || t == "allen_cahn")
           c.model = Model::AllenCahn;
         else if (t == "ch" || t == "cahn_hilliard")
           c.model = Model::CahnHilliard;
         else
           throw ConfigError(k + ": unknown model '" + v + "'");
       }},
      {"model.epsilon", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.epsilon = to_double(k, v); }},
      {"model.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.alpha = to_double(k, v); }},
      {"model.rho", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.rho = to_double(k, v); }},
      {"model.xi", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.xi = to_double(k, v); }},
      {"model.beta_s", [](RunConfig& c, const std::string& k, const std::string& v) { c.params.beta_s = to_double(k, v); }},
      {"model.lumped_nonlinearity",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.params.lumped_nonlinearity = to_bool(k, v); }},
      {"model.first_step_beta",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.params.first_step_beta = to_bool(k, v); }},
      {"time.schedule", [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule = to_schedule(k, v); }},
      {"time.dt",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule = {{c.end_time(), to_double(k, v)}}; }},
      {"time.t_end", [](RunConfig& c, const std::string& k, const std::string& v) { truncate_schedule(c.schedule, to_double(k, v)); }},
      {"initial.kind",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         const InitialCondition ic = parse_initial(k, v);
         c.initial.kind = ic.kind;
       }},
      {"initial.value", [](RunConfig& c, const std::string& k, const std::string& v) { c.initial.value = to_double(k, v); }},
      {"initial.expression",
       [](RunConfig& c, const std::string&, const std::string& v) {
         c.initial.expression = unquote(v);
         Expression::parse(c.initial.expression);
       }},
      {"solver.method",
       [](RunConfig& c, const std::string&, const std::string& v) { solver_of(c).method = parse_solver_method(trim(v)); }},
      {"solver.preconditioner",
       [](RunConfig& c, const std::string&, const std::string& v) {
         solver_of(c).preconditioner = parse_preconditioner(trim(v));
       }},
      {"solver.rel_tol", [](RunConfig& c, const std::string& k, const std::string& v) { solver_of(c).rel_tol = to_double(k, v); }},
      {"solver.abs_tol", [](RunConfig& c, const std::string& k, const std::string& v) { solver_of(c).abs_tol = to_double(k, v); }},
      {"solver.max_iter",
       [](RunConfig& c, const std::string& k, const std::string& v) { solver_of(c).max_iter = to_int(k, v, 1, 1'000'000); }},
      {"solver.restart",
       [](RunConfig& c, const std::string& k, const std::string& v) { solver_of(c).restart = to_int(k, v, 1, 10'000); }},
      {"output.vtk_every",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.vtk_every = to_int(k, v, 0, 1'000'000'000); }},
      {"output.csv_every",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.csv_every = to_int(k, v, 1, 1'000'000'000); }},
      {"output.every_n",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.csv_every = to_int(k, v, 1, 1'000'000'000); }},
      {"output.out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = unquote(v); }},
      {"validation.levels", [](RunConfig& c, const std::string& k, const std::string& v) { c.levels = to_levels(k, v); }},
      {"validation.t_end",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.validation_t_end = to_double(k, v); }},
      {"sweep.betas", [](RunConfig& c, const std::string& k, const std::string& v) { c.betas = to_doubles(k, v); }},
      {"sweep.workers", [](RunConfig& c, const std::string& k, const std::string& v) { c.workers = to_int(k, v, 0, 256); }},
  };
  return m;
}

}  // namespace

Experiment parse_experiment(const std::string& s) {
  for (const auto& [name, e] : kExperiments)
    if (name == lower(s)) return e;
  throw ConfigError("unknown experiment '" + s + "'");
}

std::string to_string(Experiment e) {
  for (const auto& [name, x] : kExperiments)
    if (x == e) return name;
  return "custom";
}

std::vector<double> expand_schedule(const std::vector<ScheduleInterval>& schedule, double t0) {
  std::vector<double> steps;
  double t = t0;
  for (const auto& iv : schedule) {
    const double span = iv.end - t;
    if (span <= 0) continue;
    // Round so that 10 steps of 0.1 cover (0, 1] exactly; a remainder below
    // 1e-9 dt is absorbed.
    const double ratio = span / iv.dt;
    const long long n = static_cast<long long>(std::floor(ratio + 1e-9));
    for (long long i = 0; i < n; ++i) steps.push_back(iv.dt);
    const double rest = span - static_cast<double>(n) * iv.dt;
    if (rest > 1e-9 * iv.dt) steps.push_back(rest);
    t = iv.end;
  }
  return steps;
}

void RunConfig::validate() const {
  params.validate();
  if (schedule.empty()) throw ConfigError("time.schedule is empty");
  double prev = 0.0;
  for (const auto& iv : schedule) {
    if (!(iv.dt > 0)) throw ConfigError("time.schedule: dt must be positive");
    if (!(iv.end > prev)) throw ConfigError("time.schedule: interval ends must increase");
    prev = iv.end;
  }
  if (box && !box->valid()) throw ConfigError("domain.box must have xmin < xmax, ymin < ymax, zmin < zmax");
  if (!(radius > 0)) throw ConfigError("surface.radius must be positive");
  if (surface_order < 1 || volume_order < 1) throw ConfigError("quadrature orders must be positive");
  if (solver) {
    solver->validate();
    if (model == Model::CahnHilliard && solver->method == SolverMethod::ConjugateGradient)
      throw ConfigError("solver.method = cg needs a symmetric system; the Cahn-Hilliard block system is not");
  }
  if (initial.kind == InitialCondition::Kind::Expression && initial.expression.empty())
    throw ConfigError("initial.kind = expression needs initial.expression");
  if (out_dir.empty()) throw ConfigError("output.out_dir is empty");
  if (max_wall_time < 0 || divergence_factor < 0) throw ConfigError("run limits must be nonnegative");
  const bool validation = experiment == Experiment::AcValidation || experiment == Experiment::ChValidation;
  if (validation) {
    if (levels.empty()) throw ConfigError("validation.levels is empty");
    if (surface_kind != ImplicitSurface::Kind::Sphere || radius != 1.0 || center != Vec3::Zero())
      throw ConfigError("validation experiments need the unit sphere at the origin");
    if (!(validation_t_end > 0)) throw ConfigError("validation.t_end must be positive");
  }
  if (experiment == Experiment::BetaSweep) {
    if (betas.empty()) throw ConfigError("sweep.betas is empty");
    for (double b : betas)
      if (!(b >= 0)) throw ConfigError("sweep.betas must be nonnegative");
  }
}

ImplicitSurface RunConfig::make_surface() const {
  switch (surface_kind) {
    case ImplicitSurface::Kind::Sphere: return ImplicitSurface::sphere(radius, center, box.value_or(sphere_box()));
    case ImplicitSurface::Kind::Spindle: return ImplicitSurface::spindle(box.value_or(spindle_box()));
    case ImplicitSurface::Kind::IdealizedCell: return ImplicitSurface::idealized_cell(box.value_or(cell_box()));
    case ImplicitSurface::Kind::Custom: break;
  }
  throw ConfigError("custom surfaces cannot be configured from a file");
}

DiscretizationOptions RunConfig::discretization(int lvl) const {
  DiscretizationOptions o;
  o.level = lvl;
  o.cells = cells;
  o.max_tets = max_tets;
  o.surface_order = surface_order;
  o.volume_order = volume_order;
  return o;
}

SolverConfig RunConfig::solver_config() const {
  if (solver) return *solver;
  return model == Model::AllenCahn ? SolverConfig::allen_cahn_default() : SolverConfig::cahn_hilliard_default();
}

double RunConfig::end_time() const { return schedule.empty() ? 0.0 : schedule.back().end; }

ConfigEntries tokenize_config(const std::string& text) {
  ConfigEntries entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line, pending_key, pending_value;
  int line_no = 0;
  auto finish = [&](const std::string& key, const std::string& value) {
    if (!seen.insert(key).second) throw ConfigError("duplicate key " + key);
    entries.emplace_back(key, trim(value));
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!pending_key.empty()) {
      pending_value += ' ' + line;
      if (line.find(']') != std::string::npos) {
        finish(pending_key, pending_value);
        pending_key.clear();
      }
      continue;
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'section.key = value'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key.find('.') == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' must have the form section.key");
    if (value.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value for " + key);
    if (value.front() == '[' && value.find(']') == std::string::npos) {
      pending_key = key;
      pending_value = value;
      continue;
    }
    finish(key, value);
  }
  if (!pending_key.empty()) throw ConfigError("unterminated list for " + pending_key);
  return entries;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, setter] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_entry(RunConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(config, key, value);
}

RunConfig preset(Experiment e, bool full, Model model) {
  RunConfig c;
  c.experiment = e;
  c.full = full;
  switch (e) {
    case Experiment::Custom: break;
    case Experiment::AcValidation:
    case Experiment::ChValidation:
      c.model = e == Experiment::AcValidation ? Model::AllenCahn : Model::CahnHilliard;
      c.params.epsilon = 0.1;
      c.initial.kind = InitialCondition::Kind::Manufactured;
      c.levels = full ? std::vector<int>{2, 3, 4, 5} : std::vector<int>{2, 3, 4};
      c.validation_t_end = 5.0;
      break;
    case Experiment::SphereAc:
      c.model = Model::AllenCahn;
      c.params.epsilon = 0.01;
      c.level = full ? 6 : 4;
      c.schedule = {{10, 1}, {60, 5}, {1060, 10}, {3560, 50}, {13560, 100}, {22560, 200}};
      if (!full) truncate_schedule(c.schedule, 400);
      break;
    case Experiment::CellAc:
      c.surface_kind = ImplicitSurface::Kind::IdealizedCell;
      c.model = Model::AllenCahn;
      c.params.epsilon = 0.01;
      c.level = full ? 6 : 4;
      c.schedule = {{200, 1}, {500, 5}, {23000, 10}};
      if (!full) truncate_schedule(c.schedule, 2000);
      break;
    case Experiment::SpindleAc:
      c.surface_kind = ImplicitSurface::Kind::Spindle;
      c.cells = {6, 2, 2};
      c.model = Model::AllenCahn;
      c.params.epsilon = 0.01;
      c.level = full ? 6 : 4;
      c.schedule = {{full ? 400.0 : 100.0, 1}};
      break;
    case Experiment::SphereCh:
    case Experiment::SpindleCh:
    case Experiment::CellCh: {
      double t_end = 100;
      if (e == Experiment::SpindleCh) {
        c.surface_kind = ImplicitSurface::Kind::Spindle;
        c.cells = {6, 2, 2};
        t_end = full ? 400 : 50;
      } else if (e == Experiment::CellCh) {
        c.surface_kind = ImplicitSurface::Kind::IdealizedCell;
        t_end = full ? 36000 : 100;
      } else {
        t_end = full ? 25000 : 100;
      }
      c.model = Model::CahnHilliard;
      c.params.epsilon = 0.01;
      c.level = full ? 6 : 4;
      c.schedule = {{1, 0.01}, {t_end, 1}};
      break;
    }
    case Experiment::BetaSweep:
      c.model = model;
      c.params.epsilon = 0.01;
      c.level = full ? 6 : 4;
      // Horizon t = 5 / epsilon.
      c.schedule = {{500, model == Model::AllenCahn ? 10.0 : 1.0}};
      c.divergence_factor = 10.0;
      break;
  }
  const bool random_data = e != Experiment::Custom && e != Experiment::AcValidation && e != Experiment::ChValidation;
  if (random_data) {
    c.initial.kind = InitialCondition::Kind::Random;
    c.params.first_step_beta = true;
    c.vtk_every = 0;
    c.out_dir = "out/" + to_string(e);
  }
  if (e == Experiment::SphereAc || e == Experiment::SphereCh || e == Experiment::SpindleAc ||
      e == Experiment::SpindleCh || e == Experiment::CellAc || e == Experiment::CellCh)
    c.vtk_every = 50;
  if (e == Experiment::AcValidation || e == Experiment::ChValidation) c.out_dir = "out/" + to_string(e);
  return c;
}

RunConfig parse_config(const std::string& text, bool full) {
  const ConfigEntries entries = tokenize_config(text);
  Experiment e = Experiment::Custom;
  std::optional<Model> model;
  for (const auto& [key, value] : entries) {
    if (key == "run.experiment") e = parse_experiment(trim(value));
    if (key == "model.type") {
      RunConfig probe;
      apply_entry(probe, key, value);
      model = probe.model;
    }
  }
  RunConfig c = preset(e, full, model.value_or(Model::AllenCahn));
  // Known before any solver.* entry so that its defaults match the model.
  if (model) c.model = *model;
  for (const auto& [key, value] : entries) apply_entry(c, key, value);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path, bool full) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), full);
}

}  // namespace surfpf

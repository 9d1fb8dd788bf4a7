#include "lrbgk/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace lrbgk {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad number for " + key + ": '" + v + "'");
}

Index to_index(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long n = std::stoll(v, &pos);
    if (trim(v.substr(pos)).empty()) return Index(n);
  } catch (const std::exception&) {
  }
  throw ConfigError("bad integer for " + key + ": '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "i,j; i,j"
std::vector<std::pair<Index, Index>> to_pairs(const std::string& key, const std::string& v) {
  std::vector<std::pair<Index, Index>> out;
  for (const auto& p : split(v, ';')) {
    const auto ij = split(p, ',');
    if (ij.size() != 2) throw ConfigError("bad index pair for " + key + ": '" + p + "'");
    out.emplace_back(to_index(key, ij[0]), to_index(key, ij[1]));
  }
  return out;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"shear-flow", "shear-flow-fluid", "explosion", "beam", "beam-varying-eps", "custom"};
}

ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.scenario = name;
  if (name == "shear-flow" || name == "shear-flow-fluid") {
    c.grid = {64, 64, 0, 1, 0, 1, 32, -6, 6};
    c.rank = 3;
    c.dt = 2e-4;
    c.t_end = 2.0;
    c.eps_mode = EpsMode::reynolds;
    c.reynolds = 1000;
    c.disc = Discretization::spectral;
    c.diag_every = 100;
    if (name == "shear-flow-fluid") {
      c.solver = Solver::fluid;
      c.grid.nx = c.grid.ny = 512;
    }
  } else if (name == "explosion") {
    c.grid = {128, 128, -1.5, 1.5, -1.5, 1.5, 32, -6, 6};
    c.rank = 3;
    c.dt = 2e-4;
    c.t_end = 0.8;
    c.eps = 1e-5;
    c.disc = Discretization::scfd;
    c.limiter = Limiter::van_leer;
    c.diag_every = 100;
  } else if (name == "beam") {
    c.grid = {16, 16, 0, 1, 0, 1, 128, -8, 8};
    c.rank = 5;
    c.dt = 1e-3;
    c.t_end = 2.0;
    c.eps = 0.1;
    c.disc = Discretization::spectral;
    c.diag_every = 10;
  } else if (name == "beam-varying-eps") {
    c.grid = {64, 8, -1, 1, 0, 1, 64, -8, 8};
    c.rank = 10;
    c.dt = 5e-5;
    c.t_end = 0.5;
    c.eps_mode = EpsMode::varying;
    c.eps0 = 1e-4;
    c.disc = Discretization::scfd;
    c.limiter = Limiter::upwind;
    c.diag_every = 500;
  } else if (name != "custom") {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

void apply_setting(ScenarioConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), v = trim(value_in);
  auto d = [&] { return to_double(key, v); };
  auto n = [&] { return to_index(key, v); };
  if (key == "scenario") {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), v) == names.end()) throw ConfigError("unknown scenario '" + v + "'");
    c.scenario = v;
  } else if (key == "solver") {
    if (v == "kinetic") c.solver = Solver::kinetic;
    else if (v == "fluid") c.solver = Solver::fluid;
    else throw ConfigError("solver must be kinetic or fluid");
  } else if (key == "nx") c.grid.nx = n();
  else if (key == "ny") c.grid.ny = n();
  else if (key == "ax") c.grid.ax = d();
  else if (key == "bx") c.grid.bx = d();
  else if (key == "ay") c.grid.ay = d();
  else if (key == "by") c.grid.by = d();
  else if (key == "nv") c.grid.nv = n();
  else if (key == "av") c.grid.av = d();
  else if (key == "bv") c.grid.bv = d();
  else if (key == "rank") c.rank = n();
  else if (key == "dt") c.dt = d();
  else if (key == "t_end") c.t_end = d();
  else if (key == "cfl") c.cfl = d();
  else if (key == "eps") {
    c.eps = d();
    c.eps_mode = EpsMode::constant;
  } else if (key == "reynolds") {
    c.reynolds = d();
    c.eps_mode = EpsMode::reynolds;
  } else if (key == "eps0") {
    c.eps0 = d();
    c.eps_mode = EpsMode::varying;
  } else if (key == "eps_mode") {
    if (v == "constant") c.eps_mode = EpsMode::constant;
    else if (v == "reynolds") c.eps_mode = EpsMode::reynolds;
    else if (v == "varying") c.eps_mode = EpsMode::varying;
    else throw ConfigError("eps_mode must be constant, reynolds or varying");
  } else if (key == "discretization") {
    if (v == "spectral") c.disc = Discretization::spectral;
    else if (v == "scfd") c.disc = Discretization::scfd;
    else throw ConfigError("discretization must be spectral or scfd");
  } else if (key == "limiter") {
    if (v == "upwind") c.limiter = Limiter::upwind;
    else if (v == "van_leer" || v == "vanleer") c.limiter = Limiter::van_leer;
    else throw ConfigError("limiter must be upwind or van_leer");
  } else if (key == "v0") c.v0 = d();
  else if (key == "shear_width") c.shear_width = d();
  else if (key == "perturbation") c.perturbation = d();
  else if (key == "radius") c.radius = d();
  else if (key == "nb") c.nb = d();
  else if (key == "vb") c.vb = d();
  else if (key == "wb") c.wb = d();
  else if (key == "Tb") c.Tb = d();
  else if (key == "diag_every") c.diag_every = n();
  else if (key == "stress_diag") c.stress_diag = to_bool(key, v);
  else if (key == "snapshot_times") {
    c.snapshot_times.clear();
    for (const auto& t : split(v, ',')) c.snapshot_times.push_back(to_double(key, t));
    std::sort(c.snapshot_times.begin(), c.snapshot_times.end());
  } else if (key == "slice_x") c.slice_x = to_pairs(key, v);
  else if (key == "slice_v") c.slice_v = to_pairs(key, v);
  else if (key == "reference") c.reference = v;
  else if (key == "output_dir") c.output_dir = v;
  else throw ConfigError("unknown key '" + key + "'");
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like key=value: '" + assignment + "'");
  apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key == "preset") {
      if (!first) throw ConfigError("line " + std::to_string(lineno) + ": preset must be the first setting");
      cfg = preset(value);
    } else {
      apply_setting(cfg, key, value);
    }
    first = false;
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& preset_or_path) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset_or_path) != names.end()) return preset(preset_or_path);
  std::ifstream is(preset_or_path);
  if (!is) throw ConfigError("'" + preset_or_path + "' is neither a preset nor a readable config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

void validate(const ScenarioConfig& c) {
  make_grids(c.grid);
  if (c.solver == Solver::kinetic && c.rank < 1) throw ConfigError("rank must be at least 1");
  if (c.solver == Solver::kinetic && c.rank > c.grid.nv * c.grid.nv)
    throw ConfigError("rank exceeds the velocity grid size");
  if (c.solver == Solver::kinetic && c.rank > c.grid.nx * c.grid.ny)
    throw ConfigError("rank exceeds the spatial grid size");
  if (!(c.dt > 0)) throw ConfigError("dt must be positive");
  if (!(c.t_end >= 0)) throw ConfigError("t_end must be nonnegative");
  if (!(c.cfl > 0)) throw ConfigError("cfl must be positive");
  if (c.eps_mode == EpsMode::constant && !(c.eps > 0)) throw ConfigError("eps must be positive");
  if (c.eps_mode == EpsMode::reynolds && !(c.reynolds > 0 && c.v0 > 0))
    throw ConfigError("reynolds and v0 must be positive");
  if (c.eps_mode == EpsMode::varying && !(c.eps0 > 0)) throw ConfigError("eps0 must be positive");
  if (c.diag_every < 1) throw ConfigError("diag_every must be at least 1");
  if (c.radius <= 0 || c.Tb <= 0 || c.shear_width <= 0) throw ConfigError("scenario parameters must be positive");
  for (auto [i, j] : c.slice_x)
    if (i < 0 || j < 0 || i >= c.grid.nx || j >= c.grid.ny) throw ConfigError("slice_x index out of range");
  for (auto [i, j] : c.slice_v)
    if (i < 0 || j < 0 || i >= c.grid.nv || j >= c.grid.nv) throw ConfigError("slice_v index out of range");
  if (c.solver == Solver::fluid && (c.eps_mode == EpsMode::varying))
    throw ConfigError("the fluid solver needs a constant eps");
}

namespace {

LowRankState equilibrium_state(const SpatialGrid& xg, const VelocityGrid& vg, Index r) {
  return init_from_separable(xg, vg, {{Field::Ones(xg.size()), Field::Ones(vg.size())}}, r);
}

}  // namespace

InitialData shear_flow_init(const SpatialGrid& xg, const VelocityGrid& vg, Index r, double v0, double width,
                            double delta) {
  InitialData d;
  d.mom.rho = Field::Ones(xg.size());
  d.mom.u.x = sample(xg, [&](double, double y) {
    return y <= 0.5 ? v0 * std::tanh((y - 0.25) / width) : v0 * std::tanh((0.75 - y) / width);
  });
  d.mom.u.y = sample(xg, [&](double x, double) { return delta * std::sin(2.0 * std::numbers::pi * x); });
  d.state = equilibrium_state(xg, vg, r);
  return d;
}

InitialData explosion_init(const SpatialGrid& xg, const VelocityGrid& vg, Index r, double radius) {
  InitialData d;
  d.mom.rho = sample(xg, [&](double x, double y) { return x * x + y * y <= radius * radius ? 1.0 : 0.1; });
  d.mom.u.x = Field::Zero(xg.size());
  d.mom.u.y = Field::Zero(xg.size());
  d.state = equilibrium_state(xg, vg, r);
  return d;
}

InitialData beam_init(const SpatialGrid& xg, const VelocityGrid& vg, Index r, double nb, double vb, double wb,
                      double Tb) {
  InitialData d;
  d.mom.rho = Field::Ones(xg.size());
  d.mom.u.x = Field::Zero(xg.size());
  d.mom.u.y = Field::Zero(xg.size());
  const Field bump = sample(vg, [&](double v, double w) {
    return nb * std::exp(-((v - vb) * (v - vb) + (w - wb) * (w - wb)) / (2.0 * Tb) + 0.5 * (v * v + w * w));
  });
  const Field ones_x = Field::Ones(xg.size());
  d.state = init_from_separable(xg, vg, {{ones_x, Field::Ones(vg.size())}, {ones_x, bump}}, r);
  return d;
}

Field epsilon_field(const SpatialGrid& g, double eps0) {
  return sample(g, [&](double x, double) { return eps0 + std::tanh(1.0 - 11.0 * x) + std::tanh(1.0 + 11.0 * x); });
}

InitialData make_initial_data(const ScenarioConfig& c) {
  const auto [xg, vg] = make_grids(c.grid);
  const Index r = c.solver == Solver::kinetic ? c.rank : 1;
  if (c.scenario == "explosion") return explosion_init(xg, vg, r, c.radius);
  if (c.scenario == "beam" || c.scenario == "beam-varying-eps")
    return beam_init(xg, vg, r, c.nb, c.vb, c.wb, c.Tb);
  if (c.scenario == "shear-flow" || c.scenario == "shear-flow-fluid")
    return shear_flow_init(xg, vg, r, c.v0, c.shear_width, c.perturbation);
  // custom: global equilibrium at rest
  InitialData d;
  d.mom.rho = Field::Ones(xg.size());
  d.mom.u.x = Field::Zero(xg.size());
  d.mom.u.y = Field::Zero(xg.size());
  d.state = equilibrium_state(xg, vg, r);
  return d;
}

Field make_epsilon(const ScenarioConfig& c, const SpatialGrid& g) {
  Field e;
  switch (c.eps_mode) {
    case EpsMode::constant: e = Field::Constant(g.size(), c.eps); break;
    case EpsMode::reynolds: e = Field::Constant(g.size(), c.v0 / c.reynolds); break;
    case EpsMode::varying: e = epsilon_field(g, c.eps0); break;
  }
  if (!(e.minCoeff() > 0.0)) throw ConfigError("Knudsen number must be positive on the grid");
  return e;
}

DiagnosticsRecord conserved_totals(const SpatialGrid& g, const MomentState& m) {
  DiagnosticsRecord r;
  const double w = g.weight();
  r.mass = m.rho.sum() * w;
  r.momentum_x = m.rho.dot(m.u.x) * w;
  r.momentum_y = m.rho.dot(m.u.y) * w;
  return r;
}

namespace {

double stress_gap(const LowRankState& s, const MomentState& m, const Field& eps) {
  const ConvTable table = build_conv_tables(s.vgrid, s.V);
  const SymTensorField P = stress_tensor_P1(s, m, table, eps);
  const SymTensorField sig = sigma_u(s.xgrid, m.u, Derivative::spectral);
  return std::max({(P.xx - sig.xx).cwiseAbs().maxCoeff(), (P.xy - sig.xy).cwiseAbs().maxCoeff(),
                   (P.yy - sig.yy).cwiseAbs().maxCoeff()});
}

class Output {
public:
  explicit Output(const ScenarioConfig& c) : cfg_(c) {
    std::string dir = c.output_dir;
    if (const char* env = std::getenv("LRBGK_OUTPUT_DIR"); env && *env) dir = env;
    if (dir.empty()) return;
    dir_ = dir;
    std::filesystem::create_directories(dir_);
    csv_.open(dir_ / "diagnostics.csv");
    if (!csv_) throw ConfigError("cannot write to " + dir_.string());
    csv_ << "step,time,mass,momentum_x,momentum_y,max_deviation";
    if (c.stress_diag) csv_ << ",stress_gap";
    csv_ << '\n' << std::setprecision(17);
  }

  bool enabled() const { return !dir_.empty(); }

  void record(const DiagnosticsRecord& r) {
    if (!enabled()) return;
    csv_ << r.step << ',' << r.time << ',' << r.mass << ',' << r.momentum_x << ',' << r.momentum_y << ','
         << r.max_deviation;
    if (cfg_.stress_diag) csv_ << ',' << r.stress_gap;
    csv_ << '\n';
    csv_.flush();
  }

  void snapshot(const std::string& tag, const Snapshot& s) {
    if (!enabled()) return;
    const SpatialGrid& g = s.state.xgrid;
    write_snapshot((dir_ / (tag + ".snap")).string(), s);
    write_field_dump((dir_ / (tag + "_rho.bin")).string(), g, s.mom.rho, s.time, "rho");
    write_field_dump((dir_ / (tag + "_u1.bin")).string(), g, s.mom.u.x, s.time, "u1");
    write_field_dump((dir_ / (tag + "_u2.bin")).string(), g, s.mom.u.y, s.time, "u2");
    const Derivative dk = cfg_.disc == Discretization::spectral ? Derivative::spectral : Derivative::central;
    write_field_dump((dir_ / (tag + "_omega.bin")).string(), g, vorticity(g, s.mom.u, dk), s.time, "omega");
    if (s.state.rank() == 0) return;
    for (auto [i, j] : cfg_.slice_x) {
      const std::string name = tag + "_g_x" + std::to_string(i) + "_" + std::to_string(j);
      write_field_dump((dir_ / (name + ".bin")).string(), s.state.vgrid, g_at_x(s.state, i, j), s.time, name);
    }
    for (auto [i, j] : cfg_.slice_v) {
      const std::string name = tag + "_g_v" + std::to_string(i) + "_" + std::to_string(j);
      write_field_dump((dir_ / (name + ".bin")).string(), g, g_at_v(s.state, i, j), s.time, name);
    }
  }

  void summary(const RunResult& r) {
    if (!enabled()) return;
    std::ofstream os(dir_ / "summary.txt");
    os << std::setprecision(17) << "steps " << r.steps << "\ntime " << r.final.time << '\n';
    if (r.reference_error >= 0) os << "reference_error " << r.reference_error << '\n';
  }

private:
  const ScenarioConfig& cfg_;
  std::filesystem::path dir_;
  std::ofstream csv_;
};

}  // namespace

RunResult run(const ScenarioConfig& cfg) {
  validate(cfg);
  InitialData init = make_initial_data(cfg);
  const SpatialGrid xg = init.state.xgrid;
  const Field eps = make_epsilon(cfg, xg);
  const bool kinetic = cfg.solver == Solver::kinetic;
  Output out(cfg);

  RunResult res;
  Snapshot& cur = res.final;
  cur.time = 0.0;
  cur.mom = init.mom;
  if (kinetic) {
    cur.state = init.state;
  } else {
    cur.state.xgrid = xg;
    cur.state.S.resize(0, 0);
  }
  FluidState fluid;
  if (!kinetic) fluid = make_fluid_state(xg, cur.mom);
  const double eps_const = eps(0);

  auto diagnose = [&](Index step) {
    DiagnosticsRecord r = conserved_totals(xg, cur.mom);
    r.step = step;
    r.time = cur.time;
    if (kinetic) {
      r.max_deviation = deviation_from_equilibrium(cur.state);
      if (cfg.stress_diag) r.stress_gap = stress_gap(cur.state, cur.mom, eps);
    }
    res.diagnostics.push_back(r);
    out.record(r);
  };

  const StepOptions opt{cfg.disc, cfg.limiter};
  std::size_t next_snap = 0;
  while (next_snap < cfg.snapshot_times.size() && cfg.snapshot_times[next_snap] <= 0.0) {
    out.snapshot("snap" + std::to_string(next_snap), cur);
    ++next_snap;
  }
  diagnose(0);

  Index step = 0;
  const double t_tol = 1e-9 * std::max(1.0, cfg.t_end);
  while (cur.time < cfg.t_end - t_tol) {
    double target = cfg.t_end;
    if (next_snap < cfg.snapshot_times.size()) target = std::min(target, cfg.snapshot_times[next_snap]);
    double dt = kinetic ? cfg.dt : maccormack_dt(fluid, eps_const, cfg.cfl);
    if (cur.time + dt > target - t_tol) dt = target - cur.time;
    if (kinetic) {
      StepResult sr = full_step(cur.state, cur.mom, eps, dt, opt);
      cur.state = std::move(sr.state);
      cur.mom = std::move(sr.mom);
    } else {
      fluid = maccormack_step(fluid, eps_const, dt, step % 2 == 0);
      cur.mom = fluid_moments(fluid);
    }
    ++step;
    cur.time = std::abs(cur.time + dt - target) <= t_tol ? target : cur.time + dt;
    const bool at_end = cur.time >= cfg.t_end - t_tol;
    if (step % cfg.diag_every == 0 || at_end) diagnose(step);
    while (next_snap < cfg.snapshot_times.size() && cur.time >= cfg.snapshot_times[next_snap] - t_tol) {
      out.snapshot("snap" + std::to_string(next_snap), cur);
      ++next_snap;
    }
  }
  res.steps = step;
  out.snapshot("final", cur);
  if (!cfg.reference.empty()) {
    const Snapshot ref = read_snapshot(cfg.reference);
    res.reference_error = moment_error(xg, cur.mom, ref.state.xgrid, ref.mom);
  }
  out.summary(res);
  return res;
}

}  // namespace lrbgk

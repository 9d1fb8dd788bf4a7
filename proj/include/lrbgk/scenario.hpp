#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lrbgk/fluid_reference.hpp"
#include "lrbgk/ksl_integrator.hpp"
#include "lrbgk/snapshot.hpp"

namespace lrbgk {

enum class Solver { kinetic, fluid };
enum class EpsMode { constant, reynolds, varying };

struct ScenarioConfig {
  std::string scenario = "custom";
  Solver solver = Solver::kinetic;
  GridConfig grid;
  Index rank = 3;
  double dt = 2e-4;
  double t_end = 1.0;
  double cfl = 0.9;  // fluid solver only

  EpsMode eps_mode = EpsMode::constant;
  double eps = 1e-2;
  double reynolds = 1000.0;
  double eps0 = 1e-4;

  Discretization disc = Discretization::spectral;
  Limiter limiter = Limiter::van_leer;

  // shear flow
  double v0 = 0.1, shear_width = 1.0 / 30.0, perturbation = 5e-3;
  // explosion
  double radius = 1e-2;
  // beam
  double nb = 1e-3, vb = 4.0, wb = 2.0, Tb = 0.1;

  Index diag_every = 10;
  bool stress_diag = false;
  std::vector<double> snapshot_times;
  std::vector<std::pair<Index, Index>> slice_x;  // (ix, iy): g(x, .) dumps
  std::vector<std::pair<Index, Index>> slice_v;  // (iv, iw): g(., v) dumps
  std::string reference;                          // snapshot compared at t_end
  std::string output_dir = "out";                 // empty: write nothing
};

/// Named presets: shear-flow, shear-flow-fluid, explosion, beam,
/// beam-varying-eps, custom.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Applies one "key=value" assignment. Throws ConfigError on unknown keys or
/// malformed values.
void apply_setting(ScenarioConfig& cfg, const std::string& key, const std::string& value);
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

/// Parses a flat key=value file ('#' starts a comment). A "preset" key, if
/// present, must come first and selects the starting values.
ScenarioConfig parse_config(const std::string& text);
/// A preset name or a path to a config file.
ScenarioConfig load_config(const std::string& preset_or_path);

/// Checks every precondition the solvers rely on.
void validate(const ScenarioConfig& cfg);

struct InitialData {
  MomentState mom;
  LowRankState state;
};

InitialData shear_flow_init(const SpatialGrid& xg, const VelocityGrid& vg, Index r, double v0, double width,
                            double delta);
InitialData explosion_init(const SpatialGrid& xg, const VelocityGrid& vg, Index r, double radius);
InitialData beam_init(const SpatialGrid& xg, const VelocityGrid& vg, Index r, double nb, double vb, double wb,
                      double Tb);
/// eps0 + tanh(1 - 11x) + tanh(1 + 11x).
Field epsilon_field(const SpatialGrid& g, double eps0);

InitialData make_initial_data(const ScenarioConfig& cfg);
Field make_epsilon(const ScenarioConfig& cfg, const SpatialGrid& g);

struct DiagnosticsRecord {
  Index step = 0;
  double time = 0.0;
  double mass = 0.0;
  double momentum_x = 0.0, momentum_y = 0.0;
  double max_deviation = 0.0;  // max|g - 1|, 0 for the fluid solver
  double stress_gap = 0.0;     // |P1 - sigma(u)|_inf when enabled
};

struct RunResult {
  Snapshot final;
  std::vector<DiagnosticsRecord> diagnostics;
  Index steps = 0;
  double reference_error = -1.0;  // set when cfg.reference is given
};

/// Runs the configured scenario to t_end, writing diagnostics.csv, snapshots
/// and field dumps below output_dir (LRBGK_OUTPUT_DIR overrides it).
RunResult run(const ScenarioConfig& cfg);

/// Sum of rho and rho u over the grid times the cell area.
DiagnosticsRecord conserved_totals(const SpatialGrid& g, const MomentState& m);

}  // namespace lrbgk

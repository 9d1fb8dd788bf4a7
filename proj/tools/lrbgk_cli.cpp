// Command-line front end: run scenarios, compare snapshots, extract g slices.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>

#include "lrbgk/scenario.hpp"

using namespace lrbgk;

namespace {

int cmd_run(const std::string& target, const std::vector<std::string>& overrides) {
  ScenarioConfig cfg = load_config(target);
  for (const auto& o : overrides) apply_override(cfg, o);
  if (cfg.solver == Solver::kinetic) {
    const auto [xg, vg] = make_grids(cfg.grid);
    const double vmax = std::max(std::abs(vg.av), std::abs(vg.bv));
    std::cout << std::setprecision(4) << "CFL advisory max(dt |v|/dx) = " << cfg.dt * vmax / std::min(xg.dx, xg.dy)
              << '\n';
  }
  const RunResult r = run(cfg);
  const DiagnosticsRecord& last = r.diagnostics.back();
  std::cout << std::setprecision(10) << "finished " << cfg.scenario << " at t=" << r.final.time << " after "
            << r.steps << " steps; mass " << last.mass << ", max|g-1| " << last.max_deviation << '\n';
  if (r.reference_error >= 0) std::cout << "moment error vs reference " << r.reference_error << '\n';
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  const Snapshot sa = read_snapshot(a), sb = read_snapshot(b);
  std::cout << std::setprecision(10) << "t_a=" << sa.time << " t_b=" << sb.time << '\n'
            << "moment error " << moment_error(sa.state.xgrid, sa.mom, sb.state.xgrid, sb.mom) << '\n';
  return 0;
}

int cmd_slice(const std::string& path, const std::string& plane) {
  const Snapshot s = read_snapshot(path);
  if (s.state.rank() == 0) throw ConfigError("snapshot has no kinetic data");
  const auto colon = plane.find(':'), comma = plane.find(',');
  if (colon == std::string::npos || comma == std::string::npos || comma < colon)
    throw ConfigError("plane must look like x:ix,iy or v:iv,iw");
  const std::string kind = plane.substr(0, colon);
  Index i = 0, j = 0;
  try {
    i = std::stoll(plane.substr(colon + 1, comma - colon - 1));
    j = std::stoll(plane.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad indices in plane '" + plane + "'");
  }
  std::cout << std::setprecision(17);
  if (kind == "x") {
    const SpatialGrid& g = s.state.xgrid;
    if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) throw ConfigError("spatial index out of range");
    const VelocityGrid& vg = s.state.vgrid;
    const Field f = g_at_x(s.state, i, j);
    std::cout << "v1,v2,g\n";
    for (Index b = 0; b < vg.nv; ++b)
      for (Index a = 0; a < vg.nv; ++a) std::cout << vg.v(a) << ',' << vg.v(b) << ',' << f(vg.idx(a, b)) << '\n';
  } else if (kind == "v") {
    const VelocityGrid& vg = s.state.vgrid;
    if (i < 0 || j < 0 || i >= vg.nv || j >= vg.nv) throw ConfigError("velocity index out of range");
    const SpatialGrid& g = s.state.xgrid;
    const Field f = g_at_v(s.state, i, j);
    std::cout << "x,y,g\n";
    for (Index b = 0; b < g.ny; ++b)
      for (Index a = 0; a < g.nx; ++a) std::cout << g.x(a) << ',' << g.y(b) << ',' << f(g.idx(a, b)) << '\n';
  } else {
    throw ConfigError("plane kind must be x or v");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamical low-rank solver for the isothermal BGK equation"};
  app.require_subcommand(1);

  std::string target;
  std::vector<std::string> overrides;
  auto* run_cmd = app.add_subcommand("run", "run a preset or config file");
  run_cmd->add_option("target", target, "preset name or config path")->required();
  run_cmd->add_option("--override,-o", overrides, "key=value setting applied after the config");

  std::string snap_a, snap_b;
  auto* cmp_cmd = app.add_subcommand("compare", "max-norm moment difference of two snapshots");
  cmp_cmd->add_option("a", snap_a)->required();
  cmp_cmd->add_option("b", snap_b)->required();

  std::string snap, plane;
  auto* slice_cmd = app.add_subcommand("slice", "print a slice of g as CSV");
  slice_cmd->add_option("snapshot", snap)->required();
  slice_cmd->add_option("--plane", plane, "x:ix,iy (g over v) or v:iv,iw (g over x)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(target, overrides);
    if (*cmp_cmd) return cmd_compare(snap_a, snap_b);
    if (*slice_cmd) return cmd_slice(snap, plane);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

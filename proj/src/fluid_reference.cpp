#include "lrbgk/fluid_reference.hpp"

#include <algorithm>
#include <cmath>

namespace lrbgk {

FluidState make_fluid_state(const SpatialGrid& g, const MomentState& m) {
  if (m.rho.size() != g.size()) throw ConfigError("grid mismatch in make_fluid_state");
  return {g, to_conserved(m)};
}

MomentState fluid_moments(const FluidState& s) { return to_moments(s.U); }

namespace {

DirectionalFlux ns_flux(const SpatialGrid& g, const ConservedState& U, double eps) {
  const MomentState m = to_moments(U);
  const SymTensorField sig = sigma_u(g, m.u, Derivative::central);
  DirectionalFlux f;
  f.F.rho = U.mx;
  f.F.mx = U.mx.cwiseProduct(m.u.x) + U.rho - eps * sig.xx;
  f.F.my = U.mx.cwiseProduct(m.u.y) - eps * sig.xy;
  f.G.rho = U.my;
  f.G.mx = U.my.cwiseProduct(m.u.x) - eps * sig.xy;
  f.G.my = U.my.cwiseProduct(m.u.y) + U.rho - eps * sig.yy;
  return f;
}

// One-sided divergence of (F, G); forward uses f[i+1]-f[i], backward f[i]-f[i-1].
Field one_sided_div(const SpatialGrid& g, const Field& F, const Field& G, bool forward) {
  Field out(g.size());
  for (Index j = 0; j < g.ny; ++j) {
    const Index jp = (j + 1) % g.ny, jm = (j + g.ny - 1) % g.ny;
    for (Index i = 0; i < g.nx; ++i) {
      const Index ip = (i + 1) % g.nx, im = (i + g.nx - 1) % g.nx;
      const Index c = g.idx(i, j);
      double dfx, dgy;
      if (forward) {
        dfx = F(g.idx(ip, j)) - F(c);
        dgy = G(g.idx(i, jp)) - G(c);
      } else {
        dfx = F(c) - F(g.idx(im, j));
        dgy = G(c) - G(g.idx(i, jm));
      }
      out(c) = dfx / g.dx + dgy / g.dy;
    }
  }
  return out;
}

ConservedState euler_sub(const SpatialGrid& g, const ConservedState& U, const DirectionalFlux& f, double dt,
                         bool forward) {
  ConservedState out;
  out.rho = U.rho - dt * one_sided_div(g, f.F.rho, f.G.rho, forward);
  out.mx = U.mx - dt * one_sided_div(g, f.F.mx, f.G.mx, forward);
  out.my = U.my - dt * one_sided_div(g, f.F.my, f.G.my, forward);
  return out;
}

}  // namespace

FluidState maccormack_step(const FluidState& s, double eps, double dt, bool forward_first) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const SpatialGrid& g = s.grid;
  const ConservedState pred = euler_sub(g, s.U, ns_flux(g, s.U, eps), dt, forward_first);
  const ConservedState corr = euler_sub(g, pred, ns_flux(g, pred, eps), dt, !forward_first);
  FluidState out{g, {}};
  out.U.rho = 0.5 * (s.U.rho + corr.rho);
  out.U.mx = 0.5 * (s.U.mx + corr.mx);
  out.U.my = 0.5 * (s.U.my + corr.my);
  if (!(out.U.rho.minCoeff() > 0.0))
    throw NumericalError(NumericalError::Kind::density_positivity, "density lost positivity in fluid solver");
  return out;
}

double maccormack_dt(const FluidState& s, double eps, double cfl) {
  const MomentState m = fluid_moments(s);
  const Field a = (m.u.x.cwiseAbs().array() + 1.0) / s.grid.dx + (m.u.y.cwiseAbs().array() + 1.0) / s.grid.dy;
  double dt = cfl / a.maxCoeff();
  const double h = std::min(s.grid.dx, s.grid.dy);
  if (eps > 0.0) dt = std::min(dt, 0.25 * cfl * h * h / eps);
  return dt;
}

Field vorticity(const SpatialGrid& g, const Vec2Field& u, Derivative kind) {
  return derivative(g, u.y, Axis::x, kind) - derivative(g, u.x, Axis::y, kind);
}

}  // namespace lrbgk

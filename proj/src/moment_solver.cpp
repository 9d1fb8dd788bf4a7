#include "lrbgk/moment_solver.hpp"

#include <string>

namespace lrbgk {

namespace {

void require_positive_density(const Field& rho) {
  const double m = rho.minCoeff();
  if (!(m > 0.0))
    throw NumericalError(NumericalError::Kind::density_positivity,
                         "density positivity lost (min rho = " + std::to_string(m) + ")");
}

}  // namespace

ConservedState to_conserved(const MomentState& m) {
  return {m.rho, m.rho.cwiseProduct(m.u.x), m.rho.cwiseProduct(m.u.y)};
}

MomentState to_moments(const ConservedState& U) {
  require_positive_density(U.rho);
  return {U.rho, {U.mx.cwiseQuotient(U.rho), U.my.cwiseQuotient(U.rho)}};
}

MomentRhs moment_rhs(const SpatialGrid& g, const FluxFields& f, Derivative kind) {
  return {-divergence(g, f.phi1.x, f.phi1.y, kind),
          {-divergence(g, f.phi2.xx, f.phi2.xy, kind), -divergence(g, f.phi2.xy, f.phi2.yy, kind)}};
}

MomentRhs moment_rhs(const LowRankState& s, const MomentState& mom, const ConvTable& table, Derivative kind) {
  return moment_rhs(s.xgrid, maxwellian_flux_fields(s, mom, table), kind);
}

MomentState euler_moment_step(const MomentState& mom, const MomentRhs& rhs, double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  ConservedState U = to_conserved(mom);
  U.rho += dt * rhs.I1;
  U.mx += dt * rhs.I2.x;
  U.my += dt * rhs.I2.y;
  return to_moments(U);
}

FluxEvaluator kinetic_flux(const SpatialGrid& g, const Basis& K, const ConvTable& table) {
  return [g, K, &table](const ConservedState& U) {
    const MomentState m = to_moments(U);
    const FluxFields f = maxwellian_flux_fields(g, K, m, table);
    return DirectionalFlux{{f.phi1.x, f.phi2.xx, f.phi2.xy}, {f.phi1.y, f.phi2.xy, f.phi2.yy}};
  };
}

namespace {

struct Stencil2d {
  const SpatialGrid& g;
  Index at(Index i, Index j) const { return g.idx((i + g.nx) % g.nx, (j + g.ny) % g.ny); }
};

Field limited_slope(const Stencil2d& s, const Field& q, Axis axis) {
  const auto& g = s.g;
  Field out(g.size());
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const Index c = s.at(i, j);
      const Index p = axis == Axis::x ? s.at(i + 1, j) : s.at(i, j + 1);
      const Index m = axis == Axis::x ? s.at(i - 1, j) : s.at(i, j - 1);
      out(c) = minmod(q(p) - q(c), q(c) - q(m));
    }
  return out;
}

Field nt_component(const Stencil2d& s, const Field& u, const Field& fs, const Field& gs, double lx, double ly) {
  const auto& g = s.g;
  const Field ux = limited_slope(s, u, Axis::x);
  const Field uy = limited_slope(s, u, Axis::y);
  Field out(g.size());
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const Index a = s.at(i, j), b = s.at(i + 1, j), c = s.at(i, j + 1), d = s.at(i + 1, j + 1);
      out(a) = 0.25 * (u(a) + u(b) + u(c) + u(d)) + (ux(a) - ux(b) + ux(c) - ux(d)) / 16.0 +
               (uy(a) - uy(c) + uy(b) - uy(d)) / 16.0 - 0.5 * lx * (fs(b) - fs(a) + fs(d) - fs(c)) -
               0.5 * ly * (gs(c) - gs(a) + gs(d) - gs(b));
    }
  return out;
}

}  // namespace

ConservedState nt2d_half_step(const SpatialGrid& g, const ConservedState& U, const FluxEvaluator& flux,
                              double dt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const Stencil2d s{g};
  const double lx = dt / g.dx, ly = dt / g.dy;

  const DirectionalFlux fn = flux(U);
  auto predict = [&](const Field& u, const Field& f, const Field& gf) -> Field {
    return u - 0.5 * lx * limited_slope(s, f, Axis::x) - 0.5 * ly * limited_slope(s, gf, Axis::y);
  };
  const ConservedState star{predict(U.rho, fn.F.rho, fn.G.rho), predict(U.mx, fn.F.mx, fn.G.mx),
                            predict(U.my, fn.F.my, fn.G.my)};
  const DirectionalFlux fs = flux(star);

  ConservedState out{nt_component(s, U.rho, fs.F.rho, fs.G.rho, lx, ly),
                     nt_component(s, U.mx, fs.F.mx, fs.G.mx, lx, ly),
                     nt_component(s, U.my, fs.F.my, fs.G.my, lx, ly)};
  require_positive_density(out.rho);
  return out;
}

Basis average_to_half_nodes(const SpatialGrid& g, const Basis& K) {
  const Stencil2d s{g};
  Basis out(K.rows(), K.cols());
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i)
      out.row(s.at(i, j)) =
          0.25 * (K.row(s.at(i, j)) + K.row(s.at(i + 1, j)) + K.row(s.at(i, j + 1)) + K.row(s.at(i + 1, j + 1)));
  return out;
}

ConservedState nt_staggered_full_step(const ConservedState& U, const LowRankState& st, const ConvTable& table,
                                      double dt) {
  const SpatialGrid& g = st.xgrid;
  const Basis K = st.K();
  const ConservedState half = nt2d_half_step(g, U, kinetic_flux(g, K, table), 0.5 * dt);
  const ConservedState shifted = nt2d_half_step(g, half, kinetic_flux(g, average_to_half_nodes(g, K), table), 0.5 * dt);

  // entry (i,j) of the second output sits on node (i+1, j+1)
  const Stencil2d s{g};
  ConservedState out{Field(g.size()), Field(g.size()), Field(g.size())};
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const Index from = s.at(i, j), to = s.at(i + 1, j + 1);
      out.rho(to) = shifted.rho(from);
      out.mx(to) = shifted.mx(from);
      out.my(to) = shifted.my(from);
    }
  return out;
}

}  // namespace lrbgk

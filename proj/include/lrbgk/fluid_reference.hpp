#pragma once

#include "lrbgk/moment_solver.hpp"

namespace lrbgk {

/// Isothermal Navier-Stokes state U = (rho, rho u1, rho u2).
struct FluidState {
  SpatialGrid grid;
  ConservedState U;
};

FluidState make_fluid_state(const SpatialGrid& g, const MomentState& m);
MomentState fluid_moments(const FluidState& s);

/// One MacCormack step for
///   d_t rho + div(rho u) = 0,  d_t(rho u) + div(rho u u^T + rho Id) = eps div sigma(u).
/// With forward_first the predictor uses forward differences and the
/// corrector backward differences; the other ordering swaps them.
/// sigma(u) is taken with central differences at both stages.
FluidState maccormack_step(const FluidState& s, double eps, double dt, bool forward_first = true);

/// Largest dt with dt ((|u1|+1)/dx + (|u2|+1)/dy) <= cfl (unsplit 2D
/// limit), also bounded by the explicit viscous limit eps dt / h^2 <= cfl / 4.
double maccormack_dt(const FluidState& s, double eps, double cfl = 0.9);

/// d_x u2 - d_y u1.
Field vorticity(const SpatialGrid& g, const Vec2Field& u, Derivative kind);

}  // namespace lrbgk

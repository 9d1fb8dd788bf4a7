#pragma once

#include <functional>

#include "lrbgk/maxwell_moments.hpp"

namespace lrbgk {

/// (rho, rho u1, rho u2).
struct ConservedState {
  Field rho, mx, my;
};

ConservedState to_conserved(const MomentState& m);
/// Throws density_positivity if any rho <= 0.
MomentState to_moments(const ConservedState& U);

/// I1 = -div Phi1 and I2 = -div Phi2.
struct MomentRhs {
  Field I1;
  Vec2Field I2;
};

MomentRhs moment_rhs(const SpatialGrid& g, const FluxFields& flux, Derivative kind);
MomentRhs moment_rhs(const LowRankState& s, const MomentState& mom, const ConvTable& table, Derivative kind);

/// Forward Euler step of the moment equations in conservative form:
/// rho+ = rho + dt I1, (rho u)+ = rho u + dt I2.
MomentState euler_moment_step(const MomentState& mom, const MomentRhs& rhs, double dt);

/// 0 if a and b differ in sign, otherwise the one of smaller magnitude.
inline double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return a > 0.0 ? std::min(a, b) : std::max(a, b);
}

/// x-flux F and y-flux G of the moment system, component-wise in the same
/// order as ConservedState.
struct DirectionalFlux {
  ConservedState F, G;
};

using FluxEvaluator = std::function<DirectionalFlux(const ConservedState&)>;

/// Kinetic flux with the low-rank coefficients K_j frozen on the nodes
/// where U lives.
FluxEvaluator kinetic_flux(const SpatialGrid& g, const Basis& K, const ConvTable& table);

/// One staggered central step of size dt. Output entry (i,j) lives at
/// (i+1/2, j+1/2) relative to the input nodes.
ConservedState nt2d_half_step(const SpatialGrid& g, const ConservedState& U, const FluxEvaluator& flux,
                              double dt);

/// Two staggered steps of dt/2 returning to the original nodes; the second
/// uses K averaged onto the half-integer nodes.
ConservedState nt_staggered_full_step(const ConservedState& U, const LowRankState& s, const ConvTable& table,
                                      double dt);

/// 4-point average of every column onto the (i+1/2, j+1/2) nodes.
Basis average_to_half_nodes(const SpatialGrid& g, const Basis& K);

}  // namespace lrbgk

#pragma once

#include "lrbgk/moment_solver.hpp"

namespace lrbgk {

/// Velocity integrals of the basis: c1 = <v V_j V_l>, cstar = <v v^T V_j V_l>,
/// Vbar = <V_j>.
struct VelocityCoeffs {
  Eigen::MatrixXd c1x, c1y;
  Eigen::MatrixXd cxx, cxy, cyy;
  Eigen::VectorXd Vbar;
};

VelocityCoeffs velocity_coeffs(const VelocityGrid& g, const Basis& V);

/// Coefficients of (1/M)(d_t M + v.grad M) = M1 + v.M2 + (v v^T):M3.
/// Only the symmetric part of M3 = grad u enters, so it is stored as such.
struct MScriptFields {
  Field M1;
  Vec2Field M2;
  SymTensorField M3;
};

MScriptFields mscript_fields(const SpatialGrid& g, const MomentState& mom, const MomentRhs& rhs, Derivative kind);

/// c2_jl(x) = delta_jl M1 + c1_jl.M2 + cstar_jl:M3, kept in factored form.
class C2Coeffs {
public:
  C2Coeffs(const VelocityCoeffs& vc, const MScriptFields& m) : vc_(vc), m_(m) {}

  /// The field c2_jl.
  Field at(Index j, Index l) const;
  /// sum_l c2_jl K_l for every j.
  Basis apply(const Basis& K) const;

private:
  VelocityCoeffs vc_;
  MScriptFields m_;
};

C2Coeffs c2_coeffs(const VelocityCoeffs& vc, const MScriptFields& m);

enum class Limiter { upwind, van_leer };

/// IMEX K step with spectral transport.
Basis k_step_spectral(const LowRankState& s, const VelocityCoeffs& vc, const C2Coeffs& c2, const Field& rho,
                      const Field& eps, double dt);

/// IMEX K step with transport diagonalized per direction and upwinded
/// (optionally Lax-Wendroff with van Leer limiting) in characteristic variables.
Basis k_step_scfd(const LowRankState& s, const VelocityCoeffs& vc, const C2Coeffs& c2, const Field& rho,
                  const Field& eps, double dt, Limiter limiter);

/// Discrete lambda * dQ/dx (or d/dy) for one characteristic variable in flux form.
Field characteristic_transport(const SpatialGrid& g, const Field& q, double lambda, Axis axis, double dt,
                               Limiter limiter);

/// Spatial integrals against the new X basis. The relaxation weight 1/eps(x)
/// is folded into Xbar = <rho X_i / eps> and R = <rho X_i X_k / eps>.
struct SpatialCoeffs {
  Eigen::MatrixXd d1x, d1y;
  Eigen::MatrixXd dstar;
  Eigen::MatrixXd d2x, d2y;
  Eigen::MatrixXd d3xx, d3xy, d3yy;
  Eigen::VectorXd Xbar;
  Eigen::MatrixXd R;
};

SpatialCoeffs spatial_coeffs(const SpatialGrid& g, const Basis& X, const MScriptFields& m, const Field& rho,
                             const Field& eps, Derivative d1_kind);

/// Condition number of I - dt R.
double s_step_condition(const SpatialCoeffs& sc, double dt);

/// Solves (I - dt R) S2 = S1 + dt [ ... ] - dt Xbar Vbar^T.
Eigen::MatrixXd s_step(const Eigen::MatrixXd& S1, const VelocityCoeffs& vc, const SpatialCoeffs& sc, double dt);

/// Returns L^{n+1} with columns L_i, from (I + dt R) L^{n+1} = L^n - dt [...] + dt Xbar.
Basis l_step(const Eigen::MatrixXd& S2, const VelocityGrid& vg, const Basis& V, const VelocityCoeffs& vc,
             const SpatialCoeffs& sc, double dt);

enum class Discretization { spectral, scfd };

struct StepOptions {
  Discretization disc = Discretization::spectral;
  Limiter limiter = Limiter::van_leer;
};

struct StepResult {
  LowRankState state;
  MomentState mom;
  double s_condition = 1.0;
};

/// One first-order step: moments first, then K, S, L with all coefficients
/// built from the time-n moments.
StepResult full_step(const LowRankState& s, const MomentState& mom, const Field& eps, double dt,
                     const StepOptions& opt);

}  // namespace lrbgk

#pragma once

#include <functional>
#include <vector>

#include "lrbgk/phase_grid.hpp"

namespace lrbgk {

/// g(x,v) = sum_ij X_i(x) S_ij V_j(v), with X and V orthonormal under
/// inner_x and inner_v respectively.
struct LowRankState {
  SpatialGrid xgrid;
  VelocityGrid vgrid;
  Basis X;            // xgrid.size() x r
  Eigen::MatrixXd S;  // r x r
  Basis V;            // vgrid.size() x r

  Index rank() const { return S.rows(); }
  /// K_j = sum_i X_i S_ij.
  Basis K() const { return X * S; }
};

/// One product a(x) b(v) of an initial condition.
struct SeparableTerm {
  Field x_factor;
  Field v_factor;
};

/// Result of orthonormalizing K: K = X * S.
struct OrthoX {
  Basis X;
  Eigen::MatrixXd S;
};

/// Result of orthonormalizing L: L_i = sum_j S_ij V_j, i.e. L = V * S^T.
struct OrthoV {
  Basis V;
  Eigen::MatrixXd S;
};

/// Produces the k-th deterministic completion candidate.
using CandidateFn = std::function<Field(Index k)>;

/// Fourier-mode candidates on the periodic box, ordered by shell:
/// 1, cos/sin of (1,0), (0,1), ...
Field spatial_candidate(const SpatialGrid& g, Index k);
Field velocity_candidate(const VelocityGrid& g, Index k);

/// Gram-Schmidt with reorthogonalization under the inner product w * a.b.
/// Columns whose residual falls below a relative tolerance are replaced by
/// candidate vectors and get a zero diagonal entry in R. R has a
/// nonnegative diagonal and A = Q R holds up to the dropped residuals.
void weighted_qr(const Basis& A, double weight, const CandidateFn& candidates, Basis& Q,
                 Eigen::MatrixXd& R);

OrthoX qr_orthonormalize_x(const SpatialGrid& g, const Basis& K);
OrthoV qr_orthonormalize_v(const VelocityGrid& g, const Basis& L);

/// Rank-r representation of sum_k a_k(x) b_k(v). Exact when the terms span
/// at most r independent products, otherwise truncated by singular values.
/// Missing directions are filled with orthonormal completions and zero S.
LowRankState init_from_separable(const SpatialGrid& xg, const VelocityGrid& vg,
                                 const std::vector<SeparableTerm>& terms, Index r);

/// max over the phase-space grid of |g - 1|, streamed over x.
double deviation_from_equilibrium(const LowRankState& s);
/// max over v of |g(x,.) - 1| for every spatial node.
Field deviation_profile(const LowRankState& s);

/// g(x_i, y_j, .) on the velocity grid.
Field g_at_x(const LowRankState& s, Index ix, Index iy);
/// g(., v_k, w_l) on the spatial grid.
Field g_at_v(const LowRankState& s, Index iv, Index iw);

/// Dense xgrid.size() x vgrid.size() matrix of g. Only for small grids.
Eigen::MatrixXd reconstruct(const LowRankState& s);

/// Maximum deviation of the Gram matrices of X and V from the identity.
double orthonormality_defect(const LowRankState& s);

}  // namespace lrbgk

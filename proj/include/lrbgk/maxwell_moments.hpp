#pragma once

#include <array>
#include <vector>

#include "lrbgk/lowrank.hpp"
#include "lrbgk/phase_grid.hpp"

namespace lrbgk {

/// Density and bulk velocity at temperature 1.
struct MomentState {
  Field rho;
  Vec2Field u;
};

/// Components of a convolution table entry. g0 = V_j * G, g1 = (v V_j) * G,
/// g2 = (v v^T V_j) * G with G(v) = exp(-|v|^2/2).
enum class ConvComponent : int { g0 = 0, g1x, g1y, g2xx, g2xy, g2yy };
inline constexpr int conv_component_count = 6;

/// Position of a query point inside the tensor-product spline, shared by all
/// tables evaluated at that point.
struct SplineStencil {
  Index i = 0, j = 0;
  std::array<double, 2> wx{}, cx{}, wy{}, cy{};
};

/// Natural bicubic spline data for the Gaussian convolutions of every
/// velocity basis function.
class ConvTable {
public:
  ConvTable() = default;
  ConvTable(const VelocityGrid& g, Index rank);

  const VelocityGrid& grid() const { return grid_; }
  Index rank() const { return rank_; }

  /// Convolution value at a velocity node.
  double node_value(Index j, ConvComponent c, Index node) const {
    return data_[offset(j, node, int(c))];
  }

  /// Stencil for the point (u1,u2); throws velocity_overflow unless the point
  /// lies at least two cells inside the velocity box.
  SplineStencil stencil(double u1, double u2) const;

  double evaluate(Index j, ConvComponent c, const SplineStencil& st) const;
  double evaluate(Index j, ConvComponent c, double u1, double u2) const {
    return evaluate(j, c, stencil(u1, u2));
  }

  /// sum_j coeff[j*stride] * table_j(st) for all six components.
  std::array<double, conv_component_count> weighted_sum(const double* coeff, Index stride,
                                                         const SplineStencil& st) const;

private:
  friend ConvTable build_conv_tables(const VelocityGrid& g, const Basis& V);

  // layout: [j][node][component][f, fxx, fyy, fxxyy]
  Index offset(Index j, Index node, int comp, int q = 0) const {
    return ((j * grid_.size() + node) * conv_component_count + comp) * 4 + q;
  }

  VelocityGrid grid_;
  Index rank_ = 0;
  std::vector<double> data_;
};

/// Sampled kernel exp(-|d|^2/2) indexed by the wrapped node displacement d.
Field gaussian_kernel(const VelocityGrid& g);

ConvTable build_conv_tables(const VelocityGrid& g, const Basis& V);

struct FluxFields {
  Vec2Field phi1;       // <v M g>_v
  SymTensorField phi2;  // <v v^T M g>_v
};

/// Maxwellian-weighted moments of g = sum_j K_j V_j, evaluated through the
/// convolution tables at u(x).
FluxFields maxwellian_flux_fields(const SpatialGrid& xg, const Basis& K, const MomentState& mom,
                                  const ConvTable& table);
FluxFields maxwellian_flux_fields(const LowRankState& s, const MomentState& mom, const ConvTable& table);

/// Kinetic stress tensor -(1/eps) int (v-u)(v-u)^T (f - M) dv.
SymTensorField stress_tensor_P1(const LowRankState& s, const MomentState& mom, const ConvTable& table,
                                const Field& eps);

/// grad u + grad u^T - (div u) Id  (velocity dimension 2).
SymTensorField sigma_u(const SpatialGrid& g, const Vec2Field& u, Derivative kind);

}  // namespace lrbgk

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <utility>

#include "lrbgk/errors.hpp"

namespace lrbgk {

using Index = Eigen::Index;

/// Nodal values of a scalar on a spatial or velocity grid, first axis fastest.
using Field = Eigen::VectorXd;
/// A set of fields stored column-wise (one basis function per column).
using Basis = Eigen::MatrixXd;

struct Vec2Field {
  Field x, y;
};

/// Symmetric 2x2 tensor per node, stored as (xx, xy, yy).
struct SymTensorField {
  Field xx, xy, yy;
};

enum class Axis { x, y };

/// Periodic 2D grid with nodes at a + k*d, k = 0..n-1.
struct SpatialGrid {
  Index nx = 0, ny = 0;
  double ax = 0, bx = 1, ay = 0, by = 1;
  double dx = 0, dy = 0;

  Index size() const { return nx * ny; }
  Index idx(Index i, Index j) const { return i + nx * j; }
  double x(Index i) const { return ax + i * dx; }
  double y(Index j) const { return ay + j * dy; }
  double weight() const { return dx * dy; }
  double length(Axis a) const { return a == Axis::x ? bx - ax : by - ay; }

  bool operator==(const SpatialGrid&) const = default;
};

/// Square truncated velocity box [av,bv]^2, treated periodically.
struct VelocityGrid {
  Index nv = 0;
  double av = -6, bv = 6;
  double dv = 0;

  Index size() const { return nv * nv; }
  Index idx(Index i, Index j) const { return i + nv * j; }
  double v(Index i) const { return av + i * dv; }
  double weight() const { return dv * dv; }

  bool operator==(const VelocityGrid&) const = default;
};

struct GridConfig {
  Index nx = 64, ny = 64;
  double ax = 0, bx = 1, ay = 0, by = 1;
  Index nv = 32;
  double av = -6, bv = 6;
};

SpatialGrid make_spatial_grid(Index nx, Index ny, double ax, double bx, double ay, double by);
VelocityGrid make_velocity_grid(Index nv, double av, double bv);
std::pair<SpatialGrid, VelocityGrid> make_grids(const GridConfig& cfg);

template <class F>
Field sample(const SpatialGrid& g, F&& f) {
  Field out(g.size());
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) out(g.idx(i, j)) = f(g.x(i), g.y(j));
  return out;
}

template <class F>
Field sample(const VelocityGrid& g, F&& f) {
  Field out(g.size());
  for (Index j = 0; j < g.nv; ++j)
    for (Index i = 0; i < g.nv; ++i) out(g.idx(i, j)) = f(g.v(i), g.v(j));
  return out;
}

/// The velocity coordinate fields v1, v2 on the grid.
Field velocity_component(const VelocityGrid& g, Axis a);

double inner_x(const SpatialGrid& g, const Field& a, const Field& b);
double inner_v(const VelocityGrid& g, const Field& a, const Field& b);

/// Derivative operators available on the periodic spatial grid.
enum class Derivative {
  spectral,  // Fourier collocation
  central,   // second order, (f[i+1]-f[i-1])/2h
  forward,   // first order one-sided, (f[i+1]-f[i])/h
};

Field spectral_dx(const SpatialGrid& g, const Field& f, Axis axis);
Field central_dx(const SpatialGrid& g, const Field& f, Axis axis);
Field forward_dx(const SpatialGrid& g, const Field& f, Axis axis);
Field derivative(const SpatialGrid& g, const Field& f, Axis axis, Derivative kind);

Vec2Field gradient(const SpatialGrid& g, const Field& f, Derivative kind);
/// d/dx fx + d/dy fy.
Field divergence(const SpatialGrid& g, const Field& fx, const Field& fy, Derivative kind);

/// Circular convolution on the velocity grid,
///   out[m] = dv^2 * sum_k a[k] * b[(m - k) mod n]   (per axis),
/// evaluated with real-to-complex FFTs.
Field fft_convolve_v(const VelocityGrid& g, const Field& a, const Field& b);

/// Cached real-to-complex 2D transform of an n_fast x n_slow array.
/// Instances are per thread (see fft_plan); never share one across threads.
class RealFft2d {
public:
  RealFft2d(Index n_fast, Index n_slow);
  ~RealFft2d();
  RealFft2d(const RealFft2d&) = delete;
  RealFft2d& operator=(const RealFft2d&) = delete;

  Index n_fast() const { return n_fast_; }
  Index n_slow() const { return n_slow_; }
  /// Number of complex coefficients, (n_fast/2+1) * n_slow.
  Index spectral_size() const { return (n_fast_ / 2 + 1) * n_slow_; }

  /// Unnormalized forward transform.
  void forward(const double* in, std::complex<double>* out);
  /// Unnormalized backward transform (caller divides by n_fast*n_slow).
  void backward(const std::complex<double>* in, double* out);

private:
  Index n_fast_, n_slow_;
  double* real_buf_;
  void* cplx_buf_;
  void* plan_fwd_;
  void* plan_bwd_;
};

/// Thread-local plan cache keyed by array shape.
RealFft2d& fft_plan(Index n_fast, Index n_slow);

/// Signed integer frequency of FFT index k for length n (Nyquist mapped to 0).
inline Index fft_freq(Index k, Index n) {
  if (k < n / 2) return k;
  if (k == n / 2) return 0;
  return k - n;
}

}  // namespace lrbgk

#include "lrbgk/phase_grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace lrbgk {

namespace {

using cplx = std::complex<double>;

void check_count(Index n, const char* name) {
  if (n < 4 || n % 2 != 0)
    throw ConfigError(std::string(name) + " must be even and at least 4, got " + std::to_string(n));
}

void check_bounds(double a, double b, const char* name) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw ConfigError(std::string("inverted or non-finite bounds for ") + name);
}

void check_size(Index expected, Index got, const char* what) {
  if (expected != got)
    throw ConfigError(std::string("grid mismatch in ") + what + ": expected " +
                      std::to_string(expected) + " values, got " + std::to_string(got));
}

}  // namespace

SpatialGrid make_spatial_grid(Index nx, Index ny, double ax, double bx, double ay, double by) {
  check_count(nx, "nx");
  check_count(ny, "ny");
  check_bounds(ax, bx, "x");
  check_bounds(ay, by, "y");
  SpatialGrid g;
  g.nx = nx;
  g.ny = ny;
  g.ax = ax;
  g.bx = bx;
  g.ay = ay;
  g.by = by;
  g.dx = (bx - ax) / nx;
  g.dy = (by - ay) / ny;
  return g;
}

VelocityGrid make_velocity_grid(Index nv, double av, double bv) {
  check_count(nv, "nv");
  check_bounds(av, bv, "v");
  VelocityGrid g;
  g.nv = nv;
  g.av = av;
  g.bv = bv;
  g.dv = (bv - av) / nv;
  return g;
}

std::pair<SpatialGrid, VelocityGrid> make_grids(const GridConfig& c) {
  return {make_spatial_grid(c.nx, c.ny, c.ax, c.bx, c.ay, c.by), make_velocity_grid(c.nv, c.av, c.bv)};
}

Field velocity_component(const VelocityGrid& g, Axis a) {
  return sample(g, [a](double v, double w) { return a == Axis::x ? v : w; });
}

double inner_x(const SpatialGrid& g, const Field& a, const Field& b) {
  check_size(g.size(), a.size(), "inner_x");
  check_size(g.size(), b.size(), "inner_x");
  return a.dot(b) * g.weight();
}

double inner_v(const VelocityGrid& g, const Field& a, const Field& b) {
  check_size(g.size(), a.size(), "inner_v");
  check_size(g.size(), b.size(), "inner_v");
  return a.dot(b) * g.weight();
}

// ---------------------------------------------------------------------------
// FFT

RealFft2d::RealFft2d(Index n_fast, Index n_slow) : n_fast_(n_fast), n_slow_(n_slow) {
  real_buf_ = fftw_alloc_real(n_fast * n_slow);
  auto* c = fftw_alloc_complex(spectral_size());
  cplx_buf_ = c;
  // fftw uses row-major dims: the last one is contiguous.
  plan_fwd_ = fftw_plan_dft_r2c_2d(int(n_slow), int(n_fast), real_buf_, c, FFTW_MEASURE);
  plan_bwd_ = fftw_plan_dft_c2r_2d(int(n_slow), int(n_fast), c, real_buf_, FFTW_MEASURE);
}

RealFft2d::~RealFft2d() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(real_buf_);
  fftw_free(cplx_buf_);
}

void RealFft2d::forward(const double* in, cplx* out) {
  std::copy(in, in + n_fast_ * n_slow_, real_buf_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  auto* c = reinterpret_cast<cplx*>(cplx_buf_);
  std::copy(c, c + spectral_size(), out);
}

void RealFft2d::backward(const cplx* in, double* out) {
  auto* c = reinterpret_cast<cplx*>(cplx_buf_);
  std::copy(in, in + spectral_size(), c);
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  std::copy(real_buf_, real_buf_ + n_fast_ * n_slow_, out);
}

RealFft2d& fft_plan(Index n_fast, Index n_slow) {
  thread_local std::map<std::pair<Index, Index>, std::unique_ptr<RealFft2d>> cache;
  auto& slot = cache[{n_fast, n_slow}];
  if (!slot) slot = std::make_unique<RealFft2d>(n_fast, n_slow);
  return *slot;
}

// ---------------------------------------------------------------------------
// Derivatives

namespace {

// Multiply spectral coefficients by i*k along the axis; Nyquist modes drop out.
void apply_ik(const SpatialGrid& g, Axis axis, const cplx* in, cplx* out) {
  const Index nh = g.nx / 2 + 1;
  const double two_pi = 2.0 * std::numbers::pi;
  for (Index j = 0; j < g.ny; ++j) {
    for (Index i = 0; i < nh; ++i) {
      double k = axis == Axis::x ? two_pi * fft_freq(i, g.nx) / g.length(Axis::x)
                                 : two_pi * fft_freq(j, g.ny) / g.length(Axis::y);
      out[i + nh * j] = cplx(0.0, k) * in[i + nh * j];
    }
  }
}

}  // namespace

Field spectral_dx(const SpatialGrid& g, const Field& f, Axis axis) {
  check_size(g.size(), f.size(), "spectral_dx");
  auto& fft = fft_plan(g.nx, g.ny);
  std::vector<cplx> hat(fft.spectral_size());
  fft.forward(f.data(), hat.data());
  apply_ik(g, axis, hat.data(), hat.data());
  Field out(g.size());
  fft.backward(hat.data(), out.data());
  return out / double(g.size());
}

Field central_dx(const SpatialGrid& g, const Field& f, Axis axis) {
  check_size(g.size(), f.size(), "central_dx");
  Field out(g.size());
  for (Index j = 0; j < g.ny; ++j) {
    for (Index i = 0; i < g.nx; ++i) {
      if (axis == Axis::x)
        out(g.idx(i, j)) = (f(g.idx((i + 1) % g.nx, j)) - f(g.idx((i - 1 + g.nx) % g.nx, j))) / (2 * g.dx);
      else
        out(g.idx(i, j)) = (f(g.idx(i, (j + 1) % g.ny)) - f(g.idx(i, (j - 1 + g.ny) % g.ny))) / (2 * g.dy);
    }
  }
  return out;
}

Field forward_dx(const SpatialGrid& g, const Field& f, Axis axis) {
  check_size(g.size(), f.size(), "forward_dx");
  Field out(g.size());
  for (Index j = 0; j < g.ny; ++j) {
    for (Index i = 0; i < g.nx; ++i) {
      if (axis == Axis::x)
        out(g.idx(i, j)) = (f(g.idx((i + 1) % g.nx, j)) - f(g.idx(i, j))) / g.dx;
      else
        out(g.idx(i, j)) = (f(g.idx(i, (j + 1) % g.ny)) - f(g.idx(i, j))) / g.dy;
    }
  }
  return out;
}

Field derivative(const SpatialGrid& g, const Field& f, Axis axis, Derivative kind) {
  switch (kind) {
    case Derivative::spectral: return spectral_dx(g, f, axis);
    case Derivative::central: return central_dx(g, f, axis);
    case Derivative::forward: return forward_dx(g, f, axis);
  }
  return {};
}

Vec2Field gradient(const SpatialGrid& g, const Field& f, Derivative kind) {
  if (kind != Derivative::spectral) return {derivative(g, f, Axis::x, kind), derivative(g, f, Axis::y, kind)};
  check_size(g.size(), f.size(), "gradient");
  auto& fft = fft_plan(g.nx, g.ny);
  std::vector<cplx> hat(fft.spectral_size()), tmp(fft.spectral_size());
  fft.forward(f.data(), hat.data());
  Vec2Field out{Field(g.size()), Field(g.size())};
  apply_ik(g, Axis::x, hat.data(), tmp.data());
  fft.backward(tmp.data(), out.x.data());
  apply_ik(g, Axis::y, hat.data(), tmp.data());
  fft.backward(tmp.data(), out.y.data());
  out.x /= double(g.size());
  out.y /= double(g.size());
  return out;
}

Field divergence(const SpatialGrid& g, const Field& fx, const Field& fy, Derivative kind) {
  if (kind != Derivative::spectral) return derivative(g, fx, Axis::x, kind) + derivative(g, fy, Axis::y, kind);
  check_size(g.size(), fx.size(), "divergence");
  check_size(g.size(), fy.size(), "divergence");
  auto& fft = fft_plan(g.nx, g.ny);
  std::vector<cplx> ax(fft.spectral_size()), ay(fft.spectral_size());
  fft.forward(fx.data(), ax.data());
  fft.forward(fy.data(), ay.data());
  apply_ik(g, Axis::x, ax.data(), ax.data());
  apply_ik(g, Axis::y, ay.data(), ay.data());
  for (std::size_t k = 0; k < ax.size(); ++k) ax[k] += ay[k];
  Field out(g.size());
  fft.backward(ax.data(), out.data());
  return out / double(g.size());
}

// ---------------------------------------------------------------------------
// Convolution

Field fft_convolve_v(const VelocityGrid& g, const Field& a, const Field& b) {
  check_size(g.size(), a.size(), "fft_convolve_v");
  check_size(g.size(), b.size(), "fft_convolve_v");
  auto& fft = fft_plan(g.nv, g.nv);
  std::vector<cplx> ah(fft.spectral_size()), bh(fft.spectral_size());
  fft.forward(a.data(), ah.data());
  fft.forward(b.data(), bh.data());
  for (std::size_t k = 0; k < ah.size(); ++k) ah[k] *= bh[k];
  Field out(g.size());
  fft.backward(ah.data(), out.data());
  return out * (g.weight() / double(g.size()));
}

}  // namespace lrbgk

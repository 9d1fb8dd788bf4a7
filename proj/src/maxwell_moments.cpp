#include "lrbgk/maxwell_moments.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lrbgk {

namespace {

using cplx = std::complex<double>;

// Second derivatives of the natural cubic spline through n equispaced values
// f[0], f[s], f[2s], ... written to m[0], m[s], ...
class NaturalSplineSolver {
public:
  NaturalSplineSolver(Index n, double h) : n_(n), h2_(h * h), cprime_(n, 0.0), denom_(n, 1.0) {
    // interior system: m[i-1] + 4 m[i] + m[i+1] = 6 (f[i+1] - 2 f[i] + f[i-1]) / h^2
    for (Index i = 1; i < n - 1; ++i) {
      const double prev = (i > 1) ? cprime_[i - 1] : 0.0;
      denom_[i] = 4.0 - prev;
      cprime_[i] = 1.0 / denom_[i];
    }
  }

  void solve(const double* f, Index fs, double* m, Index ms, std::vector<double>& work) const {
    work.assign(n_, 0.0);
    for (Index i = 1; i < n_ - 1; ++i) {
      const double rhs = 6.0 * (f[(i + 1) * fs] - 2.0 * f[i * fs] + f[(i - 1) * fs]) / h2_;
      const double prev = (i > 1) ? work[i - 1] : 0.0;
      work[i] = (rhs - prev) / denom_[i];
    }
    m[0] = 0.0;
    m[(n_ - 1) * ms] = 0.0;
    double next = 0.0;
    for (Index i = n_ - 2; i >= 1; --i) {
      const double val = work[i] - cprime_[i] * next;
      m[i * ms] = val;
      next = val;
    }
  }

private:
  Index n_;
  double h2_;
  std::vector<double> cprime_, denom_;
};

void spline_weights(double t, double h, std::array<double, 2>& w, std::array<double, 2>& c) {
  const double a = 1.0 - t, b = t;
  w = {a, b};
  c = {(a * a * a - a) * h * h / 6.0, (b * b * b - b) * h * h / 6.0};
}

}  // namespace

ConvTable::ConvTable(const VelocityGrid& g, Index rank)
    : grid_(g), rank_(rank), data_(std::size_t(rank * g.size() * conv_component_count * 4), 0.0) {}

SplineStencil ConvTable::stencil(double u1, double u2) const {
  const double margin = 2.0 * grid_.dv;
  const double lo = grid_.av + margin, hi = grid_.bv - margin;
  if (!(u1 >= lo && u1 <= hi && u2 >= lo && u2 <= hi))
    throw NumericalError(NumericalError::Kind::velocity_overflow,
                         "velocity-domain overflow: bulk velocity (" + std::to_string(u1) + ", " +
                             std::to_string(u2) + ") outside the safe interior of the velocity grid");
  SplineStencil st;
  const double sx = (u1 - grid_.av) / grid_.dv, sy = (u2 - grid_.av) / grid_.dv;
  st.i = std::min(Index(sx), grid_.nv - 2);
  st.j = std::min(Index(sy), grid_.nv - 2);
  spline_weights(sx - st.i, grid_.dv, st.wx, st.cx);
  spline_weights(sy - st.j, grid_.dv, st.wy, st.cy);
  return st;
}

double ConvTable::evaluate(Index j, ConvComponent c, const SplineStencil& st) const {
  double s = 0.0;
  for (int b = 0; b < 2; ++b) {
    for (int a = 0; a < 2; ++a) {
      const double* d = &data_[offset(j, grid_.idx(st.i + a, st.j + b), int(c))];
      s += st.wx[a] * st.wy[b] * d[0] + st.cx[a] * st.wy[b] * d[1] + st.wx[a] * st.cy[b] * d[2] +
           st.cx[a] * st.cy[b] * d[3];
    }
  }
  return s;
}

std::array<double, conv_component_count> ConvTable::weighted_sum(const double* coeff, Index stride,
                                                                  const SplineStencil& st) const {
  std::array<double, conv_component_count> acc{};
  std::array<double, 16> w;
  Index nodes[4];
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      const int k = a + 2 * b;
      nodes[k] = grid_.idx(st.i + a, st.j + b);
      w[4 * k + 0] = st.wx[a] * st.wy[b];
      w[4 * k + 1] = st.cx[a] * st.wy[b];
      w[4 * k + 2] = st.wx[a] * st.cy[b];
      w[4 * k + 3] = st.cx[a] * st.cy[b];
    }
  for (Index j = 0; j < rank_; ++j) {
    const double kj = coeff[j * stride];
    for (int k = 0; k < 4; ++k) {
      const double* d = &data_[offset(j, nodes[k], 0)];
      for (int c = 0; c < conv_component_count; ++c) {
        const double* q = d + 4 * c;
        acc[c] += kj * (w[4 * k] * q[0] + w[4 * k + 1] * q[1] + w[4 * k + 2] * q[2] + w[4 * k + 3] * q[3]);
      }
    }
  }
  return acc;
}

Field gaussian_kernel(const VelocityGrid& g) {
  Field G(g.size());
  for (Index j = 0; j < g.nv; ++j) {
    for (Index i = 0; i < g.nv; ++i) {
      const double d1 = double(i < g.nv / 2 ? i : i - g.nv) * g.dv;
      const double d2 = double(j < g.nv / 2 ? j : j - g.nv) * g.dv;
      G(g.idx(i, j)) = std::exp(-0.5 * (d1 * d1 + d2 * d2));
    }
  }
  return G;
}

ConvTable build_conv_tables(const VelocityGrid& g, const Basis& V) {
  if (V.rows() != g.size()) throw ConfigError("grid mismatch in build_conv_tables");
  const Index r = V.cols(), n = g.nv, N = g.size();
  ConvTable table(g, r);

  auto& fft = fft_plan(n, n);
  const Index ns = fft.spectral_size();
  std::vector<cplx> kernel_hat(ns), hat(ns);
  const Field G = gaussian_kernel(g);
  fft.forward(G.data(), kernel_hat.data());
  const double scale = g.weight() / double(N);

  const Field v1 = velocity_component(g, Axis::x), v2 = velocity_component(g, Axis::y);
  NaturalSplineSolver spline(n, g.dv);
  std::vector<double> work, tmp(N), values(N);

  for (Index j = 0; j < r; ++j) {
    for (int c = 0; c < conv_component_count; ++c) {
      Field weighted;
      switch (ConvComponent(c)) {
        case ConvComponent::g0: weighted = V.col(j); break;
        case ConvComponent::g1x: weighted = v1.cwiseProduct(V.col(j)); break;
        case ConvComponent::g1y: weighted = v2.cwiseProduct(V.col(j)); break;
        case ConvComponent::g2xx: weighted = v1.cwiseProduct(v1).cwiseProduct(V.col(j)); break;
        case ConvComponent::g2xy: weighted = v1.cwiseProduct(v2).cwiseProduct(V.col(j)); break;
        case ConvComponent::g2yy: weighted = v2.cwiseProduct(v2).cwiseProduct(V.col(j)); break;
      }
      fft.forward(weighted.data(), hat.data());
      for (Index k = 0; k < ns; ++k) hat[k] *= kernel_hat[k];
      fft.backward(hat.data(), values.data());

      double* base = &table.data_[table.offset(j, 0, c)];
      const Index ns_node = conv_component_count * 4;  // stride between nodes
      for (Index k = 0; k < N; ++k) base[k * ns_node] = values[k] * scale;
      // fxx along rows, fyy along columns, fxxyy = (fyy)xx
      for (Index row = 0; row < n; ++row)
        spline.solve(base + row * n * ns_node, ns_node, base + row * n * ns_node + 1, ns_node, work);
      for (Index col = 0; col < n; ++col)
        spline.solve(base + col * ns_node, n * ns_node, base + col * ns_node + 2, n * ns_node, work);
      for (Index row = 0; row < n; ++row)
        spline.solve(base + row * n * ns_node + 2, ns_node, base + row * n * ns_node + 3, ns_node, work);
    }
  }
  return table;
}

FluxFields maxwellian_flux_fields(const SpatialGrid& xg, const Basis& K, const MomentState& mom,
                                  const ConvTable& table) {
  const Index N = xg.size();
  if (K.rows() != N || mom.rho.size() != N) throw ConfigError("grid mismatch in maxwellian_flux_fields");
  if (K.cols() != table.rank()) throw ConfigError("rank mismatch between K and convolution table");
  FluxFields out{{Field(N), Field(N)}, {Field(N), Field(N), Field(N)}};
  const double norm = 1.0 / (2.0 * std::numbers::pi);
  for (Index i = 0; i < N; ++i) {
    const auto st = table.stencil(mom.u.x(i), mom.u.y(i));
    const auto s = table.weighted_sum(K.data() + i, K.rows(), st);
    const double f = mom.rho(i) * norm;
    out.phi1.x(i) = f * s[int(ConvComponent::g1x)];
    out.phi1.y(i) = f * s[int(ConvComponent::g1y)];
    out.phi2.xx(i) = f * s[int(ConvComponent::g2xx)];
    out.phi2.xy(i) = f * s[int(ConvComponent::g2xy)];
    out.phi2.yy(i) = f * s[int(ConvComponent::g2yy)];
  }
  return out;
}

FluxFields maxwellian_flux_fields(const LowRankState& s, const MomentState& mom, const ConvTable& table) {
  return maxwellian_flux_fields(s.xgrid, s.K(), mom, table);
}

SymTensorField stress_tensor_P1(const LowRankState& s, const MomentState& mom, const ConvTable& table,
                                const Field& eps) {
  const Index N = s.xgrid.size();
  if (eps.size() != N) throw ConfigError("grid mismatch in stress_tensor_P1");
  const Basis K = s.K();
  SymTensorField P{Field(N), Field(N), Field(N)};
  const double norm = 1.0 / (2.0 * std::numbers::pi);
  for (Index i = 0; i < N; ++i) {
    const double u1 = mom.u.x(i), u2 = mom.u.y(i);
    const auto st = table.stencil(u1, u2);
    const auto t = table.weighted_sum(K.data() + i, K.rows(), st);
    const double g0 = t[int(ConvComponent::g0)], g1x = t[int(ConvComponent::g1x)],
                 g1y = t[int(ConvComponent::g1y)];
    // int (v-u)(v-u)^T exp(-|v-u|^2/2) g dv expanded in the tables
    const double cxx = t[int(ConvComponent::g2xx)] - 2.0 * u1 * g1x + u1 * u1 * g0;
    const double cxy = t[int(ConvComponent::g2xy)] - u1 * g1y - u2 * g1x + u1 * u2 * g0;
    const double cyy = t[int(ConvComponent::g2yy)] - 2.0 * u2 * g1y + u2 * u2 * g0;
    const double rho = mom.rho(i), inv_eps = 1.0 / eps(i);
    P.xx(i) = inv_eps * (rho - rho * norm * cxx);
    P.xy(i) = inv_eps * (-rho * norm * cxy);
    P.yy(i) = inv_eps * (rho - rho * norm * cyy);
  }
  return P;
}

SymTensorField sigma_u(const SpatialGrid& g, const Vec2Field& u, Derivative kind) {
  const Vec2Field gu1 = gradient(g, u.x, kind);
  const Vec2Field gu2 = gradient(g, u.y, kind);
  return {gu1.x - gu2.y, gu1.y + gu2.x, gu2.y - gu1.x};
}

}  // namespace lrbgk

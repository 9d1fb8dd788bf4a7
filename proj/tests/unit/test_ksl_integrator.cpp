#include <doctest.h>

#include <numbers>

#include "lrbgk/ksl_integrator.hpp"
#include "oracles.hpp"

using namespace lrbgk;
using std::numbers::pi;

namespace {

LowRankState equilibrium(const SpatialGrid& xg, const VelocityGrid& vg, Index r) {
  return init_from_separable(xg, vg, {{Field::Ones(xg.size()), Field::Ones(vg.size())}}, r);
}

MomentState at_rest(const SpatialGrid& g, double rho = 1.0) {
  return {Field::Constant(g.size(), rho), {Field::Zero(g.size()), Field::Zero(g.size())}};
}

MScriptFields random_mfields(Index n, unsigned seed) {
  return {oracle::random_field(n, seed),
          {oracle::random_field(n, seed + 1), oracle::random_field(n, seed + 2)},
          {oracle::random_field(n, seed + 3), oracle::random_field(n, seed + 4), oracle::random_field(n, seed + 5)}};
}

VelocityCoeffs random_vcoeffs(Index r, unsigned seed) {
  auto sym = [&](unsigned s) {
    Eigen::MatrixXd A(r, r);
    for (Index j = 0; j < r; ++j) A.col(j) = oracle::random_field(r, s + unsigned(j));
    return Eigen::MatrixXd(0.5 * (A + A.transpose()));
  };
  return {sym(seed), sym(seed + 10), sym(seed + 20), sym(seed + 30), sym(seed + 40), oracle::random_field(r, seed + 50)};
}

SpatialCoeffs random_scoeffs(Index r, unsigned seed) {
  auto mat = [&](unsigned s) {
    Eigen::MatrixXd A(r, r);
    for (Index j = 0; j < r; ++j) A.col(j) = oracle::random_field(r, s + unsigned(j));
    return A;
  };
  SpatialCoeffs sc{mat(seed), mat(seed + 10), mat(seed + 20), mat(seed + 30), mat(seed + 40),
                   mat(seed + 50), mat(seed + 60), mat(seed + 70), oracle::random_field(r, seed + 80), {}};
  const Eigen::MatrixXd B = mat(seed + 90);
  sc.R = 3.0 * B * B.transpose();
  return sc;
}

}  // namespace

TEST_SUITE("ksl-integrator") {

TEST_CASE("velocity coefficients") {
  const VelocityGrid vg = make_velocity_grid(16, -6, 6);
  Basis V(vg.size(), 2);
  V.col(0) = Field::Constant(vg.size(), 1.0 / 12.0);
  const Field v1 = velocity_component(vg, Axis::x);
  V.col(1) = v1 - v1.mean() * Field::Ones(vg.size());
  V.col(1) /= std::sqrt(inner_v(vg, V.col(1), V.col(1)));
  const VelocityCoeffs c = velocity_coeffs(vg, V);
  CHECK(c.Vbar(0) == doctest::Approx(12.0));
  CHECK(std::abs(c.Vbar(1)) < 1e-12);
  // the left-closed grid has mean velocity -dv/2
  CHECK(c.c1x(0, 0) == doctest::Approx(-0.5 * vg.dv));
  CHECK(std::abs(c.c1x(0, 1)) > 1.0);

  const OrthoV o = qr_orthonormalize_v(vg, Basis(Eigen::MatrixXd::NullaryExpr(vg.size(), 2, [&](Index k, Index j) {
                                         return oracle::random_field(vg.size(), 100 + unsigned(j))(k);
                                       })));
  const VelocityCoeffs r = velocity_coeffs(vg, o.V);
  const Field v2 = velocity_component(vg, Axis::y);
  for (Index j = 0; j < 2; ++j)
    for (Index l = 0; l < 2; ++l) {
      double s1 = 0, s2 = 0, sxx = 0, sxy = 0, syy = 0;
      for (Index k = 0; k < vg.size(); ++k) {
        const double p = o.V(k, j) * o.V(k, l) * vg.weight();
        s1 += v1(k) * p;
        s2 += v2(k) * p;
        sxx += v1(k) * v1(k) * p;
        sxy += v1(k) * v2(k) * p;
        syy += v2(k) * v2(k) * p;
      }
      CHECK(r.c1x(j, l) == doctest::Approx(s1).epsilon(1e-12));
      CHECK(r.c1y(j, l) == doctest::Approx(s2).epsilon(1e-12));
      CHECK(r.cxx(j, l) == doctest::Approx(sxx).epsilon(1e-12));
      CHECK(r.cxy(j, l) == doctest::Approx(sxy).epsilon(1e-12));
      CHECK(r.cyy(j, l) == doctest::Approx(syy).epsilon(1e-12));
    }
}

TEST_CASE("M fields") {
  const SpatialGrid g = make_spatial_grid(16, 16, 0, 1, 0, 1);
  const Field zero = Field::Zero(g.size());
  MScriptFields m = mscript_fields(g, at_rest(g), {zero, {zero, zero}}, Derivative::spectral);
  CHECK(m.M1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.M2.x.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(m.M3.xy.cwiseAbs().maxCoeff() < 1e-14);

  m = mscript_fields(g, at_rest(g), {zero, {Field::Constant(g.size(), 0.3), zero}}, Derivative::spectral);
  CHECK(m.M1.cwiseAbs().maxCoeff() < 1e-14);
  CHECK((m.M2.x.array() - 0.3).abs().maxCoeff() < 1e-14);
  CHECK(m.M2.y.cwiseAbs().maxCoeff() < 1e-14);

  // smooth data against a sixth-order difference oracle
  const SpatialGrid h = make_spatial_grid(64, 64, 0, 1, 0, 1);
  MomentState mom{sample(h, [](double x, double) { return 1 + 0.1 * std::sin(2 * pi * x); }),
                  {sample(h, [](double, double y) { return 0.1 * std::sin(2 * pi * y); }),
                   sample(h, [](double x, double) { return 5e-3 * std::sin(2 * pi * x); })}};
  const MomentRhs rhs{oracle::random_field(h.size(), 110) * 0.0, {Field::Zero(h.size()), Field::Zero(h.size())}};
  m = mscript_fields(h, mom, rhs, Derivative::spectral);
  const Field u2sq = mom.u.x.cwiseProduct(mom.u.x) + mom.u.y.cwiseProduct(mom.u.y);
  const Field m2x = oracle::fd6(h, mom.rho, Axis::x).cwiseQuotient(mom.rho) - 0.5 * oracle::fd6(h, u2sq, Axis::x);
  CHECK((m.M2.x - m2x).cwiseAbs().maxCoeff() < 1e-5);
  const Field m3xy = 0.5 * (oracle::fd6(h, mom.u.x, Axis::y) + oracle::fd6(h, mom.u.y, Axis::x));
  CHECK((m.M3.xy - m3xy).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("c2 coefficients") {
  const Index n = 12, r = 3;
  const VelocityCoeffs vc = random_vcoeffs(r, 120);
  const MScriptFields m = random_mfields(n, 130);
  const C2Coeffs c2(vc, m);
  Basis K(n, r);
  for (Index l = 0; l < r; ++l) K.col(l) = oracle::random_field(n, 140 + unsigned(l));
  const Basis applied = c2.apply(K);
  for (Index x = 0; x < n; ++x)
    for (Index j = 0; j < r; ++j) {
      double s = 0.0;
      for (Index l = 0; l < r; ++l) {
        const double c = (j == l ? m.M1(x) : 0.0) + vc.c1x(j, l) * m.M2.x(x) + vc.c1y(j, l) * m.M2.y(x) +
                         vc.cxx(j, l) * m.M3.xx(x) + 2 * vc.cxy(j, l) * m.M3.xy(x) + vc.cyy(j, l) * m.M3.yy(x);
        CHECK(c2.at(j, l)(x) == doctest::Approx(c));
        s += c * K(x, l);
      }
      CHECK(applied(x, j) == doctest::Approx(s));
    }

  const Field z = Field::Zero(n);
  const C2Coeffs only_m1(vc, {Field::Constant(n, 2.0), {z, z}, {z, z, z}});
  CHECK((only_m1.at(0, 0).array() - 2.0).abs().maxCoeff() == 0.0);
  CHECK(only_m1.at(0, 1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dense c2 against the velocity integral of M") {
  // <V_j V_l M(v)>_v with M(x,v) = M1 + v.M2 + (v v^T):M3 evaluated per node
  const VelocityGrid vg = make_velocity_grid(8, -4, 4);
  Basis L(vg.size(), 2);
  L.col(0) = oracle::random_field(vg.size(), 150);
  L.col(1) = oracle::random_field(vg.size(), 151);
  const Basis V = qr_orthonormalize_v(vg, L).V;
  const VelocityCoeffs vc = velocity_coeffs(vg, V);
  const MScriptFields m = random_mfields(5, 160);
  const C2Coeffs c2(vc, m);
  for (Index x = 0; x < 5; ++x)
    for (Index j = 0; j < 2; ++j)
      for (Index l = 0; l < 2; ++l) {
        double s = 0.0;
        for (Index b = 0; b < vg.nv; ++b)
          for (Index a = 0; a < vg.nv; ++a) {
            const double v1 = vg.v(a), v2 = vg.v(b);
            const double M = m.M1(x) + v1 * m.M2.x(x) + v2 * m.M2.y(x) + v1 * v1 * m.M3.xx(x) +
                             2 * v1 * v2 * m.M3.xy(x) + v2 * v2 * m.M3.yy(x);
            s += V(vg.idx(a, b), j) * V(vg.idx(a, b), l) * M * vg.weight();
          }
        CHECK(c2.at(j, l)(x) == doctest::Approx(s).epsilon(1e-12));
      }
}

TEST_CASE("spectral K step limits") {
  const SpatialGrid xg = make_spatial_grid(16, 16, 0, 1, 0, 1);
  const VelocityGrid vg = make_velocity_grid(16, -6, 6);
  const LowRankState s = equilibrium(xg, vg, 2);
  const VelocityCoeffs vc = velocity_coeffs(vg, s.V);
  const Field z = Field::Zero(xg.size());
  const C2Coeffs c2(vc, {z, {z, z}, {z, z, z}});
  const Field rho = Field::Ones(xg.size());

  // equilibrium is a fixed point
  const Basis K = k_step_spectral(s, vc, c2, rho, Field::Constant(xg.size(), 1e-2), 1e-3);
  CHECK((K - s.K()).cwiseAbs().maxCoeff() < 1e-12);

  // a perturbed state relaxes onto Vbar as eps -> 0
  LowRankState p = s;
  p.S(0, 0) = 0.5;  // X_0 is constant, so K stays constant in x
  const Basis K0 = k_step_spectral(p, vc, c2, rho, Field::Constant(xg.size(), 1e-14), 1e-3);
  for (Index j = 0; j < 2; ++j) CHECK((K0.col(j).array() - vc.Vbar(j)).abs().maxCoeff() < 1e-9);

  // eps -> infinity leaves explicit transport
  const Basis Kinf = k_step_spectral(p, vc, c2, rho, Field::Constant(xg.size(), 1e300), 1e-3);
  CHECK((Kinf - p.K()).cwiseAbs().maxCoeff() < 1e-12);  // spatially constant K: no transport
}

TEST_CASE("characteristic transport") {
  const SpatialGrid g = make_spatial_grid(32, 4, 0, 1, 0, 1);
  const Field step = sample(g, [](double x, double) { return x > 0.25 && x < 0.5 ? 1.0 : 0.0; });
  const double lambda = 1.5, dt = 0.5 * g.dx / lambda;
  const Field d = characteristic_transport(g, step, lambda, Axis::x, dt, Limiter::upwind);
  for (Index j = 0; j < g.ny; ++j)
    for (Index i = 0; i < g.nx; ++i) {
      const double ref = lambda * (step(g.idx(i, j)) - step(g.idx((i + 31) % 32, j))) / g.dx;
      CHECK(d(g.idx(i, j)) == doctest::Approx(ref));
    }
  // negative speed upwinds from the right
  const Field dn = characteristic_transport(g, step, -lambda, Axis::x, dt, Limiter::upwind);
  CHECK(dn(g.idx(8, 0)) == doctest::Approx(-lambda * (step(g.idx(9, 0)) - step(g.idx(8, 0))) / g.dx));

  // limited scheme stays monotone under repeated advection
  Field q = step;
  for (int k = 0; k < 40; ++k) q -= dt * characteristic_transport(g, q, lambda, Axis::x, dt, Limiter::van_leer);
  CHECK(q.maxCoeff() <= 1.0 + 1e-12);
  CHECK(q.minCoeff() >= -1e-12);
  // and along y
  const SpatialGrid gy = make_spatial_grid(4, 32, 0, 1, 0, 1);
  Field qy = sample(gy, [](double, double y) { return y > 0.25 && y < 0.5 ? 1.0 : 0.0; });
  for (int k = 0; k < 40; ++k) qy -= dt * characteristic_transport(gy, qy, -lambda, Axis::y, dt, Limiter::van_leer);
  CHECK(qy.maxCoeff() <= 1.0 + 1e-12);
  CHECK(qy.minCoeff() >= -1e-12);
}

TEST_CASE("SCFD K step") {
  const VelocityGrid vg = make_velocity_grid(16, -6, 6);
  SUBCASE("constant fields only relax") {
    const SpatialGrid xg = make_spatial_grid(8, 8, 0, 1, 0, 1);
    LowRankState s = equilibrium(xg, vg, 2);
    s.S(0, 0) = 0.3;
    const VelocityCoeffs vc = velocity_coeffs(vg, s.V);
    const Field z = Field::Zero(xg.size());
    const C2Coeffs c2(vc, {z, {z, z}, {z, z, z}});
    const Field rho = Field::Ones(xg.size()), eps = Field::Constant(xg.size(), 0.1);
    const double dt = 1e-2;
    const Basis K = k_step_scfd(s, vc, c2, rho, eps, dt, Limiter::van_leer);
    const Basis ref = (s.K() + dt / 0.1 * Eigen::VectorXd::Ones(xg.size()) * vc.Vbar.transpose()) / (1 + dt / 0.1);
    CHECK((K - ref).cwiseAbs().maxCoeff() < 1e-13);
  }

  SUBCASE("converges to the spectral step where the limiter is inactive") {
    // r = 1 makes K its own characteristic variable; nodes near the extrema
    // of sin(2 pi x), where van Leer clips the slope, are excluded
    auto diff = [&](Index n) {
      const SpatialGrid xg = make_spatial_grid(n, 4, 0, 1, 0, 1);
      const Field a = sample(xg, [](double x, double) { return 1.0 + 0.2 * std::sin(2 * pi * x); });
      const Field b = sample(vg, [](double v, double w) { return std::exp(-0.1 * (v * v + w * w)) * (1 + 0.2 * v); });
      const LowRankState s = init_from_separable(xg, vg, {{a, b}}, 1);
      const VelocityCoeffs vc = velocity_coeffs(vg, s.V);
      const Field z = Field::Zero(xg.size());
      const C2Coeffs c2(vc, {z, {z, z}, {z, z, z}});
      const Field rho = Field::Ones(xg.size()), eps = Field::Constant(xg.size(), 1.0);
      const double dt = 1e-6;  // isolates the spatial operator
      const Basis ks = k_step_spectral(s, vc, c2, rho, eps, dt);
      const Basis kf = k_step_scfd(s, vc, c2, rho, eps, dt, Limiter::van_leer);
      double err = 0.0;
      for (Index i = 0; i < xg.nx; ++i)
        if (std::abs(std::cos(2 * pi * xg.x(i))) > 0.3) err = std::max(err, std::abs(ks(xg.idx(i, 0), 0) - kf(xg.idx(i, 0), 0)));
      return err / dt;
    };
    const double e1 = diff(32), e2 = diff(64), e3 = diff(128);
    CHECK(std::log2(e1 / e2) >= 1.8);
    CHECK(std::log2(e2 / e3) >= 1.8);
  }
}

TEST_CASE("spatial coefficients") {
  const SpatialGrid xg = make_spatial_grid(16, 8, -1, 1, 0, 1);
  const Field z = Field::Zero(xg.size());
  const MScriptFields m{z, {z, z}, {z, z, z}};
  Basis X(xg.size(), 1);
  X.col(0) = Field::Constant(xg.size(), 1.0 / std::sqrt(2.0));
  SpatialCoeffs sc = spatial_coeffs(xg, X, m, Field::Ones(xg.size()), Field::Constant(xg.size(), 0.01),
                                    Derivative::spectral);
  CHECK(sc.R(0, 0) == doctest::Approx(100.0));
  CHECK(sc.Xbar(0) == doctest::Approx(100.0 * std::sqrt(2.0)));

  Basis L(xg.size(), 3);
  L.col(0) = Field::Ones(xg.size());
  L.col(1) = sample(xg, [](double x, double) { return std::sin(pi * x); });
  L.col(2) = sample(xg, [](double x, double y) { return std::cos(pi * x) + std::sin(2 * pi * y); });
  const Basis Xo = qr_orthonormalize_x(xg, L).X;
  const Field eps = sample(xg, [](double x, double) { return 1e-4 + std::tanh(1 - 11 * x) + std::tanh(1 + 11 * x); });
  const Field rho = sample(xg, [](double x, double) { return 1 + 0.1 * x; });
  sc = spatial_coeffs(xg, Xo, random_mfields(xg.size(), 170), rho, eps, Derivative::spectral);
  for (Index i = 0; i < 3; ++i) {
    double xb = 0;
    for (Index k = 0; k < xg.size(); ++k) xb += rho(k) * Xo(k, i) / eps(k) * xg.weight();
    CHECK(sc.Xbar(i) == doctest::Approx(xb).epsilon(1e-12));
    for (Index k2 = 0; k2 < 3; ++k2) {
      double rr = 0;
      for (Index k = 0; k < xg.size(); ++k) rr += rho(k) * Xo(k, i) * Xo(k, k2) / eps(k) * xg.weight();
      CHECK(sc.R(i, k2) == doctest::Approx(rr).epsilon(1e-12));
    }
  }
  // integration by parts: d1 is antisymmetric for spectral derivatives
  CHECK((sc.d1x + sc.d1x.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sc.d1y + sc.d1y.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(sc.d1x(2, 1)) > 1.0);
  CHECK(std::abs(sc.d1y(2, 1)) < 1e-12);
}

TEST_CASE("S step") {
  const Index r = 3;
  const VelocityCoeffs vc = random_vcoeffs(r, 200);
  const SpatialCoeffs sc = random_scoeffs(r, 300);
  Eigen::MatrixXd S1(r, r);
  for (Index j = 0; j < r; ++j) S1.col(j) = oracle::random_field(r, 400 + unsigned(j));

  CHECK((s_step(S1, vc, sc, 0.0) - S1).cwiseAbs().maxCoeff() == 0.0);

  const double dt = 0.01;
  Eigen::MatrixXd rhs(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < r; ++j) {
      double s = S1(i, j) - dt * sc.Xbar(i) * vc.Vbar(j);
      for (Index k = 0; k < r; ++k)
        for (Index l = 0; l < r; ++l) {
          const double c = (sc.d1x(i, k) + sc.d2x(i, k)) * vc.c1x(j, l) + (sc.d1y(i, k) + sc.d2y(i, k)) * vc.c1y(j, l) +
                           (j == l ? sc.dstar(i, k) : 0.0) + sc.d3xx(i, k) * vc.cxx(j, l) +
                           2 * sc.d3xy(i, k) * vc.cxy(j, l) + sc.d3yy(i, k) * vc.cyy(j, l);
          s += dt * c * S1(k, l);
        }
      rhs(i, j) = s;
    }
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(r, r) - dt * sc.R;
  const Eigen::MatrixXd ref = A.fullPivLu().solve(rhs);
  const Eigen::MatrixXd S2 = s_step(S1, vc, sc, dt);
  CHECK((S2 - ref).cwiseAbs().maxCoeff() < 1e-12 * ref.cwiseAbs().maxCoeff());
  CHECK((A * S2 - rhs).cwiseAbs().maxCoeff() < 1e-12 * rhs.cwiseAbs().maxCoeff());

  // scalar relaxation-only case
  const VelocityCoeffs v1{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1),
                          Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 12.0)};
  SpatialCoeffs s1;
  for (auto* M : {&s1.d1x, &s1.d1y, &s1.dstar, &s1.d2x, &s1.d2y, &s1.d3xx, &s1.d3xy, &s1.d3yy})
    *M = Eigen::MatrixXd::Zero(1, 1);
  s1.R = Eigen::MatrixXd::Constant(1, 1, 10.0);
  s1.Xbar = Eigen::VectorXd::Constant(1, 10.0);
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 3.0);
  CHECK(s_step(one, v1, s1, 0.05)(0, 0) == doctest::Approx((3.0 - 0.05 * 10 * 12) / (1 - 0.05 * 10)));

  // dt R = 1 is singular
  try {
    s_step(one, v1, s1, 0.1);
    CHECK(false);
  } catch (const NumericalError& e) {
    CHECK(e.kind() == NumericalError::Kind::singular_s_matrix);
  }
}

TEST_CASE("L step") {
  const Index r = 3;
  const VelocityGrid vg = make_velocity_grid(8, -4, 4);
  Basis L0(vg.size(), r);
  for (Index j = 0; j < r; ++j) L0.col(j) = oracle::random_field(vg.size(), 500 + unsigned(j));
  const Basis V = qr_orthonormalize_v(vg, L0).V;
  const VelocityCoeffs vc = velocity_coeffs(vg, V);
  const SpatialCoeffs sc = random_scoeffs(r, 600);
  Eigen::MatrixXd S2(r, r);
  for (Index j = 0; j < r; ++j) S2.col(j) = oracle::random_field(r, 700 + unsigned(j));

  CHECK((l_step(S2, vg, V, vc, sc, 0.0) - V * S2.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  const double dt = 0.02;
  const Basis Lnew = l_step(S2, vg, V, vc, sc, dt);
  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(r, r) + dt * sc.R;
  for (Index b = 0; b < vg.nv; ++b)
    for (Index a = 0; a < vg.nv; ++a) {
      const Index k = vg.idx(a, b);
      const double v1 = vg.v(a), v2 = vg.v(b);
      Eigen::VectorXd Lv(r), rhs(r);
      for (Index i = 0; i < r; ++i) {
        Lv(i) = 0;
        for (Index j = 0; j < r; ++j) Lv(i) += S2(i, j) * V(k, j);
      }
      for (Index i = 0; i < r; ++i) {
        double s = Lv(i) + dt * sc.Xbar(i);
        for (Index q = 0; q < r; ++q) {
          const double c = sc.d1x(i, q) * v1 + sc.d1y(i, q) * v2 + sc.dstar(i, q) + v1 * sc.d2x(i, q) +
                           v2 * sc.d2y(i, q) + v1 * v1 * sc.d3xx(i, q) + 2 * v1 * v2 * sc.d3xy(i, q) +
                           v2 * v2 * sc.d3yy(i, q);
          s -= dt * c * Lv(q);
        }
        rhs(i) = s;
      }
      const Eigen::VectorXd ref = B.fullPivLu().solve(rhs);
      for (Index i = 0; i < r; ++i) CHECK(Lnew(k, i) == doctest::Approx(ref(i)).epsilon(1e-12));
    }
}

TEST_CASE("full step") {
  const SpatialGrid xg = make_spatial_grid(8, 8, 0, 1, 0, 1);
  const VelocityGrid vg = make_velocity_grid(32, -8, 8);

  SUBCASE("equilibrium fixed point, both discretizations") {
    for (Discretization d : {Discretization::spectral, Discretization::scfd}) {
      LowRankState s = equilibrium(xg, vg, 3);
      MomentState m = at_rest(xg);
      const Field eps = Field::Constant(xg.size(), 1e-2);
      for (int k = 0; k < 10; ++k) {
        StepResult r = full_step(s, m, eps, 1e-3, {d, Limiter::van_leer});
        s = r.state;
        m = r.mom;
      }
      CHECK(deviation_from_equilibrium(s) < 1e-10);
      CHECK((m.rho.array() - 1.0).abs().maxCoeff() < 1e-12);
      CHECK(m.u.x.cwiseAbs().maxCoeff() < 1e-12);
      CHECK(orthonormality_defect(s) < 1e-10);
    }
  }

  SUBCASE("homogeneous relaxation follows the IMEX factor") {
    const Field bump = sample(vg, [](double v, double w) {
      return 1e-3 * std::exp(-((v - 4) * (v - 4) + (w - 2) * (w - 2)) / 0.2 + 0.5 * (v * v + w * w));
    });
    const Field ox = Field::Ones(xg.size());
    LowRankState s = init_from_separable(xg, vg, {{ox, Field::Ones(vg.size())}, {ox, bump}}, 3);
    MomentState m = at_rest(xg);
    // K, S and L each apply their own implicit factor to the deviation:
    // (1+a)^-1, (1-a)^-1 and (1+a)^-1 with a = dt rho / eps
    const double eps = 0.1, dt = 1e-3, a = dt / eps;
    const int steps = 50;
    const double d0 = deviation_from_equilibrium(s);
    for (int k = 0; k < steps; ++k) {
      StepResult r = full_step(s, m, Field::Constant(xg.size(), eps), dt, {});
      s = r.state;
      m = r.mom;
    }
    const double factor = std::pow((1 + a) * (1 + a) * (1 - a), -steps);
    const double ratio = deviation_from_equilibrium(s) / d0;
    CHECK(ratio == doctest::Approx(factor).epsilon(1e-8));
    const double rate = -std::log(ratio) / (steps * dt);
    CHECK(rate == doctest::Approx(1.0 / eps).epsilon(0.05));
  }

  SUBCASE("fluid limit keeps g near one") {
    MomentState m{sample(xg, [](double x, double) { return 1 + 0.1 * std::sin(2 * pi * x); }),
                  {sample(xg, [](double, double y) { return 0.1 * std::sin(2 * pi * y); }),
                   sample(xg, [](double x, double) { return 0.05 * std::cos(2 * pi * x); })}};
    const LowRankState s = equilibrium(xg, vg, 1);
    const StepResult r = full_step(s, m, Field::Constant(xg.size(), 1e-9), 1e-3, {});
    CHECK(deviation_from_equilibrium(r.state) <= 1e-6);
  }
}

}

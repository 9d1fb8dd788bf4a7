#include "lrbgk/ksl_integrator.hpp"

#include <cmath>
#include <string>

namespace lrbgk {

namespace {

Eigen::MatrixXd weighted_gram(const Basis& A, const Field& w, double dw) {
  return A.transpose() * (w.asDiagonal() * A) * dw;
}

}  // namespace

VelocityCoeffs velocity_coeffs(const VelocityGrid& g, const Basis& V) {
  if (V.rows() != g.size()) throw ConfigError("grid mismatch in velocity_coeffs");
  const Field v1 = velocity_component(g, Axis::x), v2 = velocity_component(g, Axis::y);
  const double w = g.weight();
  VelocityCoeffs c;
  c.c1x = weighted_gram(V, v1, w);
  c.c1y = weighted_gram(V, v2, w);
  c.cxx = weighted_gram(V, v1.cwiseProduct(v1), w);
  c.cxy = weighted_gram(V, v1.cwiseProduct(v2), w);
  c.cyy = weighted_gram(V, v2.cwiseProduct(v2), w);
  c.Vbar = V.colwise().sum().transpose() * w;
  return c;
}

MScriptFields mscript_fields(const SpatialGrid& g, const MomentState& mom, const MomentRhs& rhs, Derivative kind) {
  const Field& rho = mom.rho;
  const Field& u1 = mom.u.x;
  const Field& u2 = mom.u.y;
  // rho d_t u = I2 - I1 u
  const Field ax = rhs.I2.x - rhs.I1.cwiseProduct(u1);
  const Field ay = rhs.I2.y - rhs.I1.cwiseProduct(u2);

  MScriptFields m;
  m.M1 = (rhs.I1 - u1.cwiseProduct(ax) - u2.cwiseProduct(ay)).cwiseQuotient(rho);

  const Vec2Field grho = gradient(g, rho, kind);
  const Vec2Field gu2 = gradient(g, (u1.cwiseProduct(u1) + u2.cwiseProduct(u2)).eval(), kind);
  m.M2.x = (grho.x + ax).cwiseQuotient(rho) - 0.5 * gu2.x;
  m.M2.y = (grho.y + ay).cwiseQuotient(rho) - 0.5 * gu2.y;

  const Vec2Field g1 = gradient(g, u1, kind), g2 = gradient(g, u2, kind);
  m.M3.xx = g1.x;
  m.M3.xy = 0.5 * (g1.y + g2.x);
  m.M3.yy = g2.y;
  return m;
}

Field C2Coeffs::at(Index j, Index l) const {
  Field f = vc_.c1x(j, l) * m_.M2.x + vc_.c1y(j, l) * m_.M2.y + vc_.cxx(j, l) * m_.M3.xx +
            2.0 * vc_.cxy(j, l) * m_.M3.xy + vc_.cyy(j, l) * m_.M3.yy;
  if (j == l) f += m_.M1;
  return f;
}

Basis C2Coeffs::apply(const Basis& K) const {
  // (K c)(x, j) = sum_l K_l(x) c_lj, and every c is symmetric
  Basis out = m_.M1.asDiagonal() * K;
  out.noalias() += m_.M2.x.asDiagonal() * (K * vc_.c1x);
  out.noalias() += m_.M2.y.asDiagonal() * (K * vc_.c1y);
  out.noalias() += m_.M3.xx.asDiagonal() * (K * vc_.cxx);
  out.noalias() += (2.0 * m_.M3.xy).asDiagonal() * (K * vc_.cxy);
  out.noalias() += m_.M3.yy.asDiagonal() * (K * vc_.cyy);
  return out;
}

C2Coeffs c2_coeffs(const VelocityCoeffs& vc, const MScriptFields& m) { return C2Coeffs(vc, m); }

namespace {

Basis imex_relax(const Basis& K, const Basis& explicit_terms, const Field& rho, const Field& eps,
                 const Eigen::VectorXd& Vbar, double dt) {
  Basis out(K.rows(), K.cols());
  for (Index i = 0; i < K.rows(); ++i) {
    const double a = dt * rho(i);
    const double keep = 1.0 / (1.0 + a / eps(i));
    const double pull = a / (eps(i) + a);
    out.row(i) = keep * (K.row(i) - dt * explicit_terms.row(i)) + pull * Vbar.transpose();
  }
  return out;
}

void check_step_inputs(const LowRankState& s, const Field& rho, const Field& eps) {
  if (rho.size() != s.xgrid.size() || eps.size() != s.xgrid.size())
    throw ConfigError("grid mismatch in K step");
  if (!(eps.minCoeff() > 0.0)) throw ConfigError("Knudsen number must be positive everywhere");
}

}  // namespace

Basis k_step_spectral(const LowRankState& s, const VelocityCoeffs& vc, const C2Coeffs& c2, const Field& rho,
                      const Field& eps, double dt) {
  check_step_inputs(s, rho, eps);
  const Basis K = s.K();
  Basis dKx(K.rows(), K.cols()), dKy(K.rows(), K.cols());
  for (Index l = 0; l < K.cols(); ++l) {
    const Vec2Field gk = gradient(s.xgrid, K.col(l), Derivative::spectral);
    dKx.col(l) = gk.x;
    dKy.col(l) = gk.y;
  }
  Basis rhs = dKx * vc.c1x + dKy * vc.c1y;
  rhs += c2.apply(K);
  return imex_relax(K, rhs, rho, eps, vc.Vbar, dt);
}

Field characteristic_transport(const SpatialGrid& g, const Field& q, double lambda, Axis axis, double dt,
                               Limiter limiter) {
  const Index n = axis == Axis::x ? g.nx : g.ny;
  const Index lines = axis == Axis::x ? g.ny : g.nx;
  const double h = axis == Axis::x ? g.dx : g.dy;
  const double lp = std::max(lambda, 0.0), lm = std::min(lambda, 0.0);
  const double corr = 0.5 * std::abs(lambda) * (1.0 - std::abs(lambda) * dt / h);

  Field out(g.size());
  std::vector<double> line(n), flux(n);
  auto node = [&](Index line_idx, Index k) {
    return axis == Axis::x ? g.idx(k, line_idx) : g.idx(line_idx, k);
  };
  for (Index L = 0; L < lines; ++L) {
    for (Index k = 0; k < n; ++k) line[k] = q(node(L, k));
    auto at = [&](Index k) { return line[(k % n + n) % n]; };
    // flux[k] approximates the flux through the face k-1/2
    for (Index k = 0; k < n; ++k) {
      double f = lp * at(k - 1) + lm * at(k);
      if (limiter == Limiter::van_leer) {
        const double dq = at(k) - at(k - 1);
        const double dq_up = lambda > 0.0 ? at(k - 1) - at(k - 2) : at(k + 1) - at(k);
        const double limited = (dq * dq_up > 0.0) ? 2.0 * dq * dq_up / (dq + dq_up) : 0.0;
        f += corr * limited;
      }
      flux[k] = f;
    }
    for (Index k = 0; k < n; ++k) out(node(L, k)) = (flux[(k + 1) % n] - flux[k]) / h;
  }
  return out;
}

namespace {

// Rows of the returned matrix are eigenvectors (c = T^T diag(lambda) T); each
// eigenvector's largest-magnitude entry is made positive.
void sorted_eigen(const Eigen::MatrixXd& c, Eigen::MatrixXd& T, Eigen::VectorXd& lambda) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericalError(NumericalError::Kind::eigensolver, "symmetric eigensolver failed in SCFD K step");
  Eigen::MatrixXd E = es.eigenvectors();
  for (Index k = 0; k < E.cols(); ++k) {
    Index imax = 0;
    E.col(k).cwiseAbs().maxCoeff(&imax);
    if (E(imax, k) < 0.0) E.col(k) *= -1.0;
  }
  T = E.transpose();
  lambda = es.eigenvalues();
}

}  // namespace

Basis k_step_scfd(const LowRankState& s, const VelocityCoeffs& vc, const C2Coeffs& c2, const Field& rho,
                  const Field& eps, double dt, Limiter limiter) {
  check_step_inputs(s, rho, eps);
  const Basis K = s.K();
  Basis transport = Basis::Zero(K.rows(), K.cols());
  for (Axis axis : {Axis::x, Axis::y}) {
    Eigen::MatrixXd T;
    Eigen::VectorXd lambda;
    sorted_eigen(axis == Axis::x ? vc.c1x : vc.c1y, T, lambda);
    const Basis Khat = K * T.transpose();  // column i = sum_j T_ij K_j
    Basis delta(K.rows(), K.cols());
    for (Index i = 0; i < K.cols(); ++i)
      delta.col(i) = characteristic_transport(s.xgrid, Khat.col(i), lambda(i), axis, dt, limiter);
    transport += delta * T;  // back to sum_i T_ij delta_i
  }
  transport += c2.apply(K);
  return imex_relax(K, transport, rho, eps, vc.Vbar, dt);
}

SpatialCoeffs spatial_coeffs(const SpatialGrid& g, const Basis& X, const MScriptFields& m, const Field& rho,
                             const Field& eps, Derivative d1_kind) {
  if (X.rows() != g.size()) throw ConfigError("grid mismatch in spatial_coeffs");
  const Index r = X.cols();
  const double w = g.weight();
  Basis dXx(X.rows(), r), dXy(X.rows(), r);
  for (Index k = 0; k < r; ++k) {
    const Vec2Field gx = gradient(g, X.col(k), d1_kind);
    dXx.col(k) = gx.x;
    dXy.col(k) = gx.y;
  }
  SpatialCoeffs sc;
  sc.d1x = X.transpose() * dXx * w;
  sc.d1y = X.transpose() * dXy * w;
  sc.dstar = weighted_gram(X, m.M1, w);
  sc.d2x = weighted_gram(X, m.M2.x, w);
  sc.d2y = weighted_gram(X, m.M2.y, w);
  sc.d3xx = weighted_gram(X, m.M3.xx, w);
  sc.d3xy = weighted_gram(X, m.M3.xy, w);
  sc.d3yy = weighted_gram(X, m.M3.yy, w);
  const Field relax = rho.cwiseQuotient(eps);
  sc.Xbar = X.transpose() * relax * w;
  sc.R = weighted_gram(X, relax, w);
  return sc;
}

double s_step_condition(const SpatialCoeffs& sc, double dt) {
  const Index r = sc.R.rows();
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(r, r) - dt * sc.R;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
  return sv(r - 1) > 0.0 ? sv(0) / sv(r - 1) : std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd s_step(const Eigen::MatrixXd& S1, const VelocityCoeffs& vc, const SpatialCoeffs& sc, double dt) {
  const Index r = S1.rows();
  Eigen::MatrixXd flow = (sc.d1x + sc.d2x) * S1 * vc.c1x.transpose() + (sc.d1y + sc.d2y) * S1 * vc.c1y.transpose();
  flow += sc.dstar * S1;
  flow += sc.d3xx * S1 * vc.cxx.transpose() + 2.0 * sc.d3xy * S1 * vc.cxy.transpose() +
          sc.d3yy * S1 * vc.cyy.transpose();
  const Eigen::MatrixXd rhs = S1 + dt * flow - dt * sc.Xbar * vc.Vbar.transpose();
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(r, r) - dt * sc.R;

  const double cond = s_step_condition(sc, dt);
  if (!(cond < 1e14))
    throw NumericalError(NumericalError::Kind::singular_s_matrix,
                         "S-step matrix singular (condition estimate " + std::to_string(cond) + ")");
  return A.partialPivLu().solve(rhs);
}

Basis l_step(const Eigen::MatrixXd& S2, const VelocityGrid& vg, const Basis& V, const VelocityCoeffs& vc,
             const SpatialCoeffs& sc, double dt) {
  (void)vc;
  if (V.rows() != vg.size()) throw ConfigError("grid mismatch in l_step");
  const Index r = S2.rows();
  const Field v1 = velocity_component(vg, Axis::x), v2 = velocity_component(vg, Axis::y);
  const Basis L = V * S2.transpose();  // column i = sum_j S2_ij V_j

  // column i of (L A^T) is sum_k A_ik L_k
  Basis flow = v1.asDiagonal() * (L * (sc.d1x + sc.d2x).transpose());
  flow.noalias() += v2.asDiagonal() * (L * (sc.d1y + sc.d2y).transpose());
  flow.noalias() += L * sc.dstar.transpose();
  flow.noalias() += v1.cwiseProduct(v1).asDiagonal() * (L * sc.d3xx.transpose());
  flow.noalias() += (2.0 * v1.cwiseProduct(v2)).asDiagonal() * (L * sc.d3xy.transpose());
  flow.noalias() += v2.cwiseProduct(v2).asDiagonal() * (L * sc.d3yy.transpose());

  Basis rhs = L - dt * flow;
  rhs.rowwise() += dt * sc.Xbar.transpose();

  const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(r, r) + dt * sc.R;
  return B.partialPivLu().solve(rhs.transpose()).transpose();
}

StepResult full_step(const LowRankState& s, const MomentState& mom, const Field& eps, double dt,
                     const StepOptions& opt) {
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const SpatialGrid& xg = s.xgrid;
  const VelocityGrid& vg = s.vgrid;
  const bool spectral = opt.disc == Discretization::spectral;
  const Derivative dmom = spectral ? Derivative::spectral : Derivative::central;

  // Step 1: moments
  const ConvTable table = build_conv_tables(vg, s.V);
  const FluxFields flux = maxwellian_flux_fields(s, mom, table);
  const MomentRhs rhs = moment_rhs(xg, flux, dmom);

  StepResult out;
  out.mom = spectral ? euler_moment_step(mom, rhs, dt)
                     : to_moments(nt_staggered_full_step(to_conserved(mom), s, table, dt));

  // Step 2: K, S, L
  const VelocityCoeffs vc = velocity_coeffs(vg, s.V);
  const MScriptFields mf = mscript_fields(xg, mom, rhs, dmom);
  const C2Coeffs c2 = c2_coeffs(vc, mf);
  const Basis K1 = spectral ? k_step_spectral(s, vc, c2, mom.rho, eps, dt)
                            : k_step_scfd(s, vc, c2, mom.rho, eps, dt, opt.limiter);
  const OrthoX ox = qr_orthonormalize_x(xg, K1);

  const SpatialCoeffs sc =
      spatial_coeffs(xg, ox.X, mf, mom.rho, eps, spectral ? Derivative::spectral : Derivative::forward);
  out.s_condition = s_step_condition(sc, dt);
  const Eigen::MatrixXd S2 = s_step(ox.S, vc, sc, dt);
  const Basis L = l_step(S2, vg, s.V, vc, sc, dt);
  const OrthoV ov = qr_orthonormalize_v(vg, L);

  out.state.xgrid = xg;
  out.state.vgrid = vg;
  out.state.X = ox.X;
  out.state.S = ov.S;
  out.state.V = ov.V;
  return out;
}

}  // namespace lrbgk

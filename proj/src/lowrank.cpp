#include "lrbgk/lowrank.hpp"

#include <cmath>
#include <numbers>

namespace lrbgk {

namespace {

struct Mode {
  Index mx, my;
  bool sine;
};

// k = 0 is the constant; afterwards shells max(|mx|,|my|) = s in a fixed
// order, cosine before sine, one representative per +/- pair.
Mode mode_of(Index k) {
  if (k == 0) return {0, 0, false};
  Index count = 1;
  for (Index s = 1;; ++s) {
    for (Index my = 0; my <= s; ++my) {
      for (Index mx = -s; mx <= s; ++mx) {
        if (std::max(std::abs(mx), std::abs(my)) != s) continue;
        if (my == 0 && mx < 0) continue;
        if (k == count) return {mx, my, false};
        if (k == count + 1) return {mx, my, true};
        count += 2;
      }
    }
  }
}

double mode_value(const Mode& m, double sx, double sy) {
  const double phase = 2.0 * std::numbers::pi * (m.mx * sx + m.my * sy);
  if (m.mx == 0 && m.my == 0) return 1.0;
  return m.sine ? std::sin(phase) : std::cos(phase);
}

}  // namespace

Field spatial_candidate(const SpatialGrid& g, Index k) {
  const Mode m = mode_of(k);
  return sample(g, [&](double x, double y) {
    return mode_value(m, (x - g.ax) / g.length(Axis::x), (y - g.ay) / g.length(Axis::y));
  });
}

Field velocity_candidate(const VelocityGrid& g, Index k) {
  const Mode m = mode_of(k);
  const double len = g.bv - g.av;
  return sample(g, [&](double v, double w) { return mode_value(m, (v - g.av) / len, (w - g.av) / len); });
}

void weighted_qr(const Basis& A, double weight, const CandidateFn& candidates, Basis& Q,
                 Eigen::MatrixXd& R) {
  constexpr double rel_tol = 1e-12;
  constexpr double accept_ratio = 1e-3;
  const Index n = A.rows(), r = A.cols();
  if (r > n) throw ConfigError("rank exceeds the number of grid points");
  const double sw = std::sqrt(weight);

  Q = Basis::Zero(n, r);
  R = Eigen::MatrixXd::Zero(r, r);
  std::vector<bool> filled(r, false);

  double scale = 0.0;
  for (Index j = 0; j < r; ++j) scale = std::max(scale, sw * A.col(j).norm());

  for (Index j = 0; j < r; ++j) {
    Eigen::VectorXd v = A.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) {
        if (!filled[i]) continue;
        const double c = weight * Q.col(i).dot(v);
        v -= c * Q.col(i);
        R(i, j) += c;
      }
    }
    const double nrm = sw * v.norm();
    if (scale > 0.0 && nrm > rel_tol * scale) {
      Q.col(j) = v / nrm;
      R(j, j) = nrm;
      filled[j] = true;
    }
  }

  // Fill the remaining directions from the candidate sequence.
  Index next = 0;
  for (Index j = 0; j < r; ++j) {
    if (filled[j]) continue;
    for (;; ++next) {
      if (next > 4 * n + 16) throw NumericalError(NumericalError::Kind::eigensolver, "QR completion exhausted candidates");
      Eigen::VectorXd c = candidates(next);
      const double c_norm = sw * c.norm();
      for (int pass = 0; pass < 2; ++pass)
        for (Index i = 0; i < r; ++i)
          if (filled[i]) c -= (weight * Q.col(i).dot(c)) * Q.col(i);
      const double nrm = sw * c.norm();
      if (nrm > accept_ratio * c_norm) {
        Q.col(j) = c / nrm;
        filled[j] = true;
        ++next;
        break;
      }
    }
  }
}

OrthoX qr_orthonormalize_x(const SpatialGrid& g, const Basis& K) {
  if (K.rows() != g.size()) throw ConfigError("grid mismatch in qr_orthonormalize_x");
  OrthoX out;
  weighted_qr(K, g.weight(), [&g](Index k) { return spatial_candidate(g, k); }, out.X, out.S);
  return out;
}

OrthoV qr_orthonormalize_v(const VelocityGrid& g, const Basis& L) {
  if (L.rows() != g.size()) throw ConfigError("grid mismatch in qr_orthonormalize_v");
  OrthoV out;
  Eigen::MatrixXd R;
  weighted_qr(L, g.weight(), [&g](Index k) { return velocity_candidate(g, k); }, out.V, R);
  out.S = R.transpose();
  return out;
}

LowRankState init_from_separable(const SpatialGrid& xg, const VelocityGrid& vg,
                                 const std::vector<SeparableTerm>& terms, Index r) {
  if (r < 1) throw ConfigError("rank must be at least 1");
  if (terms.empty()) throw ConfigError("init_from_separable needs at least one term");
  const Index m = Index(terms.size());
  Basis A(xg.size(), m), B(vg.size(), m);
  for (Index k = 0; k < m; ++k) {
    if (terms[k].x_factor.size() != xg.size() || terms[k].v_factor.size() != vg.size())
      throw ConfigError("separable term does not match the grids");
    A.col(k) = terms[k].x_factor;
    B.col(k) = terms[k].v_factor;
  }
  auto qa = qr_orthonormalize_x(xg, A);
  Basis QB;
  Eigen::MatrixXd RB;
  weighted_qr(B, vg.weight(), [&vg](Index k) { return velocity_candidate(vg, k); }, QB, RB);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.S * RB.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Index keep = std::min(r, m);

  Basis Xp = Basis::Zero(xg.size(), r), Vp = Basis::Zero(vg.size(), r);
  Xp.leftCols(keep) = qa.X * svd.matrixU().leftCols(keep);
  Vp.leftCols(keep) = QB * svd.matrixV().leftCols(keep);

  LowRankState s;
  s.xgrid = xg;
  s.vgrid = vg;
  s.X = qr_orthonormalize_x(xg, Xp).X;
  s.V = qr_orthonormalize_v(vg, Vp).V;
  s.S = Eigen::MatrixXd::Zero(r, r);
  for (Index k = 0; k < keep; ++k) s.S(k, k) = svd.singularValues()(k);
  return s;
}

double deviation_from_equilibrium(const LowRankState& s) {
  return deviation_profile(s).maxCoeff();
}

Field deviation_profile(const LowRankState& s) {
  const Basis XS = s.X * s.S;
  Field out(s.xgrid.size());
  Eigen::VectorXd g(s.vgrid.size());
  for (Index i = 0; i < s.xgrid.size(); ++i) {
    g.noalias() = s.V * XS.row(i).transpose();
    out(i) = (g.array() - 1.0).abs().maxCoeff();
  }
  return out;
}

Field g_at_x(const LowRankState& s, Index ix, Index iy) {
  const Index i = s.xgrid.idx(ix, iy);
  return s.V * (s.X.row(i) * s.S).transpose();
}

Field g_at_v(const LowRankState& s, Index iv, Index iw) {
  const Index k = s.vgrid.idx(iv, iw);
  return s.X * (s.S * s.V.row(k).transpose());
}

Eigen::MatrixXd reconstruct(const LowRankState& s) { return s.X * s.S * s.V.transpose(); }

double orthonormality_defect(const LowRankState& s) {
  const Index r = s.rank();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(r, r);
  const double ex = (s.X.transpose() * s.X * s.xgrid.weight() - I).cwiseAbs().maxCoeff();
  const double ev = (s.V.transpose() * s.V * s.vgrid.weight() - I).cwiseAbs().maxCoeff();
  return std::max(ex, ev);
}

}  // namespace lrbgk

#pragma once

#include <optional>
#include <vector>

#include "bergman/tensor.hpp"

namespace bergman {

/** Constant term of every component: the tensor evaluated at the base point. */
struct PointTensor {
  int m = 0;
  int rank = 0;
  std::vector<GaussianRational> vals;

  static PointTensor zero(int m, int rank) {
    PointTensor t{m, rank, {}};
    std::size_t n = 1;
    for (int i = 0; i < rank; ++i) n *= m;
    t.vals.assign(n, GaussianRational());
    return t;
  }

  std::size_t flatten(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != rank)
      fail(ErrorKind::DimensionMismatch, "point tensor rank mismatch");
    std::size_t f = 0;
    for (int v : idx) {
      if (v < 0 || v >= m) fail(ErrorKind::DimensionMismatch, "point tensor index range");
      f = f * m + v;
    }
    return f;
  }
  const GaussianRational& at(const std::vector<int>& idx) const { return vals[flatten(idx)]; }
  GaussianRational& at(const std::vector<int>& idx) { return vals[flatten(idx)]; }

  friend bool operator==(const PointTensor& a, const PointTensor& b) {
    return a.m == b.m && a.rank == b.rank && a.vals == b.vals;
  }
};

inline PointTensor eval_at_zero(const TensorSeries& t) {
  PointTensor p = PointTensor::zero(t.dim(), t.rank());
  MultiIndex zero(t.dim(), 0);
  for (std::size_t f = 0; f < t.size(); ++f) p.vals[f] = t.flat(f).coeff(zero, zero);
  return p;
}

/** Ric_{i jbar} = g^{k lbar} R_{i jbar k lbar} as a series. */
inline TensorSeries ricci_series(const JetGeometry& geo) {
  int m = geo.curvature.dim();
  int n = std::min(geo.curvature.order(), geo.ginv.order());
  TensorSeries ric(m, n, {Slot::HolLower, Slot::AntiLower});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      TruncatedSeries acc(m, n);
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          acc = acc + geo.ginv.at({k, l}) * geo.curvature.at({i, j, k, l});
      ric.at({i, j}) = acc;
    }
  return ric;
}

/** rho = g^{i jbar} Ric_{i jbar} as a series. */
inline TruncatedSeries scalar_curvature_series(const JetGeometry& geo, const TensorSeries& ric) {
  int m = ric.dim();
  int n = std::min(ric.order(), geo.ginv.order());
  TruncatedSeries rho(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) rho = rho + (geo.ginv.at({i, j}) * ric.at({i, j})).truncated(n);
  return rho;
}

/** |R|^2 = R_{i jbar k lbar} R_{p qbar r sbar} g^{i qbar} g^{p jbar} g^{k sbar} g^{r lbar}. */
inline TruncatedSeries curvature_norm2_series(const JetGeometry& geo) {
  const TensorSeries& R = geo.curvature;
  const TensorSeries& gi = geo.ginv;
  int m = R.dim();
  int n = std::min(R.order(), gi.order());
  auto contract = [&](const TensorSeries& t, int slot_pos, bool raise_first) {
    // Replaces lower slot `slot_pos` by pairing with ginv; raise_first pairs
    // the holomorphic ginv index against the slot when the slot is antiholomorphic.
    TensorSeries out(m, n, t.signature());
    for (std::size_t f = 0; f < t.size(); ++f) {
      std::vector<int> idx = t.unflatten(f);
      std::vector<int> src = idx;
      TruncatedSeries acc(m, n);
      for (int c = 0; c < m; ++c) {
        src[slot_pos] = c;
        acc = acc + (raise_first ? gi.at({c, idx[slot_pos]}) : gi.at({idx[slot_pos], c})) *
                        t.at(src);
      }
      out.flat(f) = acc;
    }
    return out;
  };
  // C[q][p][s][r] = R_{i jbar k lbar} g^{i qbar} g^{p jbar} g^{k sbar} g^{r lbar}.
  TensorSeries c = R;
  c = contract(c, 0, true);   // i against hol index of g^{i qbar}: slot becomes qbar
  c = contract(c, 1, false);  // jbar against anti index: slot becomes p
  c = contract(c, 2, true);   // k: slot becomes sbar
  c = contract(c, 3, false);  // lbar: slot becomes r
  TruncatedSeries out(m, n);
  for (int q = 0; q < m; ++q)
    for (int p = 0; p < m; ++p)
      for (int s = 0; s < m; ++s)
        for (int r = 0; r < m; ++r)
          out = out + (c.at({q, p, s, r}) * R.at({p, q, r, s})).truncated(n);
  return out;
}

/** |Ric|^2 = Ric_{i jbar} Ric_{p qbar} g^{i qbar} g^{p jbar}. */
inline TruncatedSeries ricci_norm2_series(const JetGeometry& geo, const TensorSeries& ric) {
  const TensorSeries& gi = geo.ginv;
  int m = ric.dim();
  int n = std::min(ric.order(), gi.order());
  TruncatedSeries out(m, n);
  for (int q = 0; q < m; ++q)
    for (int p = 0; p < m; ++p) {
      TruncatedSeries cell(m, n);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          cell = cell + ((gi.at({i, q}) * gi.at({p, j})).truncated(n) * ric.at({i, j}))
                            .truncated(n);
      out = out + (cell * ric.at({p, q})).truncated(n);
    }
  return out;
}

/** Laplacian of a scalar: g^{s tbar} d^2 f / dz_s dzbar_t (no connection terms). */
inline TruncatedSeries laplacian_series(const JetGeometry& geo, const TruncatedSeries& f) {
  int m = f.dim();
  int n = std::min(f.order() - 2, geo.ginv.order());
  TruncatedSeries out(m, std::max(n, 0));
  for (int s = 0; s < m; ++s) {
    TruncatedSeries ds = f.derivative(s);
    for (int t = 0; t < m; ++t)
      out = out + (geo.ginv.at({s, t}) * ds.derivative(t, true)).truncated(out.order());
  }
  return out;
}

/**
 * Curvature and its covariant derivatives at the base point, for jets whose
 * mixed quadratic part is the identity (so g(0) = id and index contractions
 * at 0 are plain traces). Fields beyond the jet order stay unpopulated:
 * order >= 4 gives R, Ric, rho and the norms; >= 5 adds first derivatives;
 * >= 6 adds second derivatives, the rho Hessian, and the Laplacian.
 */
struct CurvatureData {
  int m = 0;
  int jet_order = 0;
  PointTensor R;                                    // R_{i jbar k lbar}
  PointTensor ric;                                  // Ric_{i jbar}
  GaussianRational rho, norm_R2, norm_Ric2;
  std::optional<PointTensor> dR_hol, dR_anti;       // R_{..,s} / R_{..,sbar}
  std::optional<PointTensor> ddR_mixed;             // R_{..,s tbar}
  std::optional<PointTensor> ddR_holhol;            // R_{..,s t}
  std::optional<PointTensor> ddR_antianti;          // R_{..,sbar tbar}
  std::optional<PointTensor> grad_rho_hol, grad_rho_anti;
  std::optional<PointTensor> hess_rho_holhol, hess_rho_mixed, hess_rho_antianti;
  std::optional<GaussianRational> lap_rho;
};

inline void require_identity_mixed_quadratic(const PotentialJet& jet) {
  int m = jet.series.dim();
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      if (!(jet.series.coeff(unit_index(m, j), unit_index(m, k)) ==
            GaussianRational(Rational(j == k ? 1 : 0))))
        fail(ErrorKind::NonIdentityQuadratic, "mixed quadratic part must be the identity");
}

inline CurvatureData curvature_data_at_point(const PotentialJet& jet, const JetGeometry& geo) {
  int order = jet.series.order();
  if (order < 4)
    fail(ErrorKind::InsufficientCurvatureDepth, "curvature data needs jet order >= 4");
  require_identity_mixed_quadratic(jet);

  TensorSeries ric = ricci_series(geo);
  TruncatedSeries rho = scalar_curvature_series(geo, ric);

  CurvatureData data;
  data.m = jet.series.dim();
  data.jet_order = order;
  data.R = eval_at_zero(geo.curvature);
  data.ric = eval_at_zero(ric);
  MultiIndex zero(data.m, 0);
  data.rho = rho.coeff(zero, zero);
  data.norm_R2 = curvature_norm2_series(geo).coeff(zero, zero);
  data.norm_Ric2 = ricci_norm2_series(geo, ric).coeff(zero, zero);

  if (order >= 5) {
    TensorSeries dR = covariant_derivative(geo.curvature, geo.gamma, false);
    TensorSeries dRb = covariant_derivative(geo.curvature, geo.gamma, true);
    data.dR_hol = eval_at_zero(dR);
    data.dR_anti = eval_at_zero(dRb);
    // rho as a rank-0 tensor for covariant differentiation.
    TensorSeries rho0(data.m, rho.order(), {});
    rho0.flat(0) = rho;
    TensorSeries drho = covariant_derivative(rho0, geo.gamma, false);
    TensorSeries drhob = covariant_derivative(rho0, geo.gamma, true);
    data.grad_rho_hol = eval_at_zero(drho);
    data.grad_rho_anti = eval_at_zero(drhob);
    if (order >= 6) {
      data.ddR_mixed = eval_at_zero(covariant_derivative(dR, geo.gamma, true));
      data.ddR_holhol = eval_at_zero(covariant_derivative(dR, geo.gamma, false));
      data.ddR_antianti = eval_at_zero(covariant_derivative(dRb, geo.gamma, true));
      data.hess_rho_holhol = eval_at_zero(covariant_derivative(drho, geo.gamma, false));
      data.hess_rho_mixed = eval_at_zero(covariant_derivative(drho, geo.gamma, true));
      data.hess_rho_antianti = eval_at_zero(covariant_derivative(drhob, geo.gamma, true));
      GaussianRational lap;
      for (int s = 0; s < data.m; ++s) lap += data.hess_rho_mixed->at({s, s});
      data.lap_rho = lap;
    }
  }
  return data;
}

inline CurvatureData curvature_data_at_point(const PotentialJet& jet) {
  if (jet.series.order() < 4)
    fail(ErrorKind::InsufficientCurvatureDepth, "curvature data needs jet order >= 4");
  require_identity_mixed_quadratic(jet);
  return curvature_data_at_point(jet, jet_geometry(jet));
}

}  // namespace bergman

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bergman/curvature.hpp"
#include "bergman/normal_form.hpp"
#include "bergman/poly.hpp"
#include "bergman/series.hpp"
#include "bergman/tensor.hpp"

namespace bergman {

/** FNV-1a over the canonical printed form; stable across runs and platforms. */
inline std::uint64_t jet_fingerprint(const PotentialJet& jet) {
  std::string s = std::to_string(jet.series.dim()) + "|" + std::to_string(jet.series.order()) +
                  "|" + series_to_string(jet.series);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace detail {

inline MultiIndex mi_of(int m, std::initializer_list<int> idxs) {
  MultiIndex r(m, 0);
  for (int i : idxs) r[i] += 1;
  return r;
}

/** Iterates all index tuples of length r over {0..m-1}, calling f(tuple). */
template <typename F>
void for_tuples(int m, int r, F&& f) {
  std::vector<int> idx(r, 0);
  while (true) {
    f(idx);
    int p = r - 1;
    while (p >= 0 && idx[p] == m - 1) idx[p--] = 0;
    if (p < 0) return;
    ++idx[p];
  }
}

}  // namespace detail

/**
 * Scalar curvature combination entering the half-power corrections:
 * S(u, vbar) = -R[i,j,k,l] u_i u_k vbar_j vbar_l.
 */
inline ScaledPolynomial curvature_pairing_S(const CurvatureData& data) {
  int m = data.m;
  ScaledPolynomial S(m);
  MultiIndex z(m, 0);
  detail::for_tuples(m, 4, [&](const std::vector<int>& t) {
    int i = t[0], j = t[1], k = t[2], l = t[3];
    GaussianRational c = data.R.at({i, j, k, l});
    if (c.is_zero()) return;
    S.add_coeff(QIdx{detail::mi_of(m, {i, k}), z, z, detail::mi_of(m, {j, l})}, -c);
  });
  return S;
}

/** L(u, vbar) = -(dR/dz_s) u_i u_k u_s vbar_j vbar_l - (dR/dzbar_s) u_i u_k vbar_j vbar_l vbar_s. */
inline ScaledPolynomial curvature_pairing_L(const CurvatureData& data) {
  int m = data.m;
  if (!data.dR_hol || !data.dR_anti)
    fail(ErrorKind::InsufficientCurvatureDepth, "first curvature derivatives unavailable");
  ScaledPolynomial L(m);
  MultiIndex z(m, 0);
  detail::for_tuples(m, 5, [&](const std::vector<int>& t) {
    int i = t[0], j = t[1], k = t[2], l = t[3], s = t[4];
    GaussianRational ch = data.dR_hol->at({i, j, k, l, s});
    if (!ch.is_zero())
      L.add_coeff(QIdx{detail::mi_of(m, {i, k, s}), z, z, detail::mi_of(m, {j, l})}, -ch);
    GaussianRational ca = data.dR_anti->at({i, j, k, l, s});
    if (!ca.is_zero())
      L.add_coeff(QIdx{detail::mi_of(m, {i, k}), z, z, detail::mi_of(m, {j, l, s})}, -ca);
  });
  return L;
}

/**
 * Degree-(3,3) curvature combination:
 * K1 = (-R[i,j,k,l;s,tbar] + R[p,j,k,l]R[i,p,s,t] + R[i,j,p,l]R[k,p,s,t]
 *       + R[i,p,k,t]R[p,j,s,l]) u_i u_k u_s vbar_j vbar_l vbar_t.
 */
inline ScaledPolynomial curvature_pairing_K1(const CurvatureData& data) {
  int m = data.m;
  if (!data.ddR_mixed)
    fail(ErrorKind::InsufficientCurvatureDepth, "second curvature derivatives unavailable");
  ScaledPolynomial K1(m);
  MultiIndex z(m, 0);
  detail::for_tuples(m, 6, [&](const std::vector<int>& t) {
    int i = t[0], j = t[1], k = t[2], l = t[3], s = t[4], tt = t[5];
    GaussianRational c = -data.ddR_mixed->at({i, j, k, l, s, tt});
    for (int p = 0; p < m; ++p) {
      c = c + data.R.at({p, j, k, l}) * data.R.at({i, p, s, tt});
      c = c + data.R.at({i, j, p, l}) * data.R.at({k, p, s, tt});
      c = c + data.R.at({i, p, k, tt}) * data.R.at({p, j, s, l});
    }
    if (c.is_zero()) return;
    K1.add_coeff(QIdx{detail::mi_of(m, {i, k, s}), z, z, detail::mi_of(m, {j, l, tt})}, c);
  });
  return K1;
}

/** K2 = -R[i,j,k,l;s,t] u_i u_k u_s u_t vbar_j vbar_l - R[i,j,k,l;sbar,tbar] u_i u_k vbar_j vbar_l vbar_s vbar_t. */
inline ScaledPolynomial curvature_pairing_K2(const CurvatureData& data) {
  int m = data.m;
  if (!data.ddR_holhol || !data.ddR_antianti)
    fail(ErrorKind::InsufficientCurvatureDepth, "second curvature derivatives unavailable");
  ScaledPolynomial K2(m);
  MultiIndex z(m, 0);
  detail::for_tuples(m, 6, [&](const std::vector<int>& t) {
    int i = t[0], j = t[1], k = t[2], l = t[3], s = t[4], tt = t[5];
    GaussianRational ch = data.ddR_holhol->at({i, j, k, l, s, tt});
    if (!ch.is_zero())
      K2.add_coeff(QIdx{detail::mi_of(m, {i, k, s, tt}), z, z, detail::mi_of(m, {j, l})}, -ch);
    GaussianRational ca = data.ddR_antianti->at({i, j, k, l, s, tt});
    if (!ca.is_zero())
      K2.add_coeff(QIdx{detail::mi_of(m, {i, k}), z, z, detail::mi_of(m, {j, l, s, tt})}, -ca);
  });
  return K2;
}

/**
 * Closed forms for the half-power coefficients b_1..b_4 evaluated from
 * pointwise curvature data. b_1 vanishes identically.
 */
inline ScaledPolynomial closed_form_b(const CurvatureData& data, int r) {
  int m = data.m;
  MultiIndex z(m, 0);
  if (r == 1) return ScaledPolynomial(m);
  if (r == 2) {
    ScaledPolynomial out = ScaledPolynomial::constant(m, GaussianRational(1, 2) * data.rho);
    return out + GaussianRational(1, 4) * sharp(curvature_pairing_S(data));
  }
  if (r == 3) {
    if (!data.grad_rho_hol || !data.grad_rho_anti)
      fail(ErrorKind::InsufficientCurvatureDepth, "scalar curvature gradient unavailable");
    ScaledPolynomial lin(m);
    for (int s = 0; s < m; ++s) {
      lin.add_coeff(QIdx{unit_index(m, s), z, z, z}, data.grad_rho_hol->at({s}));
      lin.add_coeff(QIdx{z, z, z, unit_index(m, s)}, data.grad_rho_anti->at({s}));
    }
    return GaussianRational(1, 2) * lin +
           GaussianRational(1, 12) * sharp(curvature_pairing_L(data));
  }
  if (r == 4) {
    if (!data.lap_rho || !data.hess_rho_holhol || !data.hess_rho_mixed ||
        !data.hess_rho_antianti)
      fail(ErrorKind::InsufficientCurvatureDepth, "scalar curvature Hessian unavailable");
    ScaledPolynomial quad(m);
    for (int s = 0; s < m; ++s)
      for (int t = 0; t < m; ++t) {
        quad.add_coeff(QIdx{detail::mi_of(m, {s, t}), z, z, z},
                       data.hess_rho_holhol->at({s, t}));
        quad.add_coeff(QIdx{unit_index(m, s), z, z, unit_index(m, t)},
                       GaussianRational(2) * data.hess_rho_mixed->at({s, t}));
        quad.add_coeff(QIdx{z, z, z, detail::mi_of(m, {s, t})},
                       data.hess_rho_antianti->at({s, t}));
      }
    ScaledPolynomial b2 = closed_form_b(data, 2);
    GaussianRational norm_part =
        GaussianRational(1, 24) * (data.norm_R2 - GaussianRational(4) * data.norm_Ric2);
    return ScaledPolynomial::constant(m, GaussianRational(1, 3) * (*data.lap_rho) + norm_part) +
           GaussianRational(1, 4) * quad +
           GaussianRational(1, 36) * sharp(curvature_pairing_K1(data)) +
           GaussianRational(1, 48) * sharp(curvature_pairing_K2(data)) +
           GaussianRational(1, 2) * (b2 * b2);
  }
  fail(ErrorKind::UnsupportedJ, "closed forms cover r = 1..4 only");
}

/**
 * Local invariants entering the integer-power diagonal expansion, as
 * truncated series around the base point: alpha_1 = rho/2 and
 * alpha_2 = Lap(rho)/3 + |R|^2/24 - |Ric|^2/6.
 */
struct AlphaSeries {
  TruncatedSeries alpha1;
  TruncatedSeries alpha2;
};

inline AlphaSeries alpha_invariants(const JetGeometry& geo) {
  TensorSeries ric = ricci_series(geo);
  TruncatedSeries rho = scalar_curvature_series(geo, ric);
  TruncatedSeries a1 = rho * GaussianRational(1, 2);
  TruncatedSeries lap = laplacian_series(geo, rho);
  TruncatedSeries nr2 = curvature_norm2_series(geo);
  TruncatedSeries nric2 = ricci_norm2_series(geo, ric);
  TruncatedSeries a2 = lap * GaussianRational(1, 3) + nr2 * GaussianRational(1, 24) -
                       nric2 * GaussianRational(1, 6);
  return {a1, a2};
}

namespace detail {

/**
 * Generic assembly of the j-th log-level coefficient from the K-form jet:
 * the alpha blocks contribute their degree-(j - 2r) Taylor terms as
 * u^P vbar^Q monomials, and each degree-(j + 2) jet coefficient a_{P,Q}
 * contributes a_{P,Q} (u^P vbar^Q - u^P ubar^Q / 2 - v^P vbar^Q / 2).
 */
inline ScaledPolynomial beta_from_parts(const PotentialJet& jet, const AlphaSeries& alphas,
                                        int j) {
  int m = jet.series.dim();
  if (j < 2 || j > 5) fail(ErrorKind::UnsupportedJ, "b6 and beyond require alpha3 (out of scope)");
  if (jet.series.order() < j + 2) fail(ErrorKind::OrderTooLow, "jet order below j + 2");
  KFormReport rep = verify_K_form(jet, j + 2);
  if (!rep.ok) fail(ErrorKind::NotKForm, "jet is not in K-form to order j + 2");
  MultiIndex z(m, 0);
  ScaledPolynomial beta(m);
  for (int r = 1; r <= j / 2; ++r) {
    const TruncatedSeries& a = (r == 1) ? alphas.alpha1 : alphas.alpha2;
    if (a.order() < j - 2 * r)
      fail(ErrorKind::InsufficientCurvatureDepth, "alpha series order too low");
    for (const auto& [b, c] : a.terms())
      if (b.degree() == j - 2 * r) beta.add_coeff(QIdx{b.J, z, z, b.K}, c);
  }
  for (const auto& [b, c] : jet.series.terms()) {
    if (b.degree() != j + 2) continue;
    beta.add_coeff(QIdx{b.J, z, z, b.K}, c);
    beta.add_coeff(QIdx{b.J, b.K, z, z}, -GaussianRational(1, 2) * c);
    beta.add_coeff(QIdx{z, z, b.J, b.K}, -GaussianRational(1, 2) * c);
  }
  return beta;
}

/** Partitions of r into parts >= 2, non-increasing; calls f(parts). */
template <typename F>
void for_partitions_min2(int r, F&& f) {
  std::vector<int> parts;
  auto rec = [&](auto&& self, int rem, int max_part) -> void {
    if (rem == 0) {
      f(parts);
      return;
    }
    for (int p = std::min(rem, max_part); p >= 2; --p) {
      parts.push_back(p);
      self(self, rem - p, p);
      parts.pop_back();
    }
  };
  rec(rec, r, r);
}

}  // namespace detail

/** beta_j for a jet already in K-form to order j + 2. */
inline ScaledPolynomial beta_coefficient(const PotentialJet& jet, int j) {
  AlphaSeries alphas = alpha_invariants(jet_geometry(jet));
  return detail::beta_from_parts(jet, alphas, j);
}

/**
 * Exponentiates the log-level coefficients: b_r is the sum over partitions
 * of r into parts >= 2 of the product of the corresponding beta's divided
 * by the product of the multiplicities' factorials.
 */
inline ScaledPolynomial b_from_beta(const std::map<int, ScaledPolynomial>& betas, int r) {
  if (r < 1) fail(ErrorKind::BadInput, "r must be >= 1");
  int m = 0;
  for (const auto& [j, p] : betas) { m = p.dim(); break; }
  if (m == 0) fail(ErrorKind::MissingBeta, "no beta coefficients supplied");
  ScaledPolynomial out(m);
  detail::for_partitions_min2(r, [&](const std::vector<int>& parts) {
    ScaledPolynomial prod = ScaledPolynomial::constant(m, GaussianRational(1));
    std::map<int, int> mult;
    for (int p : parts) {
      auto it = betas.find(p);
      if (it == betas.end()) fail(ErrorKind::MissingBeta, "missing beta_" + std::to_string(p));
      prod = prod * it->second;
      mult[p] += 1;
    }
    Rational denom(1);
    for (const auto& [p, k] : mult)
      for (int i = 2; i <= k; ++i) denom *= i;
    out = out + prod * GaussianRational(Rational(1) / denom, Rational(0));
  });
  return out;
}

enum class Method { Closed, Generic, Both };

inline std::string method_name(Method me) {
  switch (me) {
    case Method::Closed: return "closed";
    case Method::Generic: return "generic";
    default: return "both";
  }
}

struct ExpansionResult {
  int m = 0;
  int r_max = 0;
  Method method = Method::Both;
  std::map<int, ScaledPolynomial> betas;  // generic route only
  std::map<int, ScaledPolynomial> bs;
  NormalizationRecord record;
  std::uint64_t input_fingerprint = 0;
};

/**
 * Full pipeline: normalize the jet to K-form of order r_max + 2, then
 * evaluate the requested half-power coefficients by the closed forms, the
 * generic log-assembly, or both (in which case they must agree exactly).
 */
inline ExpansionResult compute_expansion(const PotentialJet& jet, int r_max, Method method) {
  if (r_max > 5) fail(ErrorKind::UnsupportedJ, "b6 requires alpha3 (out of scope)");
  if (r_max < 1) fail(ErrorKind::UnsupportedJ, "r_max must be at least 1");
  if (r_max == 5 && method != Method::Generic)
    fail(ErrorKind::UnsupportedJ, "closed forms cover r = 1..4 only; use the generic method for b5");
  ExpansionResult res;
  res.m = jet.series.dim();
  res.r_max = r_max;
  res.method = method;
  res.input_fingerprint = jet_fingerprint(jet);

  auto [kjet, record] = normalize_to_K(jet, r_max + 2);
  res.record = std::move(record);
  JetGeometry geo = jet_geometry(kjet);

  std::map<int, ScaledPolynomial> closed, generic;
  if (method != Method::Generic) {
    CurvatureData data = curvature_data_at_point(kjet, geo);
    for (int r = 1; r <= r_max; ++r) closed.emplace(r, closed_form_b(data, r));
  }
  if (method != Method::Closed) {
    AlphaSeries alphas = alpha_invariants(geo);
    std::map<int, ScaledPolynomial> betas;
    for (int j = 2; j <= r_max; ++j)
      betas.emplace(j, detail::beta_from_parts(kjet, alphas, j));
    for (int r = 1; r <= r_max; ++r) generic.emplace(r, b_from_beta(betas, r));
    res.betas = std::move(betas);
  }
  if (method == Method::Both) {
    for (int r = 1; r <= r_max; ++r)
      if (!(closed.at(r) == generic.at(r)))
        fail(ErrorKind::CrossValidationMismatch,
             "closed and generic b_" + std::to_string(r) + " disagree");
  }
  res.bs = (method == Method::Closed) ? std::move(closed) : std::move(generic);
  return res;
}

/**
 * Polynomials entering the N^{-1/2} and N^{-1} absolute-value corrections
 * of the scaled diagonal-free kernel ratio: Re(S#)/4 and Re(L#)/12.
 */
struct PnCorrection {
  ScaledPolynomial q1;  // Re(sharp(S)) / 4
  ScaledPolynomial q2;  // Re(sharp(L)) / 12
};

inline PnCorrection pn_correction(const CurvatureData& data) {
  PnCorrection out{re_part(sharp(curvature_pairing_S(data))) * GaussianRational(1, 4),
                   re_part(sharp(curvature_pairing_L(data))) * GaussianRational(1, 12)};
  return out;
}

struct HomogeneityReport {
  bool scaling_ok = true;
  bool parity_ok = true;
  bool degree_ok = true;
  std::string detail;
};

/**
 * Structural invariants of the coefficients: replacing each degree-d jet
 * coefficient by t^{d-2} times itself multiplies b_r by t^r; the parity
 * b_r(-u, -v) = (-1)^r b_r holds; and deg b_r <= 2r for even r, 2r - 1 for
 * odd r.
 */
inline HomogeneityReport homogeneity_check(const PotentialJet& jet, const Rational& t,
                                           int r_max) {
  HomogeneityReport rep;
  ExpansionResult base = compute_expansion(jet, r_max, Method::Generic);
  ExpansionResult scaled = compute_expansion(scale_jet(jet, t), r_max, Method::Generic);
  Rational tp(1);
  for (int r = 1; r <= r_max; ++r) {
    tp *= t;
    const ScaledPolynomial& b = base.bs.at(r);
    if (!(scaled.bs.at(r) == b * GaussianRational(tp, Rational(0)))) {
      rep.scaling_ok = false;
      rep.detail += "scaling fails at r=" + std::to_string(r) + "; ";
    }
    ScaledPolynomial flipped = b.parity_flip();
    bool even = (r % 2 == 0);
    if (!(flipped == (even ? b : -b))) {
      rep.parity_ok = false;
      rep.detail += "parity fails at r=" + std::to_string(r) + "; ";
    }
    int bound = even ? 2 * r : 2 * r - 1;
    if (b.degree() > bound) {
      rep.degree_ok = false;
      rep.detail += "degree bound fails at r=" + std::to_string(r) + "; ";
    }
  }
  return rep;
}

}  // namespace bergman

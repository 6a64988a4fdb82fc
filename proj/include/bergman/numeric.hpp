#pragma once

#include <boost/multiprecision/mpfr.hpp>
#include <array>
#include <map>
#include <utility>
#include <vector>

#include "bergman/expansion.hpp"
#include "bergman/models.hpp"
#include "bergman/poly.hpp"
#include "bergman/rational.hpp"

namespace bergman {

/** Arbitrary-precision real; precision is set process-wide before use. */
using Real =
    boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                  boost::multiprecision::et_off>;

namespace detail {
inline int& precision_bits_slot() {
  static int bits = 0;
  return bits;
}
}  // namespace detail

/**
 * Sets the working precision for all Real values constructed afterwards.
 * Call before building inputs; one precision per run.
 */
inline void set_precision_bits(int bits) {
  if (bits < 64) fail(ErrorKind::BadInput, "precision must be at least 64 bits");
  detail::precision_bits_slot() = bits;
  unsigned digits10 = static_cast<unsigned>(bits * 30103ULL / 100000ULL) + 2;
  Real::default_precision(digits10);
}

inline int precision_bits_in_use() {
  if (detail::precision_bits_slot() == 0) set_precision_bits(256);
  return detail::precision_bits_slot();
}

/** 2^(-bits/2): below this magnitude a residual is cancellation noise. */
inline Real noise_floor() {
  return ldexp(Real(1), -(precision_bits_in_use() / 2));
}

inline Real pi_value() { return atan2(Real(0), Real(-1)); }

inline Real rational_to_real(const Rational& q) {
  return Real(q.get_num().get_str()) / Real(q.get_den().get_str());
}

struct Complex {
  Real re, im;

  Complex() : re(0), im(0) {}
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
  explicit Complex(const Real& r) : re(r), im(0) {}
  explicit Complex(const GaussianRational& c)
      : re(rational_to_real(c.re)), im(rational_to_real(c.im)) {}

  friend Complex operator+(const Complex& a, const Complex& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend Complex operator-(const Complex& a, const Complex& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Complex operator*(const Real& s, const Complex& a) { return {s * a.re, s * a.im}; }
  friend Complex operator/(const Complex& a, const Complex& b) {
    Real n = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
  Complex conj() const { return {re, -im}; }
};

inline Real norm2(const Complex& a) { return a.re * a.re + a.im * a.im; }
inline Real abs(const Complex& a) { return sqrt(norm2(a)); }

inline Complex cexp(const Complex& a) {
  Real r = exp(a.re);
  return {r * cos(a.im), r * sin(a.im)};
}

inline Complex clog(const Complex& a) { return {log(norm2(a)) / 2, atan2(a.im, a.re)}; }

inline Complex cpow_int(const Complex& a, int e) {
  if (e < 0) return Complex(Real(1)) / cpow_int(a, -e);
  Complex r(Real(1));
  Complex base = a;
  for (int k = e; k > 0; k >>= 1) {
    if (k & 1) r = r * base;
    if (k > 1) base = base * base;
  }
  return r;
}

using CVec = std::vector<Complex>;

inline Complex dot_conj(const CVec& u, const CVec& v) {
  if (u.size() != v.size()) fail(ErrorKind::DimensionMismatch, "point arity mismatch");
  Complex s;
  for (std::size_t k = 0; k < u.size(); ++k) s = s + u[k] * v[k].conj();
  return s;
}

inline Real abs2_sum(const CVec& u) {
  Real s(0);
  for (const Complex& c : u) s += norm2(c);
  return s;
}

inline CVec scale_point(const CVec& u, const Real& s) {
  CVec r = u;
  for (Complex& c : r) c = s * c;
  return r;
}

/** Evaluates a coefficient polynomial at numeric (u, v). */
inline Complex evaluate_poly(const ScaledPolynomial& p, const CVec& u, const CVec& v) {
  int m = p.dim();
  if (static_cast<int>(u.size()) != m || static_cast<int>(v.size()) != m)
    fail(ErrorKind::DimensionMismatch, "evaluation point arity mismatch");
  Complex out;
  for (const auto& [q, c] : p.terms()) {
    Complex t(c);
    for (int k = 0; k < m; ++k) {
      t = t * cpow_int(u[k], q.u[k]) * cpow_int(u[k].conj(), q.ubar[k]) *
          cpow_int(v[k], q.v[k]) * cpow_int(v[k].conj(), q.vbar[k]);
    }
    out = out + t;
  }
  return out;
}

/** i(th1 - th2) + u.vbar - (|u|^2 + |v|^2)/2 - m log(pi). */
inline Complex bargmann_fock_log_kernel(const CVec& u, const CVec& v, const Real& th1,
                                        const Real& th2) {
  Complex out = dot_conj(u, v);
  out.im += th1 - th2;
  out.re -= (abs2_sum(u) + abs2_sum(v)) / 2;
  out.re -= static_cast<int>(u.size()) * log(pi_value());
  return out;
}

/**
 * Weighted projective-space kernel, in logarithmic form:
 * log((N+m)!/(pi^m N!)) + N log(1 + u.vbar)
 *   - (N/2) log(1+|u|^2) - (N/2) log(1+|v|^2).
 */
inline Complex exact_cpm_log_kernel_at(int m, long N, const CVec& u, const CVec& v) {
  Complex w = Complex(Real(1)) + dot_conj(u, v);
  if (abs(w) < noise_floor())
    fail(ErrorKind::LogBranchNearSingularity, "1 + u.vbar is numerically zero");
  Real lead(0);
  for (int i = 1; i <= m; ++i) lead += log(Real(N + i));
  lead -= m * log(pi_value());
  Complex out = Real(N) * clog(w);
  out.re += lead;
  out.re -= Real(N) / 2 * (log(Real(1) + abs2_sum(u)) + log(Real(1) + abs2_sum(v)));
  return out;
}

inline Complex exact_cpm_log_kernel(int m, long N, const CVec& u, const CVec& v,
                                    int precision_bits) {
  set_precision_bits(precision_bits);
  return exact_cpm_log_kernel_at(m, N, u, v);
}

/** Flat (Bargmann-Fock) weighted kernel of parameter N in logarithmic form. */
inline Complex flat_log_kernel_at(int m, long N, const CVec& u, const CVec& v) {
  Complex out = Real(N) * dot_conj(u, v);
  out.re -= Real(N) / 2 * (abs2_sum(u) + abs2_sum(v));
  out.re += m * (log(Real(N)) - log(pi_value()));
  return out;
}

/**
 * Independent curve-model check: the weighted kernel summed literally over
 * the monomial basis, with squared norms pi j! (N-j)! / (N+1)!.
 */
inline Complex cp1_kernel_finite_sum(long N, const Complex& z, const Complex& w) {
  Complex x = z * w.conj();
  Complex sum;
  Complex xp(Real(1));
  Real binom(1);
  for (long j = 0; j <= N; ++j) {
    sum = sum + binom * xp;
    xp = xp * x;
    binom = binom * Real(N - j) / Real(j + 1);
  }
  Real weight = exp(-Real(N) / 2 *
                    (log(Real(1) + norm2(z)) + log(Real(1) + norm2(w))));
  return (Real(N + 1) / pi_value()) * weight * sum;
}

enum class ModelKind { FubiniStudy, Flat };

struct ModelKernel {
  ModelKind kind = ModelKind::FubiniStudy;
  int m = 1;
};

inline Complex model_log_kernel(const ModelKernel& model, long N, const CVec& u, const CVec& v) {
  return model.kind == ModelKind::FubiniStudy ? exact_cpm_log_kernel_at(model.m, N, u, v)
                                              : flat_log_kernel_at(model.m, N, u, v);
}

inline PotentialJet model_jet(const ModelKernel& model, int order) {
  return model.kind == ModelKind::FubiniStudy ? fubini_study_jet(model.m, order)
                                              : flat_jet(model.m, order);
}

/**
 * Deterministic sample pairs (u, v) with |u|+|v| <= 2, embedded in the first
 * coordinate for m > 1.
 */
inline std::vector<std::pair<CVec, CVec>> sample_points(int m) {
  static const std::array<std::array<long, 8>, 8> table = {{
      // u_re_num, u_re_den, u_im_num, u_im_den, v_re_num, v_re_den, v_im_num, v_im_den
      {1, 2, 0, 1, 1, 4, 0, 1},
      {1, 2, 1, 2, -1, 4, 0, 1},
      {3, 4, 0, 1, -1, 2, 1, 4},
      {0, 1, 1, 2, 1, 2, 0, 1},
      {1, 2, 1, 4, 1, 4, -1, 2},
      {-3, 4, 1, 4, 1, 2, 1, 4},
      {1, 1, 0, 1, 1, 2, 1, 2},
      {2, 3, 0, 1, -1, 3, 1, 3},
  }};
  std::vector<std::pair<CVec, CVec>> pts;
  for (const auto& row : table) {
    CVec u(m), v(m);
    u[0] = Complex(rational_to_real(Rational(row[0], row[1])),
                   rational_to_real(Rational(row[2], row[3])));
    v[0] = Complex(rational_to_real(Rational(row[4], row[5])),
                   rational_to_real(Rational(row[6], row[7])));
    pts.emplace_back(std::move(u), std::move(v));
  }
  return pts;
}

/** Least-squares slope of y against x. */
inline Real fit_slope(const std::vector<Real>& xs, const std::vector<Real>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    fail(ErrorKind::BadInput, "slope fit needs at least two samples");
  Real xm(0), ym(0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xm += xs[i];
    ym += ys[i];
  }
  xm /= xs.size();
  ym /= ys.size();
  Real num(0), den(0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - xm) * (ys[i] - ym);
    den += (xs[i] - xm) * (xs[i] - xm);
  }
  return num / den;
}

struct ConvergenceFit {
  std::vector<long> N_grid;
  std::vector<Real> residual_norms;
  Real fitted_exponent;
  int precision_bits = 0;
  bool all_below_noise = false;
};

/**
 * Residual of the scaled kernel ratio against the truncated expansion:
 * exp(log K_N(u/sqrt(N), v/sqrt(N)) - m log N - log K_BF(u, v))
 *   - (1 + sum_{r<=r_used} N^{-r/2} b_r(u, v)),
 * max-normed over the sample points, then slope-fitted on a log-log grid.
 */
inline ConvergenceFit convergence_fit(const ModelKernel& model, const ExpansionResult& expansion,
                                      int r_used, const std::vector<long>& N_grid,
                                      const std::vector<std::pair<CVec, CVec>>& pts,
                                      int precision_bits) {
  set_precision_bits(precision_bits);
  if (model.m != expansion.m) fail(ErrorKind::DimensionMismatch, "model and expansion dimension");
  if (r_used < 1 || r_used > expansion.r_max)
    fail(ErrorKind::BadInput, "r_used must be within the computed expansion");
  if (N_grid.size() < 2) fail(ErrorKind::BadInput, "need at least two N values");
  for (std::size_t i = 0; i + 1 < N_grid.size(); ++i)
    if (N_grid[i] >= N_grid[i + 1]) fail(ErrorKind::BadInput, "N grid must increase");

  ConvergenceFit out;
  out.N_grid = N_grid;
  out.precision_bits = precision_bits;
  Real tiny = noise_floor();
  std::size_t below = 0;
  for (long N : N_grid) {
    Real rootN = sqrt(Real(N));
    Real inv_rootN = Real(1) / rootN;
    Real norm(0);
    for (const auto& [u, v] : pts) {
      CVec us = scale_point(u, inv_rootN), vs = scale_point(v, inv_rootN);
      Complex lr = model_log_kernel(model, N, us, vs);
      lr.re -= model.m * log(Real(N));
      lr = lr - bargmann_fock_log_kernel(u, v, Real(0), Real(0));
      Complex partial(Real(1));
      Real w(1);
      for (int r = 1; r <= r_used; ++r) {
        w /= rootN;
        partial = partial + w * evaluate_poly(expansion.bs.at(r), u, v);
      }
      Real res = abs(cexp(lr) - partial);
      if (res > norm) norm = res;
    }
    if (norm < tiny) ++below;
    out.residual_norms.push_back(norm);
  }
  if (below == N_grid.size()) {
    out.all_below_noise = true;
    out.fitted_exponent = Real(0);
    return out;
  }
  if (below > 0)
    fail(ErrorKind::PrecisionExhausted,
         "some residuals are below the cancellation floor; raise the precision");
  std::vector<Real> xs, ys;
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    xs.push_back(log(Real(N_grid[i])));
    ys.push_back(log(out.residual_norms[i]));
  }
  out.fitted_exponent = fit_slope(xs, ys);
  return out;
}

struct PnFit {
  std::vector<long> N_grid;
  std::vector<Real> deviation_norms;
  Real fitted_exponent;
  int precision_bits = 0;
  bool all_below_noise = false;
  bool bound_ok = true;  // 0 < P_N <= 1 at every sampled point
};

/**
 * Normalized kernel magnitude p_N = |K_N(u,v)| / sqrt(K_N(u,u) K_N(v,v)) at
 * scaled points, compared with its limit exp(-|u-v|^2/2) corrected by the
 * first-order term q1/N.
 */
inline PnFit pn_fit(const ModelKernel& model, const ScaledPolynomial& q1,
                    const std::vector<long>& N_grid,
                    const std::vector<std::pair<CVec, CVec>>& pts, int precision_bits) {
  set_precision_bits(precision_bits);
  if (N_grid.size() < 2) fail(ErrorKind::BadInput, "need at least two N values");
  PnFit out;
  out.N_grid = N_grid;
  out.precision_bits = precision_bits;
  Real tiny = noise_floor();
  std::size_t below = 0;
  for (long N : N_grid) {
    Real inv_rootN = Real(1) / sqrt(Real(N));
    Real norm(0);
    for (const auto& [u, v] : pts) {
      CVec us = scale_point(u, inv_rootN), vs = scale_point(v, inv_rootN);
      Real log_pn = model_log_kernel(model, N, us, vs).re -
                    model_log_kernel(model, N, us, us).re / 2 -
                    model_log_kernel(model, N, vs, vs).re / 2;
      if (log_pn > tiny) out.bound_ok = false;
      Real half_dist(0);
      for (std::size_t k = 0; k < u.size(); ++k) half_dist += norm2(u[k] - v[k]);
      Real target = -half_dist / 2 + evaluate_poly(q1, u, v).re / Real(N);
      Real dev = log_pn - target;
      if (dev < 0) dev = -dev;
      if (dev > norm) norm = dev;
    }
    if (norm < tiny) ++below;
    out.deviation_norms.push_back(norm);
  }
  if (below == N_grid.size()) {
    out.all_below_noise = true;
    out.fitted_exponent = Real(0);
    return out;
  }
  if (below > 0)
    fail(ErrorKind::PrecisionExhausted,
         "some deviations are below the cancellation floor; raise the precision");
  std::vector<Real> xs, ys;
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    xs.push_back(log(Real(N_grid[i])));
    ys.push_back(log(out.deviation_norms[i]));
  }
  out.fitted_exponent = fit_slope(xs, ys);
  return out;
}

namespace detail {

/**
 * Closed-form derivative calculus for the curve-model log kernel: terms
 * c * z^a zbar^b w^c wbar^d (1+z wbar)^{-p} (1+z zbar)^{-q} (1+w wbar)^{-r},
 * closed under the four first-order derivatives.
 */
using DKey = std::array<int, 7>;  // a, b, c, d, p, q, r
using DPoly = std::map<DKey, Rational>;

inline void dpoly_add(DPoly& p, const DKey& k, const Rational& c) {
  if (c == 0) return;
  auto it = p.find(k);
  if (it == p.end()) {
    p.emplace(k, c);
    return;
  }
  it->second += c;
  if (it->second == 0) p.erase(it);
}

/** op: 0 = d/dz, 1 = d/dzbar, 2 = d/dw, 3 = d/dwbar. */
inline DPoly dpoly_derive(const DPoly& p, int op) {
  DPoly out;
  for (const auto& [k, c] : p) {
    auto [a, b, cc, d, pp, q, r] = std::tuple{k[0], k[1], k[2], k[3], k[4], k[5], k[6]};
    if (op == 0) {
      if (a > 0) dpoly_add(out, {a - 1, b, cc, d, pp, q, r}, c * a);
      if (pp > 0) dpoly_add(out, {a, b, cc, d + 1, pp + 1, q, r}, -c * pp);
      if (q > 0) dpoly_add(out, {a, b + 1, cc, d, pp, q + 1, r}, -c * q);
    } else if (op == 1) {
      if (b > 0) dpoly_add(out, {a, b - 1, cc, d, pp, q, r}, c * b);
      if (q > 0) dpoly_add(out, {a + 1, b, cc, d, pp, q + 1, r}, -c * q);
    } else if (op == 2) {
      if (cc > 0) dpoly_add(out, {a, b, cc - 1, d, pp, q, r}, c * cc);
      if (r > 0) dpoly_add(out, {a, b, cc, d + 1, pp, q, r + 1}, -c * r);
    } else {
      if (d > 0) dpoly_add(out, {a, b, cc, d - 1, pp, q, r}, c * d);
      if (pp > 0) dpoly_add(out, {a + 1, b, cc, d, pp + 1, q, r}, -c * pp);
      if (r > 0) dpoly_add(out, {a, b, cc + 1, d, pp, q, r + 1}, -c * r);
    }
  }
  return out;
}

/** First derivative of log(1+z wbar) - log(1+z zbar)/2 - log(1+w wbar)/2. */
inline DPoly dpoly_seed(int op) {
  DPoly s;
  if (op == 0) {
    dpoly_add(s, {0, 0, 0, 1, 1, 0, 0}, Rational(1));
    dpoly_add(s, {0, 1, 0, 0, 0, 1, 0}, Rational(-1, 2));
  } else if (op == 1) {
    dpoly_add(s, {1, 0, 0, 0, 0, 1, 0}, Rational(-1, 2));
  } else if (op == 2) {
    dpoly_add(s, {0, 0, 0, 1, 0, 0, 1}, Rational(-1, 2));
  } else {
    dpoly_add(s, {1, 0, 0, 0, 1, 0, 0}, Rational(1));
    dpoly_add(s, {0, 0, 1, 0, 0, 0, 1}, Rational(-1, 2));
  }
  return s;
}

inline Complex dpoly_eval(const DPoly& p, const Complex& z, const Complex& w) {
  Complex one(Real(1));
  Complex zw = one + z * w.conj();
  Complex zz = one + Complex(norm2(z));
  Complex ww = one + Complex(norm2(w));
  Complex out;
  for (const auto& [k, c] : p) {
    Complex t(GaussianRational(c, Rational(0)));
    t = t * cpow_int(z, k[0]) * cpow_int(z.conj(), k[1]) * cpow_int(w, k[2]) *
        cpow_int(w.conj(), k[3]);
    t = t * cpow_int(zw, -k[4]) * cpow_int(zz, -k[5]) * cpow_int(ww, -k[6]);
    out = out + t;
  }
  return out;
}

}  // namespace detail

struct GrowthFit {
  int k = 0;
  std::vector<long> N_grid;
  std::vector<Real> sup_values;
  Real fitted_exponent;
  int precision_bits = 0;
};

/**
 * Growth of k-th derivatives of the curve-model log kernel over shrinking
 * balls |z|+|w| < a/sqrt(N): the sup over a fixed sampling grid of the
 * largest mixed derivative of total order k, fitted against N. Even k grow
 * like N, odd k like sqrt(N).
 */
inline GrowthFit derivative_growth_demo(int k, const std::vector<long>& N_grid,
                                        int precision_bits) {
  set_precision_bits(precision_bits);
  if (k < 1 || k > 6) fail(ErrorKind::BadInput, "derivative order must be in 1..6");
  if (N_grid.size() < 2) fail(ErrorKind::BadInput, "need at least two N values");

  // All derivative type multisets (n0, n1, n2, n3) with n0+n1+n2+n3 = k.
  std::vector<detail::DPoly> types;
  for (int n0 = 0; n0 <= k; ++n0)
    for (int n1 = 0; n0 + n1 <= k; ++n1)
      for (int n2 = 0; n0 + n1 + n2 <= k; ++n2) {
        int n3 = k - n0 - n1 - n2;
        std::vector<int> ops;
        for (int i = 0; i < n0; ++i) ops.push_back(0);
        for (int i = 0; i < n1; ++i) ops.push_back(1);
        for (int i = 0; i < n2; ++i) ops.push_back(2);
        for (int i = 0; i < n3; ++i) ops.push_back(3);
        detail::DPoly p = detail::dpoly_seed(ops[0]);
        for (std::size_t i = 1; i < ops.size(); ++i) p = detail::dpoly_derive(p, ops[i]);
        if (!p.empty()) types.push_back(std::move(p));
      }

  auto pts = sample_points(1);
  GrowthFit out;
  out.k = k;
  out.N_grid = N_grid;
  out.precision_bits = precision_bits;
  for (long N : N_grid) {
    Real inv_rootN = Real(1) / sqrt(Real(N));
    Real sup(0);
    for (const auto& [u, v] : pts)
      for (int half = 0; half < 2; ++half) {
        Real s = half ? inv_rootN / 2 : inv_rootN;
        Complex z = s * u[0], w = s * v[0];
        for (const detail::DPoly& p : types) {
          Real val = Real(N) * abs(detail::dpoly_eval(p, z, w));
          if (val > sup) sup = val;
        }
      }
    out.sup_values.push_back(sup);
  }
  std::vector<Real> xs, ys;
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    xs.push_back(log(Real(N_grid[i])));
    ys.push_back(log(out.sup_values[i]));
  }
  out.fitted_exponent = fit_slope(xs, ys);
  return out;
}

}  // namespace bergman

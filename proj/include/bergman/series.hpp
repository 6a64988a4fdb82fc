#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bergman/error.hpp"
#include "bergman/rational.hpp"

namespace bergman {

using MultiIndex = std::vector<int>;

inline int index_total(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

inline MultiIndex unit_index(int m, int k) {
  MultiIndex e(m, 0);
  e[k] += 1;
  return e;
}

/** Bidegree exponent (J, K) of a monomial z^J zbar^K. */
struct Bidx {
  MultiIndex J, K;

  int degree() const { return index_total(J) + index_total(K); }
  bool operator<(const Bidx& o) const { return J != o.J ? J < o.J : K < o.K; }
  bool operator==(const Bidx& o) const { return J == o.J && K == o.K; }
};

/**
 * Polynomial truncation of a formal power series in z_1..z_m, zbar_1..zbar_m
 * with exact complex-rational coefficients. A series of order n carries no
 * information about terms of total degree > n; arithmetic truncates results
 * to the smallest participating order. Term storage is sparse, keyed in
 * lexicographic (J, K) order, and never holds zero coefficients.
 */
class TruncatedSeries {
 public:
  TruncatedSeries() : m_(0), order_(0) {}
  TruncatedSeries(int m, int order) : m_(m), order_(order) {
    if (m < 1) fail(ErrorKind::DimensionMismatch, "series dimension must be positive");
    if (order < 0) fail(ErrorKind::OrderTooLow, "series order must be nonnegative");
  }

  static TruncatedSeries constant(int m, int order, const GaussianRational& c) {
    TruncatedSeries s(m, order);
    s.add_coeff({MultiIndex(m, 0), MultiIndex(m, 0)}, c);
    return s;
  }

  /** The coordinate function z_k (bar = false) or zbar_k (bar = true). */
  static TruncatedSeries variable(int m, int order, int k, bool bar = false) {
    TruncatedSeries s(m, order);
    if (k < 0 || k >= m) fail(ErrorKind::DimensionMismatch, "variable index out of range");
    Bidx b{MultiIndex(m, 0), MultiIndex(m, 0)};
    (bar ? b.K : b.J)[k] = 1;
    s.add_coeff(b, GaussianRational(1));
    return s;
  }

  int dim() const { return m_; }
  int order() const { return order_; }
  const std::map<Bidx, GaussianRational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  GaussianRational coeff(const Bidx& b) const {
    auto it = terms_.find(b);
    return it == terms_.end() ? GaussianRational() : it->second;
  }
  GaussianRational coeff(const MultiIndex& J, const MultiIndex& K) const { return coeff({J, K}); }

  void add_coeff(const Bidx& b, const GaussianRational& c) {
    check_index(b);
    if (b.degree() > order_ || c.is_zero()) return;
    auto [it, fresh] = terms_.emplace(b, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  void set_coeff(const Bidx& b, const GaussianRational& c) {
    check_index(b);
    if (b.degree() > order_) fail(ErrorKind::DegreeOverflow, "coefficient beyond truncation order");
    terms_.erase(b);
    add_coeff(b, c);
  }

  /** Smallest total degree with a nonzero term; order()+1 when zero. */
  int lowest_degree() const {
    int lo = order_ + 1;
    for (const auto& [b, c] : terms_) lo = std::min(lo, b.degree());
    return lo;
  }

  TruncatedSeries truncated(int n) const {
    if (n > order_) fail(ErrorKind::OrderTooLow, "cannot raise truncation order");
    TruncatedSeries r(m_, n);
    for (const auto& [b, c] : terms_)
      if (b.degree() <= n) r.terms_.emplace(b, c);
    return r;
  }

  TruncatedSeries conj() const {
    TruncatedSeries r(m_, order_);
    for (const auto& [b, c] : terms_) r.terms_.emplace(Bidx{b.K, b.J}, c.conj());
    return r;
  }

  friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
    int n = common_order(a, b);
    TruncatedSeries r = a.truncated(n);
    for (const auto& [idx, c] : b.terms_)
      if (idx.degree() <= n) r.add_coeff(idx, c);
    return r;
  }

  friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
    int n = common_order(a, b);
    TruncatedSeries r = a.truncated(n);
    for (const auto& [idx, c] : b.terms_)
      if (idx.degree() <= n) r.add_coeff(idx, -c);
    return r;
  }

  friend TruncatedSeries operator-(const TruncatedSeries& a) {
    TruncatedSeries r(a.m_, a.order_);
    for (const auto& [b, c] : a.terms_) r.terms_.emplace(b, -c);
    return r;
  }

  friend TruncatedSeries operator*(const GaussianRational& c, const TruncatedSeries& a) {
    TruncatedSeries r(a.m_, a.order_);
    if (c.is_zero()) return r;
    for (const auto& [b, t] : a.terms_) r.terms_.emplace(b, c * t);
    return r;
  }

  friend TruncatedSeries operator*(const TruncatedSeries& a, const GaussianRational& c) {
    return c * a;
  }

  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    int n = common_order(a, b);
    TruncatedSeries r(a.m_, n);
    const TruncatedSeries& outer = a.terms_.size() <= b.terms_.size() ? a : b;
    const TruncatedSeries& inner = a.terms_.size() <= b.terms_.size() ? b : a;
    for (const auto& [bo, co] : outer.terms_) {
      int d = bo.degree();
      if (d > n) continue;
      for (const auto& [bi, ci] : inner.terms_) {
        if (d + bi.degree() > n) continue;
        Bidx prod{bo.J, bo.K};
        for (int k = 0; k < r.m_; ++k) {
          prod.J[k] += bi.J[k];
          prod.K[k] += bi.K[k];
        }
        r.add_coeff(prod, co * ci);
      }
    }
    return r;
  }

  /** d/dz_k (bar = false) or d/dzbar_k (bar = true); drops one order of validity. */
  TruncatedSeries derivative(int k, bool bar = false) const {
    if (k < 0 || k >= m_) fail(ErrorKind::DimensionMismatch, "derivative variable out of range");
    TruncatedSeries r(m_, std::max(order_ - 1, 0));
    for (const auto& [b, c] : terms_) {
      int e = bar ? b.K[k] : b.J[k];
      if (e == 0) continue;
      Bidx lower = b;
      (bar ? lower.K : lower.J)[k] -= 1;
      r.add_coeff(lower, GaussianRational(Rational(e)) * c);
    }
    return r;
  }

  /**
   * Substitutes z_k <- subs[k](z), zbar_k <- conj(subs[k])(z). Each subs[k]
   * must be holomorphic (no zbar terms) with zero constant term, so the
   * substitution preserves truncation validity.
   */
  TruncatedSeries compose_holomorphic(const std::vector<TruncatedSeries>& subs) const {
    if (static_cast<int>(subs.size()) != m_)
      fail(ErrorKind::DimensionMismatch, "substitution arity mismatch");
    int n = order_;
    for (const auto& w : subs) {
      if (w.dim() != m_) fail(ErrorKind::DimensionMismatch, "substitution dimension mismatch");
      n = std::min(n, w.order());
      for (const auto& [b, c] : w.terms_) {
        if (index_total(b.K) != 0)
          fail(ErrorKind::NonHolomorphicSubstitution, "substitution must be holomorphic");
        if (b.degree() == 0) fail(ErrorKind::ConstantTermPresent, "substitution must vanish at 0");
      }
    }
    TruncatedSeries r(m_, n);
    // Power caches; index [k][e] holds subs[k]^e (plain) or conj(subs[k])^e.
    std::vector<std::vector<TruncatedSeries>> pw(m_), pwc(m_);
    auto power = [&](std::vector<std::vector<TruncatedSeries>>& cache, int k, int e,
                     bool bar) -> const TruncatedSeries& {
      auto& row = cache[k];
      if (row.empty()) {
        row.push_back(TruncatedSeries::constant(m_, n, GaussianRational(1)));
        row.push_back((bar ? subs[k].conj() : subs[k]).truncated(n));
      }
      while (static_cast<int>(row.size()) <= e) row.push_back(row.back() * row[1]);
      return row[e];
    };
    for (const auto& [b, c] : terms_) {
      if (b.degree() > n) continue;
      TruncatedSeries acc = TruncatedSeries::constant(m_, n, c);
      for (int k = 0; k < m_ && !acc.is_zero(); ++k) {
        if (b.J[k] > 0) acc = acc * power(pw, k, b.J[k], false);
        if (b.K[k] > 0) acc = acc * power(pwc, k, b.K[k], true);
      }
      for (const auto& [bi, ci] : acc.terms_) r.add_coeff(bi, ci);
    }
    return r;
  }

  friend bool operator==(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.m_ != b.m_) return false;
    int n = std::min(a.order_, b.order_);
    return a.truncated(n).terms_ == b.truncated(n).terms_;
  }

 private:
  static int common_order(const TruncatedSeries& a, const TruncatedSeries& b) {
    if (a.m_ != b.m_) fail(ErrorKind::DimensionMismatch, "series dimension mismatch");
    return std::min(a.order_, b.order_);
  }

  void check_index(const Bidx& b) const {
    if (static_cast<int>(b.J.size()) != m_ || static_cast<int>(b.K.size()) != m_)
      fail(ErrorKind::DimensionMismatch, "multi-index length mismatch");
    for (int k = 0; k < m_; ++k)
      if (b.J[k] < 0 || b.K[k] < 0) fail(ErrorKind::BadInput, "negative exponent");
  }

  int m_, order_;
  std::map<Bidx, GaussianRational> terms_;
};

/** log(1 + a) for a series with zero constant term. */
inline TruncatedSeries series_log1p(const TruncatedSeries& a) {
  if (!a.coeff({MultiIndex(a.dim(), 0), MultiIndex(a.dim(), 0)}).is_zero())
    fail(ErrorKind::NonzeroConstantTerm, "log1p needs zero constant term");
  TruncatedSeries r(a.dim(), a.order());
  TruncatedSeries pw = a;
  int lo = std::max(a.lowest_degree(), 1);
  for (int j = 1; j * lo <= a.order(); ++j) {
    if (j > 1) pw = pw * a;
    GaussianRational c{Rational(j % 2 ? 1 : -1, j)};
    c.re.canonicalize();
    r = r + c * pw;
  }
  return r;
}

/** exp(a) for a series with zero constant term. */
inline TruncatedSeries series_exp(const TruncatedSeries& a) {
  if (!a.coeff({MultiIndex(a.dim(), 0), MultiIndex(a.dim(), 0)}).is_zero())
    fail(ErrorKind::NonzeroConstantTerm, "exp needs zero constant term");
  TruncatedSeries r = TruncatedSeries::constant(a.dim(), a.order(), GaussianRational(1));
  TruncatedSeries pw = TruncatedSeries::constant(a.dim(), a.order(), GaussianRational(1));
  int lo = std::max(a.lowest_degree(), 1);
  for (int j = 1; j * lo <= a.order(); ++j) {
    pw = pw * a;
    GaussianRational inv_j{Rational(1, j)};
    pw = inv_j * pw;
    r = r + pw;
  }
  return r;
}

/**
 * Compositional inverse of a substitution w_k = z_k + (degree >= 2 terms):
 * returns v with w(v(z)) = z and v(w(z)) = z up to the truncation order.
 */
inline std::vector<TruncatedSeries> invert_substitution(const std::vector<TruncatedSeries>& w) {
  if (w.empty()) fail(ErrorKind::DimensionMismatch, "empty substitution");
  int m = w[0].dim();
  int n = w[0].order();
  if (static_cast<int>(w.size()) != m) fail(ErrorKind::DimensionMismatch, "substitution arity");
  std::vector<TruncatedSeries> id, tail;
  for (int k = 0; k < m; ++k) {
    n = std::min(n, w[k].order());
    for (int j = 0; j < m; ++j)
      if (!(w[k].coeff(unit_index(m, j), MultiIndex(m, 0)) ==
            GaussianRational(Rational(j == k ? 1 : 0))))
        fail(ErrorKind::SingularLeadingTerm, "substitution is not identity plus higher order");
  }
  for (int k = 0; k < m; ++k) {
    id.push_back(TruncatedSeries::variable(m, n, k));
    tail.push_back(w[k].truncated(n) - id[k]);
  }
  std::vector<TruncatedSeries> v = id;
  for (int pass = 2; pass <= n; ++pass)
    for (int k = 0; k < m; ++k) v[k] = id[k] - tail[k].compose_holomorphic(v);
  return v;
}

inline bool is_real_series(const TruncatedSeries& a) { return a.conj() == a; }

/**
 * Taylor jet of a Kaehler potential about a point. Coefficient reality
 * (a_{KJ} = conj(a_{JK})) is enforced at construction.
 */
struct PotentialJet {
  TruncatedSeries series;
  bool is_centered = false;
  bool has_identity_quadratic = false;
};

inline PotentialJet jet_from_series(const TruncatedSeries& s) {
  if (!is_real_series(s)) fail(ErrorKind::RealityViolation, "potential must be real-valued");
  PotentialJet jet{s, true, true};
  int m = s.dim();
  for (const auto& [b, c] : s.terms())
    if (b.degree() <= 1) jet.is_centered = false;
  for (int j = 0; j < m && jet.has_identity_quadratic; ++j)
    for (int k = 0; k < m && jet.has_identity_quadratic; ++k)
      if (!(s.coeff(unit_index(m, j), unit_index(m, k)) ==
            GaussianRational(Rational(j == k ? 1 : 0))))
        jet.has_identity_quadratic = false;
  for (const auto& [b, c] : s.terms())
    if (b.degree() == 2 && (index_total(b.J) == 0 || index_total(b.K) == 0))
      jet.has_identity_quadratic = false;
  return jet;
}

/** Builds a jet from explicit (J, K) -> coefficient data, validating reality. */
inline PotentialJet make_jet(int m, int order,
                             const std::vector<std::pair<Bidx, GaussianRational>>& coeffs,
                             bool add_identity_quadratic = false) {
  TruncatedSeries s(m, order);
  for (const auto& [b, c] : coeffs) {
    if (b.degree() > order) fail(ErrorKind::DegreeOverflow, "jet term beyond stated order");
    s.add_coeff(b, c);
  }
  if (add_identity_quadratic)
    for (int k = 0; k < m; ++k)
      s.add_coeff({unit_index(m, k), unit_index(m, k)}, GaussianRational(1));
  return jet_from_series(s);
}

/**
 * phi_t(z) = t^{-2} phi(t z) for rational t != 0. Fixes the quadratic part,
 * multiplies each degree-d coefficient by t^{d-2}.
 */
inline PotentialJet scale_jet(const PotentialJet& jet, const Rational& t) {
  if (t == 0) fail(ErrorKind::BadInput, "scale factor must be nonzero");
  int m = jet.series.dim();
  TruncatedSeries s(m, jet.series.order());
  for (const auto& [b, c] : jet.series.terms()) {
    Rational w(1);
    for (int d = 2; d < b.degree(); ++d) w *= t;
    for (int d = b.degree(); d < 2; ++d) w /= t;
    s.add_coeff(b, GaussianRational(w) * c);
  }
  return jet_from_series(s);
}

/** Renders a series with deterministic term order, e.g. "1 - 1/2*z1^2*zb1^2". */
inline std::string series_to_string(const TruncatedSeries& s) {
  if (s.is_zero()) return "0";
  std::string out;
  auto mono = [&](const Bidx& b) {
    std::string t;
    for (int k = 0; k < s.dim(); ++k)
      for (int bar = 0; bar < 2; ++bar) {
        int e = bar ? b.K[k] : b.J[k];
        if (e == 0) continue;
        t += (t.empty() ? "" : "*") + std::string(bar ? "zb" : "z") + std::to_string(k + 1);
        if (e > 1) t += "^" + std::to_string(e);
      }
    return t;
  };
  for (const auto& [b, c] : s.terms()) {
    std::string coef = gaussian_to_string(c);
    std::string m = mono(b);
    std::string term = m.empty() ? coef : (coef == "1" ? m : coef + "*" + m);
    if (out.empty())
      out = term;
    else if (!term.empty() && term[0] == '-')
      out += " - " + term.substr(1);
    else
      out += " + " + term;
  }
  return out;
}

}  // namespace bergman

#pragma once

#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bergman/rational.hpp"
#include "bergman/series.hpp"

namespace bergman {

/** Monomial exponents in (u, ubar, v, vbar), each a length-m multi-index. */
struct QIdx {
  MultiIndex u, ubar, v, vbar;

  int degree() const {
    return index_total(u) + index_total(ubar) + index_total(v) + index_total(vbar);
  }
  bool operator==(const QIdx& o) const {
    return u == o.u && ubar == o.ubar && v == o.v && vbar == o.vbar;
  }
  bool operator<(const QIdx& o) const {
    if (u != o.u) return u < o.u;
    if (ubar != o.ubar) return ubar < o.ubar;
    if (v != o.v) return v < o.v;
    return vbar < o.vbar;
  }
};

/**
 * Exact polynomial in u, ubar, v, vbar with Gaussian rational coefficients.
 * No truncation order: these are honest polynomials.
 */
class ScaledPolynomial {
 public:
  explicit ScaledPolynomial(int m) : m_(m) {
    if (m < 1) fail(ErrorKind::DimensionMismatch, "dimension must be >= 1");
  }

  int dim() const { return m_; }
  const std::map<QIdx, GaussianRational>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  static ScaledPolynomial constant(int m, const GaussianRational& c) {
    ScaledPolynomial p(m);
    p.add_coeff(QIdx{MultiIndex(m, 0), MultiIndex(m, 0), MultiIndex(m, 0), MultiIndex(m, 0)}, c);
    return p;
  }

  GaussianRational coeff(const QIdx& q) const {
    auto it = terms_.find(q);
    return it == terms_.end() ? GaussianRational() : it->second;
  }

  void add_coeff(const QIdx& q, const GaussianRational& c) {
    check(q);
    auto it = terms_.find(q);
    if (it == terms_.end()) {
      if (!c.is_zero()) terms_.emplace(q, c);
      return;
    }
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }

  int degree() const {
    int d = 0;
    for (const auto& [q, c] : terms_) d = std::max(d, q.degree());
    return d;
  }

  ScaledPolynomial operator+(const ScaledPolynomial& o) const {
    require_same(o);
    ScaledPolynomial r = *this;
    for (const auto& [q, c] : o.terms_) r.add_coeff(q, c);
    return r;
  }

  ScaledPolynomial operator-(const ScaledPolynomial& o) const {
    require_same(o);
    ScaledPolynomial r = *this;
    for (const auto& [q, c] : o.terms_) r.add_coeff(q, -c);
    return r;
  }

  ScaledPolynomial operator-() const {
    ScaledPolynomial r(m_);
    for (const auto& [q, c] : terms_) r.terms_.emplace(q, -c);
    return r;
  }

  ScaledPolynomial operator*(const GaussianRational& s) const {
    ScaledPolynomial r(m_);
    if (s.is_zero()) return r;
    for (const auto& [q, c] : terms_) r.terms_.emplace(q, c * s);
    return r;
  }

  ScaledPolynomial operator*(const ScaledPolynomial& o) const {
    require_same(o);
    ScaledPolynomial r(m_);
    for (const auto& [qa, ca] : terms_)
      for (const auto& [qb, cb] : o.terms_) {
        QIdx q{add_mi(qa.u, qb.u), add_mi(qa.ubar, qb.ubar), add_mi(qa.v, qb.v),
               add_mi(qa.vbar, qb.vbar)};
        r.add_coeff(q, ca * cb);
      }
    return r;
  }

  bool operator==(const ScaledPolynomial& o) const { return m_ == o.m_ && terms_ == o.terms_; }

  /** Complex conjugate as a function: coefficients conjugate, bars swap. */
  ScaledPolynomial conj_function() const {
    ScaledPolynomial r(m_);
    for (const auto& [q, c] : terms_) r.terms_.emplace(QIdx{q.ubar, q.u, q.vbar, q.v}, c.conj());
    return r;
  }

  /** conj(p(v, u)): swaps the two point slots and conjugates. */
  ScaledPolynomial adjoint() const {
    ScaledPolynomial r(m_);
    for (const auto& [q, c] : terms_) r.terms_.emplace(QIdx{q.vbar, q.v, q.ubar, q.u}, c.conj());
    return r;
  }

  /** p(-u, -v): each term picks up (-1)^degree. */
  ScaledPolynomial parity_flip() const {
    ScaledPolynomial r(m_);
    for (const auto& [q, c] : terms_)
      r.terms_.emplace(q, (q.degree() % 2 == 0) ? c : -c);
    return r;
  }

  /** Substitutes v = u, vbar = ubar (the diagonal restriction). */
  ScaledPolynomial diagonal() const {
    ScaledPolynomial r(m_);
    for (const auto& [q, c] : terms_)
      r.add_coeff(QIdx{add_mi(q.u, q.v), add_mi(q.ubar, q.vbar), MultiIndex(m_, 0),
                       MultiIndex(m_, 0)},
                  c);
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [q, c] : terms_) {
      std::string cs = gaussian_to_string(c);
      bool neg = !cs.empty() && cs[0] == '-' && cs.find_first_of("+-", 1) == std::string::npos;
      if (first) {
        if (neg) { os << "-"; cs = cs.substr(1); }
      } else {
        if (neg) { os << " - "; cs = cs.substr(1); }
        else os << " + ";
      }
      first = false;
      std::string mono = mono_string(q);
      if (mono.empty()) os << cs;
      else if (cs == "1") os << mono;
      else os << cs << "*" << mono;
    }
    return os.str();
  }

 private:
  static MultiIndex add_mi(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r = a;
    for (size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
  }

  std::string mono_string(const QIdx& q) const {
    std::ostringstream os;
    bool first = true;
    auto emit = [&](const char* base, const MultiIndex& mi) {
      for (int k = 0; k < m_; ++k) {
        if (mi[k] == 0) continue;
        if (!first) os << "*";
        first = false;
        os << base << (k + 1);
        if (mi[k] > 1) os << "^" << mi[k];
      }
    };
    emit("u", q.u);
    emit("ub", q.ubar);
    emit("v", q.v);
    emit("vb", q.vbar);
    return os.str();
  }

  void check(const QIdx& q) const {
    if (static_cast<int>(q.u.size()) != m_ || static_cast<int>(q.ubar.size()) != m_ ||
        static_cast<int>(q.v.size()) != m_ || static_cast<int>(q.vbar.size()) != m_)
      fail(ErrorKind::DimensionMismatch, "monomial arity mismatch");
    for (int k = 0; k < m_; ++k)
      if (q.u[k] < 0 || q.ubar[k] < 0 || q.v[k] < 0 || q.vbar[k] < 0)
        fail(ErrorKind::BadInput, "negative exponent");
  }

  void require_same(const ScaledPolynomial& o) const {
    if (m_ != o.m_) fail(ErrorKind::DimensionMismatch, "dimension mismatch");
  }

  int m_;
  std::map<QIdx, GaussianRational> terms_;
};

inline ScaledPolynomial operator*(const GaussianRational& s, const ScaledPolynomial& p) {
  return p * s;
}

/** Real part as a function: (p + conj_function(p)) / 2. */
inline ScaledPolynomial re_part(const ScaledPolynomial& p) {
  return (p + p.conj_function()) * GaussianRational(1, 2);
}

/** True when p equals its adjoint (Hermitian symmetry between the two points). */
inline bool is_hermitian(const ScaledPolynomial& p) { return p == p.adjoint(); }

/**
 * The symmetrized combination f(u, vbar) - f(u, ubar)/2 - f(v, vbar)/2.
 * The input must use only the u and vbar slots.
 */
inline ScaledPolynomial sharp(const ScaledPolynomial& f) {
  int m = f.dim();
  ScaledPolynomial r(m);
  MultiIndex z(m, 0);
  for (const auto& [q, c] : f.terms()) {
    if (index_total(q.ubar) != 0 || index_total(q.v) != 0)
      fail(ErrorKind::BadInput, "sharp expects a polynomial in u and vbar only");
    r.add_coeff(q, c);
    r.add_coeff(QIdx{q.u, q.vbar, z, z}, -GaussianRational(1, 2) * c);
    r.add_coeff(QIdx{z, z, q.u, q.vbar}, -GaussianRational(1, 2) * c);
  }
  return r;
}

/** u^J vbar^K monomial helper. */
inline ScaledPolynomial uvbar_monomial(int m, const MultiIndex& J, const MultiIndex& K,
                                       const GaussianRational& c) {
  ScaledPolynomial p(m);
  p.add_coeff(QIdx{J, MultiIndex(m, 0), MultiIndex(m, 0), K}, c);
  return p;
}

}  // namespace bergman

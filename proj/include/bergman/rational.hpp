#pragma once

#include <gmpxx.h>

#include <string>

#include "bergman/error.hpp"

namespace bergman {

using Rational = mpq_class;

/** Parses "p", "-p", or "p/q" (decimal digits); result is canonicalized. */
inline Rational parse_rational(const std::string& s) {
  if (s.empty()) fail(ErrorKind::BadInput, "empty rational literal");
  for (char c : s)
    if (!(c == '-' || c == '/' || (c >= '0' && c <= '9')))
      fail(ErrorKind::BadInput, "bad rational literal: " + s);
  Rational q;
  if (q.set_str(s, 10) != 0) fail(ErrorKind::BadInput, "bad rational literal: " + s);
  if (q.get_den() == 0) fail(ErrorKind::BadInput, "zero denominator: " + s);
  q.canonicalize();
  return q;
}

inline std::string rational_to_string(const Rational& q) { return q.get_str(); }

/** Exact complex number with rational real and imaginary parts. */
struct GaussianRational {
  Rational re, im;

  GaussianRational() : re(0), im(0) {}
  GaussianRational(const Rational& r) : re(r), im(0) {}
  GaussianRational(const Rational& r, const Rational& i) : re(r), im(i) {}
  GaussianRational(long r) : re(r), im(0) {}
  GaussianRational(long num, long den) : re(Rational(num, den)), im(0) { re.canonicalize(); }

  bool is_zero() const { return re == 0 && im == 0; }
  bool is_real() const { return im == 0; }

  GaussianRational conj() const { return {re, Rational(-im)}; }

  /** |z|^2 as an exact rational. */
  Rational norm2() const { return re * re + im * im; }

  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a) { return {-a.re, -a.im}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
    Rational n = b.norm2();
    if (n == 0) fail(ErrorKind::BadInput, "division by zero");
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
  GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
  GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
  GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

/** "1/2", "(1/3*i)", or "(1/2-1/3*i)"; only a pure real can start with '-'. */
inline std::string gaussian_to_string(const GaussianRational& c) {
  if (c.is_real()) return rational_to_string(c.re);
  if (c.re == 0) return "(" + rational_to_string(c.im) + "*i)";
  return "(" + rational_to_string(c.re) + (c.im > 0 ? "+" : "-") +
         rational_to_string(abs(c.im)) + "*i)";
}

inline GaussianRational gr(long num, long den = 1) { return GaussianRational(num, den); }

inline GaussianRational gr_i(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return GaussianRational(Rational(0), q);
}

}  // namespace bergman

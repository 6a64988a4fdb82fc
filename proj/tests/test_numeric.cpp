#include <catch2/catch_amalgamated.hpp>

#include "bergman/numeric.hpp"

using namespace bergman;

namespace {

Complex cplx(double re, double im = 0) { return {Real(re), Real(im)}; }

bool close(const Real& a, const Real& b, const Real& tol) {
  Real d = a - b;
  if (d < 0) d = -d;
  return d < tol;
}

}  // namespace

TEST_CASE("complex arithmetic and transcendentals") {
  set_precision_bits(256);
  Complex a = cplx(0.5, -1.25), b = cplx(-2.0, 0.75);
  Real tol = ldexp(Real(1), -200);

  Complex p = a * b;
  CHECK(close(p.re, Real("-0.0625"), tol));
  CHECK(close(p.im, Real("2.875"), tol));

  Complex q = (a * b) / b;
  CHECK(close(q.re, a.re, tol));
  CHECK(close(q.im, a.im, tol));

  // exp(log(x)) = x away from the branch cut
  Complex r = cexp(clog(a));
  CHECK(close(r.re, a.re, tol));
  CHECK(close(r.im, a.im, tol));

  CHECK(close(cpow_int(a, 3).re, (a * a * a).re, tol));
  CHECK(close(cpow_int(a, -2).re, (Complex(Real(1)) / (a * a)).re, tol));

  // pi via atan2 against a frozen 50-digit reference
  Real pi_ref("3.14159265358979323846264338327950288419716939937511");
  CHECK(close(pi_value(), pi_ref, ldexp(Real(1), -160)));
}

TEST_CASE("rational conversion is exact to precision") {
  set_precision_bits(256);
  Real third = rational_to_real(Rational(1, 3));
  CHECK(close(3 * third, Real(1), ldexp(Real(1), -250)));
  Complex g(GaussianRational(Rational(-7, 4), Rational(1, 8)));
  CHECK(g.re == Real("-1.75"));
  CHECK(g.im == Real("0.125"));
}

TEST_CASE("polynomial evaluation matches a hand-computed value") {
  set_precision_bits(128);
  // p = 2 u1 vbar1 - (i/2) ubar1^2
  ScaledPolynomial p(1);
  p.add_coeff(QIdx{{1}, {0}, {0}, {1}}, GaussianRational(2));
  p.add_coeff(QIdx{{0}, {2}, {0}, {0}}, GaussianRational(Rational(0), Rational(-1, 2)));
  CVec u{cplx(1, 1)}, v{cplx(0, 2)};
  // 2*(1+i)*conj(2i) + (-i/2)*conj(1+i)^2 = (4-4i) + (-1+0i) = 3 - 4i
  Complex val = evaluate_poly(p, u, v);
  Real tol = ldexp(Real(1), -100);
  CHECK(close(val.re, Real(3), tol));
  CHECK(close(val.im, Real(-4), tol));
}

TEST_CASE("curve model log kernel agrees with the literal basis sum") {
  set_precision_bits(256);
  CVec z{cplx(0.3)}, w{cplx(0.1)};
  Complex lhs = cexp(exact_cpm_log_kernel(1, 100, z, w, 256));
  Complex rhs = cp1_kernel_finite_sum(100, z[0], w[0]);
  Real rel = abs(lhs - rhs) / abs(rhs);
  CHECK(rel < Real("1e-50"));

  // off the real axis too
  CVec z2{cplx(0.2, -0.4)}, w2{cplx(-0.1, 0.35)};
  Complex lhs2 = cexp(exact_cpm_log_kernel_at(1, 37, z2, w2));
  Complex rhs2 = cp1_kernel_finite_sum(37, z2[0], w2[0]);
  CHECK(abs(lhs2 - rhs2) / abs(rhs2) < Real("1e-50"));
}

TEST_CASE("log kernels are real and maximal on the diagonal") {
  set_precision_bits(256);
  Real tol = ldexp(Real(1), -200);
  CVec u{cplx(0.4, 0.2), cplx(-0.1, 0.3)};
  Complex d = exact_cpm_log_kernel_at(2, 50, u, u);
  CHECK(close(d.im, Real(0), tol));

  Complex f = flat_log_kernel_at(2, 50, u, u);
  CHECK(close(f.im, Real(0), tol));

  // at u = v = 0 the limit kernel is pi^{-m}
  CVec o{Complex(), Complex()};
  Complex bf = bargmann_fock_log_kernel(o, o, Real(0), Real(0));
  CHECK(close(bf.re, -2 * log(pi_value()), tol));
  CHECK(close(bf.im, Real(0), tol));

  // |K_BF(u,v)|^2 <= K_BF(u,u) K_BF(v,v)
  CVec v{cplx(0.1, -0.5), cplx(0.25, 0)};
  Real off = bargmann_fock_log_kernel(u, v, Real(0), Real(0)).re;
  Real duu = bargmann_fock_log_kernel(u, u, Real(0), Real(0)).re;
  Real dvv = bargmann_fock_log_kernel(v, v, Real(0), Real(0)).re;
  CHECK(2 * off <= duu + dvv + tol);
}

TEST_CASE("branch guard rejects numerically singular phase") {
  set_precision_bits(128);
  CVec u{cplx(1, 0)}, v{cplx(-1, 0)};  // 1 + u.vbar = 0
  REQUIRE_THROWS_AS(exact_cpm_log_kernel_at(1, 10, u, v), Error);
  try {
    exact_cpm_log_kernel_at(1, 10, u, v);
  } catch (const Error& e) {
    CHECK(e.kind == ErrorKind::LogBranchNearSingularity);
  }
}

TEST_CASE("curve model convergence matches the expansion order") {
  set_precision_bits(256);
  ModelKernel model{ModelKind::FubiniStudy, 1};
  PotentialJet jet = fubini_study_jet(1, 8);
  ExpansionResult exp2 = compute_expansion(jet, 4, Method::Generic);
  std::vector<long> grid{64, 128, 256, 512, 1024, 2048, 4096};
  auto pts = sample_points(1);

  ConvergenceFit fit2 = convergence_fit(model, exp2, 2, grid, pts, 256);
  REQUIRE_FALSE(fit2.all_below_noise);
  // truncating after b2 leaves an N^{-3/2} term whose odd part vanishes on
  // this model, so the residual decays like N^{-2}
  CHECK(close(fit2.fitted_exponent, Real(-2), Real("0.1")));

  ConvergenceFit fit4 = convergence_fit(model, exp2, 4, grid, pts, 256);
  REQUIRE_FALSE(fit4.all_below_noise);
  CHECK(fit4.fitted_exponent < Real("-2.4"));

  // residual magnitudes shrink monotonically on the doubling grid
  for (std::size_t i = 0; i + 1 < fit2.residual_norms.size(); ++i)
    CHECK(fit2.residual_norms[i + 1] < fit2.residual_norms[i]);
}

TEST_CASE("flat model reproduces its own expansion exactly") {
  set_precision_bits(256);
  ModelKernel model{ModelKind::Flat, 1};
  PotentialJet jet = flat_jet(1, 7);
  ExpansionResult ex = compute_expansion(jet, 4, Method::Both);
  std::vector<long> grid{16, 32, 64, 128};
  ConvergenceFit fit = convergence_fit(model, ex, 4, grid, sample_points(1), 256);
  CHECK(fit.all_below_noise);
  for (const Real& r : fit.residual_norms) CHECK(r < ldexp(Real(1), -128));
}

TEST_CASE("normalized kernel magnitude stays in (0, 1] and fits order -2") {
  set_precision_bits(256);
  ModelKernel model{ModelKind::FubiniStudy, 1};
  PotentialJet jet = fubini_study_jet(1, 8);
  CurvatureData data = curvature_data_at_point(jet, jet_geometry(jet));
  PnCorrection corr = pn_correction(data);
  std::vector<long> grid{64, 128, 256, 512, 1024, 2048, 4096};
  PnFit fit = pn_fit(model, corr.q1, grid, sample_points(1), 256);
  CHECK(fit.bound_ok);
  REQUIRE_FALSE(fit.all_below_noise);
  CHECK(close(fit.fitted_exponent, Real(-2), Real("0.1")));
}

TEST_CASE("flat model normalized magnitude needs no correction") {
  set_precision_bits(256);
  ModelKernel model{ModelKind::Flat, 1};
  ScaledPolynomial zero(1);
  std::vector<long> grid{16, 32, 64, 128};
  PnFit fit = pn_fit(model, zero, grid, sample_points(1), 256);
  CHECK(fit.bound_ok);
  CHECK(fit.all_below_noise);
}

TEST_CASE("derivative sup growth has the expected parity split") {
  set_precision_bits(192);
  std::vector<long> grid{256, 512, 1024, 2048, 4096, 8192};
  for (int k : {1, 2, 3, 4}) {
    GrowthFit fit = derivative_growth_demo(k, grid, 192);
    Real want = (k % 2 == 0) ? Real(1) : Real("0.5");
    INFO("k = " << k << " exponent = " << fit.fitted_exponent);
    CHECK(close(fit.fitted_exponent, want, Real("0.1")));
  }
}

TEST_CASE("numeric input validation") {
  set_precision_bits(128);
  ModelKernel model{ModelKind::FubiniStudy, 1};
  PotentialJet jet = fubini_study_jet(1, 6);
  ExpansionResult ex = compute_expansion(jet, 2, Method::Both);
  auto pts = sample_points(1);

  REQUIRE_THROWS_AS(convergence_fit(model, ex, 3, {16, 32}, pts, 128), Error);
  REQUIRE_THROWS_AS(convergence_fit(model, ex, 2, {32, 16}, pts, 128), Error);
  REQUIRE_THROWS_AS(convergence_fit(model, ex, 2, {16}, pts, 128), Error);
  REQUIRE_THROWS_AS(derivative_growth_demo(7, {16, 32}, 128), Error);
  REQUIRE_THROWS_AS(set_precision_bits(16), Error);
  set_precision_bits(128);

  ModelKernel m2{ModelKind::FubiniStudy, 2};
  REQUIRE_THROWS_AS(convergence_fit(m2, ex, 2, {16, 32}, sample_points(2), 128), Error);
}

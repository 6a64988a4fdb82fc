#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "bergman/curvature.hpp"
#include "bergman/models.hpp"
#include "bergman/normal_form.hpp"
#include "bergman/random_jets.hpp"

using namespace bergman;

namespace {

auto kind_is(ErrorKind k) {
  return Catch::Matchers::Predicate<Error>([k](const Error& e) { return e.kind == k; });
}

bool record_is_identity(const NormalizationRecord& rec, int m) {
  if (!rec.frame_change.is_zero()) return false;
  for (int k = 0; k < m; ++k)
    if (!(rec.coordinate_change[k] == TruncatedSeries::variable(m, rec.order, k))) return false;
  return true;
}

bool same_curvature_data(const CurvatureData& a, const CurvatureData& b) {
  return a.R == b.R && a.ric == b.ric && a.rho == b.rho && a.norm_R2 == b.norm_R2 &&
         a.norm_Ric2 == b.norm_Ric2 && a.dR_hol == b.dR_hol && a.dR_anti == b.dR_anti &&
         a.ddR_mixed == b.ddR_mixed && a.ddR_holhol == b.ddR_holhol &&
         a.ddR_antianti == b.ddR_antianti && a.grad_rho_hol == b.grad_rho_hol &&
         a.grad_rho_anti == b.grad_rho_anti && a.hess_rho_holhol == b.hess_rho_holhol &&
         a.hess_rho_mixed == b.hess_rho_mixed && a.hess_rho_antianti == b.hess_rho_antianti &&
         a.lap_rho == b.lap_rho;
}

}  // namespace

TEST_CASE("balanced jets are fixed points of the normalization") {
  for (const PotentialJet& jet : {fubini_study_jet(2, 6), example2_jet(6)}) {
    int m = jet.series.dim();
    REQUIRE(verify_K_form(jet, 6).ok);
    auto [out, rec] = normalize_to_K(jet, 6);
    REQUIRE(out.series == jet.series);
    REQUIRE(record_is_identity(rec, m));
  }
}

TEST_CASE("a mixed cubic term is removed by a coordinate change") {
  GaussianRational c(Rational(2, 3), Rational(-1, 4));
  PotentialJet jet = make_jet(1, 3, {{{{2}, {1}}, c}, {{{1}, {2}}, c.conj()}}, true);
  auto [out, rec] = normalize_to_K(jet, 3);
  REQUIRE(out.series == flat_jet(1, 3).series);
  REQUIRE(rec.frame_change.is_zero());
  REQUIRE(rec.coordinate_change[0].coeff({1}, {0}) == GaussianRational(1));
  REQUIRE(rec.coordinate_change[0].coeff({2}, {0}) == -c);
  REQUIRE(verify_K_form(out, 3).ok);
  REQUIRE(apply_record(jet, rec).series == out.series);
}

TEST_CASE("pluriharmonic terms move into the frame change") {
  GaussianRational b(Rational(1, 3), Rational(1, 5));
  GaussianRational a(Rational(-2, 7), Rational(1, 2));
  PotentialJet jet = make_jet(
      1, 3, {{{{2}, {0}}, b}, {{{0}, {2}}, b.conj()}, {{{3}, {0}}, a}, {{{0}, {3}}, a.conj()}},
      true);
  auto [out, rec] = normalize_to_K(jet, 3);
  REQUIRE(out.series == flat_jet(1, 3).series);
  for (int k = 0; k < 1; ++k)
    REQUIRE(rec.coordinate_change[k] == TruncatedSeries::variable(1, 3, k));
  REQUIRE(rec.frame_change.coeff({2}, {0}) == b);
  REQUIRE(rec.frame_change.coeff({3}, {0}) == a);
  REQUIRE(apply_record(jet, rec).series == out.series);
}

TEST_CASE("normalization reaches K form and the record replays it") {
  std::mt19937_64 rng(31337);
  for (int m : {1, 2}) {
    for (int trial = 0; trial < 4; ++trial) {
      PotentialJet jet = random_jet(rng, m, 6, false, 10);
      auto [kjet, rec] = normalize_to_K(jet, 6);
      REQUIRE(verify_K_form(kjet, 6).ok);
      REQUIRE(apply_record(jet, rec).series == kjet.series);

      auto [again, rec2] = normalize_to_K(kjet, 6);
      REQUIRE(again.series == kjet.series);
      REQUIRE(record_is_identity(rec2, m));
    }
  }
}

TEST_CASE("the record from a lower normalization order replays exactly") {
  std::mt19937_64 rng(11);
  PotentialJet jet = random_jet(rng, 2, 6, false, 10);
  auto [kjet, rec] = normalize_to_K(jet, 4);
  REQUIRE(kjet.series.order() == 4);
  REQUIRE(verify_K_form(kjet, 4).ok);
  REQUIRE(apply_record(jet, rec).series == kjet.series);
}

TEST_CASE("normalization preserves curvature data at the base point") {
  std::mt19937_64 rng(5150);
  for (int m : {1, 2}) {
    PotentialJet jet = random_jet(rng, m, 6, false, 10);
    auto [kjet, rec] = normalize_to_K(jet, 6);
    REQUIRE(same_curvature_data(curvature_data_at_point(jet), curvature_data_at_point(kjet)));
  }
}

TEST_CASE("verify_K_form reports offending terms") {
  GaussianRational c(Rational(1, 2), Rational(0));
  PotentialJet jet = make_jet(1, 4, {{{{2}, {1}}, c}, {{{1}, {2}}, c}}, true);
  KFormReport rep = verify_K_form(jet, 3);
  REQUIRE_FALSE(rep.ok);
  REQUIRE(rep.offending.size() == 2);
  REQUIRE(rep.offending[0] == Bidx{{1}, {2}});
  REQUIRE(rep.offending[1] == Bidx{{2}, {1}});
  REQUIRE_THROWS_MATCHES(verify_K_form(jet, 5), Error, kind_is(ErrorKind::OrderTooLow));
}

TEST_CASE("normalization input validation") {
  GaussianRational one(1);
  PotentialJet linear = make_jet(1, 4, {{{{1}, {0}}, one}, {{{0}, {1}}, one}}, true);
  REQUIRE_THROWS_MATCHES(normalize_to_K(linear, 3), Error, kind_is(ErrorKind::NotCentered));

  PotentialJet doubled = make_jet(1, 4, {{{{1}, {1}}, GaussianRational(2)}});
  REQUIRE_THROWS_MATCHES(normalize_to_K(doubled, 3), Error,
                         kind_is(ErrorKind::NonIdentityQuadratic));

  REQUIRE_THROWS_MATCHES(normalize_to_K(flat_jet(1, 4), 5), Error,
                         kind_is(ErrorKind::OrderTooLow));
  REQUIRE_THROWS_MATCHES(normalize_to_K(flat_jet(1, 4), 1), Error,
                         kind_is(ErrorKind::OrderTooLow));
}

TEST_CASE("record replay validates its inputs") {
  PotentialJet jet = flat_jet(2, 4);
  NormalizationRecord rec;
  rec.order = 4;
  rec.frame_change = TruncatedSeries(2, 4);
  rec.coordinate_change = {TruncatedSeries::variable(2, 4, 0)};
  REQUIRE_THROWS_MATCHES(apply_record(jet, rec), Error, kind_is(ErrorKind::DimensionMismatch));

  rec.coordinate_change = {TruncatedSeries::variable(2, 4, 0), TruncatedSeries::variable(2, 4, 1)};
  TruncatedSeries bad(2, 4);
  bad.add_coeff({{1, 0}, {0, 1}}, GaussianRational(1));
  rec.frame_change = bad;
  REQUIRE_THROWS_MATCHES(apply_record(jet, rec), Error,
                         kind_is(ErrorKind::NonHolomorphicSubstitution));
}

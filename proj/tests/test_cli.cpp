#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "bergman/json_io.hpp"
#include "bergman/models.hpp"
#include "bergman/random_jets.hpp"

using namespace bergman;

namespace {

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "bergman_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << body;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(BERGMAN_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("jet json round trip preserves the series exactly") {
  PotentialJet jet = fubini_study_jet(2, 6);
  Json j = jet_to_json(jet);
  PotentialJet back = jet_from_json(j);
  REQUIRE(back.series == jet.series);
  REQUIRE(back.is_centered);
  REQUIRE(back.has_identity_quadratic);
}

TEST_CASE("jet json accepts integers, plain strings, and the quadratic shortcut") {
  Json j = Json::parse(R"({
    "m": 1, "order": 4, "identity_quadratic": true,
    "terms": [
      {"J": [2], "K": [2], "re": "-1/2", "im": "0"},
      {"J": [2], "K": [1], "re": 1, "im": "1/3"},
      {"J": [1], "K": [2], "re": "1", "im": "-1/3"}
    ]})");
  PotentialJet jet = jet_from_json(j);
  REQUIRE(jet.has_identity_quadratic);
  REQUIRE(jet.series.coeff({1}, {1}) == GaussianRational(1));
  REQUIRE(jet.series.coeff({2}, {2}) == GaussianRational(-1, 2));
  REQUIRE(jet.series.coeff({2}, {1}) == GaussianRational(Rational(1), Rational(1, 3)));
}

TEST_CASE("jet json validation failures") {
  REQUIRE_THROWS_AS(jet_from_json(Json::parse(R"({"order": 4})")), Error);
  REQUIRE_THROWS_AS(
      jet_from_json(Json::parse(R"({"m":1,"order":4,"terms":[{"J":[1,2],"K":[1]}]})")), Error);
  REQUIRE_THROWS_AS(
      jet_from_json(Json::parse(R"({"m":1,"order":4,"terms":[{"J":[-1],"K":[1]}]})")), Error);
  REQUIRE_THROWS_AS(
      jet_from_json(Json::parse(R"({"m":1,"order":2,"terms":[{"J":[2],"K":[2],"re":"1"}]})")),
      Error);
  // reality: lone (2,1) term without its conjugate partner
  REQUIRE_THROWS_AS(
      jet_from_json(
          Json::parse(R"({"m":1,"order":4,"identity_quadratic":true,
                          "terms":[{"J":[2],"K":[1],"re":"1"}]})")),
      Error);
}

TEST_CASE("record and polynomial json round trips") {
  std::mt19937_64 rng(99);
  PotentialJet jet = random_jet(rng, 2, 6, false, 8);
  auto [kjet, rec] = normalize_to_K(jet, 6);
  NormalizationRecord back = record_from_json(record_to_json(rec));
  REQUIRE(back.order == rec.order);
  REQUIRE(back.frame_change == rec.frame_change);
  REQUIRE(back.coordinate_change == rec.coordinate_change);

  ExpansionResult res = compute_expansion(kjet, 3, Method::Generic);
  for (const auto& [r, b] : res.bs) REQUIRE(poly_from_json(poly_to_json(b)) == b);
}

TEST_CASE("curvature json carries one-based index keys") {
  Json j = curvature_to_json(curvature_data_at_point(fubini_study_jet(1, 6)));
  REQUIRE(j.at("m").get<int>() == 1);
  REQUIRE(j.at("R").at("R[1,1,1,1]").at("re").get<std::string>() == "2");
  REQUIRE(j.at("rho").at("re").get<std::string>() == "2");
  REQUIRE(j.at("norm_R2").at("re").get<std::string>() == "4");
  REQUIRE(j.at("lap_rho").at("re").get<std::string>() == "0");
  REQUIRE(j.at("dR_hol").at("dR_hol[1,1,1,1,1]").at("re").get<std::string>() == "0");

  Json j2 = curvature_to_json(curvature_data_at_point(fubini_study_jet(2, 6)));
  REQUIRE(j2.at("R").at("R[1,1,2,2]").at("re").get<std::string>() == "1");
  REQUIRE(j2.at("R").at("R[1,2,2,1]").at("re").get<std::string>() == "1");
  REQUIRE(j2.at("R").at("R[1,2,2,2]").at("re").get<std::string>() == "0");
  REQUIRE(j2.at("Ric").at("Ric[1,1]").at("re").get<std::string>() == "3");
  REQUIRE(j2.at("rho").at("re").get<std::string>() == "6");
}

TEST_CASE("expansion json records method, fingerprint, and coefficients") {
  PotentialJet jet = fubini_study_jet(1, 6);
  ExpansionResult res = compute_expansion(jet, 4, Method::Both);
  Json j = expansion_to_json(res);
  REQUIRE(j.at("method").get<std::string>() == "both");
  REQUIRE(j.at("input_fingerprint").get<std::string>() ==
          std::to_string(jet_fingerprint(jet)));
  REQUIRE(j.at("bs").contains("1"));
  REQUIRE(j.at("bs").contains("4"));
  REQUIRE(poly_from_json(j.at("bs").at("2")) == res.bs.at(2));
  REQUIRE(j.at("record").at("order").get<int>() == 6);
}

TEST_CASE("cli normalize fixes k form input and reports the identity record") {
  auto dir = scratch();
  auto in = dir / "fs1.json", out = dir / "fs1_norm.json";
  write_file(in, jet_to_json(fubini_study_jet(1, 6)).dump(2) + "\n");
  REQUIRE(run_cli("normalize --input " + in.string() + " --output " + out.string()) == 0);
  Json j = Json::parse(read_file(out));
  REQUIRE(jet_from_json(j.at("jet")).series == fubini_study_jet(1, 6).series);
  REQUIRE(series_from_json(j.at("record").at("frame_change")).is_zero());
}

TEST_CASE("cli coeffs output matches the library bit for bit") {
  auto dir = scratch();
  auto in = dir / "rand.json", out = dir / "rand_coeffs.json";
  std::mt19937_64 rng(7);
  PotentialJet jet = random_jet(rng, 1, 6, true, 8);
  write_file(in, jet_to_json(jet).dump(2) + "\n");
  REQUIRE(run_cli("coeffs --input " + in.string() + " --max-r 4 --method both --output " +
                  out.string()) == 0);
  Json j = Json::parse(read_file(out));
  ExpansionResult res = compute_expansion(jet, 4, Method::Both);
  for (int r = 1; r <= 4; ++r)
    REQUIRE(poly_from_json(j.at("bs").at(std::to_string(r))) == res.bs.at(r));
}

TEST_CASE("cli exit codes distinguish validation failures") {
  auto dir = scratch();
  auto in = dir / "fs1b.json";
  write_file(in, jet_to_json(fubini_study_jet(1, 6)).dump(2) + "\n");
  CHECK(run_cli("coeffs --input " + in.string() + " --max-r 6") == 2);
  CHECK(run_cli("coeffs --input " + in.string() + " --max-r 5 --method both") == 2);
  CHECK(run_cli("normalize --input " + in.string() + " --order 9") == 2);
  CHECK(run_cli("normalize --input " + (dir / "missing.json").string()) == 2);
  CHECK(run_cli("oracle flat --experiment dklog") == 2);
  CHECK(run_cli("oracle fubini-study --experiment dklog --k 7") == 2);
  CHECK(run_cli("oracle fubini-study --experiment fit --N banana") == 2);
  CHECK(run_cli("nonsense") == 2);

  auto bad = dir / "nonreal.json";
  write_file(bad, R"({"m":1,"order":4,"identity_quadratic":true,
                      "terms":[{"J":[2],"K":[1],"re":"1"}]})");
  CHECK(run_cli("curvature --input " + bad.string()) == 2);
}

TEST_CASE("cli verify suites pass on seeded batches") {
  CHECK(run_cli("verify cross --seed 3 --count 2 --max-r 3") == 0);
  CHECK(run_cli("verify homogeneity --seed 4 --count 2 --max-r 3 --t 3/2") == 0);
}

TEST_CASE("cli oracle runs end to end with exit codes") {
  CHECK(run_cli("oracle flat --experiment fit --N 16..64") == 0);
  CHECK(run_cli("oracle flat --experiment pn --N 16..64") == 0);
  CHECK(run_cli("oracle fubini-study --experiment fit --r 4 --N 64..4096 --precision-bits 64") ==
        4);
}

TEST_CASE("cli output is byte stable across repeated runs") {
  auto dir = scratch();
  auto in = dir / "fs2.json";
  write_file(in, jet_to_json(fubini_study_jet(2, 6)).dump(2) + "\n");
  auto o1 = dir / "det1.json", o2 = dir / "det2.json";
  REQUIRE(run_cli("coeffs --input " + in.string() + " --max-r 4 --method both --output " +
                  o1.string()) == 0);
  REQUIRE(run_cli("coeffs --input " + in.string() + " --max-r 4 --method both --output " +
                  o2.string()) == 0);
  REQUIRE(read_file(o1) == read_file(o2));

  auto t1 = dir / "txt1.txt", t2 = dir / "txt2.txt";
  REQUIRE(run_cli("verify lemma34 --seed 11 --count 2 --order 6 --format text --output " +
                  t1.string()) == 0);
  REQUIRE(run_cli("verify lemma34 --seed 11 --count 2 --order 6 --format text --output " +
                  t2.string()) == 0);
  std::string body = read_file(t1);
  REQUIRE(body == read_file(t2));
  REQUIRE(body.find("suite lemma34: all 2 trials pass") != std::string::npos);
}

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bergman/json_io.hpp"
#include "bergman/models.hpp"
#include "bergman/random_jets.hpp"

using namespace bergman;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCross = 3;
constexpr int kExitPrecision = 4;

int exit_code_for(const Error& e) {
  if (e.kind == ErrorKind::CrossValidationMismatch) return kExitCross;
  if (e.kind == ErrorKind::PrecisionExhausted) return kExitPrecision;
  return kExitValidation;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::BadInput, "cannot open input file: " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::BadInput, std::string("invalid JSON: ") + e.what());
  }
}

void emit(const std::string& out_path, const std::string& body) {
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) fail(ErrorKind::BadInput, "cannot open output file: " + out_path);
  out << body;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/** "a..b" expands to the doubling grid a, 2a, 4a, ... capped at b. */
std::vector<long> parse_grid(const std::string& s) {
  auto pos = s.find("..");
  long a = 0, b = 0;
  try {
    if (pos == std::string::npos) throw std::invalid_argument("no ..");
    a = std::stol(s.substr(0, pos));
    b = std::stol(s.substr(pos + 2));
  } catch (const std::exception&) {
    fail(ErrorKind::BadInput, "grid must look like 64..4096");
  }
  if (a < 1 || b < 2 * a) fail(ErrorKind::BadInput, "grid needs a >= 1 and b >= 2a");
  std::vector<long> g;
  for (long n = a; n <= b; n *= 2) g.push_back(n);
  return g;
}

std::string gaussian_text(const GaussianRational& c) { return gaussian_to_string(c); }

Rational mi_factorial(const MultiIndex& mi) {
  Rational r(1);
  for (int e : mi)
    for (int i = 2; i <= e; ++i) r *= i;
  return r;
}

GaussianRational partial_at_zero(const TruncatedSeries& s, const MultiIndex& J,
                                 const MultiIndex& K) {
  return s.coeff(J, K) * GaussianRational(mi_factorial(J) * mi_factorial(K), Rational(0));
}

MultiIndex mi_units(int m, std::initializer_list<int> idxs) {
  MultiIndex r(m, 0);
  for (int i : idxs) r[i] += 1;
  return r;
}

std::string tuple_text(std::initializer_list<int> idxs) {
  std::string s = "(";
  bool first = true;
  for (int i : idxs) {
    if (!first) s += ",";
    s += std::to_string(i + 1);
    first = false;
  }
  return s + ")";
}

/**
 * Taylor coefficients of a K-form potential encode the curvature tensor and
 * its covariant derivatives at the base point; checks all six identities.
 */
bool identities_hold(const PotentialJet& jet, std::string* why) {
  const TruncatedSeries& phi = jet.series;
  CurvatureData data = curvature_data_at_point(jet);
  int m = data.m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          if (!(partial_at_zero(phi, mi_units(m, {i, k}), mi_units(m, {j, l})) ==
                -data.R.at({i, j, k, l}))) {
            *why = "fourth partial vs R at " + tuple_text({i, j, k, l});
            return false;
          }
          for (int s = 0; s < m; ++s) {
            if (!(partial_at_zero(phi, mi_units(m, {i, k, s}), mi_units(m, {j, l})) ==
                  -data.dR_hol->at({i, j, k, l, s}))) {
              *why = "fifth partial vs dR_hol at " + tuple_text({i, j, k, l, s});
              return false;
            }
            if (!(partial_at_zero(phi, mi_units(m, {i, k}), mi_units(m, {j, l, s})) ==
                  -data.dR_anti->at({i, j, k, l, s}))) {
              *why = "fifth partial vs dR_anti at " + tuple_text({i, j, k, l, s});
              return false;
            }
            for (int t = 0; t < m; ++t) {
              GaussianRational rr;
              for (int p = 0; p < m; ++p) {
                rr += data.R.at({p, j, k, l}) * data.R.at({i, p, s, t});
                rr += data.R.at({i, j, p, l}) * data.R.at({k, p, s, t});
                rr += data.R.at({i, p, k, t}) * data.R.at({p, j, s, l});
              }
              if (!(partial_at_zero(phi, mi_units(m, {i, k, s}), mi_units(m, {j, l, t})) ==
                    -data.ddR_mixed->at({i, j, k, l, s, t}) + rr)) {
                *why = "sixth partial vs ddR_mixed at " + tuple_text({i, j, k, l, s, t});
                return false;
              }
              if (!(partial_at_zero(phi, mi_units(m, {i, k, s, t}), mi_units(m, {j, l})) ==
                    -data.ddR_holhol->at({i, j, k, l, s, t}))) {
                *why = "sixth partial vs ddR_holhol at " + tuple_text({i, j, k, l, s, t});
                return false;
              }
              if (!(partial_at_zero(phi, mi_units(m, {i, k}), mi_units(m, {j, l, s, t})) ==
                    -data.ddR_antianti->at({i, j, k, l, s, t}))) {
                *why = "sixth partial vs ddR_antianti at " + tuple_text({i, j, k, l, s, t});
                return false;
              }
            }
          }
        }
  return true;
}

/** Hermitian symmetry, parity, degree bounds, diagonal restrictions. */
bool properties_hold(const PotentialJet& jet, int r_max, std::string* why) {
  ExpansionResult res = compute_expansion(jet, r_max, Method::Generic);
  for (int r = 1; r <= r_max; ++r) {
    const ScaledPolynomial& b = res.bs.at(r);
    if (!is_hermitian(b)) {
      *why = "b" + std::to_string(r) + " is not hermitian";
      return false;
    }
    if (!(b.parity_flip() == ((r % 2 == 0) ? b : -b))) {
      *why = "b" + std::to_string(r) + " breaks sign parity";
      return false;
    }
    if (b.degree() > ((r % 2 == 0) ? 2 * r : 2 * r - 1)) {
      *why = "b" + std::to_string(r) + " exceeds its degree bound";
      return false;
    }
  }
  auto [kjet, rec] = normalize_to_K(jet, r_max + 2);
  CurvatureData data = curvature_data_at_point(kjet);
  int m = data.m;
  if (r_max >= 2 &&
      !(res.bs.at(2).diagonal() ==
        ScaledPolynomial::constant(m, GaussianRational(1, 2) * data.rho))) {
    *why = "diagonal of b2 is not rho/2";
    return false;
  }
  if (r_max >= 3) {
    ScaledPolynomial expect3(m);
    MultiIndex z(m, 0);
    for (int s = 0; s < m; ++s) {
      expect3.add_coeff(QIdx{unit_index(m, s), z, z, z},
                        GaussianRational(1, 2) * data.grad_rho_hol->at({s}));
      expect3.add_coeff(QIdx{z, unit_index(m, s), z, z},
                        GaussianRational(1, 2) * data.grad_rho_anti->at({s}));
    }
    if (!(res.bs.at(3).diagonal() == expect3)) {
      *why = "diagonal of b3 is not the scalar curvature gradient pairing";
      return false;
    }
  }
  return true;
}

struct SuiteConfig {
  std::string name;
  std::uint64_t seed = 1;
  int count = 20;
  int order = 7;
  int r_max = 4;
  Rational t = Rational(2);
};

int run_suite(const SuiteConfig& cfg, const std::string& out_path, bool text) {
  std::mt19937_64 rng(cfg.seed);
  int order = cfg.order;
  if (cfg.name == "lemma34" && order < 6) order = 6;
  if ((cfg.name == "homogeneity" || cfg.name == "cross" || cfg.name == "properties") &&
      order < cfg.r_max + 2)
    order = cfg.r_max + 2;

  Json trials = Json::array();
  Json first_failure;
  std::ostringstream os;
  bool all_ok = true;
  for (int i = 0; i < cfg.count; ++i) {
    int m = i % 2 + 1;
    PotentialJet jet = random_jet(rng, m, order, true, 8);
    bool ok = true;
    std::string detail;
    if (cfg.name == "lemma34") {
      ok = identities_hold(jet, &detail);
    } else if (cfg.name == "homogeneity") {
      HomogeneityReport rep = homogeneity_check(jet, cfg.t, cfg.r_max);
      ok = rep.scaling_ok && rep.parity_ok && rep.degree_ok;
      detail = rep.detail;
    } else if (cfg.name == "cross") {
      compute_expansion(jet, cfg.r_max, Method::Both);  // throws on mismatch
    } else {
      ok = properties_hold(jet, cfg.r_max, &detail);
    }
    trials.push_back(Json{{"trial", i}, {"m", m}, {"ok", ok}});
    os << (ok ? "ok  " : "FAIL") << "  trial " << std::setw(2) << i << "  m " << m;
    if (!ok) os << "  " << detail;
    os << "\n";
    if (!ok && all_ok) {
      first_failure = Json{{"trial", i}, {"m", m}, {"detail", detail}, {"jet", jet_to_json(jet)}};
      all_ok = false;
    }
  }
  os << "suite " << cfg.name << ": " << (all_ok ? "all " : "FAILURES among ") << cfg.count
     << " trials" << (all_ok ? " pass" : "") << "\n";

  Json out{{"suite", cfg.name}, {"seed", cfg.seed},       {"count", cfg.count},
           {"order", order},    {"r_max", cfg.r_max},     {"trials", std::move(trials)},
           {"all_ok", all_ok},  {"first_failure", first_failure}};
  if (cfg.name == "homogeneity") out["t"] = rational_to_string(cfg.t);
  emit(out_path, text ? os.str() : dump(out));
  return all_ok ? kExitOk : kExitVerification;
}

std::string curvature_text(const Json& j) {
  std::ostringstream os;
  for (const auto& [key, val] : j.items()) {
    if (val.is_object() && val.contains("re")) {
      os << key << " = "
         << gaussian_text({parse_rational(val.at("re").get<std::string>()),
                           parse_rational(val.at("im").get<std::string>())})
         << "\n";
    } else if (val.is_object()) {
      for (const auto& [k2, v2] : val.items())
        os << k2 << " = "
           << gaussian_text({parse_rational(v2.at("re").get<std::string>()),
                             parse_rational(v2.at("im").get<std::string>())})
           << "\n";
    } else {
      os << key << " = " << val.dump() << "\n";
    }
  }
  return os.str();
}

std::string record_text(const NormalizationRecord& rec) {
  std::ostringstream os;
  os << "record order " << rec.order << "\n";
  os << "frame_change = " << series_to_string(rec.frame_change) << "\n";
  for (std::size_t k = 0; k < rec.coordinate_change.size(); ++k)
    os << "w" << (k + 1) << " = " << series_to_string(rec.coordinate_change[k]) << "\n";
  return os.str();
}

struct Gate {
  bool pass = false;
  std::string requirement;
};

Gate exponent_gate(const Real& e, const Real& target, const std::string& what) {
  Real d = e - target;
  if (d < 0) d = -d;
  return {d <= Real("0.1"), what};
}

std::string fit_table(const Json& j, const char* value_key) {
  std::ostringstream os;
  os << "model " << j.at("model").get<std::string>() << "  experiment "
     << j.at("experiment").get<std::string>();
  if (j.contains("r_used")) os << "  r_used " << j.at("r_used").get<int>();
  if (j.contains("k")) os << "  k " << j.at("k").get<int>();
  os << "  m " << j.at("m").get<int>() << "  precision " << j.at("precision_bits").get<int>()
     << " bits\n";
  os << std::setw(10) << "N" << "  " << value_key << "\n";
  const Json& ns = j.at("N");
  const Json& vals = j.at(value_key);
  for (std::size_t i = 0; i < ns.size(); ++i)
    os << std::setw(10) << ns[i].get<long>() << "  " << vals[i].get<std::string>() << "\n";
  os << "fitted exponent = " << j.at("fitted_exponent").get<std::string>() << "\n";
  if (j.contains("all_below_noise") && j.at("all_below_noise").get<bool>())
    os << "all values below the cancellation floor\n";
  os << "gate (" << j.at("gate").at("requirement").get<std::string>() << "): "
     << (j.at("gate").at("pass").get<bool>() ? "pass" : "FAIL") << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"off-diagonal expansion of weighted kernels: exact coefficients and checks"};
  app.require_subcommand(1);

  std::string input, output, format = "json", method = "both", grid_spec = "64..4096";
  std::string suite, model_token, experiment = "fit", t_spec = "2";
  int order = 0, max_r = 4, precision_bits = 256, oracle_m = 1, oracle_r = 2, oracle_k = 2;
  std::uint64_t seed = 1;
  int count = 20;

  auto add_io = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input) cmd->add_option("--input", input, "jet JSON file")->required();
    cmd->add_option("--output", output, "output file (default: stdout)");
    cmd->add_option("--format", format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));
  };

  CLI::App* nrm = app.add_subcommand("normalize", "rewrite a potential jet in K-coordinates");
  add_io(nrm, true);
  nrm->add_option("--order", order, "normalization order (default: the jet order)");

  CLI::App* cur = app.add_subcommand("curvature", "curvature tensors and invariants at 0");
  add_io(cur, true);

  CLI::App* cof = app.add_subcommand("coeffs", "expansion coefficients b_r");
  add_io(cof, true);
  cof->add_option("--max-r", max_r, "highest r (default 4; 5 needs --method generic)");
  cof->add_option("--method", method, "closed, generic, or both")
      ->check(CLI::IsMember({"closed", "generic", "both"}));

  CLI::App* ver = app.add_subcommand("verify", "randomized invariant suites");
  ver->add_option("suite", suite, "lemma34, homogeneity, cross, or properties")
      ->required()
      ->check(CLI::IsMember({"lemma34", "homogeneity", "cross", "properties"}));
  add_io(ver, false);
  ver->add_option("--seed", seed, "random seed (default 1)");
  ver->add_option("--count", count, "number of jets (default 20)");
  ver->add_option("--order", order, "jet order (default 7)");
  ver->add_option("--max-r", max_r, "highest r (default 4)");
  ver->add_option("--t", t_spec, "scaling factor for homogeneity (rational, default 2)");

  CLI::App* orc = app.add_subcommand("oracle", "numeric experiments against model kernels");
  orc->add_option("model", model_token, "fubini-study or flat")
      ->required()
      ->check(CLI::IsMember({"fubini-study", "flat"}));
  add_io(orc, false);
  orc->add_option("--experiment", experiment, "fit, pn, or dklog")
      ->check(CLI::IsMember({"fit", "pn", "dklog"}));
  orc->add_option("--m", oracle_m, "model dimension (default 1)");
  orc->add_option("--r", oracle_r, "expansion order for fit (default 2)");
  orc->add_option("--k", oracle_k, "derivative order for dklog (default 2)");
  orc->add_option("--N", grid_spec, "doubling grid a..b (default 64..4096)");
  orc->add_option("--precision-bits", precision_bits, "working precision (default 256)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  bool text = format == "text";
  try {
    if (app.got_subcommand(nrm)) {
      PotentialJet jet = jet_from_json(load_json(input));
      int n = nrm->count("--order") ? order : jet.series.order();
      auto [kjet, rec] = normalize_to_K(jet, n);
      if (text) {
        std::ostringstream os;
        os << "jet = " << series_to_string(kjet.series) << "\n" << record_text(rec);
        emit(output, os.str());
      } else {
        emit(output, dump(Json{{"jet", jet_to_json(kjet)}, {"record", record_to_json(rec)}}));
      }
      return kExitOk;
    }

    if (app.got_subcommand(cur)) {
      PotentialJet jet = jet_from_json(load_json(input));
      Json j = curvature_to_json(curvature_data_at_point(jet));
      emit(output, text ? curvature_text(j) : dump(j));
      return kExitOk;
    }

    if (app.got_subcommand(cof)) {
      PotentialJet jet = jet_from_json(load_json(input));
      Method me = method == "closed"    ? Method::Closed
                  : method == "generic" ? Method::Generic
                                        : Method::Both;
      ExpansionResult res = compute_expansion(jet, max_r, me);
      if (text) {
        std::ostringstream os;
        os << "m " << res.m << "  r_max " << res.r_max << "  method "
           << method_name(res.method) << "\n";
        for (const auto& [r, b] : res.bs) os << "b" << r << " = " << b.to_string() << "\n";
        for (const auto& [r, be] : res.betas)
          os << "beta" << r << " = " << be.to_string() << "\n";
        os << record_text(res.record);
        emit(output, os.str());
      } else {
        emit(output, dump(expansion_to_json(res)));
      }
      return kExitOk;
    }

    if (app.got_subcommand(ver)) {
      SuiteConfig cfg;
      cfg.name = suite;
      cfg.seed = seed;
      cfg.count = count;
      cfg.order = ver->count("--order") ? order : 7;
      cfg.r_max = max_r;
      cfg.t = parse_rational(t_spec);
      if (cfg.count < 1) fail(ErrorKind::BadInput, "count must be positive");
      if (cfg.t == 0) fail(ErrorKind::BadInput, "t must be nonzero");
      return run_suite(cfg, output, text);
    }

    // oracle
    ModelKernel model{model_token == "flat" ? ModelKind::Flat : ModelKind::FubiniStudy,
                      oracle_m};
    if (oracle_m < 1) fail(ErrorKind::BadInput, "m must be positive");
    set_precision_bits(precision_bits);
    std::vector<long> grid = parse_grid(grid_spec);
    Json j;
    Gate gate;

    if (experiment == "fit") {
      if (oracle_r < 1 || oracle_r > 5) fail(ErrorKind::BadInput, "r must be in 1..5");
      PotentialJet jet = model_jet(model, std::max(oracle_r + 2, 4));
      ExpansionResult ex = compute_expansion(jet, oracle_r, Method::Generic);
      ConvergenceFit fit =
          convergence_fit(model, ex, oracle_r, grid, sample_points(oracle_m), precision_bits);
      j = convergence_fit_to_json(fit, model_token, oracle_m, oracle_r);
      if (model.kind == ModelKind::Flat) {
        gate = {fit.all_below_noise, "all residuals below the cancellation floor"};
      } else if (fit.all_below_noise) {
        gate = {false, "residuals expected above the cancellation floor"};
      } else if (oracle_r == 2) {
        gate = exponent_gate(fit.fitted_exponent, Real(-2), "fitted exponent within 0.1 of -2");
      } else if (oracle_r == 4) {
        gate = {fit.fitted_exponent <= Real("-2.4"), "fitted exponent <= -2.4"};
      } else {
        Real bound = -(Real(oracle_r + 1) / 2) + Real("0.1");
        gate = {fit.fitted_exponent <= bound,
                "fitted exponent <= -(r+1)/2 + 0.1 for r = " + std::to_string(oracle_r)};
      }
      j["gate"] = Json{{"pass", gate.pass}, {"requirement", gate.requirement}};
      emit(output, text ? fit_table(j, "residual_norms") : dump(j));
    } else if (experiment == "pn") {
      PotentialJet jet = model_jet(model, 6);
      PnCorrection corr = pn_correction(curvature_data_at_point(jet));
      PnFit fit = pn_fit(model, corr.q1, grid, sample_points(oracle_m), precision_bits);
      j = pn_fit_to_json(fit, model_token, oracle_m);
      if (!fit.bound_ok) {
        gate = {false, "normalized magnitude must stay in (0, 1]"};
      } else if (model.kind == ModelKind::Flat) {
        gate = {fit.all_below_noise,
                "normalized magnitude in (0, 1] and deviations at the cancellation floor"};
      } else if (fit.all_below_noise) {
        gate = {false, "deviations expected above the cancellation floor"};
      } else {
        gate = exponent_gate(
            fit.fitted_exponent, Real(-2),
            "normalized magnitude in (0, 1] and fitted exponent within 0.1 of -2");
      }
      j["gate"] = Json{{"pass", gate.pass}, {"requirement", gate.requirement}};
      emit(output, text ? fit_table(j, "deviation_norms") : dump(j));
    } else {  // dklog
      if (model.kind == ModelKind::Flat)
        fail(ErrorKind::BadInput, "dklog runs on the curve model only");
      if (oracle_m != 1) fail(ErrorKind::BadInput, "dklog is a curve experiment; m must be 1");
      GrowthFit fit = derivative_growth_demo(oracle_k, grid, precision_bits);
      j = growth_fit_to_json(fit);
      gate = (oracle_k % 2 == 0)
                 ? exponent_gate(fit.fitted_exponent, Real(1), "fitted exponent within 0.1 of 1")
                 : exponent_gate(fit.fitted_exponent, Real("0.5"),
                                 "fitted exponent within 0.1 of 1/2");
      j["gate"] = Json{{"pass", gate.pass}, {"requirement", gate.requirement}};
      emit(output, text ? fit_table(j, "sup_values") : dump(j));
    }
    return gate.pass ? kExitOk : kExitVerification;
  } catch (const Error& e) {
    std::cerr << "error [" << kind_name(e.kind) << "]: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "bergman/curvature.hpp"
#include "bergman/expansion.hpp"
#include "bergman/normal_form.hpp"
#include "bergman/numeric.hpp"
#include "bergman/series.hpp"

namespace bergman {

/** Insertion-ordered JSON so serialized maps keep their deterministic order. */
using Json = nlohmann::ordered_json;

inline Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long>());
  if (!j.is_string()) fail(ErrorKind::BadInput, "rational must be a string like \"p/q\"");
  return parse_rational(j.get<std::string>());
}

inline GaussianRational term_coeff_from_json(const Json& term) {
  Rational re = term.contains("re") ? rational_from_json(term.at("re")) : Rational(0);
  Rational im = term.contains("im") ? rational_from_json(term.at("im")) : Rational(0);
  return {re, im};
}

inline MultiIndex multi_index_from_json(const Json& j, int m) {
  if (!j.is_array() || static_cast<int>(j.size()) != m)
    fail(ErrorKind::BadInput, "index must be an array of length m");
  MultiIndex idx(m, 0);
  for (int k = 0; k < m; ++k) {
    if (!j[k].is_number_integer() || j[k].get<long>() < 0)
      fail(ErrorKind::BadInput, "index entries must be nonnegative integers");
    idx[k] = j[k].get<int>();
  }
  return idx;
}

inline Json gaussian_to_json(const GaussianRational& c) {
  return Json{{"re", rational_to_string(c.re)}, {"im", rational_to_string(c.im)}};
}

inline Json series_to_json(const TruncatedSeries& s) {
  Json terms = Json::array();
  for (const auto& [b, c] : s.terms()) {
    terms.push_back(Json{{"J", b.J},
                         {"K", b.K},
                         {"re", rational_to_string(c.re)},
                         {"im", rational_to_string(c.im)}});
  }
  return Json{{"m", s.dim()}, {"order", s.order()}, {"terms", std::move(terms)}};
}

inline TruncatedSeries series_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("m") || !j.contains("order"))
    fail(ErrorKind::BadInput, "series needs \"m\" and \"order\"");
  int m = j.at("m").get<int>();
  int order = j.at("order").get<int>();
  if (m < 1) fail(ErrorKind::BadInput, "m must be positive");
  if (order < 0) fail(ErrorKind::BadInput, "order must be nonnegative");
  TruncatedSeries s(m, order);
  if (j.contains("terms"))
    for (const Json& t : j.at("terms")) {
      Bidx b{multi_index_from_json(t.at("J"), m), multi_index_from_json(t.at("K"), m)};
      if (b.degree() > order) fail(ErrorKind::DegreeOverflow, "term beyond stated order");
      s.add_coeff(b, term_coeff_from_json(t));
    }
  return s;
}

inline Json jet_to_json(const PotentialJet& jet) { return series_to_json(jet.series); }

inline PotentialJet jet_from_json(const Json& j) {
  TruncatedSeries s = series_from_json(j);
  if (j.contains("identity_quadratic") && j.at("identity_quadratic").get<bool>())
    for (int k = 0; k < s.dim(); ++k)
      s.add_coeff({unit_index(s.dim(), k), unit_index(s.dim(), k)}, GaussianRational(1));
  return jet_from_series(s);
}

inline Json record_to_json(const NormalizationRecord& rec) {
  Json coord = Json::array();
  for (const TruncatedSeries& w : rec.coordinate_change) coord.push_back(series_to_json(w));
  return Json{{"frame_change", series_to_json(rec.frame_change)},
              {"coordinate_change", std::move(coord)},
              {"order", rec.order}};
}

inline NormalizationRecord record_from_json(const Json& j) {
  NormalizationRecord rec{series_from_json(j.at("frame_change")), {}, j.at("order").get<int>()};
  for (const Json& w : j.at("coordinate_change")) rec.coordinate_change.push_back(series_from_json(w));
  return rec;
}

namespace detail {

/** Keys like "R[1,1,2,2]": 1-based indices in storage order. */
inline void point_tensor_to_json(Json& out, const std::string& name, const PointTensor& t) {
  Json block = Json::object();
  for (std::size_t f = 0; f < t.vals.size(); ++f) {
    std::vector<int> idx(t.rank);
    std::size_t rem = f;
    for (int s = t.rank - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(rem % t.m);
      rem /= t.m;
    }
    std::string key = name + "[";
    for (int s = 0; s < t.rank; ++s) key += (s ? "," : "") + std::to_string(idx[s] + 1);
    key += "]";
    block[key] = gaussian_to_json(t.vals[f]);
  }
  out[name] = std::move(block);
}

}  // namespace detail

inline Json curvature_to_json(const CurvatureData& data) {
  Json out;
  out["m"] = data.m;
  detail::point_tensor_to_json(out, "R", data.R);
  detail::point_tensor_to_json(out, "Ric", data.ric);
  out["rho"] = gaussian_to_json(data.rho);
  out["norm_R2"] = gaussian_to_json(data.norm_R2);
  out["norm_Ric2"] = gaussian_to_json(data.norm_Ric2);
  if (data.dR_hol) detail::point_tensor_to_json(out, "dR_hol", *data.dR_hol);
  if (data.dR_anti) detail::point_tensor_to_json(out, "dR_anti", *data.dR_anti);
  if (data.grad_rho_hol) detail::point_tensor_to_json(out, "grad_rho_hol", *data.grad_rho_hol);
  if (data.grad_rho_anti) detail::point_tensor_to_json(out, "grad_rho_anti", *data.grad_rho_anti);
  if (data.ddR_mixed) detail::point_tensor_to_json(out, "ddR_mixed", *data.ddR_mixed);
  if (data.ddR_holhol) detail::point_tensor_to_json(out, "ddR_holhol", *data.ddR_holhol);
  if (data.ddR_antianti) detail::point_tensor_to_json(out, "ddR_antianti", *data.ddR_antianti);
  if (data.hess_rho_mixed)
    detail::point_tensor_to_json(out, "hess_rho_mixed", *data.hess_rho_mixed);
  if (data.hess_rho_holhol)
    detail::point_tensor_to_json(out, "hess_rho_holhol", *data.hess_rho_holhol);
  if (data.hess_rho_antianti)
    detail::point_tensor_to_json(out, "hess_rho_antianti", *data.hess_rho_antianti);
  if (data.lap_rho) out["lap_rho"] = gaussian_to_json(*data.lap_rho);
  return out;
}

inline Json poly_to_json(const ScaledPolynomial& p) {
  Json terms = Json::array();
  for (const auto& [q, c] : p.terms()) {
    terms.push_back(Json{{"u", q.u},
                         {"ubar", q.ubar},
                         {"v", q.v},
                         {"vbar", q.vbar},
                         {"re", rational_to_string(c.re)},
                         {"im", rational_to_string(c.im)}});
  }
  return Json{{"m", p.dim()}, {"terms", std::move(terms)}};
}

inline ScaledPolynomial poly_from_json(const Json& j) {
  int m = j.at("m").get<int>();
  if (m < 1) fail(ErrorKind::BadInput, "m must be positive");
  ScaledPolynomial p(m);
  if (j.contains("terms"))
    for (const Json& t : j.at("terms")) {
      QIdx q{multi_index_from_json(t.at("u"), m), multi_index_from_json(t.at("ubar"), m),
             multi_index_from_json(t.at("v"), m), multi_index_from_json(t.at("vbar"), m)};
      p.add_coeff(q, term_coeff_from_json(t));
    }
  return p;
}

inline Json expansion_to_json(const ExpansionResult& res) {
  Json betas = Json::object();
  for (const auto& [r, p] : res.betas) betas[std::to_string(r)] = poly_to_json(p);
  Json bs = Json::object();
  for (const auto& [r, p] : res.bs) bs[std::to_string(r)] = poly_to_json(p);
  return Json{{"m", res.m},
              {"r_max", res.r_max},
              {"method", method_name(res.method)},
              {"input_fingerprint", std::to_string(res.input_fingerprint)},
              {"betas", std::move(betas)},
              {"bs", std::move(bs)},
              {"record", record_to_json(res.record)}};
}

/** Fixed-width scientific rendering keeps report files byte-reproducible. */
inline std::string real_to_string(const Real& x) {
  return x.str(20, std::ios_base::scientific);
}

inline Json convergence_fit_to_json(const ConvergenceFit& fit, const std::string& model,
                                    int m, int r_used) {
  Json norms = Json::array();
  for (const Real& r : fit.residual_norms) norms.push_back(real_to_string(r));
  return Json{{"model", model},
              {"m", m},
              {"experiment", "fit"},
              {"r_used", r_used},
              {"precision_bits", fit.precision_bits},
              {"N", fit.N_grid},
              {"residual_norms", std::move(norms)},
              {"fitted_exponent", real_to_string(fit.fitted_exponent)},
              {"all_below_noise", fit.all_below_noise}};
}

inline Json pn_fit_to_json(const PnFit& fit, const std::string& model, int m) {
  Json norms = Json::array();
  for (const Real& r : fit.deviation_norms) norms.push_back(real_to_string(r));
  return Json{{"model", model},
              {"m", m},
              {"experiment", "pn"},
              {"precision_bits", fit.precision_bits},
              {"N", fit.N_grid},
              {"deviation_norms", std::move(norms)},
              {"fitted_exponent", real_to_string(fit.fitted_exponent)},
              {"all_below_noise", fit.all_below_noise},
              {"bound_ok", fit.bound_ok}};
}

inline Json growth_fit_to_json(const GrowthFit& fit) {
  Json sups = Json::array();
  for (const Real& r : fit.sup_values) sups.push_back(real_to_string(r));
  return Json{{"model", "fubini-study"},
              {"m", 1},
              {"experiment", "dklog"},
              {"k", fit.k},
              {"precision_bits", fit.precision_bits},
              {"N", fit.N_grid},
              {"sup_values", std::move(sups)},
              {"fitted_exponent", real_to_string(fit.fitted_exponent)}};
}

}  // namespace bergman

#pragma once

#include <utility>
#include <vector>

#include "bergman/curvature.hpp"
#include "bergman/series.hpp"

namespace bergman {

/**
 * The transformation taking the input jet to its K-form: first substitute
 * z <- coordinate_change(z), then subtract 2 Re(frame_change).
 */
struct NormalizationRecord {
  TruncatedSeries frame_change;                  // holomorphic, degree >= 2
  std::vector<TruncatedSeries> coordinate_change;  // w_k = z_k + higher, holomorphic
  int order = 0;
};

struct KFormReport {
  bool ok = true;
  std::vector<Bidx> offending;
};

/**
 * A jet is in K-form to order n when it is centered, its quadratic part is
 * |z|^2, and every term with 3 <= degree <= n has |J| >= 2 and |K| >= 2.
 */
inline KFormReport verify_K_form(const PotentialJet& jet, int n) {
  KFormReport rep;
  int m = jet.series.dim();
  if (jet.series.order() < n) fail(ErrorKind::OrderTooLow, "jet order below requested K order");
  TruncatedSeries expected_quad(m, 2);
  for (int k = 0; k < m; ++k)
    expected_quad.add_coeff({unit_index(m, k), unit_index(m, k)}, GaussianRational(1));
  for (const auto& [b, c] : jet.series.terms()) {
    int d = b.degree();
    bool bad = false;
    if (d <= 2)
      bad = !(jet.series.truncated(2) == expected_quad);
    else if (d <= n)
      bad = index_total(b.J) < 2 || index_total(b.K) < 2;
    if (bad) {
      rep.ok = false;
      rep.offending.push_back(b);
    }
  }
  return rep;
}

/**
 * Degree-by-degree reduction to K-form of order n. At each degree d the
 * frame step removes pure (J, 0)/(0, K) terms (subtracting 2 Re of a
 * holomorphic polynomial), then the coordinate step kills |K| = 1 terms by
 * the substitution z_k <- z_k - sum_{|J|=d-1} a_{J, e_k} z^J, whose effect
 * on |z|^2 cancels them exactly and only perturbs higher degrees. Degree-2
 * holomorphic terms are folded into the frame change by a pre-pass.
 */
inline std::pair<PotentialJet, NormalizationRecord> normalize_to_K(const PotentialJet& jet,
                                                                   int n) {
  int m = jet.series.dim();
  if (n < 2) fail(ErrorKind::OrderTooLow, "normalization order must be >= 2");
  if (jet.series.order() < n) fail(ErrorKind::OrderTooLow, "jet order below normalization order");
  if (!jet.is_centered) fail(ErrorKind::NotCentered, "jet must have no constant or linear terms");
  require_identity_mixed_quadratic(jet);

  TruncatedSeries phi = jet.series.truncated(n);
  TruncatedSeries frame(m, n);
  std::vector<TruncatedSeries> coord;
  for (int k = 0; k < m; ++k) coord.push_back(TruncatedSeries::variable(m, n, k));

  auto peel_frame = [&](int d) {
    TruncatedSeries h(m, n);
    for (const auto& [b, c] : phi.terms())
      if (b.degree() == d && index_total(b.K) == 0) h.add_coeff(b, c);
    if (h.is_zero()) return;
    phi = phi - h - h.conj();
    frame = frame + h;
  };

  peel_frame(2);
  for (int d = 3; d <= n; ++d) {
    peel_frame(d);
    std::vector<TruncatedSeries> subs;
    bool any = false;
    for (int k = 0; k < m; ++k) {
      TruncatedSeries wk = TruncatedSeries::variable(m, n, k);
      for (const auto& [b, c] : phi.terms())
        if (b.degree() == d && index_total(b.K) == 1 && b.K[k] == 1)
          wk.add_coeff({b.J, MultiIndex(m, 0)}, -c);
      any = any || !(wk == TruncatedSeries::variable(m, n, k));
      subs.push_back(std::move(wk));
    }
    if (!any) continue;
    phi = phi.compose_holomorphic(subs);
    frame = frame.compose_holomorphic(subs);
    for (int k = 0; k < m; ++k) coord[k] = coord[k].compose_holomorphic(subs);
  }

  PotentialJet out = jet_from_series(phi);
  return {out, NormalizationRecord{frame, coord, n}};
}

/** Replays a record: coordinate change first, then the frame subtraction. */
inline PotentialJet apply_record(const PotentialJet& jet, const NormalizationRecord& rec) {
  int m = jet.series.dim();
  if (static_cast<int>(rec.coordinate_change.size()) != m)
    fail(ErrorKind::DimensionMismatch, "record arity mismatch");
  for (const auto& [b, c] : rec.frame_change.terms())
    if (index_total(b.K) != 0)
      fail(ErrorKind::NonHolomorphicSubstitution, "frame change must be holomorphic");
  TruncatedSeries composed = jet.series.compose_holomorphic(rec.coordinate_change);
  TruncatedSeries h = rec.frame_change.truncated(composed.order());
  return jet_from_series(composed - h - h.conj());
}

}  // namespace bergman

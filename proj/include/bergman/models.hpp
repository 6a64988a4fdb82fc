#pragma once

#include <vector>

#include "bergman/series.hpp"

namespace bergman {

/** |z|^2: the flat (Bargmann-Fock) potential. */
inline PotentialJet flat_jet(int m, int order) {
  return make_jet(m, order, {}, /*add_identity_quadratic=*/true);
}

/**
 * log(1 + |z|^2) truncated at the given order: the Fubini-Study potential
 * of CP^m about a point, in coordinates where it is already in K-form.
 */
inline PotentialJet fubini_study_jet(int m, int order) {
  TruncatedSeries r2(m, order);
  for (int k = 0; k < m; ++k)
    r2.add_coeff({unit_index(m, k), unit_index(m, k)}, GaussianRational(1));
  return jet_from_series(series_log1p(r2));
}

/**
 * |z|^2 + sum_{j>=2} (z^2 zbar^j + z^j zbar^2) in one variable; the j = 2
 * orientations coincide, so the z^2 zbar^2 coefficient is 2. A K-form
 * potential with nonvanishing curvature derivatives of every order.
 */
inline PotentialJet example2_jet(int order) {
  TruncatedSeries s(1, order);
  s.add_coeff({{1}, {1}}, GaussianRational(1));
  for (int j = 2; j + 2 <= order; ++j) {
    s.add_coeff({{2}, {j}}, GaussianRational(1));
    s.add_coeff({{j}, {2}}, GaussianRational(1));
  }
  return jet_from_series(s);
}

}  // namespace bergman

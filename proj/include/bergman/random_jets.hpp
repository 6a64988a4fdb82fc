#pragma once

#include <random>
#include <vector>

#include "bergman/series.hpp"

namespace bergman {

/**
 * Seeded jet corpora for verification suites. Raw mt19937_64 draws with
 * modulo reduction keep the sequences identical across toolchains (std
 * distributions are implementation-defined).
 */
inline long rand_range(std::mt19937_64& rng, long lo, long hi) {
  return lo + static_cast<long>(rng() % static_cast<unsigned long>(hi - lo + 1));
}

inline Rational rand_rational(std::mt19937_64& rng) {
  Rational q(rand_range(rng, -10, 10), rand_range(rng, 1, 10));
  q.canonicalize();
  return q;
}

inline MultiIndex rand_multi_index(std::mt19937_64& rng, int m, int total) {
  MultiIndex a(m, 0);
  for (int i = 0; i < total; ++i) a[rand_range(rng, 0, m - 1)] += 1;
  return a;
}

/**
 * Random centered jet with identity quadratic part and sparse higher terms.
 * k_form restricts the support to |J| >= 2, |K| >= 2; reality is enforced by
 * inserting conjugate term pairs.
 */
inline PotentialJet random_jet(std::mt19937_64& rng, int m, int order, bool k_form,
                               int support = 8) {
  TruncatedSeries s(m, order);
  for (int k = 0; k < m; ++k)
    s.add_coeff({unit_index(m, k), unit_index(m, k)}, GaussianRational(1));
  int min_deg = k_form ? 4 : 3;
  if (order < min_deg) return jet_from_series(s);
  for (int t = 0; t < support; ++t) {
    int deg = static_cast<int>(rand_range(rng, min_deg, order));
    int lo = k_form ? 2 : 0;
    int ja = static_cast<int>(rand_range(rng, lo, deg - lo));
    MultiIndex J = rand_multi_index(rng, m, ja);
    MultiIndex K = rand_multi_index(rng, m, deg - ja);
    GaussianRational c(rand_rational(rng), rand_rational(rng));
    if (J == K) c.im = 0;
    if (c.is_zero()) continue;
    // Overwrite rather than accumulate so a repeated (J, K) draw stays real-compatible.
    s.set_coeff({J, K}, c);
    s.set_coeff({K, J}, c.conj());
  }
  return jet_from_series(s);
}

}  // namespace bergman

#pragma once

#include <vector>

#include "bergman/series.hpp"

namespace bergman {

enum class Slot { HolLower, AntiLower, HolUpper, AntiUpper };

inline bool is_lower(Slot s) { return s == Slot::HolLower || s == Slot::AntiLower; }

/**
 * Dense array of TruncatedSeries indexed by k-tuples in {0..m-1}^k, with a
 * slot signature recording each index's variance and conjugation type. All
 * components share the dimension and truncation order.
 */
class TensorSeries {
 public:
  TensorSeries(int m, int order, std::vector<Slot> signature)
      : m_(m), order_(order), sig_(std::move(signature)) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < sig_.size(); ++i) n *= m;
    comp_.assign(n, TruncatedSeries(m, order));
  }

  int dim() const { return m_; }
  int order() const { return order_; }
  int rank() const { return static_cast<int>(sig_.size()); }
  const std::vector<Slot>& signature() const { return sig_; }
  std::size_t size() const { return comp_.size(); }

  const TruncatedSeries& at(const std::vector<int>& idx) const { return comp_[flatten(idx)]; }
  TruncatedSeries& at(const std::vector<int>& idx) { return comp_[flatten(idx)]; }
  const TruncatedSeries& flat(std::size_t i) const { return comp_[i]; }
  TruncatedSeries& flat(std::size_t i) { return comp_[i]; }

  std::vector<int> unflatten(std::size_t flat_idx) const {
    std::vector<int> idx(sig_.size(), 0);
    for (int p = rank() - 1; p >= 0; --p) {
      idx[p] = static_cast<int>(flat_idx % m_);
      flat_idx /= m_;
    }
    return idx;
  }

  friend bool operator==(const TensorSeries& a, const TensorSeries& b) {
    return a.m_ == b.m_ && a.sig_ == b.sig_ && a.comp_ == b.comp_;
  }

 private:
  std::size_t flatten(const std::vector<int>& idx) const {
    if (idx.size() != sig_.size()) fail(ErrorKind::DimensionMismatch, "tensor rank mismatch");
    std::size_t f = 0;
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (idx[p] < 0 || idx[p] >= m_) fail(ErrorKind::DimensionMismatch, "tensor index range");
      f = f * m_ + idx[p];
    }
    return f;
  }

  int m_, order_;
  std::vector<Slot> sig_;
  std::vector<TruncatedSeries> comp_;
};

/** g_{i jbar} = d^2 phi / dz_i dzbar_j; order drops by two. */
inline TensorSeries metric_from_potential(const PotentialJet& jet) {
  const TruncatedSeries& phi = jet.series;
  if (phi.order() < 2) fail(ErrorKind::OrderTooLow, "metric needs a jet of order >= 2");
  TensorSeries g(phi.dim(), phi.order() - 2, {Slot::HolLower, Slot::AntiLower});
  for (int i = 0; i < phi.dim(); ++i) {
    TruncatedSeries di = phi.derivative(i);
    for (int j = 0; j < phi.dim(); ++j) g.at({i, j}) = di.derivative(j, true);
  }
  return g;
}

/** Exact inverse of a constant matrix over the Gaussian rationals. */
inline std::vector<std::vector<GaussianRational>> invert_constant_matrix(
    std::vector<std::vector<GaussianRational>> a) {
  int n = static_cast<int>(a.size());
  std::vector<std::vector<GaussianRational>> inv(n, std::vector<GaussianRational>(n));
  for (int i = 0; i < n; ++i) inv[i][i] = GaussianRational(1);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (!a[r][col].is_zero()) {
        pivot = r;
        break;
      }
    if (pivot < 0) fail(ErrorKind::SingularLeadingTerm, "metric leading term is singular");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    GaussianRational d = a[col][col];
    for (int c = 0; c < n; ++c) {
      a[col][c] = a[col][c] / d;
      inv[col][c] = inv[col][c] / d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero()) continue;
      GaussianRational f = a[r][col];
      for (int c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

/**
 * Inverse metric g^{i jbar}, normalized so that sum_j g^{i jbar} g_{k jbar} =
 * delta_{ik} and sum_i g^{i jbar} g_{i lbar} = delta_{lj}. Computed from the
 * exact inverse of g(0) by a geometric series in the higher-order part.
 */
inline TensorSeries inverse_metric(const TensorSeries& g) {
  int m = g.dim(), n = g.order();
  if (g.signature() != std::vector<Slot>{Slot::HolLower, Slot::AntiLower})
    fail(ErrorKind::UnsupportedSignature, "inverse_metric expects g_{i jbar}");
  // B = g^T as a matrix of series; we need M = B^{-1}, then g^{i jbar} = M[i][j].
  std::vector<std::vector<GaussianRational>> b0(m, std::vector<GaussianRational>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      b0[i][j] = g.at({j, i}).coeff(MultiIndex(m, 0), MultiIndex(m, 0));
  std::vector<std::vector<GaussianRational>> b0inv = invert_constant_matrix(b0);

  // H = B - B0 has no constant term, so (B0 + H)^{-1} = sum_k (-B0^{-1} H)^k B0^{-1}.
  TensorSeries negb0inv_h(m, n, {Slot::HolUpper, Slot::AntiUpper});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      TruncatedSeries acc(m, n);
      for (int k = 0; k < m; ++k) {
        TruncatedSeries h = g.at({j, k}) - TruncatedSeries::constant(m, n, b0[k][j]);
        acc = acc + b0inv[i][k] * h;
      }
      negb0inv_h.at({i, j}) = -acc;
    }

  TensorSeries result(m, n, {Slot::HolUpper, Slot::AntiUpper});
  // power holds (-B0^{-1} H)^k; accumulate sum_k power * B0^{-1}.
  TensorSeries power(m, n, {Slot::HolUpper, Slot::AntiUpper});
  for (int i = 0; i < m; ++i)
    power.at({i, i}) = TruncatedSeries::constant(m, n, GaussianRational(1));
  for (int k = 0; ; ++k) {
    bool nonzero = false;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        TruncatedSeries cell(m, n);
        for (int l = 0; l < m; ++l) cell = cell + power.at({i, l}) * b0inv[l][j];
        result.at({i, j}) = result.at({i, j}) + cell;
        nonzero = nonzero || !power.at({i, j}).is_zero();
      }
    if (!nonzero || k >= n) break;
    TensorSeries next(m, n, {Slot::HolUpper, Slot::AntiUpper});
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        TruncatedSeries cell(m, n);
        for (int l = 0; l < m; ++l) cell = cell + power.at({i, l}) * negb0inv_h.at({l, j});
        next.at({i, j}) = cell;
      }
    power = next;
  }
  return result;
}

/** Gamma^i_{jk} = g^{i lbar} dg_{j lbar}/dz_k; symmetric in (j, k). */
inline TensorSeries christoffel(const TensorSeries& g, const TensorSeries& ginv) {
  int m = g.dim();
  int n = std::min(g.order() - 1, ginv.order());
  TensorSeries gamma(m, n, {Slot::HolUpper, Slot::HolLower, Slot::HolLower});
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l) {
      TruncatedSeries dg = g.at({j, l});
      for (int k = 0; k < m; ++k) {
        TruncatedSeries d = dg.derivative(k);
        for (int i = 0; i < m; ++i)
          gamma.at({i, j, k}) = gamma.at({i, j, k}) + ginv.at({i, l}) * d;
      }
    }
  return gamma;
}

/**
 * R_{i jbar k lbar} = -d^2 g_{i jbar}/dz_k dzbar_l
 *                     + g^{p qbar} (dg_{i qbar}/dz_k)(dg_{p jbar}/dzbar_l).
 */
inline TensorSeries curvature_from_metric(const TensorSeries& g, const TensorSeries& ginv) {
  int m = g.dim();
  int n = std::min(g.order() - 2, ginv.order());
  std::vector<Slot> sig{Slot::HolLower, Slot::AntiLower, Slot::HolLower, Slot::AntiLower};
  TensorSeries r(m, n, sig);
  // dgk[i][q][k] = dg_{i qbar}/dz_k.
  TensorSeries dgk(m, g.order() - 1, {Slot::HolLower, Slot::AntiLower, Slot::HolLower});
  for (int i = 0; i < m; ++i)
    for (int q = 0; q < m; ++q)
      for (int k = 0; k < m; ++k) dgk.at({i, q, k}) = g.at({i, q}).derivative(k);
  // t[q][j][l] = sum_p g^{p qbar} dg_{p jbar}/dzbar_l.
  TensorSeries t(m, std::min(g.order() - 1, ginv.order()),
                 {Slot::AntiUpper, Slot::AntiLower, Slot::AntiLower});
  for (int p = 0; p < m; ++p)
    for (int j = 0; j < m; ++j) {
      TruncatedSeries gpj = g.at({p, j});
      for (int l = 0; l < m; ++l) {
        TruncatedSeries d = gpj.derivative(l, true);
        for (int q = 0; q < m; ++q) t.at({q, j, l}) = t.at({q, j, l}) + ginv.at({p, q}) * d;
      }
    }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      TruncatedSeries gij = g.at({i, j});
      for (int k = 0; k < m; ++k) {
        TruncatedSeries dk = gij.derivative(k);
        for (int l = 0; l < m; ++l) {
          TruncatedSeries sum(m, n);
          for (int q = 0; q < m; ++q) sum = sum + dgk.at({i, q, k}) * t.at({q, j, l});
          r.at({i, j, k, l}) = (-dk.derivative(l, true) + sum).truncated(n);
        }
      }
    }
  return r;
}

/** Shared geometric state derived from one jet. */
struct JetGeometry {
  TensorSeries g, ginv, gamma, curvature;
};

inline JetGeometry jet_geometry(const PotentialJet& jet) {
  TensorSeries g = metric_from_potential(jet);
  TensorSeries ginv = inverse_metric(g);
  TensorSeries gamma = christoffel(g, ginv);
  TensorSeries r = curvature_from_metric(g, ginv);
  return {std::move(g), std::move(ginv), std::move(gamma), std::move(r)};
}

inline TensorSeries curvature_series(const PotentialJet& jet) {
  if (jet.series.order() < 4) fail(ErrorKind::OrderTooLow, "curvature needs order >= 4");
  return jet_geometry(jet).curvature;
}

/**
 * Covariant derivative appending one lower index: bar = false adds T_{...,s}
 * = dT/dz_s - sum over holomorphic lower slots of Gamma^r_{i_t s} T_{..r..};
 * bar = true adds T_{...,sbar} with conj(Gamma) acting on antiholomorphic
 * slots. Upper slots are not supported.
 */
inline TensorSeries covariant_derivative(const TensorSeries& t, const TensorSeries& gamma,
                                         bool bar) {
  int m = t.dim();
  for (Slot s : t.signature())
    if (!is_lower(s))
      fail(ErrorKind::UnsupportedSignature, "covariant derivative of upper slots unsupported");
  int n = std::min(t.order() - 1, gamma.order());
  std::vector<Slot> sig = t.signature();
  sig.push_back(bar ? Slot::AntiLower : Slot::HolLower);
  TensorSeries out(m, n, sig);

  Slot corrected = bar ? Slot::AntiLower : Slot::HolLower;
  std::vector<std::vector<TruncatedSeries>> gam(m, std::vector<TruncatedSeries>(m * m));
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < m; ++j)
      for (int s = 0; s < m; ++s)
        gam[r][j * m + s] = bar ? gamma.at({r, j, s}).conj() : gamma.at({r, j, s});

  for (std::size_t f = 0; f < t.size(); ++f) {
    std::vector<int> idx = t.unflatten(f);
    for (int s = 0; s < m; ++s) {
      TruncatedSeries acc = t.flat(f).derivative(s, bar).truncated(n);
      for (int slot = 0; slot < t.rank(); ++slot) {
        if (t.signature()[slot] != corrected) continue;
        std::vector<int> sub = idx;
        for (int r = 0; r < m; ++r) {
          sub[slot] = r;
          acc = acc - gam[r][idx[slot] * m + s] * t.at(sub);
        }
      }
      idx.push_back(s);
      out.at(idx) = acc;
      idx.pop_back();
    }
  }
  return out;
}

}  // namespace bergman

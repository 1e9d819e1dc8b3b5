#pragma once

// Special functions used by the Franck-Condon formulas: physicists' Hermite, generalized
// Laguerre, associated Legendre, and Hermite polynomials with a symmetric matrix parameter.

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>

#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"
#include "vibrofc/multi_index.hpp"

namespace vibrofc {

/// Physicists' Hermite polynomial H_n(x) by the three-term recurrence
/// H_{k+1} = 2x H_k - 2k H_{k-1}. Works for real and complex x.
template <class T>
T hermite_1d(int n, T x) {
  if (n < 0) throw DomainError("hermite_1d: n must be nonnegative");
  T h_prev = T(1);
  if (n == 0) return h_prev;
  T h = T(2) * x;
  for (int k = 1; k < n; ++k) {
    T next = T(2) * x * h - T(2.0 * k) * h_prev;
    h_prev = h;
    h = next;
  }
  return h;
}

/// Generalized Laguerre polynomial L_n^alpha(x) by forward recurrence
/// (k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}.
inline double laguerre_assoc(int n, double alpha, double x) {
  if (n < 0) throw DomainError("laguerre_assoc: n must be nonnegative");
  double l_prev = 1.0;
  if (n == 0) return l_prev;
  double l = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * l - (k + alpha) * l_prev) / (k + 1.0);
    l_prev = l;
    l = next;
  }
  return l;
}

/// Associated Legendre function P_l^m(x), 0 <= m <= l, |x| <= 1.
///
/// Includes the Condon-Shortley phase (-1)^m, i.e. P_1^1(x) = -sqrt(1-x^2). The Franck-Condon
/// formulas only use squares, so the phase convention does not reach any probability.
inline double legendre_assoc(int l, int m, double x) {
  if (l < 0 || m < 0) throw DomainError("legendre_assoc: l and m must be nonnegative");
  if (m > l) throw DomainError("legendre_assoc: m must not exceed l");
  if (!(std::abs(x) <= 1.0)) throw DomainError("legendre_assoc: |x| must not exceed 1");

  // P_m^m = (-1)^m (2m-1)!! (1-x^2)^{m/2}
  double pmm = 1.0;
  if (m > 0) {
    const double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
    double fact = 1.0;
    for (int i = 1; i <= m; ++i) {
      pmm *= -fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

/// Matrix parameter R (complex symmetric, D x D) and evaluation point y of a
/// multidimensional Hermite polynomial H_v^{R}(y), defined by the generating function
///
///     exp(-1/2 t^T R t + t^T R y) = sum_v  prod_k t_k^{v_k} / v_k!  H_v^{R}(y).
///
/// Only R y enters the recurrence, so the parameter also carries that linear term. It can be
/// built from a point y, or directly from the linear term z = R y when R is singular; in the
/// latter case y is the least-squares solution of R y = z.
class HermiteMatrixParam {
 public:
  HermiteMatrixParam() = default;

  static HermiteMatrixParam from_point(CMatrix r, CVector y) {
    check(r, y.size());
    HermiteMatrixParam p;
    p.linear_ = r * y;
    p.r_ = std::move(r);
    p.y_ = std::move(y);
    return p;
  }

  static HermiteMatrixParam from_linear_term(CMatrix r, CVector z) {
    check(r, z.size());
    HermiteMatrixParam p;
    p.y_ = r.completeOrthogonalDecomposition().solve(z);
    p.r_ = std::move(r);
    p.linear_ = std::move(z);
    return p;
  }

  Eigen::Index dim() const noexcept { return r_.rows(); }
  const CMatrix& r() const noexcept { return r_; }
  const CVector& y() const noexcept { return y_; }
  /// R y, the first-order coefficients of the generating function.
  const CVector& linear_term() const noexcept { return linear_; }

 private:
  static void check(const CMatrix& r, Eigen::Index n) {
    if (r.rows() != r.cols()) throw DomainError("HermiteMatrixParam: R must be square");
    if (r.rows() != n) throw DomainError("HermiteMatrixParam: dimension of y must match R");
    if (!is_symmetric(r, 1e-10)) throw DomainError("HermiteMatrixParam: R must be symmetric");
  }

  CMatrix r_;
  CVector y_;
  CVector linear_;
};

/// Memoized evaluator of H_v^{R}(y) for one fixed parameter. The descent recurrence on index k
/// (smallest k with v_k > 0) is
///
///     H_v = (R y)_k H_{v-e_k} - sum_j R_kj (v-e_k)_j H_{v-e_k-e_j}.
///
/// The j = k term is the R_kk (v_k - 1) H_{v-2e_k} contribution. Every sub-index is cached, so a
/// table shared across many (n, m) pairs of one spectrum pays for each lattice point once.
/// Not thread-safe; use one table per worker.
class HermiteTable {
 public:
  explicit HermiteTable(HermiteMatrixParam param) : param_(std::move(param)) {}

  const HermiteMatrixParam& param() const noexcept { return param_; }
  std::size_t cache_size() const noexcept { return memo_.size(); }

  cplx operator()(const MultiIndex& v) {
    check_dim(v);
    return value(v);
  }

  /// Same polynomial, but the first descent step uses index k instead of the default.
  /// The result is not cached, so the table stays deterministic.
  cplx evaluate_descending(const MultiIndex& v, std::size_t k) {
    check_dim(v);
    if (k >= v.size() || v[k] == 0)
      throw DomainError("evaluate_descending: v_k must be positive");
    return step(v, k);
  }

 private:
  void check_dim(const MultiIndex& v) const {
    if (static_cast<Eigen::Index>(v.size()) != param_.dim())
      throw DomainError("hermite_multidim: index length " + std::to_string(v.size()) +
                        " does not match parameter dimension " + std::to_string(param_.dim()));
  }

  cplx value(const MultiIndex& v) {
    if (v.is_zero()) return cplx(1.0, 0.0);
    if (auto it = memo_.find(v); it != memo_.end()) return it->second;
    std::size_t k = 0;
    while (v[k] == 0) ++k;
    const cplx h = step(v, k);
    memo_.emplace(v, h);
    return h;
  }

  cplx step(const MultiIndex& v, std::size_t k) {
    const auto& r = param_.r();
    MultiIndex w = v;
    w[k] -= 1;
    cplx h = param_.linear_term()(static_cast<Eigen::Index>(k)) * value(w);
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] == 0) continue;
      MultiIndex wj = w;
      wj[j] -= 1;
      h -= r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) * double(w[j]) * value(wj);
    }
    return h;
  }

  HermiteMatrixParam param_;
  std::unordered_map<MultiIndex, cplx, MultiIndexHash> memo_;
};

/// One-shot evaluation of H_v^{R}(y).
inline cplx hermite_multidim(const HermiteMatrixParam& param, const MultiIndex& v) {
  HermiteTable table(param);
  return table(v);
}

}  // namespace vibrofc

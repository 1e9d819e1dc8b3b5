#pragma once

// Brute-force ground truth. Overlaps are integrated pointwise from wavefunction values with a
// tensor Gauss-Hermite rule. The nodes are placed on the product Gaussian of the two states
// (center and covariance), which makes the integrand a polynomial times the quadrature weight,
// so the rule converges as soon as it is exact for that degree.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"
#include "vibrofc/log.hpp"
#include "vibrofc/multi_index.hpp"
#include "vibrofc/polynomials.hpp"
#include "vibrofc/quadratic_state.hpp"
#include "vibrofc/quadrature.hpp"

namespace vibrofc {

enum class QuadratureScheme { gauss_hermite, trapezoid };

struct QuadratureSpec {
  int nodes_per_axis = 64;
  /// Multiplies the matched Gaussian width; 1 places nodes on the product Gaussian exactly.
  double scaling = 1.0;
  QuadratureScheme scheme = QuadratureScheme::gauss_hermite;
};

inline constexpr int kMaxQuadratureDim = 3;

namespace detail {

/// Integrates f(x) against dx over R^N, with x = center + J y and J J^T = 2 scaling^2 Q^{-1}.
template <class F>
cplx integrate_matched(const RMatrix& q, const RVector& lin, const QuadratureSpec& spec, F&& f) {
  const int n = static_cast<int>(q.rows());
  if (n > kMaxQuadratureDim)
    throw UnsupportedDimensionError("quadrature oracle supports at most " +
                                    std::to_string(kMaxQuadratureDim) + " modes, got " +
                                    std::to_string(n));
  if (spec.nodes_per_axis < 1 || !(spec.scaling > 0.0))
    throw DomainError("QuadratureSpec: need nodes_per_axis >= 1 and scaling > 0");
  Eigen::LLT<RMatrix> llt(q);
  if (llt.info() != Eigen::Success)
    throw DegenerateConfigurationError("quadrature oracle: Gaussian precision not positive definite");
  const RVector center = llt.solve(lin);
  const RMatrix jac = std::sqrt(2.0) * spec.scaling * RMatrix(llt.matrixU()).inverse();
  const double det_j = std::abs(jac.determinant());

  QuadratureRule rule;
  if (spec.scheme == QuadratureScheme::gauss_hermite) {
    rule = gauss_hermite(spec.nodes_per_axis);
    for (std::size_t i = 0; i < rule.size(); ++i)
      rule.weights[i] *= std::exp(rule.nodes[i] * rule.nodes[i]);
  } else {
    const int m = std::max(spec.nodes_per_axis, 2);
    const double half_width = 10.0;
    const double h = 2.0 * half_width / (m - 1);
    rule.nodes.resize(m);
    rule.weights.assign(m, h);
    for (int i = 0; i < m; ++i) rule.nodes[i] = -half_width + h * i;
    rule.weights.front() *= 0.5;
    rule.weights.back() *= 0.5;
  }

  cplx acc(0.0, 0.0);
  for_each_tensor_node(rule, n, [&](const RVector& y, double w) {
    acc += w * f(RVector(center + jac * y));
  });
  return acc * det_j;
}

inline void warn_if_not_normalized(const QuadraticState& s, const QuadratureSpec& spec,
                                   const char* label) {
  const cplx norm = integrate_matched(2.0 * s.sigma(), 2.0 * s.varpi(), spec, [&](const RVector& x) {
    return cplx(std::norm(wavefunction_eval(s, x)), 0.0);
  });
  if (std::abs(norm.real() - 1.0) > 1e-8)
    logger().warn("overlap_quadrature: state {} has norm {:.12f}", label, norm.real());
}

}  // namespace detail

/// |<a|b>|^2 = |int conj(psi_a) psi_b d^N x|^2 by tensor quadrature (N <= 3).
inline double overlap_quadrature(const QuadraticState& a, const QuadraticState& b,
                                 const QuadratureSpec& spec = {}) {
  if (a.dim() != b.dim()) throw DomainError("overlap_quadrature: dimension mismatch");
  if (a.dim() > kMaxQuadratureDim)
    throw UnsupportedDimensionError("overlap_quadrature: N > 3 is not supported");
  detail::warn_if_not_normalized(a, spec, "a");
  detail::warn_if_not_normalized(b, spec, "b");
  const cplx ov = detail::integrate_matched(
      a.sigma() + b.sigma(), a.varpi() + b.varpi(), spec,
      [&](const RVector& x) { return std::conj(wavefunction_eval(a, x)) * wavefunction_eval(b, x); });
  return std::norm(ov);
}

/// Overload for a final-surface state seen through q' = Lambda q + gamma. The final wavefunction
/// is evaluated at Lambda x + gamma directly (times sqrt|det Lambda|), without going through
/// apply_dushinsky.
inline double overlap_quadrature(const QuadraticState& initial, const QuadraticState& final_state,
                                 const DushinskyTransform& t, const QuadratureSpec& spec = {}) {
  const int n = initial.dim();
  if (final_state.dim() != n || t.dim() != n)
    throw DomainError("overlap_quadrature: dimension mismatch");
  if (n > kMaxQuadratureDim)
    throw UnsupportedDimensionError("overlap_quadrature: N > 3 is not supported");
  detail::warn_if_not_normalized(initial, spec, "initial");
  detail::warn_if_not_normalized(final_state, spec, "final");
  const RMatrix& lam = t.lambda();
  const double jac = std::sqrt(std::abs(lam.determinant()));
  const RMatrix q = initial.sigma() + lam.transpose() * final_state.sigma() * lam;
  const RVector lin = initial.varpi() +
                      lam.transpose() * (final_state.varpi() - final_state.sigma() * t.gamma());
  const cplx ov = detail::integrate_matched(0.5 * (q + q.transpose()), lin, spec, [&](const RVector& x) {
    const RVector xp = lam * x + t.gamma();
    return std::conj(wavefunction_eval(initial, x)) * jac * wavefunction_eval(final_state, xp);
  });
  return std::norm(ov);
}

/// Inputs of the Gaussian integral identity for two matrix-parameter Hermite polynomials:
///   int H_n^{S}(x) H_m^{T}(Lambda x + gamma) exp(-x^T M x + c^T x) dx
///     = pi^{N/2} det(M)^{-1/2} exp(c^T M^{-1} c / 4) H_{nm}^{R}(y).
struct HermiteIdentityCase {
  RMatrix s, t, lambda, m;
  RVector gamma, c;
  MultiIndex n_index, m_index;
};

struct HermiteIdentityResult {
  cplx quadrature;
  cplx closed_form;
  double residual;
};

/// R blocks and linear term of the identity's right-hand side.
inline HermiteMatrixParam hermite_identity_param(const HermiteIdentityCase& k) {
  const int n = static_cast<int>(k.m.rows());
  Eigen::LLT<RMatrix> llt(k.m);
  if (llt.info() != Eigen::Success)
    throw DomainError("hermite_identity: M must be positive definite");
  const RMatrix m_inv = llt.solve(RMatrix::Identity(n, n));
  RMatrix r(2 * n, 2 * n);
  const RMatrix r11 = k.s - 0.5 * k.s * m_inv * k.s;
  const RMatrix r22 = k.t - 0.5 * k.t * k.lambda * m_inv * k.lambda.transpose() * k.t;
  const RMatrix r21 = -0.5 * k.t * k.lambda * m_inv * k.s;
  r << r11, r21.transpose(), r21, r22;
  RVector z(2 * n);
  z << 0.5 * k.s * m_inv * k.c, 0.5 * k.t * k.lambda * m_inv * k.c + k.t * k.gamma;
  return HermiteMatrixParam::from_linear_term(r.cast<cplx>(), z.cast<cplx>());
}

/// Evaluates both sides of the identity (left by quadrature, right in closed form) and returns
/// the relative residual. N <= 2.
inline HermiteIdentityResult hermite_identity_check(const HermiteIdentityCase& k, int nodes = 0) {
  const int n = static_cast<int>(k.m.rows());
  if (n < 1 || n > 2) throw UnsupportedDimensionError("hermite_identity_check: N must be 1 or 2");
  require_square(k.s, n, "S");
  require_square(k.t, n, "T");
  require_square(k.lambda, n, "Lambda");
  require_length(k.gamma, n, "gamma");
  require_length(k.c, n, "c");
  if (static_cast<int>(k.n_index.size()) != n || static_cast<int>(k.m_index.size()) != n)
    throw DomainError("hermite_identity_check: index length mismatch");

  Eigen::LLT<RMatrix> llt(k.m);
  if (llt.info() != Eigen::Success)
    throw DomainError("hermite_identity_check: M must be positive definite");
  const double det_m = k.m.determinant();
  const double quad_exp = 0.25 * k.c.dot(llt.solve(k.c));

  const int degree = k.n_index.total() + k.m_index.total();
  if (nodes <= 0) nodes = degree / 2 + 8;

  // exp(-x^T M x + c^T x) = exp(c M^{-1} c / 4) exp(-y^T y) with x = M^{-1} c / 2 + L^{-T} y.
  const RVector center = 0.5 * llt.solve(k.c);
  const RMatrix l_inv_t = RMatrix(llt.matrixU()).inverse();
  const CMatrix s_c = k.s.cast<cplx>(), t_c = k.t.cast<cplx>();
  auto lhs_with = [&](int count) {
    cplx acc(0.0, 0.0);
    for_each_tensor_node(gauss_hermite(count), n, [&](const RVector& y, double w) {
      const RVector x = center + l_inv_t * y;
      const RVector xp = k.lambda * x + k.gamma;
      const cplx hs = hermite_multidim(HermiteMatrixParam::from_point(s_c, x.cast<cplx>()), k.n_index);
      const cplx ht = hermite_multidim(HermiteMatrixParam::from_point(t_c, xp.cast<cplx>()), k.m_index);
      acc += w * hs * ht;
    });
    return acc * std::exp(quad_exp) / std::sqrt(det_m);
  };
  const cplx lhs = lhs_with(nodes);
  const cplx lhs_check = lhs_with(nodes + 8);
  const double scale = std::max({std::abs(lhs), std::abs(lhs_check), 1e-300});
  if (std::abs(lhs - lhs_check) > 1e-10 * scale)
    throw AccuracyError("hermite_identity_check: quadrature did not converge", lhs.real(),
                        {std::abs(lhs - lhs_check) / scale});

  const cplx h = hermite_multidim(hermite_identity_param(k), k.n_index.concat(k.m_index));
  const cplx rhs = std::pow(kPi, 0.5 * n) / std::sqrt(det_m) * std::exp(quad_exp) * h;
  const double denom = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
  return {lhs, rhs, std::abs(lhs - rhs) / denom};
}

/// 1 - sum_{|m| <= cutoff} P(m), summed in graded lexicographic order. `engine` maps a final
/// MultiIndex to a probability; the initial state is bound inside it.
template <class Engine>
double sum_rule(int n_modes, Engine&& engine, int cutoff) {
  if (cutoff < 0) throw DomainError("sum_rule: cutoff must be nonnegative");
  double total = 0.0;
  for (const MultiIndex& m : enumerate_multi_indices(n_modes, cutoff)) total += engine(m);
  return 1.0 - total;
}

/// Deficits for every cutoff 0..max_cutoff, sharing the engine calls.
template <class Engine>
std::vector<double> sum_rule_profile(int n_modes, Engine&& engine, int max_cutoff) {
  if (max_cutoff < 0) throw DomainError("sum_rule_profile: cutoff must be nonnegative");
  std::vector<double> deficits;
  double total = 0.0;
  int shell = 0;
  for (const MultiIndex& m : enumerate_multi_indices(n_modes, max_cutoff)) {
    while (m.total() > shell) {
      deficits.push_back(1.0 - total);
      ++shell;
    }
    total += engine(m);
  }
  deficits.push_back(1.0 - total);
  return deficits;
}

}  // namespace vibrofc

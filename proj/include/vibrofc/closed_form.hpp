#pragma once

// Closed-form Franck-Condon probabilities.
//
//  * fc_shift_1d / fc_schwinger: pure displacement, Laguerre form.
//  * fc_freq_1d: pure frequency change, associated-Legendre form in zeta = sqrt(w w')/((w+w')/2).
//  * fc_general: arbitrary Duschinsky transform, via one 2N-dimensional Hermite polynomial.
//
// General case. Write both states in Gaussian-Hermite form (see quadratic_state.hpp) and
// expand prod_k H_{n_k}((Bx+b)_k) through its generating function exp(-t^T t + 2 t^T (Bx+b)).
// The overlap integral is then Gaussian in x, and collecting powers of (t, u) gives
//
//   <a|b> = C_a C_b (2 pi)^{N/2} det(Q)^{-1/2} exp(E) H_{(n,m)}^{R}(y),
//   Q = sigma_a + sigma_b,     L = varpi_a + varpi_b,     W = [B_a; B_b]   (2N x N),
//   R = 2 I - 4 W Q^{-1} W^T,  R y = 2 (b_a; b_b) + 2 W Q^{-1} L,
//   E = 1/2 L^T Q^{-1} L + conj(phi_a) + phi_b.
//
// With b = final state after x -> Lambda x + gamma this is Q = sigma + Lambda^T sigma~ Lambda,
// L = varpi + Lambda^T varpi~ - Lambda^T sigma~ gamma and
// E = 1/2 L^T Q^{-1} L - 1/2 gamma^T sigma~ gamma + varpi~^T gamma + phi + phi~, and squaring
// gives the prefactor 2^N / (2^{|n|+|m|} n! m! |det Q|).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"
#include "vibrofc/log.hpp"
#include "vibrofc/multi_index.hpp"
#include "vibrofc/polynomials.hpp"
#include "vibrofc/quadratic_state.hpp"

namespace vibrofc {

inline constexpr double kProbabilitySlack = 1e-12;

namespace detail {
inline std::atomic<long>& clamp_counter() {
  static std::atomic<long> count{0};
  return count;
}
}  // namespace detail

/// Number of probabilities clamped into [0, 1] since start (or the last reset).
inline long clamped_probability_count() { return detail::clamp_counter().load(); }
inline void reset_clamped_probability_count() { detail::clamp_counter().store(0); }

/// Values within 1e-12 outside [0, 1] are clamped and counted; anything further out means the
/// evaluation lost accuracy and is reported as an error.
inline double clamp_probability(double p, const char* where) {
  if (!(p >= -kProbabilitySlack && p <= 1.0 + kProbabilitySlack))
    throw AccuracyError(std::string(where) + ": probability " + std::to_string(p) +
                            " outside [0, 1]",
                        p);
  if (p < 0.0 || p > 1.0) {
    detail::clamp_counter().fetch_add(1);
    logger().debug("{}: clamped probability {:.3e}", where, p);
    return p < 0.0 ? 0.0 : 1.0;
  }
  return p;
}

/// Schwinger's displaced-oscillator probability with |kappa|^2 = kappa_sq:
/// (n<!/n>!) exp(-k) k^{|m-n|} [L_{n<}^{|m-n|}(k)]^2, evaluated in log space.
inline double fc_schwinger(int n, int m, double kappa_sq) {
  if (n < 0 || m < 0) throw DomainError("fc_schwinger: quantum numbers must be nonnegative");
  if (!(kappa_sq >= 0.0)) throw DomainError("fc_schwinger: kappa_sq must be nonnegative");
  const int lo = std::min(n, m), hi = std::max(n, m), d = hi - lo;
  if (kappa_sq == 0.0) return n == m ? 1.0 : 0.0;
  const double lag = laguerre_assoc(lo, d, kappa_sq);
  if (lag == 0.0) return 0.0;
  const double log_p = std::lgamma(lo + 1.0) - std::lgamma(hi + 1.0) + d * std::log(kappa_sq) -
                       kappa_sq + 2.0 * std::log(std::abs(lag));
  return clamp_probability(std::exp(log_p), "fc_schwinger");
}

/// Equilibrium shift gamma (unit frequency, dimensionless): Schwinger with |kappa|^2 = gamma^2/2.
inline double fc_shift_1d(int n, int m, double gamma) {
  return fc_schwinger(n, m, 0.5 * gamma * gamma);
}

/// zeta = sqrt(w_i w_f) / ((w_i + w_f)/2), the 0-0 probability of a pure frequency change.
inline double frequency_zeta(double omega_i, double omega_f) {
  if (!(omega_i > 0.0) || !(omega_f > 0.0))
    throw DomainError("fc_freq_1d: frequencies must be positive");
  return std::min(1.0, std::sqrt(omega_i * omega_f) / (0.5 * (omega_i + omega_f)));
}

/// Frequency change omega_i -> omega_f at fixed equilibrium:
/// P_nm = (n<!)^2 / (n! m!) zeta [P_{(n+m)/2}^{|m-n|/2}(zeta)]^2 for n+m even, 0 otherwise.
/// For n = m this is zeta [P_n(zeta)]^2.
inline double fc_freq_1d(int n, int m, double omega_i, double omega_f) {
  if (n < 0 || m < 0) throw DomainError("fc_freq_1d: quantum numbers must be nonnegative");
  const double zeta = frequency_zeta(omega_i, omega_f);
  if ((n + m) % 2 != 0) return 0.0;
  const int lo = std::min(n, m);
  const double leg = legendre_assoc((n + m) / 2, std::abs(m - n) / 2, zeta);
  if (leg == 0.0) return 0.0;
  const double log_p = 2.0 * std::lgamma(lo + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m + 1.0) +
                       std::log(zeta) + 2.0 * std::log(std::abs(leg));
  return clamp_probability(std::exp(log_p), "fc_freq_1d");
}

/// The 2N-dimensional Hermite problem for one pair of surfaces. Independent of the quanta, so
/// one system (and one HermiteTable) serves every (n, m) pair of a spectrum.
class FcBlockSystem {
 public:
  FcBlockSystem(int n_modes, HermiteMatrixParam r, cplx prefactor_log, double log_abs_det_q)
      : n_modes_(n_modes), r_(std::move(r)), prefactor_log_(prefactor_log),
        log_abs_det_q_(log_abs_det_q) {}

  int n_modes() const noexcept { return n_modes_; }
  const HermiteMatrixParam& r() const noexcept { return r_; }
  /// E = 1/2 L^T Q^{-1} L + conj(phi_a) + phi_b.
  cplx prefactor_log() const noexcept { return prefactor_log_; }
  double log_abs_det_q() const noexcept { return log_abs_det_q_; }

  CMatrix r11() const { return r_.r().topLeftCorner(n_modes_, n_modes_); }
  CMatrix r12() const { return r_.r().topRightCorner(n_modes_, n_modes_); }
  CMatrix r21() const { return r_.r().bottomLeftCorner(n_modes_, n_modes_); }
  CMatrix r22() const { return r_.r().bottomRightCorner(n_modes_, n_modes_); }

  HermiteTable make_table() const { return HermiteTable(r_); }

  /// ln P_{nm}; -inf when the Hermite value vanishes.
  double log_probability(const MultiIndex& n, const MultiIndex& m, HermiteTable& table) const {
    if (static_cast<int>(n.size()) != n_modes_ || static_cast<int>(m.size()) != n_modes_)
      throw DomainError("FcBlockSystem: quanta length must equal the mode count");
    const cplx h = table(n.concat(m));
    double log_p = (n_modes_ - n.total() - m.total()) * std::log(2.0) - log_abs_det_q_ +
                   2.0 * prefactor_log_.real();
    for (int v : n) log_p -= std::lgamma(v + 1.0);
    for (int v : m) log_p -= std::lgamma(v + 1.0);
    return log_p + 2.0 * std::log(std::abs(h));
  }

  double probability(const MultiIndex& n, const MultiIndex& m, HermiteTable& table) const {
    const double log_p = log_probability(n, m, table);
    if (std::isinf(log_p) && log_p < 0) return 0.0;
    return clamp_probability(std::exp(log_p), "fc_general");
  }

 private:
  int n_modes_;
  HermiteMatrixParam r_;
  cplx prefactor_log_;
  double log_abs_det_q_;
};

/// Assembles R, y and the exponent for the overlap of a (initial) with b (final state already
/// carried through the Duschinsky transform, see apply_dushinsky).
inline FcBlockSystem build_fc_block_system(const QuadraticState& a, const QuadraticState& b) {
  const int n = a.dim();
  if (b.dim() != n) throw DomainError("build_fc_block_system: dimension mismatch");
  const RMatrix q = a.sigma() + b.sigma();
  Eigen::LLT<RMatrix> llt(q);
  const double min_eig = min_eigenvalue(q);
  if (llt.info() != Eigen::Success || !(min_eig > kSingularTolerance))
    throw DegenerateConfigurationError(
        "build_fc_block_system: sigma + Lambda^T sigma~ Lambda is singular");
  const RVector lin = a.varpi() + b.varpi();

  RMatrix w(2 * n, n);
  w << a.scale(), b.scale();
  RVector off(2 * n);
  off << a.shift(), b.shift();

  const RMatrix q_inv_wt = llt.solve(w.transpose());  // Q^{-1} W^T
  const RVector q_inv_l = llt.solve(lin);
  RMatrix r = 2.0 * RMatrix::Identity(2 * n, 2 * n) - 4.0 * w * q_inv_wt;
  r = 0.5 * (r + r.transpose());
  const RVector z = 2.0 * off + 2.0 * w * q_inv_l;

  const cplx e = 0.5 * lin.dot(q_inv_l) + std::conj(a.phase()) + b.phase();
  const double log_det_q = 2.0 * RMatrix(llt.matrixL()).diagonal().array().log().sum();
  return FcBlockSystem(n, HermiteMatrixParam::from_linear_term(r.cast<cplx>(), z.cast<cplx>()), e,
                       log_det_q);
}

/// |<a|b>|^2 for two states in Gaussian-Hermite form.
inline double fc_overlap_probability(const QuadraticState& a, const QuadraticState& b) {
  const FcBlockSystem sys = build_fc_block_system(a, b);
  HermiteTable table = sys.make_table();
  return sys.probability(a.quanta(), b.quanta(), table);
}

/// P_{nm} for initial state |n> and final-surface state |m> (its sigma~, varpi~, phi~, quanta)
/// after the Duschinsky transform q' = Lambda q + gamma.
inline double fc_general(const QuadraticState& initial, const DushinskyTransform& transform,
                         const QuadraticState& final_state) {
  if (transform.dim() != initial.dim() || final_state.dim() != initial.dim())
    throw DomainError("fc_general: dimension mismatch");
  return fc_overlap_probability(initial, apply_dushinsky(final_state, transform));
}

}  // namespace vibrofc

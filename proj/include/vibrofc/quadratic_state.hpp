#pragma once

// Harmonic eigenstates of an N-mode quadratic Hamiltonian in Gaussian-Hermite form
//
//     psi(x) = C_n exp(-1/2 x^T sigma x + varpi^T x + phi) prod_k H_{n_k}((B x + b)_k),
//     C_n    = pi^{-N/4} (2^{|n|} prod_k n_k!)^{-1/2},
//
// with hbar = 1, unit masses and dimensionless normal coordinates. For an eigenstate with
// frequencies omega the Hermite argument map is B = diag(sqrt(omega)) and b = 0. A Duschinsky
// transform x -> Lambda x + gamma keeps this form (B picks up Lambda, b picks up gamma), which is
// what lets one closed-form overlap routine cover every case.

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"
#include "vibrofc/multi_index.hpp"
#include "vibrofc/polynomials.hpp"
#include "vibrofc/quadrature.hpp"

namespace vibrofc {

class QuadraticState {
 public:
  QuadraticState(RMatrix sigma, RVector varpi, cplx phase, MultiIndex quanta, RMatrix scale,
                 RVector shift)
      : sigma_(std::move(sigma)),
        varpi_(std::move(varpi)),
        phase_(phase),
        quanta_(std::move(quanta)),
        scale_(std::move(scale)),
        shift_(std::move(shift)) {
    const Eigen::Index n = sigma_.rows();
    if (n < 1) throw DomainError("QuadraticState: dimension must be positive");
    require_square(sigma_, n, "QuadraticState sigma");
    require_length(varpi_, n, "QuadraticState varpi");
    require_square(scale_, n, "QuadraticState scale");
    require_length(shift_, n, "QuadraticState shift");
    if (static_cast<Eigen::Index>(quanta_.size()) != n)
      throw DomainError("QuadraticState: quanta length must equal the mode count");
    if (!is_symmetric(sigma_)) throw DomainError("QuadraticState: sigma must be symmetric");
    if (min_eigenvalue(sigma_) <= kSingularTolerance)
      throw DomainError("QuadraticState: sigma must be positive definite");
  }

  int dim() const noexcept { return static_cast<int>(sigma_.rows()); }
  const RMatrix& sigma() const noexcept { return sigma_; }
  const RVector& varpi() const noexcept { return varpi_; }
  cplx phase() const noexcept { return phase_; }
  const MultiIndex& quanta() const noexcept { return quanta_; }
  /// Hermite argument map B (diag(sqrt(omega)) for an uncoupled eigenstate).
  const RMatrix& scale() const noexcept { return scale_; }
  /// Hermite argument offset b.
  const RVector& shift() const noexcept { return shift_; }

  /// Same surface, different quanta. The phase is kept, which is correct for eigenstate-form
  /// states (their normalization does not depend on the quanta).
  QuadraticState with_quanta(MultiIndex quanta) const {
    return QuadraticState(sigma_, varpi_, phase_, std::move(quanta), scale_, shift_);
  }
  QuadraticState with_phase(cplx phase) const {
    return QuadraticState(sigma_, varpi_, phase, quanta_, scale_, shift_);
  }

  /// Center of the Gaussian envelope, sigma^{-1} varpi.
  RVector center() const { return sigma_.llt().solve(varpi_); }

 private:
  RMatrix sigma_;
  RVector varpi_;
  cplx phase_;
  MultiIndex quanta_;
  RMatrix scale_;
  RVector shift_;
};

class DushinskyTransform {
 public:
  DushinskyTransform(RMatrix lambda, RVector gamma) : lambda_(std::move(lambda)), gamma_(std::move(gamma)) {
    const Eigen::Index n = lambda_.rows();
    if (n < 1) throw DomainError("DushinskyTransform: dimension must be positive");
    require_square(lambda_, n, "DushinskyTransform lambda");
    require_length(gamma_, n, "DushinskyTransform gamma");
    if (!(std::abs(lambda_.determinant()) > kSingularTolerance))
      throw DomainError("DushinskyTransform: lambda is singular");
  }

  static DushinskyTransform identity(int n) {
    return DushinskyTransform(RMatrix::Identity(n, n), RVector::Zero(n));
  }

  int dim() const noexcept { return static_cast<int>(lambda_.rows()); }
  const RMatrix& lambda() const noexcept { return lambda_; }
  const RVector& gamma() const noexcept { return gamma_; }

 private:
  RMatrix lambda_;
  RVector gamma_;
};

/// (quadratic, linear, constant) coefficients of the exponent -1/2 x^T Q x + L^T x + c.
struct GaussianExponent {
  RMatrix quadratic;
  RVector linear;
  cplx constant;
};

inline GaussianExponent exponent_form(const QuadraticState& s) {
  return {s.sigma(), s.varpi(), s.phase()};
}

/// log C_n = -(N/4) log(pi) - 1/2 (|n| log 2 + sum_k log n_k!).
inline double log_normalization(const MultiIndex& quanta) {
  double acc = -0.25 * static_cast<double>(quanta.size()) * std::log(kPi);
  for (int n : quanta) acc -= 0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0));
  return acc;
}

/// Uncoupled eigenstate: sigma = diag(omega), varpi = 0, B = diag(sqrt(omega)), normalized.
inline QuadraticState mode_eigenstate(const RVector& frequencies, const MultiIndex& quanta) {
  const Eigen::Index n = frequencies.size();
  if (n < 1) throw DomainError("mode_eigenstate: need at least one mode");
  for (Eigen::Index k = 0; k < n; ++k)
    if (!(frequencies(k) > 0.0))
      throw DomainError("mode_eigenstate: frequency " + std::to_string(k) + " must be positive");
  if (static_cast<Eigen::Index>(quanta.size()) != n)
    throw DomainError("mode_eigenstate: quanta length must equal the number of frequencies");
  const double phase = 0.25 * frequencies.array().log().sum();
  return QuadraticState(frequencies.asDiagonal(), RVector::Zero(n), cplx(phase, 0.0), quanta,
                        frequencies.array().sqrt().matrix().asDiagonal(), RVector::Zero(n));
}

/// Eigenstate of a coupled quadratic Hamiltonian with symmetric positive-definite sigma.
/// sigma = V diag(d) V^T is diagonalized first; quanta label the normal modes in ascending
/// order of d, and the Hermite arguments are diag(sqrt(d)) V^T x.
inline QuadraticState eigenstate(const RMatrix& sigma, const MultiIndex& quanta) {
  const Eigen::Index n = sigma.rows();
  require_square(sigma, n, "eigenstate sigma");
  if (!is_symmetric(sigma)) throw DomainError("eigenstate: sigma must be symmetric");
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sigma);
  const RVector d = es.eigenvalues();
  if (d.minCoeff() <= kSingularTolerance)
    throw DomainError("eigenstate: sigma must be positive definite");
  const RMatrix b = d.array().sqrt().matrix().asDiagonal() * es.eigenvectors().transpose();
  const double phase = 0.25 * d.array().log().sum();
  return QuadraticState(0.5 * (sigma + sigma.transpose()), RVector::Zero(n), cplx(phase, 0.0),
                        quanta, b, RVector::Zero(n));
}

/// prod_k H_{n_k}((B x + b)_k), for real or complex x (complex x is the analytic continuation).
template <class Vec>
cplx hermite_product(const QuadraticState& s, const Vec& x) {
  const CVector arg = s.scale().template cast<cplx>() * x.template cast<cplx>() +
                      s.shift().template cast<cplx>();
  cplx acc(1.0, 0.0);
  for (int k = 0; k < s.dim(); ++k) acc *= hermite_1d<cplx>(s.quanta()[k], arg(k));
  return acc;
}

inline cplx wavefunction_eval(const QuadraticState& s, const RVector& x) {
  if (x.size() != s.dim()) throw DomainError("wavefunction_eval: dimension mismatch");
  const cplx exponent = -0.5 * x.dot(s.sigma() * x) + s.varpi().dot(x) + s.phase() +
                        log_normalization(s.quanta());
  return std::exp(exponent) * hermite_product(s, x);
}

/// Sets Re(phi) so that the state has unit norm; Im(phi) is kept.
///
/// Re(phi) = 1/4 ln det sigma - 1/2 varpi^T sigma^{-1} varpi - 1/2 ln h, where h is the
/// Gaussian-weighted mean of prod H^2 / (2^{|n|} prod n!). h = 1 for eigenstate-form states and
/// always for the ground state; otherwise it is evaluated by Gauss-Hermite quadrature, which is
/// exact here because the integrand is a polynomial times the matched Gaussian.
inline QuadraticState normalize_phase(const QuadraticState& s) {
  Eigen::LLT<RMatrix> llt(s.sigma());
  if (llt.info() != Eigen::Success) throw DomainError("normalize_phase: sigma is singular");
  const RVector mu = llt.solve(s.varpi());
  const double log_det = 2.0 * RMatrix(llt.matrixL()).diagonal().array().log().sum();
  double re_phase = 0.25 * log_det - 0.5 * s.varpi().dot(mu);

  if (!s.quanta().is_zero()) {
    const int n = s.dim();
    const RMatrix l_inv_t = RMatrix(llt.matrixU()).inverse();  // (L^T)^{-1}
    const QuadratureRule rule = gauss_hermite(s.quanta().total() + 1);
    double mean = 0.0;
    for_each_tensor_node(rule, n, [&](const RVector& y, double w) {
      const RVector x = mu + l_inv_t * y;
      mean += w * std::norm(hermite_product(s, x));
    });
    mean /= std::pow(std::sqrt(kPi), n);
    const double log_h = std::log(mean) + 2.0 * (log_normalization(s.quanta()) +
                                                 0.25 * n * std::log(kPi));
    re_phase -= 0.5 * log_h;
  }
  return s.with_phase(cplx(re_phase, s.phase().imag()));
}

/// The state x -> sqrt|det Lambda| psi(Lambda x + gamma).
///
/// The composite exponent -1/2 (Lx+g)^T sigma (Lx+g) + varpi^T (Lx+g) + phi is returned in
/// canonical form: sigma' = L^T sigma L, varpi' = L^T (varpi - sigma g),
/// phi' = phi - 1/2 g^T sigma g + varpi^T g + 1/2 ln|det L|. The Jacobian factor keeps the
/// result normalized in x; it is 1 for orthogonal mode mixing.
inline QuadraticState apply_dushinsky(const QuadraticState& s, const DushinskyTransform& t) {
  if (t.dim() != s.dim()) throw DomainError("apply_dushinsky: dimension mismatch");
  const RMatrix& lam = t.lambda();
  const RVector& g = t.gamma();
  RMatrix sigma = lam.transpose() * s.sigma() * lam;
  sigma = 0.5 * (sigma + sigma.transpose());
  const RVector varpi = lam.transpose() * (s.varpi() - s.sigma() * g);
  const cplx phase = s.phase() - 0.5 * g.dot(s.sigma() * g) + s.varpi().dot(g) +
                     0.5 * std::log(std::abs(lam.determinant()));
  return QuadraticState(std::move(sigma), varpi, phase, s.quanta(), s.scale() * lam,
                        s.scale() * g + s.shift());
}

}  // namespace vibrofc

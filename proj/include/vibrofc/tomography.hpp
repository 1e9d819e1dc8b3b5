#pragma once

// Phase-space routes to transition probabilities (hbar = 1).
//
//   W(q, p)      = int exp(-i p xi) psi(q + xi/2) conj(psi(q - xi/2)) dxi        (no 1/2pi)
//   P            = (2 pi)^{-N} int W_a W_b dq dp
//   w(X, mu, nu) = (2 pi)^{-1} int W(q, p) delta(X - mu q - nu p) dq dp
//                = (2 pi |nu|)^{-1} |int psi(y) exp(i mu y^2 / (2 nu) - i X y / nu) dy|^2
//   P            = (2 pi)^{-1} int w_a(X, mu, nu) w_b(Y, -mu, -nu) exp(i (X + Y)) dX dY dmu dnu
//
// The last integral is not absolutely convergent. tomographic_overlap regularizes it with
// exp(-eps r) in the polar radius r = |(mu, nu)|, does the r integral in closed form using
// w(lX, l mu, l nu) = w(X, mu, nu) / |l|, and extrapolates eps -> 0 (Richardson).
//
// Sign pairing: exp(i(X + Y)) with w_b at (-mu, -nu) reproduces |<a|b>|^2. The alternative
// exp(i(X - Y)) converges too, but to |<a|Pi b>|^2 with Pi the parity operator; the two agree
// only when one of the states is parity-symmetric (see TomographicPairing).

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"
#include "vibrofc/log.hpp"
#include "vibrofc/multi_index.hpp"
#include "vibrofc/polynomials.hpp"
#include "vibrofc/quadratic_state.hpp"
#include "vibrofc/quadrature.hpp"

namespace vibrofc {

// ---------------------------------------------------------------------------------------------
// Wigner function

/// W(q, p) of a pure state in Gaussian-Hermite form.
///
/// The xi integrand is exp(-xi^T sigma xi / 4 - i p^T xi) times a polynomial. Shifting the contour
/// to xi = eta - 2i sigma^{-1} p removes the oscillation, leaving a Gaussian times a polynomial
/// that Gauss-Hermite integrates exactly with |n| + 2 nodes per axis.
inline double wigner_eval(const QuadraticState& s, const RVector& q, const RVector& p) {
  const int n = s.dim();
  if (q.size() != n || p.size() != n) throw DomainError("wigner_eval: dimension mismatch");
  Eigen::LLT<RMatrix> llt(s.sigma());
  const RVector sinv_p = llt.solve(p);
  const RMatrix eta_map = 2.0 * RMatrix(llt.matrixU()).inverse();  // 2 L^{-T}
  const double log_det = 2.0 * RMatrix(llt.matrixL()).diagonal().array().log().sum();

  const double envelope = -q.dot(s.sigma() * q) + 2.0 * s.varpi().dot(q) + 2.0 * s.phase().real() -
                          p.dot(sinv_p) + 2.0 * log_normalization(s.quanta()) +
                          n * std::log(2.0) - 0.5 * log_det;

  const QuadratureRule rule = gauss_hermite(s.quanta().total() + 2);
  const CVector shift = cplx(0.0, -2.0) * sinv_p.cast<cplx>();
  const CVector qc = q.cast<cplx>();
  cplx acc(0.0, 0.0);
  for_each_tensor_node(rule, n, [&](const RVector& y, double w) {
    const CVector xi = (eta_map * y).cast<cplx>() + shift;
    acc += w * hermite_product(s, CVector(qc + 0.5 * xi)) * hermite_product(s, CVector(qc - 0.5 * xi));
  });
  return std::exp(envelope) * acc.real();
}

inline double wigner_eval(const QuadraticState& s, double q, double p) {
  RVector qv(1), pv(1);
  qv << q;
  pv << p;
  return wigner_eval(s, qv, pv);
}

/// Wigner values of a one-mode state on a uniform (q, p) grid. values(i, j) = W(q_i, p_j).
struct PhaseSpaceGrid {
  RVector q_axis;
  RVector p_axis;
  RMatrix values;

  double dq() const { return q_axis(1) - q_axis(0); }
  double dp() const { return p_axis(1) - p_axis(0); }
};

inline PhaseSpaceGrid wigner_grid(const QuadraticState& s, const RVector& q_axis,
                                  const RVector& p_axis) {
  if (s.dim() != 1) throw UnsupportedDimensionError("wigner_grid: one-mode states only");
  if (q_axis.size() < 2 || p_axis.size() < 2)
    throw DomainError("wigner_grid: each axis needs at least two points");
  PhaseSpaceGrid g{q_axis, p_axis, RMatrix(q_axis.size(), p_axis.size())};
  for (Eigen::Index i = 0; i < q_axis.size(); ++i)
    for (Eigen::Index j = 0; j < p_axis.size(); ++j)
      g.values(i, j) = wigner_eval(s, q_axis(i), p_axis(j));
  return g;
}

/// Grid spanning +-(6 + 2 n) oscillator lengths around the envelope center in q and the
/// matching momentum range, `points` samples per axis (at least 256).
inline PhaseSpaceGrid default_wigner_grid(const QuadraticState& s, int points = 256) {
  if (s.dim() != 1) throw UnsupportedDimensionError("default_wigner_grid: one-mode states only");
  points = std::max(points, 256);
  const double sigma = s.sigma()(0, 0);
  const double length = 1.0 / std::sqrt(sigma);
  const double half = 6.0 + 2.0 * s.quanta().total();
  const double qc = s.center()(0);
  const RVector q_axis = RVector::LinSpaced(points, qc - half * length, qc + half * length);
  const RVector p_axis = RVector::LinSpaced(points, -half / length, half / length);
  return wigner_grid(s, q_axis, p_axis);
}

/// Trapezoid integral of the grid values over q and p.
inline double grid_integral(const PhaseSpaceGrid& g) {
  const Eigen::Index nq = g.q_axis.size(), np = g.p_axis.size();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < nq; ++i) {
    const double wi = (i == 0 || i == nq - 1) ? 0.5 : 1.0;
    for (Eigen::Index j = 0; j < np; ++j) {
      const double wj = (j == 0 || j == np - 1) ? 0.5 : 1.0;
      acc += wi * wj * g.values(i, j);
    }
  }
  return acc * g.dq() * g.dp();
}

/// Plain-text dump: one header line
///   # wigner q_min q_max n_q p_min p_max n_p
/// then one row per q value holding the n_p values W(q_i, p_j), whitespace separated.
inline void write_grid(const PhaseSpaceGrid& g, std::ostream& out) {
  out.precision(17);
  out << "# wigner " << g.q_axis(0) << ' ' << g.q_axis(g.q_axis.size() - 1) << ' '
      << g.q_axis.size() << ' ' << g.p_axis(0) << ' ' << g.p_axis(g.p_axis.size() - 1) << ' '
      << g.p_axis.size() << '\n';
  for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.values.cols(); ++j) {
      if (j) out << ' ';
      out << g.values(i, j);
    }
    out << '\n';
  }
}

inline PhaseSpaceGrid read_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("read_grid: empty input");
  std::istringstream header(line);
  std::string hash, tag;
  double q0, q1, p0, p1;
  long nq, np;
  if (!(header >> hash >> tag >> q0 >> q1 >> nq >> p0 >> p1 >> np) || hash != "#" ||
      tag != "wigner" || nq < 2 || np < 2)
    throw DomainError("read_grid: malformed header");
  PhaseSpaceGrid g{RVector::LinSpaced(nq, q0, q1), RVector::LinSpaced(np, p0, p1), RMatrix(nq, np)};
  for (long i = 0; i < nq; ++i)
    for (long j = 0; j < np; ++j)
      if (!(in >> g.values(i, j))) throw DomainError("read_grid: truncated body");
  return g;
}

/// (2 pi)^{-N} int W_a W_b dq dp by Gauss-Hermite on the product of the two Wigner envelopes
/// (exact up to rounding: the integrand is a polynomial times that Gaussian). N <= 2.
inline double wigner_overlap(const QuadraticState& a, const QuadraticState& b, int nodes = 0) {
  const int n = a.dim();
  if (b.dim() != n) throw DomainError("wigner_overlap: dimension mismatch");
  if (n > 2) throw UnsupportedDimensionError("wigner_overlap: N <= 2 only");
  const RMatrix q_prec = a.sigma() + b.sigma();
  const RMatrix p_prec = a.sigma().inverse() + b.sigma().inverse();
  Eigen::LLT<RMatrix> lq(q_prec), lp(p_prec);
  const RVector qc = lq.solve(a.varpi() + b.varpi());
  const RMatrix jq = RMatrix(lq.matrixU()).inverse();
  const RMatrix jp = RMatrix(lp.matrixU()).inverse();
  const double det_j = std::abs(jq.determinant() * jp.determinant());

  auto integrate = [&](int count) {
    QuadratureRule rule = gauss_hermite(count);
    for (std::size_t i = 0; i < rule.size(); ++i)
      rule.weights[i] *= std::exp(rule.nodes[i] * rule.nodes[i]);
    double acc = 0.0;
    for_each_tensor_node(rule, 2 * n, [&](const RVector& y, double w) {
      const RVector q = qc + jq * y.head(n);
      const RVector p = jp * y.tail(n);
      acc += w * wigner_eval(a, q, p) * wigner_eval(b, q, p);
    });
    return acc * det_j / std::pow(2.0 * kPi, n);
  };
  if (nodes <= 0) nodes = a.quanta().total() + b.quanta().total() + 2;
  const double value = integrate(nodes);
  const double check = integrate(nodes + 3);
  if (std::abs(value - check) > 1e-10)
    throw AccuracyError("wigner_overlap: quadrature did not converge", check,
                        {value, check});
  return check;
}

// ---------------------------------------------------------------------------------------------
// Symplectic tomograms

/// Rotated/squeezed quadrature X_k = mu_k q_k + nu_k p_k, one entry per mode.
struct TomogramQuery {
  RVector x;
  RVector mu;
  RVector nu;

  static TomogramQuery one_mode(double x, double mu, double nu) {
    RVector xv(1), mv(1), nv(1);
    xv << x;
    mv << mu;
    nv << nu;
    return {xv, mv, nv};
  }

  void validate(int n) const {
    if (x.size() != n || mu.size() != n || nu.size() != n)
      throw DomainError("TomogramQuery: dimension mismatch");
    for (int k = 0; k < n; ++k)
      if (mu(k) == 0.0 && nu(k) == 0.0)
        throw DomainError("TomogramQuery: (mu, nu) must not both vanish");
  }
};

inline constexpr double kDefaultNuMin = 1e-8;

/// Closed-form tomogram of the one-mode eigenstate |n> with oscillator length l:
/// l / (2^n n! sqrt(pi (nu^2 + mu^2 l^4))) exp(-X^2 l^2 / (nu^2 + mu^2 l^4)) H_n(X l / sqrt(...))^2.
inline double tomogram_oscillator(int n, double length, double x, double mu, double nu) {
  if (n < 0) throw DomainError("tomogram_oscillator: n must be nonnegative");
  if (!(length > 0.0)) throw DomainError("tomogram_oscillator: length must be positive");
  const double l2 = length * length;
  const double d = nu * nu + mu * mu * l2 * l2;
  if (!(d > 0.0)) throw DomainError("tomogram_oscillator: (mu, nu) must not both vanish");
  const double arg = x * length / std::sqrt(d);
  const double h = hermite_1d<double>(n, arg);
  const double log_pref = std::log(length) - n * std::log(2.0) - std::lgamma(n + 1.0) -
                          0.5 * std::log(kPi * d) - x * x * l2 / d;
  return std::exp(log_pref) * h * h;
}

/// Tomogram of one state at fixed (mu, nu), evaluated cheaply at many X.
///
/// The y integral of psi(y) exp(i mu y^2 / (2 nu) - i X y / nu) is Gaussian with complex
/// precision A = sigma - i diag(mu / nu) and linear term c = varpi - i X / nu. Expanding the
/// Hermite product through its generating function gives
///   |int ...|^2 = C^2 e^{2 Re phi} (2 pi)^N |det A|^{-1} exp(Re c^T A^{-1} c) |H_n^{R}|^2,
///   R = 2 I - 4 B A^{-1} B^T,  linear term z = 2 b + 2 B A^{-1} c.
class TomogramSlice {
 public:
  TomogramSlice(const QuadraticState& s, const RVector& mu, const RVector& nu,
                double nu_min = kDefaultNuMin)
      : n_(s.dim()), quanta_(s.quanta()), mu_(mu), nu_(nu) {
    if (mu.size() != n_ || nu.size() != n_) throw DomainError("TomogramSlice: dimension mismatch");
    for (int k = 0; k < n_; ++k)
      if (!(std::abs(nu(k)) > nu_min))
        throw SingularParameterError(
            "tomogram_eval: |nu| <= " + std::to_string(nu_min) +
            " makes the 1/|nu| form singular; use tomogram_from_wigner");
    CMatrix a = s.sigma().cast<cplx>();
    for (int k = 0; k < n_; ++k) a(k, k) -= cplx(0.0, mu(k) / nu(k));
    Eigen::PartialPivLU<CMatrix> lu(a);
    a_inv_ = lu.inverse();
    const CMatrix bc = s.scale().cast<cplx>();
    r_ = CMatrix::Identity(n_, n_) * 2.0 - 4.0 * bc * a_inv_ * bc.transpose();
    r_ = (0.5 * (r_ + r_.transpose())).eval();
    z_map_ = 2.0 * bc * a_inv_;
    z_off_ = 2.0 * s.shift().cast<cplx>();
    varpi_ = s.varpi().cast<cplx>();
    log_const_ = 2.0 * log_normalization(quanta_) + 2.0 * s.phase().real() - log_abs_det(a);
    for (int k = 0; k < n_; ++k) log_const_ -= std::log(std::abs(nu(k)));

    // Gaussian envelope of X: mean mu q_c, covariance D_mu (2 sigma)^{-1} D_mu + D_nu sigma/2 D_nu.
    const RMatrix sinv = s.sigma().inverse();
    mean_ = mu.asDiagonal() * s.center();
    cov_ = mu.asDiagonal() * (0.5 * sinv) * mu.asDiagonal() +
           nu.asDiagonal() * (0.5 * s.sigma()) * nu.asDiagonal();
  }

  double operator()(const RVector& x) const {
    if (x.size() != n_) throw DomainError("TomogramSlice: dimension mismatch");
    if (n_ == 1) return (*this)(x(0));
    CVector c = varpi_;
    for (int k = 0; k < n_; ++k) c(k) += cplx(0.0, -x(k) / nu_(k));
    const cplx quad = (c.transpose() * a_inv_ * c)(0, 0);
    const cplx h = hermite_multidim(HermiteMatrixParam::from_linear_term(r_, z_off_ + z_map_ * c), quanta_);
    return finish(quad, h);
  }

  double operator()(double x) const {
    if (n_ != 1) throw DomainError("TomogramSlice: scalar X needs a one-mode state");
    const cplx c = varpi_(0) + cplx(0.0, -x / nu_(0));
    const cplx z = z_off_(0) + z_map_(0, 0) * c;
    return finish(c * a_inv_(0, 0) * c, hermite_1d_param(quanta_[0], r_(0, 0), z));
  }

  /// Mean and covariance of the Gaussian envelope in X.
  const RVector& envelope_mean() const noexcept { return mean_; }
  const RMatrix& envelope_cov() const noexcept { return cov_; }

 private:
  // H_n^{[r]} with linear term z: H_v = z H_{v-1} - r (v-1) H_{v-2}.
  static cplx hermite_1d_param(int n, cplx r, cplx z) {
    cplx prev(1.0, 0.0);
    if (n == 0) return prev;
    cplx cur = z;
    for (int v = 2; v <= n; ++v) {
      const cplx next = z * cur - r * double(v - 1) * prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }

  double finish(cplx quad, cplx h) const {
    if (h == cplx(0.0, 0.0)) return 0.0;
    return std::exp(log_const_ + quad.real() + 2.0 * std::log(std::abs(h)));
  }

  int n_;
  MultiIndex quanta_;
  RVector mu_, nu_;
  CMatrix a_inv_, r_, z_map_;
  CVector z_off_, varpi_;
  double log_const_ = 0.0;
  RVector mean_;
  RMatrix cov_;
};

/// w(X, mu, nu) >= 0 through the closed Gaussian-Hermite form. Rejects |nu_k| <= nu_min.
inline double tomogram_eval(const QuadraticState& s, const TomogramQuery& query,
                            double nu_min = kDefaultNuMin) {
  query.validate(s.dim());
  return TomogramSlice(s, query.mu, query.nu, nu_min)(query.x);
}

/// Tomogram as the line integral of the exact Wigner function (Radon route). Regular for any
/// (mu, nu) != (0, 0), including nu = 0 where tomogram_eval refuses.
inline double tomogram_from_wigner(const QuadraticState& s, const TomogramQuery& query) {
  const int n = s.dim();
  query.validate(n);
  RVector rho(n), q0(n), p0(n), dq(n), dp(n);
  for (int k = 0; k < n; ++k) {
    rho(k) = std::hypot(query.mu(k), query.nu(k));
    q0(k) = query.x(k) * query.mu(k) / (rho(k) * rho(k));
    p0(k) = query.x(k) * query.nu(k) / (rho(k) * rho(k));
    dq(k) = -query.nu(k) / rho(k);
    dp(k) = query.mu(k) / rho(k);
  }
  // Envelope exp(-(q-c)^T sigma (q-c) - p^T sigma^{-1} p) restricted to the lines.
  const RMatrix sinv = s.sigma().inverse();
  const RVector c = s.center();
  const RMatrix h = dq.asDiagonal() * s.sigma() * dq.asDiagonal() +
                    dp.asDiagonal() * sinv * dp.asDiagonal();
  const RVector lin = -2.0 * (dq.asDiagonal() * s.sigma() * (q0 - c) + dp.asDiagonal() * sinv * p0);
  Eigen::LLT<RMatrix> llt(h);
  const RVector tc = 0.5 * llt.solve(lin);
  const RMatrix jac = RMatrix(llt.matrixU()).inverse();

  QuadratureRule rule = gauss_hermite(s.quanta().total() + 3);
  for (std::size_t i = 0; i < rule.size(); ++i)
    rule.weights[i] *= std::exp(rule.nodes[i] * rule.nodes[i]);
  double acc = 0.0;
  for_each_tensor_node(rule, n, [&](const RVector& y, double w) {
    const RVector t = tc + jac * y;
    acc += w * wigner_eval(s, RVector(q0 + dq.cwiseProduct(t)), RVector(p0 + dp.cwiseProduct(t)));
  });
  acc *= std::abs(jac.determinant());
  for (int k = 0; k < n; ++k) acc /= 2.0 * kPi * rho(k);
  return acc;
}

// ---------------------------------------------------------------------------------------------
// Radon transform of a sampled Wigner function

namespace detail {

inline double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t *
                  (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

inline double bicubic(const PhaseSpaceGrid& g, double q, double p) {
  const Eigen::Index nq = g.q_axis.size(), np = g.p_axis.size();
  const double fq = (q - g.q_axis(0)) / g.dq();
  const double fp = (p - g.p_axis(0)) / g.dp();
  Eigen::Index i = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(fq)), 0, nq - 2);
  Eigen::Index j = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor(fp)), 0, np - 2);
  const double tq = fq - i, tp = fp - j;
  auto at = [&](Eigen::Index a, Eigen::Index b) {
    return g.values(std::clamp<Eigen::Index>(a, 0, nq - 1), std::clamp<Eigen::Index>(b, 0, np - 1));
  };
  double col[4];
  for (int di = -1; di <= 2; ++di)
    col[di + 1] = catmull_rom(at(i + di, j - 1), at(i + di, j), at(i + di, j + 1), at(i + di, j + 2), tp);
  return catmull_rom(col[0], col[1], col[2], col[3], tq);
}

}  // namespace detail

/// (2 pi)^{-1} int W(q, p) delta(X - mu q - nu p) dq dp on a one-mode grid: trapezoid along the
/// line with bicubic interpolation. Logs a truncation warning when W is not negligible where
/// the line leaves the grid.
inline double radon_forward(const PhaseSpaceGrid& g, const TomogramQuery& query) {
  query.validate(1);
  const double x = query.x(0), mu = query.mu(0), nu = query.nu(0);
  const double rho = std::hypot(mu, nu);
  const double q0 = x * mu / (rho * rho), p0 = x * nu / (rho * rho);
  const double dq = -nu / rho, dp = mu / rho;

  const double qa = g.q_axis(0), qb = g.q_axis(g.q_axis.size() - 1);
  const double pa = g.p_axis(0), pb = g.p_axis(g.p_axis.size() - 1);
  double t_lo = -std::numeric_limits<double>::infinity(), t_hi = std::numeric_limits<double>::infinity();
  auto clip = [&](double origin, double dir, double lo, double hi) {
    if (std::abs(dir) < 1e-15) {
      if (origin < lo || origin > hi) t_hi = t_lo - 1.0;
      return;
    }
    double t1 = (lo - origin) / dir, t2 = (hi - origin) / dir;
    if (t1 > t2) std::swap(t1, t2);
    t_lo = std::max(t_lo, t1);
    t_hi = std::min(t_hi, t2);
  };
  clip(q0, dq, qa, qb);
  clip(p0, dp, pa, pb);
  if (!(t_hi > t_lo)) {
    logger().warn("radon_forward: line X={} mu={} nu={} misses the grid", x, mu, nu);
    return 0.0;
  }

  const double step = 0.25 * std::min(g.dq(), g.dp());
  const int count = std::max(2, static_cast<int>(std::ceil((t_hi - t_lo) / step)) + 1);
  const double h = (t_hi - t_lo) / (count - 1);
  double acc = 0.0;
  for (int i = 0; i < count; ++i) {
    const double t = t_lo + h * i;
    const double v = detail::bicubic(g, q0 + dq * t, p0 + dp * t);
    acc += (i == 0 || i == count - 1) ? 0.5 * v : v;
  }
  acc *= h;

  const double edge = std::max(std::abs(detail::bicubic(g, q0 + dq * t_lo, p0 + dp * t_lo)),
                               std::abs(detail::bicubic(g, q0 + dq * t_hi, p0 + dp * t_hi)));
  const double peak = g.values.cwiseAbs().maxCoeff();
  if (edge > 1e-8 * peak)
    logger().warn("radon_forward: line leaves the grid where |W| = {:.3e} ({:.3e} of peak); "
                  "tail estimate ~ {:.3e}",
                  edge, edge / peak, edge * std::min(g.dq(), g.dp()) / (2.0 * kPi * rho));
  return acc / (2.0 * kPi * rho);
}

// ---------------------------------------------------------------------------------------------
// Tomographic transition probability

enum class TomographicPairing {
  plus,   ///< exp(i(X + Y)), w_b at (-mu, -nu): |<a|b>|^2
  minus,  ///< exp(i(X - Y)), w_b at (-mu, -nu): |<a|Pi b>|^2
};

struct TomographicOptions {
  double regulator_eps = 0.25;  ///< largest eps of the sequence eps_j = eps / 2^j
  int levels = 6;
  int theta_nodes = 64;
  int panel_nodes = 16;
  double tolerance = 1e-5;  ///< bound on the Richardson error estimate
  TomographicPairing pairing = TomographicPairing::plus;
  int threads = 1;  ///< theta nodes are split across workers; the reduction order is fixed
};

struct TomographicResult {
  double at_regulator;   ///< P at the largest eps
  double extrapolated;   ///< eps -> 0 Richardson limit
  double error_estimate;
  std::vector<double> eps;
  std::vector<double> values;
};

namespace detail {

/// int_0^inf K_eps(u) [F(u) + F(-u) - 2 F(0)] du for every eps, K_eps(u) = (eps^2 - u^2)/(eps^2 + u^2)^2
/// = Re (eps - i u)^{-2}, the regularized radial integral of r exp(iru).
template <class F>
std::vector<double> radial_kernel_integrals(F&& f, double spread, double reach,
                                            const std::vector<double>& eps, int panel_nodes) {
  std::vector<double> breaks{0.0};
  const double eps_min = *std::min_element(eps.begin(), eps.end());
  for (double b = eps_min / 8.0; b < spread; b *= 2.0) breaks.push_back(b);
  for (double b = std::max(breaks.back(), spread); b < reach; b += 0.5 * spread) breaks.push_back(b);
  breaks.push_back(reach);

  const QuadratureRule base = gauss_legendre(panel_nodes, 0.0, 1.0);
  const double f0 = f(0.0);
  std::vector<double> acc(eps.size(), 0.0);
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], width = breaks[p + 1] - breaks[p];
    if (width <= 0.0) continue;
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double u = a + width * base.nodes[i];
      const double g = f(u) + f(-u) - 2.0 * f0;
      const double w = width * base.weights[i];
      for (std::size_t e = 0; e < eps.size(); ++e) {
        const double e2 = eps[e] * eps[e], u2 = u * u;
        acc[e] += w * g * (e2 - u2) / ((e2 + u2) * (e2 + u2));
      }
    }
  }
  for (std::size_t e = 0; e < eps.size(); ++e)
    acc[e] += 2.0 * f0 * reach / (reach * reach + eps[e] * eps[e]);
  return acc;
}

}  // namespace detail

/// (2 pi)^{-1} int w_a(X, mu, nu) w_b(Y, -mu, -nu) exp(i(X +- Y)) dX dY dmu dnu for one-mode states.
///
/// Polar coordinates mu = r cos t, nu = r sin t and X = r x, Y = r y turn the measure into
/// r dr dt dx dy w_a(x, t) w_b(y, t + pi) exp(i r (x +- y)); with exp(-eps r) the r integral is
/// Re (eps - i u)^{-2}, u = x +- y. The remaining (t, x, y) integral is done as: periodic
/// trapezoid in t, Gauss-Hermite in x for the density F_t(u) of u, and composite Gauss-Legendre
/// in u graded toward the kernel's eps-wide core. The eps sequence is extrapolated assuming
/// an expansion in integer powers of eps.
inline TomographicResult tomographic_overlap(const QuadraticState& a, const QuadraticState& b,
                                             const TomographicOptions& opt = {}) {
  if (a.dim() != 1 || b.dim() != 1)
    throw UnsupportedDimensionError("tomographic_overlap: one-mode states only");
  if (!(opt.regulator_eps > 0.0)) throw DomainError("tomographic_overlap: regulator_eps must be positive");
  if (opt.levels < 2 || opt.theta_nodes < 4 || opt.theta_nodes % 2 != 0 || opt.panel_nodes < 4)
    throw DomainError("tomographic_overlap: need levels >= 2, even theta_nodes >= 4, panel_nodes >= 4");

  std::vector<double> eps(opt.levels);
  for (int j = 0; j < opt.levels; ++j) eps[j] = opt.regulator_eps / std::pow(2.0, j);

  const int gh_count = a.quanta().total() + b.quanta().total() + 3;
  QuadratureRule gh = gauss_hermite(gh_count);
  for (std::size_t i = 0; i < gh.size(); ++i) gh.weights[i] *= std::exp(gh.nodes[i] * gh.nodes[i]);
  const double sign = opt.pairing == TomographicPairing::plus ? 1.0 : -1.0;

  std::vector<std::vector<double>> per_theta(opt.theta_nodes);
  auto theta_term = [&](int j) {
    const double theta = (j + 0.5) * 2.0 * kPi / opt.theta_nodes;
    RVector mu(1), nu(1);
    mu << std::cos(theta);
    nu << std::sin(theta);
    const TomogramSlice wa(a, mu, nu, 0.0), wb(b, mu, nu, 0.0);
    const double ma = wa.envelope_mean()(0), va = wa.envelope_cov()(0, 0);
    const double mb = wb.envelope_mean()(0), vb = wb.envelope_cov()(0, 0);
    const double prec = 1.0 / va + 1.0 / vb;
    const double scale = std::sqrt(2.0 / prec);

    // F(u) = int w_a(x) w_b(y) dx with u = x + sign*y and w_b(y, t+pi) = w_b(-y, t).
    // plus:  y' = -y = x - u;  minus: y' = -y = u - x.
    auto density = [&](double u) {
      const double mb_shifted = sign > 0 ? u + mb : u - mb;
      const double center = (ma / va + mb_shifted / vb) / prec;
      double acc = 0.0;
      for (std::size_t i = 0; i < gh.size(); ++i) {
        const double x = center + scale * gh.nodes[i];
        const double y_arg = sign > 0 ? x - u : u - x;
        acc += gh.weights[i] * wa(x) * wb(y_arg);
      }
      return acc * scale;
    };
    const double spread = std::sqrt(va + vb);
    const double reach = std::abs(ma) + std::abs(mb) + 14.0 * spread;
    per_theta[j] = detail::radial_kernel_integrals(density, spread, reach, eps, opt.panel_nodes);
  };
  const int workers = std::clamp(opt.threads, 1, opt.theta_nodes);
  if (workers == 1) {
    for (int j = 0; j < opt.theta_nodes; ++j) theta_term(j);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (int j = w; j < opt.theta_nodes; j += workers) theta_term(j);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  std::vector<double> total(eps.size(), 0.0);
  for (const auto& part : per_theta)
    for (std::size_t e = 0; e < eps.size(); ++e) total[e] += part[e];
  for (double& v : total) v /= opt.theta_nodes;

  // Richardson table over eps_j = eps_0 / 2^j.
  std::vector<std::vector<double>> table(eps.size());
  for (std::size_t j = 0; j < eps.size(); ++j) {
    table[j].push_back(total[j]);
    for (std::size_t k = 1; k <= j; ++k) {
      const double f = std::pow(2.0, double(k)) - 1.0;
      table[j].push_back(table[j][k - 1] + (table[j][k - 1] - table[j - 1][k - 1]) / f);
    }
  }
  const std::size_t last = eps.size() - 1;
  const double best = table[last][last];
  const double err = std::max(std::abs(best - table[last][last - 1]),
                              std::abs(best - table[last - 1][last - 1]));
  TomographicResult result{total.front(), best, err, eps, total};
  logger().debug("tomographic_overlap: extrapolated {:.12f} (error {:.2e})", best, err);
  if (!(err <= opt.tolerance))
    throw AccuracyError("tomographic_overlap: eps extrapolation did not converge (error " +
                            std::to_string(err) + ")",
                        best, total);
  return result;
}

inline TomographicResult tomographic_overlap(const QuadraticState& a, const QuadraticState& b,
                                             double regulator_eps, TomographicOptions opt = {}) {
  opt.regulator_eps = regulator_eps;
  return tomographic_overlap(a, b, opt);
}

}  // namespace vibrofc

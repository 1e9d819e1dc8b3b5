#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "vibrofc/errors.hpp"

namespace vibrofc {

using cplx = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Threshold below which |det| or an eigenvalue counts as singular.
inline constexpr double kSingularTolerance = 1e-12;

inline bool is_symmetric(const RMatrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool is_symmetric(const CMatrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

inline double min_eigenvalue(const RMatrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(symmetric, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// log|det m| through partial-pivot LU; -inf for an exactly singular matrix.
template <class Derived>
double log_abs_det(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(std::abs(lu.matrixLU()(i, i)));
  return acc;
}

inline void require_square(const RMatrix& m, Eigen::Index n, const std::string& what) {
  if (m.rows() != n || m.cols() != n)
    throw DomainError(what + ": expected " + std::to_string(n) + "x" + std::to_string(n) +
                      " matrix");
}

inline void require_length(const RVector& v, Eigen::Index n, const std::string& what) {
  if (v.size() != n)
    throw DomainError(what + ": expected length " + std::to_string(n));
}

/// Lower Cholesky factor of a symmetric positive-definite matrix; throws on failure.
inline RMatrix cholesky_lower(const RMatrix& spd, const std::string& what) {
  Eigen::LLT<RMatrix> llt(spd);
  if (llt.info() != Eigen::Success)
    throw DegenerateConfigurationError(what + ": matrix is not positive definite");
  return llt.matrixL();
}

}  // namespace vibrofc

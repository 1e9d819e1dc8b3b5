#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "vibrofc/errors.hpp"
#include "vibrofc/linalg.hpp"

namespace vibrofc {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Hermite rule for the weight exp(-x^2), Newton iteration on the orthonormal
/// recurrence. Exact for polynomials of degree <= 2n-1.
inline QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite: need at least one node");
  constexpr double kPiM4 = 0.7511255444649425;  // pi^{-1/4}
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  auto& x = rule.nodes;
  auto& w = rule.weights;
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(double(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = kPiM4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(double(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  // ascending order
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    std::swap(x[i], x[j]);
    std::swap(w[i], w[j]);
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return rule;
}

/// Gauss-Legendre rule on [a, b].
inline QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  const double xm = 0.5 * (b + a), xl = 0.5 * (b - a);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-16) break;
    }
    rule.nodes[i] = xm - xl * z;
    rule.nodes[n - 1 - i] = xm + xl * z;
    rule.weights[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

/// Calls f(point, weight) for every node of the dim-fold tensor product of a 1D rule.
/// Points are visited in row-major order (last axis fastest), so sums are reproducible.
template <class F>
void for_each_tensor_node(const QuadratureRule& rule, int dim, F&& f) {
  if (dim < 1) throw DomainError("for_each_tensor_node: dimension must be positive");
  const std::size_t n = rule.size();
  std::vector<std::size_t> idx(dim, 0);
  RVector point(dim);
  while (true) {
    double weight = 1.0;
    for (int d = 0; d < dim; ++d) {
      point(d) = rule.nodes[idx[d]];
      weight *= rule.weights[idx[d]];
    }
    f(static_cast<const RVector&>(point), weight);
    int d = dim - 1;
    while (d >= 0 && ++idx[d] == n) {
      idx[d] = 0;
      --d;
    }
    if (d < 0) break;
  }
}

}  // namespace vibrofc

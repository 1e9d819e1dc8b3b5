#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "test_support.hpp"

using namespace vibrofc;
using namespace testing_support;

namespace {

// Direct quadrature of the Wigner integral: plain trapezoid in xi on a wide window.
double wigner_brute(const QuadraticState& s, double q, double p) {
  const double h = 2e-3;
  cplx acc(0, 0);
  for (double xi = -20.0; xi <= 20.0; xi += h)
    acc += std::exp(cplx(0, -p * xi)) * wavefunction_eval(s, vec({q + xi / 2})) *
           std::conj(wavefunction_eval(s, vec({q - xi / 2})));
  return acc.real() * h;
}

// w(X, mu, nu) = |int psi(y) exp(i mu y^2/(2 nu) - i X y / nu) dy|^2 / (2 pi |nu|), plain trapezoid.
double tomogram_brute(const QuadraticState& s, double x, double mu, double nu) {
  const double h = 1e-3;
  cplx acc(0, 0);
  for (double y = -15.0; y <= 15.0; y += h)
    acc += wavefunction_eval(s, vec({y})) * std::exp(cplx(0, mu * y * y / (2 * nu) - x * y / nu));
  return std::norm(acc * h) / (2 * kPi * std::abs(nu));
}

double integrate_over_x(const std::function<double(double)>& f) {
  const double h = 2e-3;
  double acc = 0;
  for (double x = -25.0; x <= 25.0; x += h) acc += f(x);
  return acc * h;
}

}  // namespace

TEST(Wigner, Examples) {
  EXPECT_NEAR(wigner_eval(eigen1d(1.0, 0), 0.0, 0.0), 2.0, 1e-14);
  EXPECT_LT(wigner_eval(eigen1d(1.0, 1), 0.0, 0.0), 0.0);
  for (double q : {-0.4, 0.9})
    for (double p : {0.3, -1.1})
      EXPECT_NEAR(wigner_eval(eigen1d(1.0, 0), q, p), 2 * std::exp(-q * q - p * p), 1e-14);
}

TEST(Wigner, MatchesBruteForceIntegral) {
  const QuadraticState s = displaced1d(1.3, 2, 0.5);
  for (double q : {-0.8, 0.2})
    for (double p : {0.0, 0.7}) EXPECT_NEAR(wigner_eval(s, q, p), wigner_brute(s, q, p), 1e-9);
}

TEST(Wigner, GridIntegralIsOne) {
  for (int n : {0, 2}) {
    const PhaseSpaceGrid g = default_wigner_grid(eigen1d(1.0, n), 256);
    EXPECT_NEAR(grid_integral(g) / (2 * kPi), 1.0, 1e-4);
  }
}

TEST(Wigner, GridDumpRoundTrip) {
  const PhaseSpaceGrid g = wigner_grid(eigen1d(1.0, 1), RVector::LinSpaced(5, -2, 2), RVector::LinSpaced(4, -1, 1));
  std::stringstream ss;
  write_grid(g, ss);
  EXPECT_EQ(ss.str().rfind("# wigner ", 0), 0u);
  const PhaseSpaceGrid back = read_grid(ss);
  EXPECT_TRUE(back.q_axis.isApprox(g.q_axis));
  EXPECT_TRUE(back.p_axis.isApprox(g.p_axis));
  EXPECT_EQ(back.values, g.values);
}

TEST(Wigner, Errors) {
  EXPECT_THROW(wigner_eval(eigen1d(1.0, 0), vec({0, 0}), vec({0})), DomainError);
  std::stringstream bad("# nope\n");
  EXPECT_THROW(read_grid(bad), DomainError);
}

TEST(WignerOverlap, Examples) {
  const QuadraticState g = eigen1d(1.0, 0);
  EXPECT_NEAR(wigner_overlap(g, g), 1.0, 1e-12);
  EXPECT_NEAR(wigner_overlap(g, displaced1d(1.0, 0, 1.0)), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(wigner_overlap(g, eigen1d(1.0, 1)), 0.0, 1e-12);
}

TEST(WignerOverlap, MatchesOracleForExcitedPairs) {
  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m <= 3; ++m) {
      const QuadraticState a = eigen1d(1.0, n), b = displaced1d(1.4, m, 0.7);
      EXPECT_NEAR(wigner_overlap(a, b), overlap_quadrature(a, b), 1e-10);
    }
}

TEST(WignerOverlap, TwoModes) {
  const QuadraticState a = mode_eigenstate(vec({1.0, 1.5}), MultiIndex({1, 0}));
  const QuadraticState b =
      apply_dushinsky(mode_eigenstate(vec({1.2, 1.4}), MultiIndex({0, 1})), DushinskyTransform(rotation(0.3), vec({0.4, -0.2})));
  EXPECT_NEAR(wigner_overlap(a, b), overlap_quadrature(a, b), 1e-10);
}

TEST(Tomogram, Examples) {
  const QuadraticState g = eigen1d(1.0, 0);
  EXPECT_NEAR(tomogram_eval(g, TomogramQuery::one_mode(0, 1, 1)), 1 / std::sqrt(2 * kPi), 1e-15);
  EXPECT_NEAR(tomogram_eval(g, TomogramQuery::one_mode(0, 1, 1)), tomogram_brute(g, 0, 1, 1), 1e-10);
  EXPECT_NEAR(tomogram_eval(g, TomogramQuery::one_mode(0.6, 0.4, 0.5)),
              tomogram_eval(g, TomogramQuery::one_mode(0.3, 0.2, 0.25)) / 2, 1e-15);
}

TEST(Tomogram, ClosedFormMatchesGeneralPathAndBruteForce) {
  for (int n = 0; n <= 4; ++n)
    for (double w : {0.6, 1.0, 2.2}) {
      const QuadraticState s = eigen1d(w, n);
      for (double x : {-1.1, 0.4})
        for (double theta : {0.4, 2.0}) {
          const double mu = std::cos(theta), nu = std::sin(theta);
          const double closed = tomogram_oscillator(n, 1 / std::sqrt(w), x, mu, nu);
          EXPECT_NEAR(tomogram_eval(s, TomogramQuery::one_mode(x, mu, nu)), closed, 1e-13);
          EXPECT_NEAR(tomogram_brute(s, x, mu, nu), closed, 1e-9);
        }
    }
}

TEST(Tomogram, NormalizedAlongX) {
  const QuadraticState s = displaced1d(1.3, 2, 0.4);
  for (auto [mu, nu] : {std::pair{0.6, 0.8}, std::pair{-1.5, 0.3}, std::pair{0.2, -2.0}}) {
    TomogramSlice w(s, vec({mu}), vec({nu}));
    EXPECT_NEAR(integrate_over_x([&](double x) { return w(x); }), 1.0, 1e-6);
  }
}

TEST(Tomogram, UncoupledTwoModeIsProductOfClosedForms) {
  const QuadraticState s = mode_eigenstate(vec({1.0, 2.0}), MultiIndex({1, 2}));
  TomogramQuery q{vec({0.3, -0.5}), vec({0.7, 1.2}), vec({0.5, -0.4})};
  EXPECT_NEAR(tomogram_eval(s, q),
              tomogram_oscillator(1, 1.0, 0.3, 0.7, 0.5) * tomogram_oscillator(2, 1 / std::sqrt(2.0), -0.5, 1.2, -0.4),
              1e-14);
}

TEST(Tomogram, CoupledTwoModeMatchesWignerRoute) {
  const QuadraticState s =
      apply_dushinsky(mode_eigenstate(vec({1.2, 1.4}), MultiIndex({1, 1})), DushinskyTransform(rotation(0.3), vec({0.4, -0.2})));
  TomogramQuery q{vec({0.2, -0.6}), vec({0.8, 0.3}), vec({0.6, 1.1})};
  EXPECT_NEAR(tomogram_eval(s, q), tomogram_from_wigner(s, q), 1e-13);
}

TEST(Tomogram, SingularNuAndEscapeHatch) {
  const QuadraticState g = eigen1d(1.0, 0);
  EXPECT_THROW(tomogram_eval(g, TomogramQuery::one_mode(0, 1, 0)), SingularParameterError);
  EXPECT_THROW(tomogram_eval(g, TomogramQuery::one_mode(0, 1, 1e-9)), SingularParameterError);
  // mu = 1, nu = 0 is the position density |psi(X)|^2.
  EXPECT_NEAR(tomogram_from_wigner(g, TomogramQuery::one_mode(0, 1, 0)), 1 / std::sqrt(kPi), 1e-14);
  EXPECT_THROW(tomogram_eval(g, TomogramQuery::one_mode(0, 0, 0)), DomainError);
}

TEST(Radon, Examples) {
  const PhaseSpaceGrid g = default_wigner_grid(eigen1d(1.0, 0), 256);
  EXPECT_NEAR(radon_forward(g, TomogramQuery::one_mode(0, 1, 0)), 1 / std::sqrt(kPi), 1e-4);
  EXPECT_NEAR(radon_forward(g, TomogramQuery::one_mode(0, 0, 1)), 1 / std::sqrt(kPi), 1e-4);
  EXPECT_NEAR(radon_forward(g, TomogramQuery::one_mode(0, 0.6, 0.8)),
              tomogram_eval(eigen1d(1.0, 0), TomogramQuery::one_mode(0, 0.6, 0.8)), 1e-3);
}

TEST(Radon, LineOutsideGridIsZero) {
  const PhaseSpaceGrid g = wigner_grid(eigen1d(1.0, 0), RVector::LinSpaced(16, -1, 1), RVector::LinSpaced(16, -1, 1));
  EXPECT_EQ(radon_forward(g, TomogramQuery::one_mode(5, 1, 0)), 0.0);
}

TEST(TomographicOverlap, Targets) {
  const QuadraticState g = eigen1d(1.0, 0);
  EXPECT_NEAR(tomographic_overlap(g, displaced1d(1.0, 0, 1.0)).extrapolated, std::exp(-0.5), 1e-6);
  EXPECT_NEAR(tomographic_overlap(g, g).extrapolated, 1.0, 1e-6);
  EXPECT_NEAR(tomographic_overlap(g, eigen1d(1.0, 1)).extrapolated, 0.0, 1e-6);
}

TEST(TomographicOverlap, ExcitedPairsMatchClosedForm) {
  for (auto [n, m] : {std::pair{1, 2}, std::pair{2, 0}}) {
    const QuadraticState a = eigen1d(1.0, n), b = displaced1d(1.0, m, 0.8);
    EXPECT_NEAR(tomographic_overlap(a, b).extrapolated, fc_shift_1d(n, m, 0.8), 1e-5);
  }
}

TEST(TomographicOverlap, PairingSignResolvedByAsymmetricStates) {
  // Two identical states both displaced away from the origin: <a|b> = 1, <a|Pi b> = e^{-1/2}.
  const QuadraticState a = displaced1d(1.0, 0, 0.5);
  TomographicOptions plus, minus;
  minus.pairing = TomographicPairing::minus;
  EXPECT_NEAR(tomographic_overlap(a, a, plus).extrapolated, 1.0, 1e-6);
  EXPECT_NEAR(tomographic_overlap(a, a, minus).extrapolated, std::exp(-0.5), 1e-6);
}

TEST(TomographicOverlap, RegulatorSequenceApproachesLimit) {
  const TomographicResult r = tomographic_overlap(eigen1d(1.0, 0), displaced1d(1.0, 0, 1.0));
  ASSERT_EQ(r.values.size(), r.eps.size());
  for (std::size_t j = 1; j < r.values.size(); ++j)
    EXPECT_LT(std::abs(r.values[j] - std::exp(-0.5)), std::abs(r.values[j - 1] - std::exp(-0.5)));
  EXPECT_EQ(r.at_regulator, r.values.front());
}

TEST(TomographicOverlap, ThreadedRunIsBitIdentical) {
  TomographicOptions one, four;
  four.threads = 4;
  const QuadraticState a = eigen1d(1.0, 1), b = displaced1d(1.2, 1, 0.3);
  EXPECT_EQ(tomographic_overlap(a, b, one).extrapolated, tomographic_overlap(a, b, four).extrapolated);
}

TEST(TomographicOverlap, NonConvergenceCarriesSequence) {
  TomographicOptions opt;
  opt.regulator_eps = 4.0;
  opt.levels = 2;
  opt.tolerance = 1e-12;
  try {
    tomographic_overlap(eigen1d(1.0, 0), displaced1d(1.0, 0, 1.0), opt);
    FAIL() << "expected AccuracyError";
  } catch (const AccuracyError& e) {
    EXPECT_EQ(e.diagnostics().size(), 2u);
  }
}

TEST(TomographicOverlap, Errors) {
  const QuadraticState two = mode_eigenstate(vec({1, 1}), MultiIndex({0, 0}));
  EXPECT_THROW(tomographic_overlap(two, two), UnsupportedDimensionError);
  EXPECT_THROW(tomographic_overlap(eigen1d(1, 0), eigen1d(1, 0), -1.0), DomainError);
}

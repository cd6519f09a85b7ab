#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hyperlab/constants.hpp"

using namespace hyperlab;

namespace {

// |S^n| = 2 pi^{(n+1)/2} / Gamma((n+1)/2)
double sphere_n(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * (n + 1)) / std::tgamma(0.5 * (n + 1)); }

// prod_{i=-k}^{k-1} (n/2 + i) |S^n|^{2k/n}
double sharp_sobolev(int n, int k) {
  double prod = 1.0;
  for (int i = -k; i < k; ++i) prod *= 0.5 * n + i;
  return prod * std::pow(sphere_n(n), 2.0 * k / n);
}

}  // namespace

TEST(EuclideanSobolev, FirstOrderClosedForm) {
  for (int n : {3, 4, 5}) {
    const double ref = 0.25 * n * (n - 2.0) * std::pow(sphere_n(n), 2.0 / n);
    EXPECT_NEAR(euclidean_sobolev_constant(n, 1) / ref, 1.0, 1e-4) << "n=" << n;
    EXPECT_NEAR(euclidean_sobolev_constant(n, 1) / ref, 1.0, 1e-10) << "n=" << n;
  }
  EXPECT_NEAR(euclidean_sobolev_constant(3, 1), 5.47790408953, 1e-9);
  EXPECT_NEAR(euclidean_sobolev_constant(4, 1), 10.2603986413, 1e-8);
}

TEST(EuclideanSobolev, HigherOrderClosedForm) {
  for (auto [n, k] : {std::pair{5, 2}, {6, 2}, {7, 2}, {8, 3}, {9, 4}, {11, 5}}) {
    const double S = euclidean_sobolev_constant(n, k);
    EXPECT_GT(S, 0.0);
    EXPECT_NEAR(S / sharp_sobolev(n, k), 1.0, 1e-9) << "n=" << n << " k=" << k;
  }
  EXPECT_NEAR(euclidean_sobolev_constant(6, 2), 247.284447366, 1e-6);
}

TEST(EuclideanSobolev, RejectsInvalidPairs) {
  EXPECT_THROW(euclidean_sobolev_constant(4, 2), DomainError);
  EXPECT_THROW(euclidean_sobolev_constant(3, 0), DomainError);
}

TEST(BubbleIntegral, MatchesBetaFunction) {
  // int (1 + r^2)^{-gamma} dx = |S^{n-1}| B(n/2, gamma - n/2) / 2
  for (int n : {3, 6, 9})
    for (double gamma : {0.5 * n + 0.7, 1.0 * n, 1.5 * n + 2.0}) {
      const double a = 0.5 * n, b = gamma - 0.5 * n;
      const double beta = std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
      EXPECT_NEAR(detail::bubble_power_integral(n, gamma) / (0.5 * special::sphere_area(n) * beta), 1.0, 1e-11)
          << "n=" << n << " gamma=" << gamma;
    }
  EXPECT_THROW(detail::bubble_power_integral(4, 2.0), DomainError);
}

TEST(BubbleSeries, LaplacianOfBubbleIsBubblePower) {
  // -Delta U = n(n-2) U^{(n+2)/(n-2)} for U = (1+r^2)^{-(n-2)/2}
  for (int n : {3, 5, 8}) {
    const auto v = BubbleSeries{0.5 * (n - 2.0), {{0, 1.0}}}.neg_laplacian(n);
    EXPECT_NEAR(v.coef.at(1), 0.0, 1e-12);
    EXPECT_NEAR(v.coef.at(2), n * (n - 2.0), 1e-12);
  }
}

TEST(CompareConstants, SubcriticalRow) {
  const auto r = compare_constants(5, 2, 3.0);
  EXPECT_EQ(r.regime, Regime::subcritical);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.verdict, "PASS");
  EXPECT_EQ(r.S_value, 0.0);
  EXPECT_GT(r.C_value, 0.0);
  EXPECT_NE(r.notes.find("N=4000"), std::string::npos);
}

TEST(CompareConstants, FirstOrderCriticalBelowSobolev) {
  for (int n : {4, 5}) {
    const auto r = compare_constants(n, 1, 2.0 * n / (n - 2.0));
    EXPECT_EQ(r.regime, Regime::critical_above);
    EXPECT_EQ(r.status, SolverStatus::converged) << "n=" << n;
    EXPECT_GT(r.margin, 0.0) << "n=" << n;
    EXPECT_TRUE(r.passed);
  }
}

TEST(CompareConstants, MarginStableUnderRefinement) {
  SolverConfig c;
  c.n = 5;
  c.k = 1;
  c.p = 10.0 / 3.0;
  const auto a = compare_constants(c);
  c.N *= 2;
  const auto b = compare_constants(c);
  ASSERT_EQ(a.status, SolverStatus::converged);
  ASSERT_EQ(b.status, SolverStatus::converged);
  EXPECT_LT(std::abs(a.margin - b.margin), 0.01);
}

TEST(CompareConstants, RegimeNames) {
  EXPECT_STREQ(to_string(Regime::subcritical), "subcritical");
  EXPECT_STREQ(to_string(Regime::critical_above), "critical n>=2k+2");
  EXPECT_STREQ(to_string(Regime::critical_boundary), "critical n=2k+1");
}

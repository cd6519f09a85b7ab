#include <gtest/gtest.h>

#include <cmath>

#include "hyperlab/ball_geometry.hpp"
#include "hyperlab/gjms_kernels.hpp"
#include "hyperlab/rearrangement.hpp"

using namespace hyperlab;

namespace {

BallPoint at(int n, double rho, int axis = 0) {
  std::vector<double> dir(n, 0.0);
  dir[axis] = rho < 0.0 ? -1.0 : 1.0;
  return BallPoint::along(dir, std::abs(rho));
}

RadialProfile two_level_ring(const GridPtr& g) {
  return RadialProfile::sample(g, [](double r) { return std::exp(-4.0 * (r - 2.0) * (r - 2.0)) + 0.3 * std::exp(-r); });
}

}  // namespace

TEST(DistributionFunction, WeightedExample) {
  const auto d = detail::distribution_from_weighted({{3.0, 1.0}, {-1.0, 2.0}, {3.0, 0.5}, {0.0, 4.0}, {2.0, 1.0}});
  EXPECT_EQ(d.levels, (std::vector<double>{3.0, 2.0, 1.0}));
  EXPECT_EQ(d.cumulative, (std::vector<double>{1.5, 2.5, 4.5}));
  EXPECT_EQ(d.measures, (std::vector<double>{0.0, 1.5, 2.5}));
  EXPECT_EQ(d.total_measure(), 4.5);
  EXPECT_EQ(d.measure_above(2.5), 1.5);
  EXPECT_EQ(d.measure_above(2.0), 1.5);
  EXPECT_EQ(d.measure_above(0.5), 4.5);
  EXPECT_EQ(d.measure_above(3.0), 0.0);
  EXPECT_EQ(d.rearranged(0.0), 3.0);
  EXPECT_EQ(d.rearranged(1.49), 3.0);
  EXPECT_EQ(d.rearranged(1.5), 2.0);
  EXPECT_EQ(d.rearranged(4.4), 1.0);
  EXPECT_EQ(d.rearranged(4.5), 0.0);
  EXPECT_THROW(d.rearranged(-1.0), DomainError);
  EXPECT_THROW(detail::distribution_from_weighted({}), DomainError);
}

TEST(GeodesicRearrangement, DecreasingProfileIsFixed) {
  const auto g = RadialGrid::uniform_cells(3, 10.0, 4000);
  const auto f = RadialProfile::sample(g, [](double r) { return std::exp(-r * r); });
  const auto fs = geodesic_rearrangement(f);
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_NEAR(fs.values[i], f.values[i], 5e-3) << "rho=" << g->nodes[i];
}

TEST(GeodesicRearrangement, RingBecomesDecreasingAndPreservesNorms) {
  for (int n : {3, 5}) {
    const auto g = RadialGrid::uniform_cells(n, 8.0, 4000);
    const auto f = two_level_ring(g);
    const auto fs = geodesic_rearrangement(f);
    double fmax = 0.0;
    for (double v : f.values) fmax = std::max(fmax, v);
    EXPECT_EQ(fs.values[0], fmax);
    for (std::size_t i = 1; i < fs.size(); ++i) ASSERT_LE(fs.values[i], fs.values[i - 1]);
    const double pc = 2.0 * n / (n - 2.0);
    for (double p : {2.0, pc}) EXPECT_NEAR(fs.lp_norm_pow(p) / f.lp_norm_pow(p), 1.0, 2e-3) << "n=" << n << " p=" << p;
  }
}

TEST(GeodesicRearrangement, Equimeasurable) {
  const auto g = RadialGrid::uniform_cells(4, 8.0, 4000);
  const auto f = two_level_ring(g);
  const auto df = one_dim_rearrangement(f);
  const auto ds = one_dim_rearrangement(geodesic_rearrangement(f));
  for (double t : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const double a = df.measure_above(t), b = ds.measure_above(t);
    EXPECT_NEAR(b / a, 1.0, 5e-3) << "t=" << t;
  }
}

TEST(SampledFunction, MeasureIsBallVolume) {
  const auto s = sample_function([](const BallPoint& x) { return 1.0 / (1.0 + geodesic_radius(x).value()); }, 3, 2.0,
                                 20000, 7);
  const auto d = one_dim_rearrangement(s);
  EXPECT_NEAR(d.total_measure(), ball_volume(3, 2.0), 1e-9 * ball_volume(3, 2.0));
  // half the volume of B(0,2) lies outside the radius with half volume
  const double r_half = ball_radius_for_volume(3, 0.5 * ball_volume(3, 2.0)).value();
  const double frac = d.measure_above(1.0 / (1.0 + r_half)) / d.total_measure();
  EXPECT_NEAR(frac, 0.5, 0.02);
  for (const auto& p : s.points) ASSERT_LE(geodesic_radius(p).value(), 2.0 + 1e-9);
}

TEST(StepFunction, OffCentreBallMovesToOrigin) {
  const StepFunction h(3, {{at(3, 1.5), 0.0, 0.8, 2.0}});
  const auto hs = h.rearranged();
  ASSERT_EQ(hs.pieces().size(), 1u);
  EXPECT_EQ(hs.pieces()[0].center.norm(), 0.0);
  EXPECT_NEAR(hs.pieces()[0].r_outer, 0.8, 1e-12);
  EXPECT_EQ(hs.pieces()[0].value, 2.0);
  EXPECT_NEAR(h(at(3, 1.5)), 2.0, 0.0);
  EXPECT_EQ(h(BallPoint::origin(3)), 0.0);
}

TEST(StepFunction, TwoPiecesStackIntoShells) {
  const int n = 4;
  const StepFunction h(n, {{at(n, 2.0), 0.0, 1.0, 1.0}, {at(n, 2.0, 1), 0.0, 0.5, 3.0}});
  const auto hs = h.rearranged();
  ASSERT_EQ(hs.pieces().size(), 2u);
  EXPECT_EQ(hs.pieces()[0].value, 3.0);
  EXPECT_NEAR(hs.pieces()[0].r_outer, 0.5, 1e-12);
  const double v = ball_volume(n, 0.5) + ball_volume(n, 1.0);
  EXPECT_NEAR(ball_volume(n, hs.pieces()[1].r_outer), v, 1e-10 * v);
  for (double p : {1.0, 2.0, 4.0}) EXPECT_NEAR(hs.lp_norm_pow(p), h.lp_norm_pow(p), 1e-10 * h.lp_norm_pow(p));
}

TEST(StepFunction, RejectsOverlapAndBadPieces) {
  EXPECT_THROW(StepFunction(3, {{at(3, 0.5), 0.0, 1.0, 1.0}, {at(3, 1.0), 0.0, 1.0, 1.0}}), DomainError);
  EXPECT_THROW(StepFunction(3, {{at(3, 0.5), 0.0, 1.0, -1.0}}), DomainError);
  EXPECT_THROW(StepFunction(3, {}), DomainError);
  EXPECT_NO_THROW(StepFunction(3, {{BallPoint::origin(3), 0.0, 1.0, 2.0}, {BallPoint::origin(3), 1.0, 2.0, 1.0}}));
}

TEST(Symmetrization, SymmetricInputHasNoGap) {
  const StepFunction h(3, {{BallPoint::origin(3), 0.0, 0.7, 2.0}, {BallPoint::origin(3), 0.7, 1.5, 0.5}});
  const auto r = symmetrization_gap_with(h, [](double d) { return std::exp(-d); }, 20000, 3);
  EXPECT_NEAR(r.gap, 0.0, 1e-12 * r.bilinear_original);
  EXPECT_TRUE(r.holds(0.0));
}

TEST(Symmetrization, SeparatedBumpsGainFromRearrangement) {
  const int n = 3;
  const StepFunction h(n, {{at(n, 2.0), 0.0, 0.6, 1.0}, {at(n, -2.0), 0.0, 0.6, 1.0}});
  const auto r = symmetrization_gap_with(h, [](double d) { return std::exp(-d); }, 100000, 11);
  EXPECT_GT(r.gap, 3.0 * r.se_gap);
  EXPECT_TRUE(r.holds(3.0));
  EXPECT_EQ(r.samples, 100000);
}

TEST(Symmetrization, SingleOffCentreBallIsInvariant) {
  // an isometry carries the ball to the origin, so the gap vanishes in expectation
  const StepFunction h(3, {{at(3, 1.2), 0.0, 0.9, 1.0}});
  const auto r = symmetrization_gap_with(h, [](double d) { return 1.0 / (1.0 + d); }, 50000, 5);
  EXPECT_LT(std::abs(r.gap), 4.0 * r.se_gap + 1e-12 * r.bilinear_original);
}

TEST(Symmetrization, GreenKernelOfFirstOrderOperator) {
  const int n = 4;
  const auto grid = RadialGrid::kernel(n, 1e-3, 0.5, 12.0, 40, 0.05);
  const auto K = gk_inverse_kernel(1, n, grid, KernelRoute::convolution);
  const StepFunction h(n, {{at(n, 1.5), 0.0, 0.5, 2.0}, {at(n, 1.5, 1), 0.0, 0.4, 1.0}});
  const auto r = symmetrization_gap(h, K, 100000, 17);
  EXPECT_TRUE(r.holds(3.0)) << "gap " << r.gap << " se " << r.se_gap;
  EXPECT_GT(r.gap, 0.0);
}

TEST(Symmetrization, RejectsNonMonotoneKernel) {
  const auto grid = RadialGrid::kernel(4, 1e-3, 0.5, 6.0, 30, 0.1);
  auto K = gk_inverse_kernel(1, 4, grid, KernelRoute::convolution);
  K.values[50] = K.values[49] * 2.0;
  const StepFunction h(4, {{BallPoint::origin(4), 0.0, 0.5, 1.0}});
  EXPECT_THROW(symmetrization_gap(h, K, 100, 1), DomainError);
}

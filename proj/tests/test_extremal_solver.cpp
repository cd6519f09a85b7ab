#include <gtest/gtest.h>

#include <gsl/gsl_multimin.h>

#include <cmath>
#include <random>

#include "hyperlab/constants.hpp"
#include "hyperlab/extremal_solver.hpp"

using namespace hyperlab;

namespace {

std::vector<double> sample(const GridPtr& g, double (*f)(double)) {
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g->nodes[i]);
  return v;
}

double gauss(double r) { return std::exp(-r * r); }

SolverConfig config(int n, int k, double p) {
  SolverConfig c;
  c.n = n;
  c.k = k;
  c.p = p;
  return c;
}

struct RayleighData {
  const DiscreteOperator* op;
  int k;
  double p;
};

double rayleigh_gsl(const gsl_vector* x, void* params) {
  const auto* d = static_cast<const RayleighData*>(params);
  std::vector<double> f(x->size);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = gsl_vector_get(x, i);
  const double nrm = detail::lp_norm(*d->op, f, d->p);
  if (!(nrm > 0.0)) return 1e300;
  return energy_form(*d->op, f, d->k) / (nrm * nrm);
}

}  // namespace

TEST(DiscreteOperator, ConstantProfile) {
  for (int n : {3, 6}) {
    const auto op = assemble_p1(RadialGrid::uniform_cells(n, 10.0, 500));
    const std::vector<double> one(op.size(), 1.0);
    const auto v = op.apply_p1(one);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) ASSERT_NEAR(v[i], -0.25 * n * (n - 2.0), 1e-6);
    EXPECT_GT(v.back(), -0.25 * n * (n - 2.0));
  }
}

TEST(DiscreteOperator, SelfAdjointInVolumeInnerProduct) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (double beta : {0.0, 4.0}) {
    const auto op = assemble_p1(RadialGrid::graded_cells(5, 12.0, 700, beta));
    std::vector<double> a(op.size()), b(op.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = g(rng) * std::exp(-0.3 * op.grid->nodes[i]);
      b[i] = g(rng) * std::exp(-0.3 * op.grid->nodes[i]);
    }
    const double lhs = op.inner(op.apply_p1(a), b), rhs = op.inner(a, op.apply_p1(b));
    EXPECT_NEAR(lhs, rhs, 1e-10 * (std::abs(lhs) + std::abs(rhs)));
  }
}

TEST(DiscreteOperator, CartesianAndGeodesicFormsCoincide) {
  const auto grid = RadialGrid::graded_cells(6, 12.0, 600, 3.0);
  const auto a = assemble_p1(grid), b = assemble_p1_cartesian(grid);
  EXPECT_EQ(a.form, "geodesic");
  EXPECT_EQ(b.form, "cartesian");
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_NEAR(b.face[i] / a.face[i], 1.0, 1e-8);
    ASSERT_NEAR(b.volume[i] / a.volume[i], 1.0, 1e-8);
  }
  const auto f = sample(grid, gauss);
  const auto pa = a.apply_p1(f), pb = b.apply_p1(f);
  for (std::size_t i = 0; i < f.size(); ++i) ASSERT_NEAR(pa[i], pb[i], 1e-8 * (1.0 + std::abs(pa[i])));
}

TEST(DiscreteOperator, RequiresCellGrid) {
  EXPECT_THROW(assemble_p1(RadialGrid::composite(4)), DomainError);
  EXPECT_THROW(assemble_p1_cartesian(RadialGrid::composite(4)), DomainError);
}

TEST(EnergyForm, ZeroProfile) {
  const auto op = assemble_p1(RadialGrid::uniform_cells(5, 10.0, 500));
  EXPECT_EQ(energy_form(op, std::vector<double>(op.size(), 0.0), 2), 0.0);
}

TEST(EnergyForm, FirstOrderGradientIdentity) {
  // <G_1 f, f> = int |f'|^2 dV - (n-1)^2/4 int f^2 dV
  for (int n : {3, 5}) {
    const auto op = assemble_p1(RadialGrid::uniform_cells(n, 10.0, 8000));
    const auto f = sample(op.grid, gauss);
    const auto rule = quad::gauss_legendre(200, 0.0, 10.0);
    const double omega = special::sphere_area(n);
    const double grad = rule.apply([&](double r) { return 4.0 * r * r * gauss(r) * gauss(r) * omega * std::pow(std::sinh(r), n - 1); });
    const double l2 = rule.apply([&](double r) { return gauss(r) * gauss(r) * omega * std::pow(std::sinh(r), n - 1); });
    const double ref = grad - 0.25 * (n - 1.0) * (n - 1.0) * l2;
    EXPECT_NEAR(energy_form(op, f, 1) / ref, 1.0, 1e-5) << "n=" << n;
  }
}

TEST(EnergyForm, MatchesSpectralEnergy) {
  // <G_k f, f> = int gk_symbol |fhat|^2 sigma d lambda
  const int n = 6;
  const auto rg = RadialGrid::composite(n);
  const auto fg = FrequencyGrid::gauss_legendre(n, 768, 40.0);
  const auto F = radial_ht_forward(RadialProfile::sample(rg, gauss), fg);
  for (int k : {1, 2}) {
    double ref = 0.0;
    for (std::size_t j = 0; j < fg->size(); ++j)
      ref += fg->weights[j] * F.plancherel_weight[j] * gk_symbol(fg->lambdas[j], k) * F.values[j] * F.values[j];
    const auto op = assemble_p1(RadialGrid::uniform_cells(n, 10.0, 8000));
    EXPECT_NEAR(energy_form(op, sample(op.grid, gauss), k) / ref, 1.0, 1e-4) << "k=" << k;
  }
}

TEST(GkSolve, InvertsForwardOperator) {
  for (int k : {1, 2, 3}) {
    const int n = 2 * k + 2;
    const auto grid = RadialGrid::uniform_cells(n, 12.0, 800);
    const RadialProfile f{grid, sample(grid, gauss)};
    const auto u = gk_solve(f, factorization_roots(k));
    const auto op = assemble_p1(grid);
    const auto back = apply_gk(op, u.values, k);
    double num = 0.0, umax = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
      num = std::max(num, std::abs(back[i] - f.values[i]));
      umax = std::max(umax, std::abs(u.values[i]));
    }
    // applying the order-2k stencil loses about h^{-2k} in roundoff
    const double h = 12.0 / 800;
    EXPECT_LT(num, std::max(1e-10, 1e-11 * umax * std::pow(h, -2 * k))) << "k=" << k;
  }
}

TEST(GkSolve, PositivityOfInverse) {
  for (int k : {1, 2, 3, 4}) {
    const int n = 2 * k + 1;
    const auto grid = RadialGrid::uniform_cells(n, 15.0, 1500);
    std::vector<double> rhs(grid->size(), 0.0);
    rhs[700] = 1.0;
    const auto u = gk_solve(RadialProfile{grid, rhs}, factorization_roots(k));
    for (double v : u.values) ASSERT_GT(v, 0.0) << "k=" << k;
  }
}

TEST(GkSolve, PointSourceReproducesKernelShape) {
  const int n = 6, k = 2;
  const auto grid = RadialGrid::uniform_cells(n, 15.0, 3000);
  std::vector<double> rhs(grid->size(), 0.0);
  rhs[0] = 1.0 / grid->weights[0];
  const auto u = gk_solve(RadialProfile{grid, rhs}, factorization_roots(k));
  std::vector<double> nodes;
  std::vector<double> vals;
  for (std::size_t i = 0; i < grid->size(); ++i)
    if (grid->nodes[i] > 0.3 && grid->nodes[i] < 5.0 && i % 10 == 0) {
      nodes.push_back(grid->nodes[i]);
      vals.push_back(u.values[i]);
    }
  const auto K = gk_inverse_kernel(k, n, RadialGrid::from_nodes(n, nodes), KernelRoute::spectral);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    ab += vals[i] * K.values[i];
    aa += vals[i] * vals[i];
    bb += K.values[i] * K.values[i];
  }
  EXPECT_GT(ab / std::sqrt(aa * bb), 0.999);
}

TEST(SolverConfig, Validation) {
  EXPECT_NO_THROW(config(5, 2, 3).validate());
  EXPECT_THROW(config(4, 2, 3).validate(), DomainError);
  EXPECT_THROW(config(5, 2, 11).validate(), DomainError);
  EXPECT_THROW(config(5, 2, 2).validate(), DomainError);
  auto c = config(5, 2, 3);
  c.N = 60;
  EXPECT_THROW(c.validate(), DomainError);
  EXPECT_NO_THROW(c.validate_model());
  c.seed = "flat";
  EXPECT_THROW(c.validate_model(), DomainError);
  EXPECT_TRUE(config(6, 2, 6).critical());
  EXPECT_EQ(config(6, 2, 6).effective_damping(), 0.5);
  EXPECT_EQ(config(5, 2, 3).effective_damping(), 1.0);
}

class Subcritical : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { result_ = new ExtremalResult(solve_extremal(config(5, 2, 3))); }
  static void TearDownTestSuite() {
    delete result_;
    result_ = nullptr;
  }
  static ExtremalResult* result_;
};
ExtremalResult* Subcritical::result_ = nullptr;

TEST_F(Subcritical, ConvergesWithSmallResidual) {
  const auto& rep = result_->report;
  EXPECT_EQ(rep.status, SolverStatus::converged);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.el_residual, 1e-6);
  EXPECT_GT(rep.quotient, 0.0);
  EXPECT_NEAR(rep.lp_norm, 1.0, 1e-12);
  EXPECT_NEAR(rep.energy, rep.quotient, 1e-12 * rep.quotient);
}

TEST_F(Subcritical, QuotientDecreasesFromSeed) {
  const auto& rep = result_->report;
  EXPECT_GE(rep.seed_quotient, rep.quotient);
  EXPECT_EQ(rep.trace.size(), static_cast<std::size_t>(rep.iterations + 1));
  EXPECT_GT(rep.monotone_fraction, 0.99);
}

TEST_F(Subcritical, ProfileIsPositiveDecreasingAndDecays) {
  const auto cert = profile_certificate(result_->f);
  EXPECT_TRUE(cert.passed) << cert.reason << " at " << cert.first_violation;
  const auto d = decay_check(result_->f, config(5, 2, 3));
  EXPECT_TRUE(d.passed);
  EXPECT_LT(d.fitted_log_slope, -d.bound_exponent);
}

TEST_F(Subcritical, IsFixedPointOfDualityMap) {
  const auto next = duality_iterate(result_->f, config(5, 2, 3));
  double m = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) m = std::max(m, std::abs(next.values[i] - result_->f.values[i]));
  EXPECT_LT(m, 1e-6 * result_->f.values[0]);
}

TEST_F(Subcritical, EulerLagrangeScaling) {
  // u = C^{1/(p-2)} f solves G_k u = u^{p-1}
  const double C = result_->report.quotient;
  EXPECT_NEAR(result_->u.values[0], C * result_->f.values[0], 1e-12 * result_->u.values[0]);
  EXPECT_LT(result_->report.el_residual_strong, 1e-3);
}

TEST(SubcriticalRefinement, StableUnderGridDoublingAndLargerDomain) {
  const double base = solve_extremal(config(5, 2, 3)).report.quotient;
  auto fine = config(5, 2, 3);
  fine.N *= 2;
  auto wide = config(5, 2, 3);
  wide.L += 3.0;
  wide.N = static_cast<int>(std::lround(wide.L * 100.0));
  EXPECT_NEAR(solve_extremal(fine).report.quotient / base, 1.0, 5e-3);
  EXPECT_NEAR(solve_extremal(wide).report.quotient / base, 1.0, 5e-3);
}

TEST(SubcriticalRefinement, ResidualTracksTolerance) {
  auto loose = config(5, 2, 3);
  loose.tol = 1e-5;
  const auto a = solve_extremal(loose).report;
  const auto b = solve_extremal(config(5, 2, 3)).report;
  EXPECT_TRUE(a.converged);
  EXPECT_LT(b.el_residual, a.el_residual);
  EXPECT_LT(b.iterations, 2000);
  EXPECT_GT(b.iterations, a.iterations);
}

TEST(DirectMinimization, AgreesWithDualityOnCoarseGrid) {
  auto cfg = config(5, 2, 3);
  cfg.N = 60;
  cfg.L = 10.0;
  const auto res = solve_extremal(cfg, false);
  ASSERT_TRUE(res.report.converged);

  const auto grid = RadialGrid::graded_cells(cfg.n, cfg.L, cfg.N, cfg.grading);
  const auto op = assemble_p1(grid);
  RayleighData data{&op, cfg.k, cfg.p};
  gsl_multimin_function fn{&rayleigh_gsl, static_cast<std::size_t>(cfg.N), &data};
  gsl_vector* x = gsl_vector_alloc(cfg.N);
  gsl_vector* step = gsl_vector_alloc(cfg.N);
  for (int i = 0; i < cfg.N; ++i) gsl_vector_set(x, i, std::exp(-0.5 * grid->nodes[i]));
  auto* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, cfg.N);
  double best = 1e300;
  for (int restart = 0; restart < 400; ++restart) {
    for (int i = 0; i < cfg.N; ++i) gsl_vector_set(step, i, 0.1 * std::abs(gsl_vector_get(x, i)) + 1e-6);
    gsl_multimin_fminimizer_set(s, &fn, x, step);
    for (int it = 0; it < 20000; ++it) {
      if (gsl_multimin_fminimizer_iterate(s)) break;
      if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-9) == GSL_SUCCESS) break;
    }
    gsl_vector_memcpy(x, gsl_multimin_fminimizer_x(s));
    const double v = s->fval;
    if (best - v < 1e-7 * v) {
      best = std::min(best, v);
      break;
    }
    best = v;
  }
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(step);
  gsl_vector_free(x);
  EXPECT_NEAR(best / res.report.quotient, 1.0, 0.01);
  EXPECT_GE(best, res.report.quotient * (1.0 - 1e-9));
}

TEST(DecayCheck, Examples) {
  const auto cfg = config(5, 2, 3);
  const auto grid = RadialGrid::uniform_cells(5, 15.0, 1500);
  const auto constant = RadialProfile::sample(grid, [](double) { return 1.0; });
  EXPECT_FALSE(decay_check(constant, cfg).passed);
  const auto fast = RadialProfile::sample(grid, [](double r) { return std::exp(-4.0 * r); });
  const auto d = decay_check(fast, cfg);
  EXPECT_TRUE(d.passed);
  EXPECT_NEAR(d.fitted_log_slope, -4.0, 1e-9);
  EXPECT_NEAR(d.q, 1.0 + 5.0, 1e-15);
  EXPECT_NEAR(d.bound_exponent, 4.0 / 6.0, 1e-15);
  const auto slow = RadialProfile::sample(grid, [](double r) { return std::exp(-0.5 * r); });
  EXPECT_FALSE(decay_check(slow, cfg).passed);
}

TEST(BoundaryCase, ThreeDimensionalCriticalConcentratesOrMatchesSobolev) {
  const auto r = compare_constants(3, 1, 6.0);
  EXPECT_EQ(r.regime, Regime::critical_boundary);
  EXPECT_TRUE(r.status == SolverStatus::concentrated || std::abs(r.margin) < kBoundaryBand)
      << "C=" << r.C_value << " S=" << r.S_value;
  EXPECT_TRUE(r.passed);
}

TEST(CriticalCase, SixDimensionalSecondOrderConvergesBelowSobolev) {
  const auto r = compare_constants(6, 2, 6.0);
  EXPECT_EQ(r.regime, Regime::critical_above);
  EXPECT_EQ(r.status, SolverStatus::converged) << "C=" << r.C_value << " S=" << r.S_value;
  EXPECT_GT(r.margin, 0.0);
}

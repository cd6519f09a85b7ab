#pragma once

// Kernels of G_k^{-1} = (P_1 - lambda_1)^{-1} * ... * (P_1 - lambda_k)^{-1}.
//
// Real factors use the closed t-integral for the resolvent of -Delta_H.
// The spectral route inverts a rational multiplier 1/Q(x), x = (lambda^2+1)/4:
// a sum of resolvents at reference poles b_l = -2l absorbs the slowly decaying
// part of the multiplier, the remainder is inverted by quadrature in lambda.
// The convolution route composes factor kernels in position space.

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hyperlab/error.hpp"
#include "hyperlab/profile.hpp"
#include "hyperlab/quadrature.hpp"
#include "hyperlab/special.hpp"
#include "hyperlab/spectral.hpp"

namespace hyperlab {

// ---------------------------------------------------------------------------
// Factorization of G_k
// ---------------------------------------------------------------------------

struct FactorizationSpectrum {
  int k = 0;
  std::vector<cplx> roots;     // 1/4 first, then by decreasing real part
  std::vector<double> thetas;  // theta per real root, same order as real_roots()
  double alpha = 0.0;

  std::vector<double> real_roots() const {
    std::vector<double> r;
    for (const auto& z : roots)
      if (z.imag() == 0.0) r.push_back(z.real());
    return r;
  }
  /// One representative (positive imaginary part) per conjugate pair.
  std::vector<cplx> complex_pairs() const {
    std::vector<cplx> r;
    for (const auto& z : roots)
      if (z.imag() > 0.0) r.push_back(z);
    return r;
  }
};

/// Integer coefficients (ascending) of prod_{i=1}^k (y + 4 i (i-1)) - prod (2i-1)^2,
/// the G_k polynomial in y = 4x. Exact for k <= 8.
inline std::vector<std::int64_t> gk_polynomial_y(int k) {
  detail::require(k >= 1 && k <= 8, "gk_polynomial_y: k must lie in [1, 8]");
  std::vector<std::int64_t> c{1};
  std::int64_t odd = 1;
  for (int i = 1; i <= k; ++i) {
    const std::int64_t shift = 4LL * i * (i - 1);
    std::vector<std::int64_t> next(c.size() + 1, 0);
    for (std::size_t j = 0; j < c.size(); ++j) {
      next[j] += shift * c[j];
      next[j + 1] += c[j];
    }
    c = std::move(next);
    odd *= (2LL * i - 1) * (2LL * i - 1);
  }
  c[0] -= odd;
  return c;
}

/// x(x+2)...(x+k(k-1)) - alpha together with a magnitude scale for relative residuals.
inline std::pair<cplx, double> gk_polynomial_residual(cplx x, int k) {
  cplx prod = 1.0;
  double scale = 1.0;
  for (int i = 1; i <= k; ++i) {
    prod *= x + static_cast<double>(i * (i - 1));
    scale *= std::abs(x + static_cast<double>(i * (i - 1)));
  }
  const double a = gk_alpha(k);
  return {prod - a, scale + a};
}

/// Roots of x(x+2)...(x+k(k-1)) = alpha_k. The root 1/4 is deflated exactly;
/// the rest come from companion-matrix eigenvalues polished by Newton steps.
inline FactorizationSpectrum factorization_roots(int k) {
  detail::require(k >= 1 && k <= 8, "factorization_roots: k must lie in [1, 8]");
  FactorizationSpectrum s;
  s.k = k;
  s.alpha = gk_alpha(k);
  s.roots.push_back(0.25);
  auto c = gk_polynomial_y(k);
  // synthetic division by (y - 1); exact because y = 1 is a root
  std::vector<std::int64_t> q(k, 0);
  std::int64_t carry = 0;
  for (int j = k; j >= 1; --j) {
    carry = c[j] + carry;
    q[j - 1] = carry;
  }
  if (c[0] + carry != 0) throw NumericalError("factorization_roots: y = 1 is not an exact root");
  const int m = k - 1;
  if (m > 0) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i) comp(i, m - 1) = -static_cast<double>(q[i]) / static_cast<double>(q[m]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (int i = 0; i < m; ++i) {
      cplx y = es.eigenvalues()[i];
      // Newton on the deflated integer polynomial
      for (int it = 0; it < 50; ++it) {
        cplx p = 0.0, dp = 0.0;
        for (int j = m; j >= 0; --j) {
          dp = dp * y + p;
          p = p * y + static_cast<double>(q[j]);
        }
        const cplx step = p / dp;
        y -= step;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(y))) break;
      }
      cplx x = 0.25 * y;
      if (std::abs(x.imag()) <= 1e-12 * std::max(1.0, std::abs(x))) x.imag(0.0);
      s.roots.push_back(x);
    }
  }
  // exact conjugate symmetry for the complex ones
  for (auto& z : s.roots) {
    if (z.imag() < 0.0) continue;
    for (auto& w : s.roots) {
      if (&w != &z && w.imag() < 0.0 && std::abs(w - std::conj(z)) < 1e-8 * std::max(1.0, std::abs(z))) {
        const cplx avg = 0.5 * (z + std::conj(w));
        z = avg;
        w = std::conj(avg);
      }
    }
  }
  std::stable_sort(s.roots.begin() + 1, s.roots.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  for (const auto& z : s.roots) {
    const auto [res, scale] = gk_polynomial_residual(z, k);
    if (std::abs(res) > 1e-10 * scale) throw NumericalError("factorization_roots: substitution residual check failed");
  }
  for (double r : s.real_roots()) s.thetas.push_back(std::sqrt(std::max(0.0, 0.25 - r)) - 0.5);
  return s;
}

/// theta = sqrt(1/4 - lambda_j) - 1/2. The shift lambda~_j + (n-1)^2/4 equals
/// 1/4 - lambda_j for every n.
inline double theta_parameter(double lambda_j, int n) {
  detail::require(n >= 2, "theta_parameter: dimension must be at least 2");
  detail::require(lambda_j <= 0.25, "theta_parameter: requires lambda_j <= 1/4");
  return std::sqrt(0.25 - lambda_j) - 0.5;
}

// ---------------------------------------------------------------------------
// Resolvent kernel of (P_1 - lambda_j)^{-1}, lambda_j <= 1/4
// ---------------------------------------------------------------------------

namespace detail {

inline double resolvent_integral(double rho, int n, double theta, int panel_order) {
  using std::numbers::pi;
  const double e = 0.5 * (n - 4.0) - theta;
  const double p = 2.0 * theta + 1.0;
  const double logA = -0.5 * n * std::log(2.0 * pi) + std::lgamma(0.5 * n + theta) - (theta + 1.0) * std::numbers::ln2 -
                      std::lgamma(theta + 1.0);
  const double lsh = log_sinh(rho);
  const double sh2 = 2.0 * std::pow(std::sinh(0.5 * rho), 2);
  // u = pi - t; the integrand peaks at u ~ rho when rho is small
  std::vector<double> edges{0.0};
  for (double h = 0.25 * rho; h < pi; h *= 2.0) edges.push_back(h);
  edges.push_back(pi);
  const auto rule = quad::composite_gauss(edges, panel_order);
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double u = rule.nodes[q];
    const double su = std::sin(0.5 * u);
    // cosh rho + cos t = 2 sinh^2(rho/2) + 2 sin^2(u/2)
    const double base = sh2 + 2.0 * su * su;
    double lg = logA + e * std::log(base) - (n - 2.0) * lsh;
    if (p != 0.0) lg += p * std::log(std::sin(u));
    s += rule.weights[q] * std::exp(lg);
  }
  return s;
}

}  // namespace detail

/// K(rho) = A_n sinh^{2-n}(rho) int_0^pi (cosh rho + cos t)^{(n-4)/2 - theta} sin^{2 theta + 1}(t) dt.
/// Throws NumericalError if doubling the per-panel order moves the value by
/// more than 1e-9 relative.
inline double resolvent_kernel_value(double lambda_j, int n, double rho, int panel_order = 32) {
  detail::require(n >= 3, "resolvent_kernel: requires n >= 3");
  detail::require(rho > 0.0 && std::isfinite(rho), "resolvent_kernel: rho must be positive");
  const double theta = theta_parameter(lambda_j, n);
  const double a = detail::resolvent_integral(rho, n, theta, panel_order);
  const double b = detail::resolvent_integral(rho, n, theta, 2 * panel_order);
  if (!(std::abs(a - b) <= 1e-9 * std::abs(b)))
    throw NumericalError("resolvent_kernel: t-quadrature did not converge");
  return b;
}

// ---------------------------------------------------------------------------
// Kernel profiles
// ---------------------------------------------------------------------------

struct KernelProfile {
  GridPtr grid;
  std::vector<double> values;
  int n = 0;
  int k = 0;            // order of G_k, 0 for a single factor
  std::string route;    // "t-integral", "spectral", "convolution", "pair", ...
  std::string label;    // free-form description (root, parameters)

  std::size_t size() const { return values.size(); }
  double rho(std::size_t i) const { return grid->nodes[i]; }

  template <class F>
  static KernelProfile sample(GridPtr g, F&& f, int n, int k, std::string route, std::string label = {}) {
    KernelProfile p;
    p.values.resize(g->size());
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] = f(g->nodes[i]);
    p.grid = std::move(g);
    p.n = n;
    p.k = k;
    p.route = std::move(route);
    p.label = std::move(label);
    return p;
  }

  RadialProfile as_profile() const { return {grid, values}; }

  /// CSV with columns rho,value,route,n,k.
  void write_csv(std::ostream& os) const {
    char buf[64];
    os << "rho,value,route,n,k\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g", grid->nodes[i], values[i]);
      os << buf << ',' << route << ',' << n << ',' << k << '\n';
    }
  }
};

inline KernelProfile resolvent_kernel(double lambda_j, int n, const GridPtr& grid, int panel_order = 32) {
  detail::require(grid && grid->n == n, "resolvent_kernel: grid dimension mismatch");
  return KernelProfile::sample(
      grid, [&](double r) { return resolvent_kernel_value(lambda_j, n, r, panel_order); }, n, 0, "t-integral",
      "lambda=" + std::to_string(lambda_j));
}

struct MonotonicityReport {
  bool passed = true;
  double min_value = 0.0;
  double min_decrement = 0.0;           // min_i K_i - K_{i+1}
  double min_relative_decrement = 0.0;  // min_i (K_i - K_{i+1}) / K_i
  long first_violation = -1;            // node index of the first failure
  std::string reason;
};

/// Positivity at every node and strict decrease across every adjacent pair.
inline MonotonicityReport monotonicity_certificate(const KernelProfile& K) {
  detail::require(!K.values.empty(), "monotonicity_certificate: empty kernel");
  MonotonicityReport r;
  r.min_value = *std::min_element(K.values.begin(), K.values.end());
  r.min_decrement = std::numeric_limits<double>::infinity();
  r.min_relative_decrement = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < K.size(); ++i) {
    if (!(K.values[i] > 0.0) && r.passed) {
      r.passed = false;
      r.first_violation = static_cast<long>(i);
      r.reason = "nonpositive value";
    }
    if (i + 1 < K.size()) {
      const double d = K.values[i] - K.values[i + 1];
      r.min_decrement = std::min(r.min_decrement, d);
      if (K.values[i] > 0.0) r.min_relative_decrement = std::min(r.min_relative_decrement, d / K.values[i]);
      if (!(d > 0.0) && r.passed) {
        r.passed = false;
        r.first_violation = static_cast<long>(i + 1);
        r.reason = "not strictly decreasing";
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Interpolation of radial kernels
// ---------------------------------------------------------------------------

/// log K tabulated on a uniform grid in log(rho) and interpolated by a
/// cubic B-spline. Below the table K follows the end power law, above it
/// log K continues linearly in rho.
class KernelInterpolant {
 public:
  KernelInterpolant() = default;

  template <class F>
  KernelInterpolant(F&& kernel, double rho_min, double rho_max, int nodes) : u0_(std::log(rho_min)) {
    detail::require(rho_min > 0.0 && rho_max > rho_min && nodes >= 8, "KernelInterpolant: bad table");
    h_ = (std::log(rho_max) - u0_) / (nodes - 1);
    std::vector<double> lk(nodes);
    for (int i = 0; i < nodes; ++i) {
      const double v = kernel(std::exp(u0_ + i * h_));
      if (!(v > 0.0)) throw NumericalError("KernelInterpolant: kernel must be positive on the table");
      lk[i] = std::log(v);
    }
    rho_min_ = rho_min;
    rho_max_ = rho_max;
    lk_lo_ = lk.front();
    lk_hi_ = lk.back();
    slope_lo_ = (lk[1] - lk[0]) / h_;
    // d log K / d rho at the top, from the last two table values
    const double r1 = std::exp(u0_ + (nodes - 2) * h_);
    slope_hi_ = (lk[nodes - 1] - lk[nodes - 2]) / (rho_max - r1);
    spline_ = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(lk.begin(), lk.end(),
                                                                                          u0_, h_);
  }

  double operator()(double rho) const {
    if (rho <= rho_min_) return std::exp(lk_lo_ + slope_lo_ * (std::log(rho) - u0_));
    if (rho >= rho_max_) return std::exp(lk_hi_ + slope_hi_ * (rho - rho_max_));
    return std::exp((*spline_)(std::log(rho)));
  }

  double rho_min() const { return rho_min_; }
  double rho_max() const { return rho_max_; }

 private:
  std::shared_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
  double u0_ = 0.0, h_ = 1.0, rho_min_ = 0.0, rho_max_ = 0.0;
  double lk_lo_ = 0.0, lk_hi_ = 0.0, slope_lo_ = 0.0, slope_hi_ = 0.0;
};

/// Shape-preserving interpolation of a positive KernelProfile in (log rho, log K).
/// Outside the grid the end values are held by power-law / exponential tails.
class ProfileInterpolant {
 public:
  explicit ProfileInterpolant(const KernelProfile& K) {
    detail::require(K.size() >= 4, "ProfileInterpolant: need at least four nodes");
    std::vector<double> u(K.size()), v(K.size());
    for (std::size_t i = 0; i < K.size(); ++i) {
      if (!(K.values[i] > 0.0)) throw DomainError("ProfileInterpolant: kernel must be positive");
      u[i] = std::log(K.grid->nodes[i]);
      v[i] = std::log(K.values[i]);
    }
    u_lo_ = u.front();
    u_hi_ = u.back();
    v_lo_ = v.front();
    v_hi_ = v.back();
    slope_lo_ = (v[1] - v[0]) / (u[1] - u[0]);
    const std::size_t m = u.size();
    slope_hi_ = (v[m - 1] - v[m - 2]) / (K.grid->nodes[m - 1] - K.grid->nodes[m - 2]);
    rho_hi_ = K.grid->nodes.back();
    pchip_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(u), std::move(v));
  }

  double operator()(double rho) const {
    const double u = std::log(rho);
    if (u <= u_lo_) return std::exp(v_lo_ + slope_lo_ * (u - u_lo_));
    if (u >= u_hi_) return std::exp(v_hi_ + slope_hi_ * (rho - rho_hi_));
    return std::exp((*pchip_)(u));
  }

 private:
  std::shared_ptr<boost::math::interpolators::pchip<std::vector<double>>> pchip_;
  double u_lo_, u_hi_, v_lo_, v_hi_, slope_lo_, slope_hi_, rho_hi_;
};

// ---------------------------------------------------------------------------
// Spectral route for rational multipliers
// ---------------------------------------------------------------------------

/// Inverse spherical transform of F(lambda) = 1/Q(x), x = (lambda^2+1)/4, for
/// a real polynomial Q without roots on (1/4, inf).
class RationalKernel {
 public:
  /// q: ascending coefficients of Q in x. f: accurate evaluation of F(lambda)
  /// (may differ from 1/Q(x) only by rounding).
  RationalKernel(int n, std::vector<double> q, std::function<double(double)> f, int poles = 0,
                 double lambda_max = 64.0)
      : n_(n), q_(std::move(q)), f_(std::move(f)) {
    detail::require(n >= 3, "RationalKernel: requires n >= 3");
    while (!q_.empty() && q_.back() == 0.0) q_.pop_back();
    detail::require(q_.size() >= 2, "RationalKernel: Q must have positive degree");
    const int deg = static_cast<int>(q_.size()) - 1;
    const int m = poles > 0 ? poles : std::max(deg + 1, (n + 6) / 2);
    // coefficients of 1/Q in powers of 1/x
    std::vector<double> e(m + 1, 0.0);
    e[0] = 1.0 / q_[deg];
    for (int j = 1; j <= m; ++j) {
      double s = 0.0;
      for (int i = 1; i <= std::min(j, deg); ++i) s += q_[deg - i] * e[j - i];
      e[j] = -s / q_[deg];
    }
    Eigen::MatrixXd V(m, m);
    Eigen::VectorXd d(m);
    poles_.resize(m);
    for (int l = 0; l < m; ++l) poles_[l] = -2.0 * (l + 1);
    for (int r = 0; r < m; ++r) {
      const int power = r + 1;  // coefficient of x^{-power}
      d[r] = power >= deg ? e[power - deg] : 0.0;
      for (int l = 0; l < m; ++l) V(r, l) = std::pow(poles_[l], power - 1);
    }
    Eigen::VectorXd c = V.fullPivLu().solve(d);
    residues_.assign(c.data(), c.data() + m);
    std::vector<double> edges{0.0, 0.25, 0.5, 1.0, 2.0};
    for (double l = 3.0; l <= lambda_max + 1e-9; l += 1.0) edges.push_back(l);
    freq_ = FrequencyGrid::composite(n, edges, 16);
  }

  const std::vector<double>& poles() const { return poles_; }
  const std::vector<double>& residues() const { return residues_; }

  /// F minus the reference-pole part; decays like x^{-(poles+1)}.
  double remainder(double lambda) const {
    const double x = 0.25 * (lambda * lambda + 1.0);
    double s = f_(lambda);
    for (std::size_t l = 0; l < poles_.size(); ++l) s -= residues_[l] / (x - poles_[l]);
    return s;
  }

  KernelProfile evaluate(const GridPtr& grid, std::string route = "spectral") const {
    detail::require(grid && grid->n == n_, "RationalKernel: grid dimension mismatch");
    const auto table = spherical_table(grid, freq_);
    std::vector<double> coef(freq_->size());
    for (std::size_t j = 0; j < coef.size(); ++j) {
      const double lam = freq_->lambdas[j];
      coef[j] = freq_->weights[j] * inversion_density(lam, n_) * remainder(lam);
    }
    KernelProfile K;
    K.grid = grid;
    K.n = n_;
    K.route = std::move(route);
    K.values.resize(grid->size());
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const double* row = table->row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * row[j];
      for (std::size_t l = 0; l < poles_.size(); ++l)
        s += residues_[l] * resolvent_kernel_value(poles_[l], n_, grid->nodes[i]);
      K.values[i] = s;
    }
    return K;
  }

 private:
  int n_;
  std::vector<double> q_;
  std::function<double(double)> f_;
  std::vector<double> poles_, residues_;
  FreqGridPtr freq_;
};

/// Kernel of (P_1 - lambda_j)^{-1} * (P_1 - conj(lambda_j))^{-1}, the inverse
/// transform of |x - lambda_j|^{-2}.
inline KernelProfile pair_kernel(cplx lambda_j, int n, const GridPtr& grid) {
  detail::require(lambda_j.imag() != 0.0, "pair_kernel: lambda_j must be non-real");
  detail::require(lambda_j.real() <= 0.25 + 1e-12, "pair_kernel: requires Re lambda_j <= 1/4");
  const double a = lambda_j.real(), b2 = std::norm(lambda_j);
  RationalKernel rk(n, {b2, -2.0 * a, 1.0}, [=](double lam) {
    const double x = 0.25 * (lam * lam + 1.0);
    return 1.0 / ((x - a) * (x - a) + lambda_j.imag() * lambda_j.imag());
  });
  auto K = rk.evaluate(grid, "pair");
  K.label = "lambda=" + std::to_string(a) + (lambda_j.imag() < 0 ? "-" : "+") +
            std::to_string(std::abs(lambda_j.imag())) + "i";
  return K;
}

/// Spectral evaluation of the single resolvent (P_1 - lambda_j)^{-1}.
inline KernelProfile resolvent_kernel_spectral(double lambda_j, int n, const GridPtr& grid) {
  detail::require(lambda_j <= 0.25, "resolvent_kernel_spectral: requires lambda_j <= 1/4");
  RationalKernel rk(n, {-lambda_j, 1.0}, [=](double lam) {
    const double x = 0.25 * (lam * lam + 1.0);
    return 1.0 / (x - lambda_j);
  });
  return rk.evaluate(grid);
}

// ---------------------------------------------------------------------------
// Radial convolution
// ---------------------------------------------------------------------------

enum class ConvolutionMethod { spectral, geodesic };

/// Position-space radial convolution (K1 * K2)(rho) at the given radii:
///   int_0^inf K1(s) omega_{n-2} sinh^{n-1}(s) int_0^pi K2(d) sin^{n-2}(t) dt ds,
///   sinh^2(d/2) = sinh^2((rho - s)/2) + sinh(rho) sinh(s) sin^2(t/2).
/// support2 > 0 restricts K2 to [0, support2].
template <class K1, class K2>
double geodesic_convolution_value(const K1& k1, const K2& k2, int n, double rho, double s_max, double support2 = 0.0,
                                  double rel_tol = 1e-9) {
  const double omega = special::sphere_area(n - 1);
  const double shr = std::sinh(rho);
  auto inner = [&](double s) {
    const double shs = std::sinh(s);
    const double a = std::pow(std::sinh(0.5 * (rho - s)), 2);
    const double b = shr * shs;
    auto g = [&](double t) {
      const double st = std::sin(0.5 * t);
      const double d = 2.0 * std::asinh(std::sqrt(a + b * st * st));
      if (support2 > 0.0 && d >= support2) return 0.0;
      return k2(d) * std::pow(std::sin(t), n - 2);
    };
    const double ts = std::min(std::numbers::pi, 2.0 * std::abs(std::sinh(0.5 * (rho - s))) / std::sqrt(b));
    std::vector<double> pts{0.0};
    if (support2 > 0.0) {
      // angle where d = support2
      const double target = std::pow(std::sinh(0.5 * support2), 2);
      if (target <= a) return 0.0;
      const double x = (target - a) / b;
      if (x < 1.0) pts.push_back(2.0 * std::asin(std::sqrt(x)));
    }
    // past ts the integrand decays like a power of t; grade geometrically
    for (double t = ts; t < std::numbers::pi; t *= 2.0) pts.push_back(t);
    pts.push_back(std::numbers::pi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const double v = quad::integrate_adaptive_pieces(g, pts, 0.1 * rel_tol, 1e-300);
    return k1(s) * omega * std::pow(shs, n - 1) * v;
  };
  std::vector<double> pts;
  if (support2 > 0.0) {
    // K2 vanishes unless |rho - s| < support2
    pts = {std::max(0.0, rho - support2), rho, std::min(s_max, rho + support2)};
  } else {
    pts = {0.0, 0.5 * rho, rho};
    for (double extra : {0.5, 2.0, 6.0, 15.0})
      if (rho + extra < s_max) pts.push_back(rho + extra);
    pts.push_back(s_max);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const double total = quad::integrate_adaptive_partition(inner, pts, rel_tol, 1e-300, 20000).value;
  return total;
}

/// Hyperbolic convolution of two radial kernels sampled on the same grid.
/// spectral: inverse transform of the product of the forward transforms;
/// needs smooth, decaying profiles on a quadrature grid. geodesic: position
/// space quadrature on interpolants of the profiles, valid for singular
/// kernels as well.
inline KernelProfile radial_convolution(const KernelProfile& K1, const KernelProfile& K2,
                                        ConvolutionMethod method = ConvolutionMethod::spectral,
                                        FreqGridPtr freq = nullptr) {
  detail::require(K1.grid && K2.grid && K1.n == K2.n && K1.grid->n == K1.n, "radial_convolution: dimension mismatch");
  detail::require(K1.grid == K2.grid || K1.grid->nodes == K2.grid->nodes, "radial_convolution: grids differ");
  KernelProfile out;
  out.grid = K1.grid;
  out.n = K1.n;
  out.k = K1.k + K2.k;
  out.label = K1.label + " * " + K2.label;
  if (method == ConvolutionMethod::spectral) {
    for (const auto* K : {&K1, &K2})
      for (double v : K->values)
        if (!std::isfinite(v)) throw DomainError("radial_convolution: non-finite kernel value");
    if (!freq) freq = FrequencyGrid::gauss_legendre(K1.n);
    const auto F1 = radial_ht_forward(K1.as_profile(), freq);
    const auto F2 = radial_ht_forward(K2.as_profile(), freq);
    SpectralDensity P = F1;
    for (std::size_t j = 0; j < P.size(); ++j) P.values[j] *= F2.values[j];
    out.values = radial_ht_inverse(P, K1.grid).values;
    out.route = "spectral-convolution";
    return out;
  }
  const ProfileInterpolant i1(K1), i2(K2);
  const double s_max = K1.grid->rho_max();
  out.values.resize(K1.size());
  for (std::size_t i = 0; i < K1.size(); ++i)
    out.values[i] = geodesic_convolution_value(i1, i2, K1.n, K1.grid->nodes[i], s_max);
  out.route = "geodesic-convolution";
  return out;
}

// ---------------------------------------------------------------------------
// G_k^{-1}
// ---------------------------------------------------------------------------

enum class KernelRoute { convolution, spectral };

inline const char* to_string(KernelRoute r) { return r == KernelRoute::convolution ? "convolution" : "spectral"; }

namespace detail {

/// Fine log-spaced table of a kernel for use inside convolutions.
template <class F>
KernelInterpolant tabulate_kernel(F&& f, double rho_min = 1e-5, int nodes = 600) {
  return KernelInterpolant(std::forward<F>(f), rho_min, 40.0, nodes);
}

}  // namespace detail

/// Kernel of G_k^{-1} on the grid.
///   convolution: the 1/4 resolvent convolved with the composition of the
///   remaining factors (real roots by t-integral, conjugate pairs by pair
///   kernels), all in position space;
///   spectral: inverse transform of 1/gk_multiplier(lambda, k, 1). The double
///   zero of the symbol at lambda = 0 is cancelled by the Plancherel density.
inline KernelProfile gk_inverse_kernel(int k, int n, const GridPtr& grid, KernelRoute route) {
  detail::require(n > 2 * k, "gk_inverse_kernel: requires n > 2k");
  detail::require(n >= 3 && k >= 1 && k <= 8, "gk_inverse_kernel: unsupported (n, k)");
  detail::require(grid && grid->n == n, "gk_inverse_kernel: grid dimension mismatch");
  if (route == KernelRoute::spectral) {
    std::vector<double> q{1.0};
    for (int i = 1; i <= k; ++i) {
      std::vector<double> next(q.size() + 1, 0.0);
      for (std::size_t j = 0; j < q.size(); ++j) {
        next[j] += i * (i - 1.0) * q[j];
        next[j + 1] += q[j];
      }
      q = std::move(next);
    }
    q[0] -= gk_alpha(k);
    RationalKernel rk(n, q, [k](double lam) { return 1.0 / gk_symbol(lam, k); });
    auto K = rk.evaluate(grid);
    K.k = k;
    K.label = "G_k^{-1}";
    return K;
  }
  const auto spec = factorization_roots(k);
  KernelProfile K;
  K.grid = grid;
  K.n = n;
  K.k = k;
  K.route = "convolution";
  K.label = "G_k^{-1}";
  if (k == 1) {
    K.values = resolvent_kernel(0.25, n, grid).values;
    return K;
  }
  // remaining factors composed into one tabulated kernel
  std::vector<KernelInterpolant> factors;
  const auto reals = spec.real_roots();
  for (std::size_t i = 1; i < reals.size(); ++i) {
    const double r = reals[i];
    factors.push_back(detail::tabulate_kernel([r, n](double rho) { return resolvent_kernel_value(r, n, rho); }));
  }
  for (const auto& z : spec.complex_pairs()) {
    auto fine = RadialGrid::kernel(n, 1e-5, 0.5, 20.0, 120, 0.1);
    const ProfileInterpolant interp(pair_kernel(z, n, fine));
    factors.push_back(detail::tabulate_kernel(interp));
  }
  KernelInterpolant rest = factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) {
    const KernelInterpolant prev = rest;
    const KernelInterpolant& f = factors[i];
    rest = detail::tabulate_kernel(
        [&](double rho) { return geodesic_convolution_value(f, prev, n, rho, rho + 40.0, 0.0, 1e-8); }, 1e-4, 300);
  }
  const auto quarter = detail::tabulate_kernel([n](double rho) { return resolvent_kernel_value(0.25, n, rho); });
  K.values.resize(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double rho = grid->nodes[i];
    K.values[i] = geodesic_convolution_value(quarter, rest, n, rho, rho + 40.0);
  }
  return K;
}

struct RouteAgreement {
  double max_relative_difference = 0.0;
  double rho_at_max = 0.0;
  bool passed = false;
};

/// Compares the two G_k^{-1} routes on [rho_lo, rho_hi].
inline RouteAgreement compare_routes(const KernelProfile& a, const KernelProfile& b, double rho_lo, double rho_hi,
                                     double tol) {
  detail::require(a.size() == b.size(), "compare_routes: size mismatch");
  RouteAgreement r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double rho = a.grid->nodes[i];
    if (rho < rho_lo || rho > rho_hi) continue;
    const double d = std::abs(a.values[i] - b.values[i]) / std::abs(b.values[i]);
    if (d > r.max_relative_difference) {
      r.max_relative_difference = d;
      r.rho_at_max = rho;
    }
  }
  r.passed = r.max_relative_difference <= tol;
  return r;
}

struct SinhBoundReport {
  double fitted_constant = 0.0;  // sup of K sinh^{n-2k} over the window
  double tail_ratio = 0.0;       // value at the right end over the fitted constant
  bool passed = false;
};

/// K(rho) sinh^{n-2k}(rho) on [rho_lo, rho_hi]: the constant is fitted on the
/// first half of the window; the check passes if the second half never
/// exceeds it.
inline SinhBoundReport sinh_bound_check(const KernelProfile& K, int k, double rho_lo = 0.5, double rho_hi = 6.0) {
  SinhBoundReport r;
  const double mid = 0.5 * (rho_lo + rho_hi);
  double tail_max = 0.0, last = 0.0;
  for (std::size_t i = 0; i < K.size(); ++i) {
    const double rho = K.grid->nodes[i];
    if (rho < rho_lo || rho > rho_hi) continue;
    const double g = K.values[i] * std::pow(std::sinh(rho), K.n - 2 * k);
    if (rho <= mid) r.fitted_constant = std::max(r.fitted_constant, g);
    else tail_max = std::max(tail_max, g);
    last = g;
  }
  r.tail_ratio = r.fitted_constant > 0.0 ? last / r.fitted_constant : INFINITY;
  r.passed = r.fitted_constant > 0.0 && tail_max <= r.fitted_constant;
  return r;
}

}  // namespace hyperlab

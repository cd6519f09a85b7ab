#pragma once

// Radial Helgason-Fourier analysis.
//
// Frequencies follow the convention in which -Delta_H has eigenvalue
// ((n-1)^2 + lambda^2) / 4 on phi_lambda, so P_1 = -Delta_H - n(n-2)/4 acts
// as the multiplier (lambda^2 + 1) / 4.
//
// Transform pair used throughout:
//   fhat(lambda) = int_0^inf f(rho) phi_lambda(rho) omega_{n-1} sinh^{n-1}(rho) d rho
//   f(rho)       = int_0^inf fhat(lambda) phi_lambda(rho) sigma_n(lambda) d lambda
// with sigma_n(lambda) = plancherel_density(lambda, n) / omega_{n-1}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <list>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <span>
#include <vector>

#include "hyperlab/error.hpp"
#include "hyperlab/profile.hpp"
#include "hyperlab/quadrature.hpp"
#include "hyperlab/special.hpp"

namespace hyperlab {

using special::cplx;

/// Harish-Chandra c-function
///   c(lambda) = 2^{n-1-i lambda} Gamma(n/2) Gamma(i lambda)
///               / (Gamma((n-1+i lambda)/2) Gamma((1+i lambda)/2)).
inline cplx harish_chandra_c(double lambda, int n) {
  detail::require(n >= 2, "harish_chandra_c: dimension must be at least 2");
  detail::require(lambda != 0.0 && std::isfinite(lambda), "harish_chandra_c: lambda must be finite and nonzero");
  const cplx il{0.0, lambda};
  const cplx logc = (n - 1.0 - il) * std::log(2.0) + std::lgamma(0.5 * n) + special::lgamma(il) -
                    special::lgamma(0.5 * (n - 1.0 + il)) - special::lgamma(0.5 * (1.0 + il));
  return std::exp(logc);
}

/// |c(lambda)|^{-2}, continued by its limit 0 at lambda = 0.
inline double c_inverse_abs2(double lambda, int n) {
  detail::require(n >= 2, "c_inverse_abs2: dimension must be at least 2");
  if (lambda == 0.0) return 0.0;
  const cplx il{0.0, std::abs(lambda)};
  const double logabs = (n - 1.0) * std::log(2.0) + std::lgamma(0.5 * n) + special::lgamma(il).real() -
                        special::lgamma(0.5 * (n - 1.0 + il)).real() - special::lgamma(0.5 * (1.0 + il)).real();
  return std::exp(-2.0 * logabs);
}

/// D_n |S^{n-1}| |c(lambda)|^{-2} = |c(lambda)|^{-2} / (2^{3-n} pi).
inline double plancherel_density(double lambda, int n) {
  detail::require(lambda > 0.0, "plancherel_density: lambda must be positive");
  return c_inverse_abs2(lambda, n) / (std::pow(2.0, 3 - n) * std::numbers::pi);
}

/// Inversion measure sigma_n(lambda) of the transform pair above. Vanishes
/// quadratically at lambda = 0.
inline double inversion_density(double lambda, int n) {
  if (lambda == 0.0) return 0.0;
  return plancherel_density(std::abs(lambda), n) / special::sphere_area(n);
}

/// Symbol of P_k: prod_{i=1}^k ((lambda^2 + 1)/4 + i(i-1)).
inline double pk_multiplier(double lambda, int k) {
  detail::require(k >= 1, "pk_multiplier: k must be positive");
  const double x = 0.25 * (lambda * lambda + 1.0);
  double prod = 1.0;
  for (int i = 1; i <= k; ++i) prod *= x + i * (i - 1.0);
  return prod;
}

/// alpha_k = prod_{i=1}^k (2i-1)^2 / 4, the bottom of the spectrum of P_k.
inline double gk_alpha(int k) {
  double a = 1.0;
  for (int i = 1; i <= k; ++i) a *= 0.25 * (2.0 * i - 1.0) * (2.0 * i - 1.0);
  return a;
}

/// Symbol of G_k = P_k - alpha_k written as a polynomial in x = (lambda^2 + 1)/4
/// minus its value at x = 1/4, factored so that lambda^2 is pulled out exactly:
/// prod(x + c_i) - prod(1/4 + c_i) = (x - 1/4) * sum_j prod_{i<j}(x + c_i) prod_{i>j}(1/4 + c_i).
inline double gk_symbol(double lambda, int k) {
  detail::require(k >= 1, "gk_symbol: k must be positive");
  const double x = 0.25 * (lambda * lambda + 1.0);
  double sum = 0.0;
  for (int j = 1; j <= k; ++j) {
    double term = 1.0;
    for (int i = 1; i < j; ++i) term *= x + i * (i - 1.0);
    for (int i = j + 1; i <= k; ++i) term *= 0.25 + i * (i - 1.0);
    sum += term;
  }
  return 0.25 * lambda * lambda * sum;
}

/// (P_k symbol - alpha)^gamma.
inline double gk_multiplier(double lambda, int k, double gamma) {
  detail::require(!(lambda == 0.0 && gamma < 0.0), "gk_multiplier: symbol vanishes at lambda = 0");
  const double m = gk_symbol(lambda, k);
  if (gamma == 1.0) return m;
  return std::pow(m, gamma);
}

/// Sphere average of the plane waves e_{lambda,xi} at geodesic radius rho:
///   phi = (1/Z) int_0^pi (cosh rho - sinh rho cos t)^{-(n-1+i lambda)/2} sin^{n-2} t dt.
/// Composite Gauss-Legendre of fixed panel order, panels halving towards
/// t = 0 where the integrand peaks at width ~ e^{-rho}.
inline double spherical_function(double lambda, double rho, int n, int panel_order = 32) {
  detail::require(n >= 2, "spherical_function: dimension must be at least 2");
  detail::require(rho >= 0.0 && std::isfinite(rho) && std::isfinite(lambda), "spherical_function: bad arguments");
  if (rho == 0.0) return 1.0;
  using std::numbers::pi;
  const int levels = 1 + static_cast<int>(std::ceil(rho / std::numbers::ln2));
  std::vector<double> edges{0.0};
  for (int j = levels; j >= 0; --j) edges.push_back(pi * std::ldexp(1.0, -j));
  const auto rule = quad::composite_gauss(edges, panel_order);
  double re = 0.0, im = 0.0;
  const double em = std::exp(-rho), ep = std::exp(rho);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double t = rule.nodes[q];
    const double c2 = std::cos(0.5 * t), s2 = std::sin(0.5 * t);
    // cosh rho - sinh rho cos t = e^{-rho} cos^2(t/2) + e^{rho} sin^2(t/2)
    const double logx = std::log(em * c2 * c2 + ep * s2 * s2);
    const double mag = std::exp(-0.5 * (n - 1.0) * logx) * std::pow(std::sin(t), n - 2) * rule.weights[q];
    re += mag * std::cos(0.5 * lambda * logx);
    im -= mag * std::sin(0.5 * lambda * logx);
  }
  const double z = std::sqrt(pi) * std::tgamma(0.5 * (n - 1.0)) / std::tgamma(0.5 * n);
  re /= z;
  im /= z;
  if (!(std::abs(im) < 1e-10)) throw NumericalError("spherical_function: imaginary part above 1e-10, quadrature unresolved");
  return re;
}

namespace detail {

inline double log_sinh(double x) {
  return x > 20.0 ? x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x)) : std::log(std::sinh(x));
}

/// Nodes a_q and weights W_q with phi_lambda(rho) = sum_q W_q cos(lambda a_q),
/// from the Abel-type representation
///   phi_lambda(rho) = c_n sinh^{2-n} rho int_{-rho}^{rho} cos(lambda t/2) (cosh rho - cosh t)^{(n-3)/2} dt
/// under t = rho sin(psi), which removes the endpoint singularity for every n.
struct MehlerRule {
  std::vector<double> a;
  std::vector<double> w;
};

inline MehlerRule mehler_rule(double rho, int n, double lambda_max) {
  using std::numbers::pi;
  const int order = 20 + static_cast<int>(std::ceil(0.7 * 0.5 * lambda_max * rho));
  const auto rule = quad::gauss_legendre(order, 0.0, 0.5 * pi);
  const double log_cn = 0.5 * (n - 3.0) * std::numbers::ln2 + std::lgamma(0.5 * n) - 0.5 * std::log(pi) -
                        std::lgamma(0.5 * (n - 1.0));
  MehlerRule m;
  m.a.resize(order);
  m.w.resize(order);
  const double lsh = log_sinh(rho);
  for (int q = 0; q < order; ++q) {
    const double psi = rule.nodes[q];
    const double s = std::sin(psi);
    const double onems = 2.0 * std::pow(std::sin(0.25 * pi - 0.5 * psi), 2);  // 1 - sin(psi)
    const double oneps = 1.0 + s;
    const double b1 = 0.5 * rho * oneps, b2 = 0.5 * rho * onems;
    // G = (cosh rho - cosh t) / cos^2 psi
    const double logg = std::numbers::ln2 + log_sinh(b1) - std::log(oneps) +
                        (b2 > 1e-8 ? log_sinh(b2) - std::log(onems) : std::log(0.5 * rho) + b2 * b2 / 6.0);
    const double logw = std::log(2.0 * rho) + log_cn + 0.5 * (n - 3.0) * logg + (n - 2.0) * std::log(std::cos(psi)) -
                        (n - 2.0) * lsh;
    m.a[q] = 0.5 * rho * s;
    m.w[q] = std::exp(logw) * rule.weights[q];
  }
  return m;
}

}  // namespace detail

/// phi_lambda(rho) through the Abel-type integral. Accurate at every rho,
/// including the large radii where the sphere-average integrand is too
/// peaked for fixed-order rules.
inline double spherical_function_abel(double lambda, double rho, int n) {
  detail::require(n >= 2 && rho >= 0.0, "spherical_function_abel: bad arguments");
  if (rho == 0.0) return 1.0;
  const auto m = detail::mehler_rule(rho, n, std::abs(lambda));
  double s = 0.0;
  for (std::size_t q = 0; q < m.a.size(); ++q) s += m.w[q] * std::cos(lambda * m.a[q]);
  return s;
}

/// Quadrature rule in frequency on (0, lambda_max].
struct FrequencyGrid {
  int n = 0;
  std::vector<double> lambdas;
  std::vector<double> weights;
  double lambda_max = 0.0;

  std::size_t size() const { return lambdas.size(); }

  /// N-point Gauss-Legendre on [0, lambda_max]; the nodes avoid lambda = 0.
  static std::shared_ptr<const FrequencyGrid> gauss_legendre(int n, int N = 1024, double lambda_max = 40.0) {
    detail::require(n >= 2 && N >= 1 && lambda_max > 0.0, "FrequencyGrid: bad arguments");
    auto rule = quad::gauss_legendre(N, 0.0, lambda_max);
    return make(n, std::move(rule), lambda_max);
  }

  /// Composite Gauss-Legendre on the given panel edges (first edge 0).
  static std::shared_ptr<const FrequencyGrid> composite(int n, std::span<const double> edges, int order) {
    detail::require(n >= 2 && edges.size() >= 2 && edges.front() >= 0.0, "FrequencyGrid: bad panel layout");
    return make(n, quad::composite_gauss(edges, order), edges.back());
  }

 private:
  static std::shared_ptr<const FrequencyGrid> make(int n, quad::Rule rule, double lambda_max) {
    auto g = std::make_shared<FrequencyGrid>();
    g->n = n;
    g->lambdas = std::move(rule.nodes);
    g->weights = std::move(rule.weights);
    g->lambda_max = lambda_max;
    return g;
  }
};

using FreqGridPtr = std::shared_ptr<const FrequencyGrid>;

/// Transform values on a frequency grid. `plancherel_weight` holds the
/// inversion measure sigma_n at each node (not multiplied by the rule weight).
struct SpectralDensity {
  FreqGridPtr grid;
  std::vector<double> values;
  std::vector<double> plancherel_weight;

  int dim() const { return grid->n; }
  std::size_t size() const { return values.size(); }

  /// int_0^Lambda |F|^2 sigma d lambda.
  double l2_norm_pow() const {
    double s = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j)
      s += grid->weights[j] * plancherel_weight[j] * values[j] * values[j];
    return s;
  }
};

/// phi_{lambda_j}(rho_i) tabulated as a row-major [rho][lambda] matrix.
class SphericalTable {
 public:
  SphericalTable(const RadialGrid& rg, const FrequencyGrid& fg) : rows_(rg.size()), cols_(fg.size()) {
    detail::require(rg.n == fg.n, "SphericalTable: dimension mismatch");
    data_.resize(rows_ * cols_);
    const double lmax = fg.lambdas.empty() ? 0.0 : fg.lambdas.back();
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto m = detail::mehler_rule(rg.nodes[i], rg.n, lmax);
      double* row = &data_[i * cols_];
      for (std::size_t j = 0; j < cols_; ++j) {
        const double lam = fg.lambdas[j];
        double s = 0.0;
        for (std::size_t q = 0; q < m.a.size(); ++q) s += m.w[q] * std::cos(lam * m.a[q]);
        row[j] = s;
      }
    }
  }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const double* row(std::size_t i) const { return &data_[i * cols_]; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

/// Shared tables keyed by grid identity. Entries hold the grids alive, so a
/// key address cannot be reused while its entry exists.
inline std::shared_ptr<const SphericalTable> spherical_table(const GridPtr& rg, const FreqGridPtr& fg) {
  struct Entry {
    GridPtr rg;
    FreqGridPtr fg;
    std::shared_ptr<const SphericalTable> table;
  };
  static std::mutex mu;
  static std::list<Entry> lru;
  constexpr std::size_t capacity = 6;
  {
    std::lock_guard lock(mu);
    for (auto it = lru.begin(); it != lru.end(); ++it) {
      if (it->rg == rg && it->fg == fg) {
        lru.splice(lru.begin(), lru, it);
        return lru.front().table;
      }
    }
  }
  auto table = std::make_shared<const SphericalTable>(*rg, *fg);
  std::lock_guard lock(mu);
  lru.push_front({rg, fg, table});
  if (lru.size() > capacity) lru.pop_back();
  return table;
}

/// Checks int |f|^2 dV = int |fhat|^2 sigma d lambda on a Gaussian in rho.
/// Throws NumericalError if the normalization is off.
inline void plancherel_self_test(int n) {
  static std::mutex mu;
  static std::set<int> passed;
  {
    std::lock_guard lock(mu);
    if (passed.count(n)) return;
  }
  auto rg = RadialGrid::composite(n, 1e-3, 0.5, 12.0, 640, 8, 20);
  auto fg = FrequencyGrid::gauss_legendre(n, 256, 30.0);
  const SphericalTable table(*rg, *fg);
  double lhs = 0.0;
  std::vector<double> f(rg->size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = std::exp(-rg->nodes[i] * rg->nodes[i]);
    lhs += rg->weights[i] * f[i] * f[i];
  }
  double rhs = 0.0;
  for (std::size_t j = 0; j < fg->size(); ++j) {
    double fh = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) fh += rg->weights[i] * f[i] * table(i, j);
    rhs += fg->weights[j] * inversion_density(fg->lambdas[j], n) * fh * fh;
  }
  if (std::abs(rhs / lhs - 1.0) > 1e-6) {
    throw NumericalError("plancherel_self_test: spectral and spatial norms disagree (ratio " +
                         std::to_string(rhs / lhs) + ")");
  }
  std::lock_guard lock(mu);
  passed.insert(n);
}

/// Forward transform by the profile's own quadrature.
inline SpectralDensity radial_ht_forward(const RadialProfile& f, const FreqGridPtr& grid) {
  detail::require(grid && grid->n == f.dim(), "radial_ht_forward: dimension mismatch");
  double fmax = 0.0;
  for (double v : f.values) fmax = std::max(fmax, std::abs(v));
  if (fmax > 0.0 && std::abs(f.values.back()) >= 1e-12 * fmax)
    throw NumericalError("radial_ht_forward: profile has not decayed below 1e-12 at the last node");
  plancherel_self_test(f.dim());
  const auto table = spherical_table(f.grid, grid);
  SpectralDensity out;
  out.grid = grid;
  out.values.assign(grid->size(), 0.0);
  out.plancherel_weight.resize(grid->size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double wf = f.grid->weights[i] * f.values[i];
    if (wf == 0.0) continue;
    const double* row = table->row(i);
    for (std::size_t j = 0; j < grid->size(); ++j) out.values[j] += wf * row[j];
  }
  for (std::size_t j = 0; j < grid->size(); ++j) out.plancherel_weight[j] = inversion_density(grid->lambdas[j], f.dim());
  return out;
}

/// Inverse transform onto `target`. Requires |F| at the top of the grid to
/// be below 1e-10 of its maximum.
inline RadialProfile radial_ht_inverse(const SpectralDensity& F, const GridPtr& target) {
  detail::require(target && target->n == F.dim(), "radial_ht_inverse: dimension mismatch");
  detail::require(F.values.size() == F.grid->size(), "radial_ht_inverse: values do not match grid");
  double fmax = 0.0;
  for (double v : F.values) fmax = std::max(fmax, std::abs(v));
  if (fmax > 0.0 && std::abs(F.values.back()) >= 1e-10 * fmax)
    throw NumericalError("radial_ht_inverse: spectral tail above 1e-10 at lambda_max");
  const auto table = spherical_table(target, F.grid);
  std::vector<double> coef(F.size());
  for (std::size_t j = 0; j < coef.size(); ++j) coef[j] = F.grid->weights[j] * F.plancherel_weight[j] * F.values[j];
  std::vector<double> v(target->size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double* row = table->row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) s += coef[j] * row[j];
    v[i] = s;
  }
  return {target, std::move(v)};
}

/// Multiply a spectral density nodewise by m(lambda).
template <class M>
SpectralDensity apply_multiplier(SpectralDensity F, M&& m) {
  for (std::size_t j = 0; j < F.size(); ++j) F.values[j] *= m(F.grid->lambdas[j]);
  return F;
}

}  // namespace hyperlab

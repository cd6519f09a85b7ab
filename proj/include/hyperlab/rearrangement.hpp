#pragma once

// Hyperbolic decreasing rearrangement and a Monte Carlo harness for the
// symmetrization inequality
//   int int h K(rho(x,y)) h  <=  int int h* K(rho(x,y)) h*
// for strictly decreasing radial kernels K.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "hyperlab/ball_geometry.hpp"
#include "hyperlab/error.hpp"
#include "hyperlab/gjms_kernels.hpp"
#include "hyperlab/profile.hpp"

namespace hyperlab {

/// Distribution function of |f| on a lattice of levels
/// t_0 > t_1 > ... > 0. measures[m] = tau{|f| > t_m},
/// cumulative[m] = tau{|f| >= t_m}.
struct DistributionFunction {
  std::vector<double> levels;
  std::vector<double> measures;
  std::vector<double> cumulative;

  double total_measure() const { return cumulative.empty() ? 0.0 : cumulative.back(); }

  /// f#(s) = inf{t : tau{|f| > t} <= s}; right-continuous and nonincreasing.
  double rearranged(double s) const {
    detail::require(s >= 0.0, "DistributionFunction: s must be nonnegative");
    // first level whose cumulative measure exceeds s
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    if (it == cumulative.end()) return 0.0;
    return levels[static_cast<std::size_t>(it - cumulative.begin())];
  }

  /// tau{|f| > t}.
  double measure_above(double t) const {
    // levels are decreasing: count those strictly above t
    std::size_t m = 0;
    while (m < levels.size() && levels[m] > t) ++m;
    return m == 0 ? 0.0 : cumulative[m - 1];
  }
};

namespace detail {

/// Builds the distribution function from (value, measure) pairs.
inline DistributionFunction distribution_from_weighted(std::vector<std::pair<double, double>> vm) {
  require(!vm.empty(), "one_dim_rearrangement: empty input");
  for (auto& [v, m] : vm) {
    require(std::isfinite(v) && m >= 0.0, "one_dim_rearrangement: bad sample");
    v = std::abs(v);
  }
  std::sort(vm.begin(), vm.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  DistributionFunction d;
  double cum = 0.0;
  for (const auto& [v, m] : vm) {
    if (v <= 0.0) break;
    if (d.levels.empty() || v < d.levels.back()) {
      d.levels.push_back(v);
      d.measures.push_back(cum);
      d.cumulative.push_back(cum);
    }
    cum += m;
    d.cumulative.back() = cum;
  }
  return d;
}

}  // namespace detail

/// Monte Carlo carrier: points drawn from the hyperbolic measure of a region
/// together with |f| and the measure each sample represents.
struct SampledFunction {
  int n = 0;
  std::vector<BallPoint> points;
  std::vector<double> values;
  std::vector<double> weights;
};

/// Inverse-CDF sampler for the hyperbolic measure restricted to geodesic
/// shells around the origin.
class VolumeSampler {
 public:
  VolumeSampler(int n, double rho_max, int cells = 2048) : n_(n), omega_(special::sphere_area(n)) {
    detail::require(n >= 2 && rho_max > 0.0 && cells >= 8, "VolumeSampler: bad arguments");
    h_ = rho_max / cells;
    cum_.resize(cells + 1, 0.0);
    const auto& gl = quad::gauss_legendre(8);
    for (int i = 0; i < cells; ++i) {
      double s = 0.0;
      for (std::size_t q = 0; q < gl.size(); ++q) s += gl.weights[q] * std::pow(std::sinh((i + 0.5 + 0.5 * gl.nodes[q]) * h_), n - 1);
      cum_[i + 1] = cum_[i] + omega_ * 0.5 * h_ * s;
    }
  }

  double rho_max() const { return h_ * (cum_.size() - 1); }

  /// Hyperbolic volume of B_H(0, rho) for rho <= rho_max.
  double volume(double rho) const {
    const std::size_t i = std::min(cum_.size() - 2, static_cast<std::size_t>(rho / h_));
    return cum_[i] + partial(i, rho);
  }

  /// Radius whose ball has volume v (v <= volume(rho_max)).
  double radius(double v) const {
    auto it = std::upper_bound(cum_.begin(), cum_.end(), v);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    i = std::min(i, cum_.size() - 2);
    const double a = i * h_;
    double r = a + h_ * std::clamp((v - cum_[i]) / (cum_[i + 1] - cum_[i]), 0.0, 1.0);
    for (int it2 = 0; it2 < 30; ++it2) {
      if (v == cum_[i]) break;
      const double f = cum_[i] + partial(i, r) - v;
      const double d = omega_ * ipow(std::sinh(r), n_ - 1);
      if (d <= 0.0) break;
      const double next = std::clamp(r - f / d, a, a + h_);
      if (std::abs(next - r) <= 1e-13 * std::max(1e-3, r)) {
        r = next;
        break;
      }
      r = next;
    }
    return r;
  }

  /// Uniform point of the shell r_in <= rho < r_out about the origin, from a
  /// uniform u and a Gaussian direction vector.
  BallPoint shell_point(double r_in, double r_out, double u, std::span<const double> gauss) const {
    return shell_point_v(volume(r_in), volume(r_out), u, gauss);
  }

  /// Same, with the enclosed volumes v0 = |B(r_in)| and v1 = |B(r_out)| given.
  BallPoint shell_point_v(double v0, double v1, double u, std::span<const double> gauss) const {
    const double rho = radius(v0 + u * (v1 - v0));
    double nrm = 0.0;
    for (double g : gauss) nrm += g * g;
    nrm = std::sqrt(nrm);
    std::vector<double> dir(gauss.begin(), gauss.end());
    for (double& x : dir) x /= nrm;
    return BallPoint::along(dir, rho);
  }

 private:
  static double ipow(double x, int m) {
    double r = 1.0;
    for (; m > 0; --m) r *= x;
    return r;
  }

  double partial(std::size_t i, double rho) const {
    const double a = i * h_;
    if (rho <= a) return 0.0;
    const auto& gl = quad::gauss_legendre(8);
    double s = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q)
      s += gl.weights[q] * ipow(std::sinh(a + 0.5 * (rho - a) * (1.0 + gl.nodes[q])), n_ - 1);
    return omega_ * 0.5 * (rho - a) * s;
  }

  int n_;
  double omega_;
  double h_;
  std::vector<double> cum_;
};

/// Samples f at N points drawn from the hyperbolic measure on B_H(0, R).
inline SampledFunction sample_function(const std::function<double(const BallPoint&)>& f, int n, double R, int N,
                                       std::uint64_t seed) {
  detail::require(N >= 1 && R > 0.0, "sample_function: bad arguments");
  const VolumeSampler vs(n, R);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SampledFunction s;
  s.n = n;
  const double w = vs.volume(R) / N;
  std::vector<double> g(n);
  for (int i = 0; i < N; ++i) {
    for (double& x : g) x = gauss(rng);
    s.points.push_back(vs.shell_point(0.0, R, unif(rng), g));
    s.values.push_back(std::abs(f(s.points.back())));
    s.weights.push_back(w);
  }
  return s;
}

inline DistributionFunction one_dim_rearrangement(const SampledFunction& f) {
  std::vector<std::pair<double, double>> vm;
  for (std::size_t i = 0; i < f.values.size(); ++i) vm.emplace_back(f.values[i], f.weights[i]);
  return detail::distribution_from_weighted(std::move(vm));
}

/// Uses the grid weights as the measure carried by each node.
inline DistributionFunction one_dim_rearrangement(const RadialProfile& f) {
  std::vector<std::pair<double, double>> vm;
  for (std::size_t i = 0; i < f.size(); ++i) vm.emplace_back(f.values[i], f.grid->weights[i]);
  return detail::distribution_from_weighted(std::move(vm));
}

/// f*(rho) = f#(tau(B_H(0, rho))) on the target grid.
inline RadialProfile geodesic_rearrangement(const DistributionFunction& d, const GridPtr& target) {
  const VolumeSampler vs(target->n, target->rho_max() * (1.0 + 1e-12), 8192);
  return RadialProfile::sample(target, [&](double rho) { return d.rearranged(vs.volume(rho)); });
}

inline RadialProfile geodesic_rearrangement(const RadialProfile& f, const GridPtr& target) {
  return geodesic_rearrangement(one_dim_rearrangement(f), target);
}

inline RadialProfile geodesic_rearrangement(const RadialProfile& f) { return geodesic_rearrangement(f, f.grid); }

// ---------------------------------------------------------------------------
// Step functions on disjoint geodesic balls and annuli
// ---------------------------------------------------------------------------

struct StepPiece {
  BallPoint center;
  double r_inner = 0.0;  // geodesic radii
  double r_outer = 0.0;
  double value = 0.0;
};

/// Sum of value * indicator over pairwise disjoint hyperbolic balls/annuli.
class StepFunction {
 public:
  StepFunction(int n, std::vector<StepPiece> pieces) : n_(n), pieces_(std::move(pieces)) {
    detail::require(!pieces_.empty(), "StepFunction: no pieces");
    for (const auto& p : pieces_) {
      detail::require(p.center.dim() == n, "StepFunction: dimension mismatch");
      detail::require(0.0 <= p.r_inner && p.r_inner < p.r_outer, "StepFunction: bad radii");
      detail::require(p.value > 0.0 && std::isfinite(p.value), "StepFunction: values must be positive");
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i)
      for (std::size_t j = i + 1; j < pieces_.size(); ++j) {
        const auto& a = pieces_[i];
        const auto& b = pieces_[j];
        const double d = geodesic_distance(a.center, b.center).value();
        const bool apart = d >= a.r_outer + b.r_outer;
        const bool nested = d < 1e-14 && (a.r_outer <= b.r_inner || b.r_outer <= a.r_inner);
        detail::require(apart || nested, "StepFunction: pieces overlap");
      }
  }

  int dim() const { return n_; }
  const std::vector<StepPiece>& pieces() const { return pieces_; }

  double piece_measure(std::size_t i) const {
    return ball_volume(n_, pieces_[i].r_outer) - ball_volume(n_, pieces_[i].r_inner);
  }

  double operator()(const BallPoint& x) const {
    for (const auto& p : pieces_) {
      const double d = geodesic_distance(x, p.center).value();
      if (d >= p.r_inner && d < p.r_outer) return p.value;
    }
    return 0.0;
  }

  /// Exact distribution function (piece measures are ball volumes).
  DistributionFunction distribution() const {
    std::vector<std::pair<double, double>> vm;
    for (std::size_t i = 0; i < pieces_.size(); ++i) vm.emplace_back(pieces_[i].value, piece_measure(i));
    return detail::distribution_from_weighted(std::move(vm));
  }

  double lp_norm_pow(double p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) s += std::pow(pieces_[i].value, p) * piece_measure(i);
    return s;
  }

  /// Symmetric decreasing rearrangement: concentric shells about the origin,
  /// one per level, largest level innermost.
  StepFunction rearranged() const {
    const auto d = distribution();
    std::vector<StepPiece> out;
    double r_prev = 0.0;
    for (std::size_t m = 0; m < d.levels.size(); ++m) {
      const double r = ball_radius_for_volume(n_, d.cumulative[m]).value();
      out.push_back({BallPoint::origin(n_), r_prev, r, d.levels[m]});
      r_prev = r;
    }
    return StepFunction(n_, std::move(out));
  }

 private:
  int n_;
  std::vector<StepPiece> pieces_;
};

struct SymmetrizationResult {
  double bilinear_original = 0.0;
  double bilinear_rearranged = 0.0;
  double se_original = 0.0;
  double se_rearranged = 0.0;
  double gap = 0.0;     // rearranged - original
  double se_gap = 0.0;  // from the paired differences
  long samples = 0;

  /// rearranged >= original within `sigmas` standard errors of the paired
  /// difference, plus a rounding allowance for identical pairings.
  bool holds(double sigmas) const {
    return gap >= -(sigmas * se_gap + 1e-12 * std::abs(bilinear_rearranged));
  }
};

/// Monte Carlo estimate of int int h(x) K(rho(x,y)) h(y) dV dV for h and h*.
/// x, y are drawn independently from h / ||h||_1; the pairs for h and h*
/// share their random numbers (same shell choice, radius quantile and
/// direction).
template <class Kernel>
SymmetrizationResult symmetrization_gap_with(const StepFunction& h, Kernel&& K, long samples, std::uint64_t seed) {
  detail::require(samples >= 2, "symmetrization_gap: need at least two samples");
  const int n = h.dim();
  const StepFunction hs = h.rearranged();
  // order h's pieces by decreasing value so that shell choices pair up with h*
  std::vector<std::size_t> order(h.pieces().size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return h.pieces()[a].value > h.pieces()[b].value; });
  std::vector<double> cum_h, cum_s;
  double mass = 0.0;
  for (std::size_t i : order) cum_h.push_back(mass += h.pieces()[i].value * h.piece_measure(i));
  double mass_s = 0.0;
  for (std::size_t i = 0; i < hs.pieces().size(); ++i) cum_s.push_back(mass_s += hs.pieces()[i].value * hs.piece_measure(i));
  double rmax = 0.0;
  for (const auto& p : h.pieces()) rmax = std::max(rmax, p.r_outer);
  for (const auto& p : hs.pieces()) rmax = std::max(rmax, p.r_outer);
  const VolumeSampler vs(n, rmax * (1.0 + 1e-9), 16384);

  auto pick = [](const std::vector<double>& cum, double u) {
    const double t = u * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), t);
    return std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
  };
  auto volumes = [&](const StepFunction& f) {
    std::vector<std::pair<double, double>> v;
    for (const auto& p : f.pieces()) v.emplace_back(vs.volume(p.r_inner), vs.volume(p.r_outer));
    return v;
  };
  const auto vol_h = volumes(h), vol_s = volumes(hs);
  auto draw = [&](const StepFunction& f, std::size_t idx, double u, std::span<const double> g) {
    const auto& p = f.pieces()[idx];
    const auto& v = &f == &h ? vol_h[idx] : vol_s[idx];
    const BallPoint z = vs.shell_point_v(v.first, v.second, u, g);
    if (p.center.norm2() == 0.0) return z;
    return mobius_transform(p.center, z);
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> g1(n), g2(n);
  double s_o = 0.0, s2_o = 0.0, s_r = 0.0, s2_r = 0.0, s_d = 0.0, s2_d = 0.0;
  for (long i = 0; i < samples; ++i) {
    const double c1 = unif(rng), c2 = unif(rng), u1 = unif(rng), u2 = unif(rng);
    for (double& x : g1) x = gauss(rng);
    for (double& x : g2) x = gauss(rng);
    const double ko = K(geodesic_distance(draw(h, order[pick(cum_h, c1)], u1, g1),
                                          draw(h, order[pick(cum_h, c2)], u2, g2)).value());
    const double kr = K(geodesic_distance(draw(hs, pick(cum_s, c1), u1, g1), draw(hs, pick(cum_s, c2), u2, g2)).value());
    s_o += ko;
    s2_o += ko * ko;
    s_r += kr;
    s2_r += kr * kr;
    s_d += kr - ko;
    s2_d += (kr - ko) * (kr - ko);
  }
  const double N = static_cast<double>(samples);
  auto se = [N](double s, double s2) { return std::sqrt(std::max(0.0, (s2 / N - (s / N) * (s / N)) / (N - 1.0))); };
  SymmetrizationResult r;
  const double scale = mass * mass;
  r.samples = samples;
  r.bilinear_original = scale * s_o / N;
  r.bilinear_rearranged = scale * s_r / N;
  r.se_original = scale * se(s_o, s2_o);
  r.se_rearranged = scale * se(s_r, s2_r);
  r.gap = scale * s_d / N;
  r.se_gap = scale * se(s_d, s2_d);
  return r;
}

/// Symmetrization harness with a tabulated kernel. The kernel must pass the
/// monotonicity certificate.
inline SymmetrizationResult symmetrization_gap(const StepFunction& h, const KernelProfile& K, long samples,
                                               std::uint64_t seed) {
  const auto cert = monotonicity_certificate(K);
  if (!cert.passed)
    throw DomainError("symmetrization_gap: kernel is not strictly decreasing (node " +
                      std::to_string(cert.first_violation) + ")");
  const ProfileInterpolant interp(K);
  return symmetrization_gap_with(h, interp, samples, seed);
}

}  // namespace hyperlab

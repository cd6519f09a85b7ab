#pragma once

// Poincare-ball primitives: points, Mobius transforms, geodesic distance,
// conformal factor and hyperbolic volumes of geodesic balls.

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hyperlab/error.hpp"
#include "hyperlab/profile.hpp"
#include "hyperlab/quadrature.hpp"
#include "hyperlab/special.hpp"

namespace hyperlab {

/// Points must satisfy |x| <= 1 - kBoundaryGuard; violations are errors.
inline constexpr double kBoundaryGuard = 1e-12;

class BallPoint {
 public:
  explicit BallPoint(std::vector<double> coords) : x_(std::move(coords)) {
    detail::require(x_.size() >= 2, "BallPoint: dimension must be at least 2");
    norm2_ = 0.0;
    for (double c : x_) norm2_ += c * c;
    detail::require(std::isfinite(norm2_) && std::sqrt(norm2_) <= 1.0 - kBoundaryGuard,
                    "BallPoint: point is not strictly inside the unit ball");
  }

  static BallPoint origin(int n) { return BallPoint(std::vector<double>(n, 0.0)); }

  /// Point at geodesic distance rho from the origin along the unit vector dir.
  static BallPoint along(std::span<const double> dir, double rho) {
    const double r = std::tanh(0.5 * rho);
    std::vector<double> c(dir.begin(), dir.end());
    for (double& v : c) v *= r;
    return BallPoint(std::move(c));
  }

  int dim() const { return static_cast<int>(x_.size()); }
  std::span<const double> coords() const { return x_; }
  double operator[](std::size_t i) const { return x_[i]; }
  double norm2() const { return norm2_; }
  double norm() const { return std::sqrt(norm2_); }

 private:
  std::vector<double> x_;
  double norm2_ = 0.0;
};

/// Geodesic radius rho >= 0; the Euclidean radius of the same sphere about
/// the origin is tanh(rho / 2).
class GeodesicRadius {
 public:
  explicit GeodesicRadius(double rho) : rho_(rho) {
    detail::require(rho >= 0.0 && std::isfinite(rho), "GeodesicRadius: rho must be finite and >= 0");
  }
  static GeodesicRadius from_euclidean(double r) {
    detail::require(r >= 0.0 && r < 1.0, "GeodesicRadius: Euclidean radius must lie in [0, 1)");
    return GeodesicRadius(2.0 * std::atanh(r));
  }
  double value() const { return rho_; }
  double euclidean() const { return std::tanh(0.5 * rho_); }

 private:
  double rho_;
};

namespace detail {
inline void same_dim(const BallPoint& a, const BallPoint& b) {
  require(a.dim() == b.dim(), "ball geometry: dimension mismatch");
}
inline double dot(const BallPoint& a, const BallPoint& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}
}  // namespace detail

/// T_a(x) = (|x - a|^2 a - (1 - |a|^2)(x - a)) / (1 - 2 x.a + |x|^2 |a|^2).
/// T_a is an involutive isometry exchanging a and the origin.
inline BallPoint mobius_transform(const BallPoint& a, const BallPoint& x) {
  detail::same_dim(a, x);
  const int n = a.dim();
  double diff2 = 0.0;
  for (int i = 0; i < n; ++i) diff2 += (x[i] - a[i]) * (x[i] - a[i]);
  const double denom = 1.0 - 2.0 * detail::dot(x, a) + x.norm2() * a.norm2();
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = (diff2 * a[i] - (1.0 - a.norm2()) * (x[i] - a[i])) / denom;
  return BallPoint(std::move(out));
}

/// rho(x, y) = log((1 + |T_y(x)|) / (1 - |T_y(x)|)), evaluated through the
/// equivalent sinh(rho / 2) = |x - y| / sqrt((1 - |x|^2)(1 - |y|^2)) which
/// stays accurate for nearby points.
inline GeodesicRadius geodesic_distance(const BallPoint& x, const BallPoint& y) {
  detail::same_dim(x, y);
  double diff2 = 0.0;
  for (int i = 0; i < x.dim(); ++i) diff2 += (x[i] - y[i]) * (x[i] - y[i]);
  const double s = std::sqrt(diff2 / ((1.0 - x.norm2()) * (1.0 - y.norm2())));
  return GeodesicRadius(2.0 * std::asinh(s));
}

/// Distance from the origin: 2 artanh |x|.
inline GeodesicRadius geodesic_radius(const BallPoint& x) { return GeodesicRadius(2.0 * std::atanh(x.norm())); }

/// Conformal factor 2 / (1 - |x|^2) of the Poincare metric.
inline double conformal_factor(const BallPoint& x) { return 2.0 / (1.0 - x.norm2()); }

/// Hyperbolic volume of the geodesic ball B_H(0, r):
/// omega_{n-1} int_0^r sinh^{n-1}(rho) d rho (adaptive Gauss-Legendre).
inline double ball_volume(int n, GeodesicRadius r) {
  detail::require(n >= 2, "ball_volume: dimension must be at least 2");
  if (r.value() == 0.0) return 0.0;
  auto integrand = [n](double rho) { return std::pow(std::sinh(rho), n - 1); };
  const double v = quad::integrate_adaptive(integrand, 0.0, r.value(), 1e-14, 1e-300).value;
  return special::sphere_area(n) * v;
}

inline double ball_volume(int n, double r) { return ball_volume(n, GeodesicRadius(r)); }

/// Inverse of ball_volume: the geodesic radius whose ball has volume v.
inline GeodesicRadius ball_radius_for_volume(int n, double v) {
  detail::require(v >= 0.0 && std::isfinite(v), "ball_radius_for_volume: volume must be finite and >= 0");
  if (v == 0.0) return GeodesicRadius(0.0);
  const double omega = special::sphere_area(n);
  // bracket
  double lo = 0.0, hi = 1.0;
  while (ball_volume(n, hi) < v) hi *= 2.0;
  double r = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = ball_volume(n, r) - v;
    if (f > 0) hi = r; else lo = r;
    const double d = omega * std::pow(std::sinh(r), n - 1);
    double next = r - f / d;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - r) <= 1e-15 * std::max(1.0, r)) { r = next; break; }
    r = next;
  }
  return GeodesicRadius(r);
}

/// Euclidean radial profile g(r) on the unit ball.
struct EuclideanProfile {
  std::vector<double> r;
  std::vector<double> values;
};

/// g = (2 / (1 - r^2))^{n/2 - k} f, the conformal weight linking the
/// hyperbolic and the Euclidean-ball Sobolev quotients.
inline EuclideanProfile conformal_pushforward(const RadialProfile& f, int k) {
  const int n = f.dim();
  detail::require(n > 2 * k, "conformal_pushforward: requires n > 2k");
  EuclideanProfile g;
  g.r.resize(f.size());
  g.values.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double rho = f.grid->nodes[i];
    // 2 / (1 - tanh^2(rho/2)) = 2 cosh^2(rho/2)
    g.r[i] = std::tanh(0.5 * rho);
    g.values[i] = std::pow(2.0 * std::cosh(0.5 * rho) * std::cosh(0.5 * rho), 0.5 * n - k) * f.values[i];
  }
  return g;
}

/// Inverse weight of conformal_pushforward back onto the grid of `like`.
inline RadialProfile conformal_pullback(const EuclideanProfile& g, const GridPtr& grid, int k) {
  const int n = grid->n;
  detail::require(n > 2 * k, "conformal_pullback: requires n > 2k");
  detail::require(g.values.size() == grid->size(), "conformal_pullback: size mismatch");
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = 2.0 * std::cosh(0.5 * grid->nodes[i]) * std::cosh(0.5 * grid->nodes[i]);
    v[i] = g.values[i] / std::pow(c, 0.5 * n - k);
  }
  return {grid, std::move(v)};
}

}  // namespace hyperlab

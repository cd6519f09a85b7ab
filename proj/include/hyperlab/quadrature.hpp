#pragma once

// Gauss-Legendre rules, composite panel rules and a globally adaptive
// integrator. Everything else in the library is built on these.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

#include "hyperlab/error.hpp"

namespace hyperlab::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <class F>
  double apply(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

namespace detail {

inline Rule compute_gauss_legendre(int n) {
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) { p1 = x; p0 = 1.0; }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) { p1 = x; p0 = 1.0; }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], nodes ascending. Cached.
inline const Rule& gauss_legendre(int n) {
  ::hyperlab::detail::require(n >= 1, "gauss_legendre: order must be positive");
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

/// n-point Gauss-Legendre rule mapped to [a, b].
inline Rule gauss_legendre(int n, double a, double b) {
  const Rule& ref = gauss_legendre(n);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + half * ref.nodes[i];
    r.weights[i] = half * ref.weights[i];
  }
  return r;
}

/// Gauss-Legendre of the given order on every panel [edges[i], edges[i+1]].
inline Rule composite_gauss(std::span<const double> edges, int order) {
  ::hyperlab::detail::require(edges.size() >= 2, "composite_gauss: need at least one panel");
  Rule r;
  const Rule& ref = gauss_legendre(order);
  r.nodes.reserve((edges.size() - 1) * order);
  r.weights.reserve((edges.size() - 1) * order);
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    ::hyperlab::detail::require(b > a, "composite_gauss: panel edges must increase");
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int i = 0; i < order; ++i) {
      r.nodes.push_back(mid + half * ref.nodes[i]);
      r.weights.push_back(half * ref.weights[i]);
    }
  }
  return r;
}

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

/// Globally adaptive Gauss-Legendre on an initial partition: each interval
/// is estimated with a 10- and a 21-point rule and the interval with the
/// largest error is bisected until the total error meets
/// max(abs_tol, rel_tol * |value|). Tolerances apply to the whole sum, so
/// negligible pieces are not refined for their own sake.
template <class F>
AdaptiveResult integrate_adaptive_partition(F&& f, std::span<const double> points, double rel_tol = 1e-12,
                                            double abs_tol = 0.0, int max_intervals = 4000) {
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  const Rule& lo = gauss_legendre(10);
  const Rule& hi = gauss_legendre(21);
  auto eval = [&](double x0, double x1) {
    const double half = 0.5 * (x1 - x0), mid = 0.5 * (x0 + x1);
    double s_lo = 0.0, s_hi = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) s_lo += lo.weights[i] * f(mid + half * lo.nodes[i]);
    for (std::size_t i = 0; i < hi.size(); ++i) s_hi += hi.weights[i] * f(mid + half * hi.nodes[i]);
    return Piece{x0, x1, half * s_hi, std::abs(half * (s_hi - s_lo))};
  };
  std::priority_queue<Piece> heap;
  double total = 0.0, err = 0.0;
  int count = 0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    Piece p = eval(points[i], points[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
    ++count;
  }
  if (heap.empty()) return {};
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    Piece left = eval(worst.a, m), right = eval(m, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // re-sum to shed the accumulated update roundoff
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  if (err > std::max(abs_tol, rel_tol * std::abs(total)) * 10.0 && err > 1e-300) {
    throw NumericalError("integrate_adaptive: tolerance not reached");
  }
  return {total, err, count};
}

template <class F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0,
                                  int max_intervals = 4000) {
  const double pts[2] = {a, b};
  return integrate_adaptive_partition(std::forward<F>(f), pts, rel_tol, abs_tol, max_intervals);
}

/// Adaptive integral over [points.front(), points.back()] with the interior
/// points as initial breakpoints.
template <class F>
double integrate_adaptive_pieces(F&& f, std::span<const double> points, double rel_tol = 1e-12,
                                 double abs_tol = 0.0) {
  return integrate_adaptive_partition(std::forward<F>(f), points, rel_tol, abs_tol).value;
}

}  // namespace hyperlab::quad

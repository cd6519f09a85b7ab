#pragma once

// Radial grids and the sampled radial functions that travel between modules.
// Nodes are geodesic radii; weights already include the hyperbolic volume
// element omega_{n-1} sinh^{n-1}(rho), so sum_i w_i f(rho_i) ~ int f dV.

#include <cmath>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hyperlab/error.hpp"
#include "hyperlab/quadrature.hpp"
#include "hyperlab/special.hpp"

namespace hyperlab {

struct RadialGrid {
  int n = 0;                    // ambient dimension
  std::vector<double> nodes;    // strictly increasing, > 0
  std::vector<double> weights;  // hyperbolic volume weights
  std::string kind;             // "composite-gauss", "uniform-cells", "cells", "custom"
  double spacing = 0.0;         // uniform cell width (uniform-cells only)
  std::vector<double> faces;    // cell boundaries (cell grids only)

  bool is_cells() const { return !faces.empty(); }

  std::size_t size() const { return nodes.size(); }
  double rho_max() const { return nodes.back(); }

  void validate() const {
    detail::require(n >= 2, "RadialGrid: dimension must be at least 2");
    detail::require(!nodes.empty() && nodes.size() == weights.size(), "RadialGrid: nodes/weights mismatch");
    detail::require(nodes.front() > 0.0, "RadialGrid: nodes must be positive");
    for (std::size_t i = 1; i < nodes.size(); ++i)
      detail::require(nodes[i] > nodes[i - 1], "RadialGrid: nodes must increase strictly");
  }

  /// Composite Gauss-Legendre panels on [0, rho_max]: one panel on
  /// [0, rho_min], geometric panels up to rho_split, uniform panels above.
  static std::shared_ptr<const RadialGrid> composite(int n, double rho_min = 1e-3, double rho_split = 0.5,
                                                     double rho_max = 15.0, int total_nodes = 2000,
                                                     int order = 8, int log_panels = 45) {
    detail::require(n >= 2, "RadialGrid: dimension must be at least 2");
    detail::require(0.0 < rho_min && rho_min < rho_split && rho_split < rho_max, "RadialGrid: bad radii");
    const int panels = total_nodes / order;
    const int uniform_panels = panels - 1 - log_panels;
    detail::require(uniform_panels >= 1 && log_panels >= 1, "RadialGrid: too few nodes for the panel layout");
    std::vector<double> edges{0.0};
    const double ratio = std::pow(rho_split / rho_min, 1.0 / log_panels);
    for (int i = 0; i <= log_panels; ++i) edges.push_back(rho_min * std::pow(ratio, i));
    edges.back() = rho_split;
    const double du = (rho_max - rho_split) / uniform_panels;
    for (int i = 1; i <= uniform_panels; ++i) edges.push_back(rho_split + i * du);
    edges.back() = rho_max;
    auto rule = quad::composite_gauss(edges, order);
    auto g = std::make_shared<RadialGrid>();
    g->n = n;
    g->kind = "composite-gauss";
    g->nodes = std::move(rule.nodes);
    g->weights.resize(g->nodes.size());
    const double omega = special::sphere_area(n);
    for (std::size_t i = 0; i < g->nodes.size(); ++i)
      g->weights[i] = rule.weights[i] * omega * std::pow(std::sinh(g->nodes[i]), n - 1);
    return g;
  }

  /// Finite-volume cells [faces[i], faces[i+1]] with faces[0] = 0. Nodes are
  /// the cell midpoints; weights are exact hyperbolic cell volumes.
  static std::shared_ptr<const RadialGrid> cells(int n, std::vector<double> faces) {
    detail::require(n >= 2 && faces.size() >= 3 && faces.front() == 0.0, "RadialGrid::cells: bad faces");
    const std::size_t N = faces.size() - 1;
    auto g = std::make_shared<RadialGrid>();
    g->n = n;
    g->kind = "cells";
    g->nodes.resize(N);
    g->weights.resize(N);
    const double omega = special::sphere_area(n);
    const auto& gl = quad::gauss_legendre(8);
    for (std::size_t i = 0; i < N; ++i) {
      const double a = faces[i], b = faces[i + 1];
      detail::require(b > a, "RadialGrid::cells: faces must increase strictly");
      g->nodes[i] = 0.5 * (a + b);
      double s = 0.0;
      for (std::size_t q = 0; q < gl.size(); ++q) {
        const double x = g->nodes[i] + 0.5 * (b - a) * gl.nodes[q];
        s += gl.weights[q] * std::pow(std::sinh(x), n - 1);
      }
      g->weights[i] = omega * 0.5 * (b - a) * s;
    }
    g->faces = std::move(faces);
    return g;
  }

  /// Uniform cells of width h = L / N, nodes (i + 1/2) h.
  static std::shared_ptr<const RadialGrid> uniform_cells(int n, double L, int N) {
    detail::require(n >= 2 && L > 0.0 && N >= 2, "RadialGrid::uniform_cells: bad arguments");
    std::vector<double> faces(N + 1);
    for (int i = 0; i <= N; ++i) faces[i] = L * i / N;
    faces.back() = L;
    auto g = std::const_pointer_cast<RadialGrid>(cells(n, std::move(faces)));
    g->kind = "uniform-cells";
    g->spacing = L / N;
    return g;
  }

  /// Cells refined toward the origin: faces L sinh(beta i / N) / sinh(beta).
  /// beta -> 0 recovers the uniform grid.
  static std::shared_ptr<const RadialGrid> graded_cells(int n, double L, int N, double beta) {
    detail::require(n >= 2 && L > 0.0 && N >= 2 && beta >= 0.0, "RadialGrid::graded_cells: bad arguments");
    if (beta < 1e-8) return uniform_cells(n, L, N);
    std::vector<double> faces(N + 1);
    for (int i = 0; i <= N; ++i) faces[i] = L * std::sinh(beta * i / N) / std::sinh(beta);
    faces.back() = L;
    return cells(n, std::move(faces));
  }

  /// Kernel grid: log-spaced on [rho_min, rho_split], uniform above.
  /// Weights are trapezoid volume weights (diagnostic use only).
  static std::shared_ptr<const RadialGrid> kernel(int n, double rho_min = 1e-3, double rho_split = 0.5,
                                                  double rho_max = 8.0, int log_nodes = 40,
                                                  double uniform_step = 0.05) {
    std::vector<double> nodes;
    const double ratio = std::pow(rho_split / rho_min, 1.0 / (log_nodes - 1));
    for (int i = 0; i < log_nodes; ++i) nodes.push_back(rho_min * std::pow(ratio, i));
    nodes.back() = rho_split;
    const int m = static_cast<int>(std::round((rho_max - rho_split) / uniform_step));
    for (int i = 1; i <= m; ++i) nodes.push_back(rho_split + i * (rho_max - rho_split) / m);
    return from_nodes(n, std::move(nodes));
  }

  /// Grid on arbitrary nodes with trapezoid volume weights.
  static std::shared_ptr<const RadialGrid> from_nodes(int n, std::vector<double> nodes) {
    auto g = std::make_shared<RadialGrid>();
    g->n = n;
    g->kind = "custom";
    g->nodes = std::move(nodes);
    g->weights.assign(g->nodes.size(), 0.0);
    const double omega = special::sphere_area(n);
    for (std::size_t i = 0; i + 1 < g->nodes.size(); ++i) {
      const double h = g->nodes[i + 1] - g->nodes[i];
      g->weights[i] += 0.5 * h * omega * std::pow(std::sinh(g->nodes[i]), n - 1);
      g->weights[i + 1] += 0.5 * h * omega * std::pow(std::sinh(g->nodes[i + 1]), n - 1);
    }
    g->validate();
    return g;
  }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// A radial function sampled on a geodesic grid.
struct RadialProfile {
  GridPtr grid;
  std::vector<double> values;

  RadialProfile() = default;
  RadialProfile(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    detail::require(grid && grid->size() == values.size(), "RadialProfile: values do not match grid");
  }

  template <class F>
  static RadialProfile sample(GridPtr g, F&& f) {
    std::vector<double> v(g->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g->nodes[i]);
    return {std::move(g), std::move(v)};
  }

  int dim() const { return grid->n; }
  std::size_t size() const { return values.size(); }

  /// int |f|^p dV by the grid quadrature.
  double lp_norm_pow(double p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += grid->weights[i] * std::pow(std::abs(values[i]), p);
    return s;
  }
  double lp_norm(double p) const { return std::pow(lp_norm_pow(p), 1.0 / p); }

  double inner(const RadialProfile& other) const {
    detail::require(other.size() == size(), "RadialProfile::inner: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += grid->weights[i] * values[i] * other.values[i];
    return s;
  }
};

}  // namespace hyperlab

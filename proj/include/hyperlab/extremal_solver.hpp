#pragma once

// Radial discretization of P_1 = -Delta_H - n(n-2)/4 and G_k = P_k - alpha_k,
// and the duality iteration f -> normalize(G_k^{-1} f^{p-1}) for extremals of
//   C = <G_k f, f> / ||f||_p^2.
//
// Finite volumes on cells with nodes at the midpoints. Exact cell volumes W_i
// and face coefficients omega sinh^{n-1}(rho_face) / (node gap) make
// W * Delta symmetric. No flux through rho = 0; Dirichlet beyond the last cell.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <memory>
#include <span>
#include <tuple>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hyperlab/error.hpp"
#include "hyperlab/gjms_kernels.hpp"
#include "hyperlab/profile.hpp"
#include "hyperlab/spectral.hpp"

namespace hyperlab {

/// W^{-1} (L - c W) where L is the symmetric flux matrix. `face[i]` couples
/// cells i and i+1; face[N-1] couples the last cell to the zero ghost.
struct DiscreteOperator {
  GridPtr grid;
  int n = 0;
  std::vector<double> face;
  std::vector<double> volume;
  std::string form;

  std::size_t size() const { return volume.size(); }
  double shift() const { return 0.25 * n * (n - 2.0); }

  std::vector<double> apply_laplacian(std::span<const double> f) const {
    const std::size_t N = size();
    detail::require(f.size() == N, "DiscreteOperator: size mismatch");
    std::vector<double> out(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double right = face[i] * ((i + 1 < N ? f[i + 1] : 0.0) - f[i]);
      const double left = i > 0 ? face[i - 1] * (f[i] - f[i - 1]) : 0.0;
      out[i] = (right - left) / volume[i];
    }
    return out;
  }

  /// P_1 f = -Delta f - n(n-2)/4 f.
  std::vector<double> apply_p1(std::span<const double> f) const {
    auto out = apply_laplacian(f);
    const double c = shift();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] - c * f[i];
    return out;
  }

  /// Symmetric form W (P_1 - lambda) as (diag, off) with off[i] at (i, i+1).
  void shifted_stiffness(double lambda, std::vector<double>& diag, std::vector<double>& off) const {
    const std::size_t N = size();
    diag.resize(N);
    off.resize(N - 1);
    const double c = shift();
    for (std::size_t i = 0; i < N; ++i) {
      diag[i] = face[i] + (i > 0 ? face[i - 1] : 0.0) - (c + lambda) * volume[i];
      if (i + 1 < N) off[i] = -face[i];
    }
  }

  Eigen::SparseMatrix<double> stiffness(double lambda = 0.0) const {
    std::vector<double> d, o;
    shifted_stiffness(lambda, d, o);
    std::vector<Eigen::Triplet<double>> t;
    for (std::size_t i = 0; i < d.size(); ++i) {
      t.emplace_back(i, i, d[i]);
      if (i + 1 < d.size()) {
        t.emplace_back(i, i + 1, o[i]);
        t.emplace_back(i + 1, i, o[i]);
      }
    }
    Eigen::SparseMatrix<double> m(d.size(), d.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
  }

  double inner(std::span<const double> f, std::span<const double> g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += volume[i] * f[i] * g[i];
    return s;
  }
};

namespace detail {

/// Distance between the nodes adjacent to face i + 1; the last face sees a
/// mirrored ghost node beyond L.
inline double node_gap(const RadialGrid& g, std::size_t i) {
  return i + 1 < g.size() ? g.nodes[i + 1] - g.nodes[i] : 2.0 * (g.faces.back() - g.nodes[i]);
}

}  // namespace detail

/// Finite-volume P_1 in the geodesic radial form
/// Delta f = sinh^{1-n} (sinh^{n-1} f')'.
inline DiscreteOperator assemble_p1(const GridPtr& grid) {
  detail::require(grid && grid->is_cells(), "assemble_p1: requires a cell grid");
  const int n = grid->n;
  const std::size_t N = grid->size();
  const double omega = special::sphere_area(n);
  DiscreteOperator op;
  op.grid = grid;
  op.n = n;
  op.form = "geodesic";
  op.volume = grid->weights;
  op.face.resize(N);
  for (std::size_t i = 0; i < N; ++i)
    op.face[i] = omega * std::pow(std::sinh(grid->faces[i + 1]), n - 1) / detail::node_gap(*grid, i);
  return op;
}

/// The same finite-volume operator with coefficients built from the
/// Cartesian ball form Delta_H = psi^{-n} div(psi^{n-2} grad), psi = 2/(1-r^2):
/// face flux omega r^{n-1} psi^{n-2} f_r = omega (r psi)^{n-1} f_rho, cell
/// volumes int omega psi^n r^{n-1} dr, all evaluated in r = tanh(rho/2).
inline DiscreteOperator assemble_p1_cartesian(const GridPtr& grid) {
  detail::require(grid && grid->is_cells(), "assemble_p1_cartesian: requires a cell grid");
  const int n = grid->n;
  const std::size_t N = grid->size();
  const double omega = special::sphere_area(n);
  const auto& gl = quad::gauss_legendre(8);
  DiscreteOperator op;
  op.grid = grid;
  op.n = n;
  op.form = "cartesian";
  op.face.resize(N);
  op.volume.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double ra = std::tanh(0.5 * grid->faces[i]), rb = std::tanh(0.5 * grid->faces[i + 1]);
    const double psi_b = 2.0 / ((1.0 - rb) * (1.0 + rb));
    op.face[i] = omega * std::pow(rb * psi_b, n - 1) / detail::node_gap(*grid, i);
    double s = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const double r = 0.5 * (ra + rb) + 0.5 * (rb - ra) * gl.nodes[q];
      const double psi = 2.0 / ((1.0 - r) * (1.0 + r));
      s += gl.weights[q] * std::pow(psi, n) * std::pow(r, n - 1);
    }
    op.volume[i] = omega * 0.5 * (rb - ra) * s;
  }
  return op;
}

/// P_k f - alpha f with P_k = prod_{i=1}^k (P_1 + i(i-1)).
inline std::vector<double> apply_gk(const DiscreteOperator& op, std::span<const double> f, int k) {
  std::vector<double> v(f.begin(), f.end());
  for (int i = 1; i <= k; ++i) {
    auto w = op.apply_p1(v);
    for (std::size_t j = 0; j < w.size(); ++j) w[j] += i * (i - 1.0) * v[j];
    v = std::move(w);
  }
  const double a = gk_alpha(k);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] -= a * f[j];
  return v;
}

/// <G_k f, f> under the cell volumes. Throws if it is below -1e-10 |f|^2.
inline double energy_form(const DiscreteOperator& op, std::span<const double> f, int k) {
  const auto g = apply_gk(op, f, k);
  const double e = op.inner(g, f);
  if (e < -1e-10 * op.inner(f, f)) throw NumericalError("energy_form: negative energy, discretization fault");
  return e;
}

namespace detail {

/// Thomas algorithm for a symmetric tridiagonal system. On a Stieltjes
/// matrix with a nonnegative right-hand side every step adds nonnegative
/// terms, so each component keeps full relative accuracy.
class Tridiagonal {
 public:
  Tridiagonal(std::vector<double> diag, std::vector<double> off) : off_(std::move(off)) {
    const std::size_t N = diag.size();
    piv_.resize(N);
    piv_[0] = diag[0];
    for (std::size_t i = 1; i < N; ++i) {
      piv_[i] = diag[i] - off_[i - 1] * off_[i - 1] / piv_[i - 1];
      if (!(piv_[i] > 0.0)) throw NumericalError("gk_solve: factor is not positive definite");
    }
    if (!(piv_[0] > 0.0)) throw NumericalError("gk_solve: factor is not positive definite");
  }

  void solve(std::vector<double>& b) const {
    const std::size_t N = b.size();
    for (std::size_t i = 1; i < N; ++i) b[i] -= off_[i - 1] / piv_[i - 1] * b[i - 1];
    b[N - 1] /= piv_[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) b[i] = (b[i] - off_[i] * b[i + 1]) / piv_[i];
  }

 private:
  std::vector<double> off_, piv_;
};

}  // namespace detail

/// G_k^{-1} as a chain of factor solves: (P_1 - lambda_j) for real roots,
/// (P_1 - lambda)(P_1 - conj lambda) merged into a real pentadiagonal form
/// for conjugate pairs. Factorizations are computed once.
class GkSolver {
 public:
  GkSolver(DiscreteOperator op, const FactorizationSpectrum& spec) : op_(std::move(op)) {
    for (double r : spec.real_roots()) {
      std::vector<double> d, o;
      op_.shifted_stiffness(r, d, o);
      real_.emplace_back(std::move(d), std::move(o));
    }
    for (const auto& z : spec.complex_pairs()) {
      // M W^{-1} M - 2 Re(z) M + |z|^2 W with M = W P_1
      const Eigen::SparseMatrix<double> M = op_.stiffness(0.0);
      Eigen::VectorXd winv(op_.size()), w(op_.size());
      for (std::size_t i = 0; i < op_.size(); ++i) {
        w[i] = op_.volume[i];
        winv[i] = 1.0 / op_.volume[i];
      }
      Eigen::SparseMatrix<double> Q = M * winv.asDiagonal() * M - 2.0 * z.real() * M;
      Eigen::SparseMatrix<double> Wd(op_.size(), op_.size());
      for (std::size_t i = 0; i < op_.size(); ++i) Wd.insert(i, i) = std::norm(z) * w[i];
      Q += Wd;
      auto chol = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                                         Eigen::NaturalOrdering<int>>>(Q);
      if (chol->info() != Eigen::Success) throw NumericalError("gk_solve: quadratic factor is singular");
      pairs_.push_back(std::move(chol));
    }
  }

  const DiscreteOperator& op() const { return op_; }

  std::vector<double> solve(std::span<const double> rhs) const {
    detail::require(rhs.size() == op_.size(), "gk_solve: size mismatch");
    std::vector<double> v(rhs.begin(), rhs.end());
    for (const auto& t : real_) {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= op_.volume[i];
      t.solve(v);
    }
    for (const auto& c : pairs_) {
      Eigen::VectorXd b(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) b[i] = op_.volume[i] * v[i];
      Eigen::VectorXd x = c->solve(b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i];
    }
    return v;
  }

 private:
  DiscreteOperator op_;
  std::vector<detail::Tridiagonal> real_;
  std::vector<std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                                    Eigen::NaturalOrdering<int>>>>
      pairs_;
};

inline RadialProfile gk_solve(const RadialProfile& rhs, const FactorizationSpectrum& spec) {
  const GkSolver solver(assemble_p1(rhs.grid), spec);
  return {rhs.grid, solver.solve(rhs.values)};
}

// ---------------------------------------------------------------------------
// Extremal search
// ---------------------------------------------------------------------------

struct SolverConfig {
  int n = 5;
  int k = 2;
  double p = 3.0;
  double L = 40.0;
  int N = 4000;
  double grading = 0.0;  // faces L sinh(beta i/N)/sinh(beta); 0 is uniform
  double tol = 1e-10;
  int max_iter = 2000;
  double damping = 0.0;  // 0 selects 1 (subcritical) or 0.5 (critical)
  std::string seed = "sech";

  double critical_exponent() const { return 2.0 * n / (n - 2.0 * k); }
  bool critical() const { return std::abs(p - critical_exponent()) < 1e-12; }
  double effective_damping() const { return damping > 0.0 ? damping : (critical() ? 0.5 : 1.0); }

  /// Full validation including the production grid limits L >= 10, N >= 500.
  void validate() const {
    validate_model();
    detail::require(L >= 10.0, "SolverConfig: L must be at least 10");
    detail::require(N >= 500, "SolverConfig: N must be at least 500");
  }

  /// Model constraints only (used for coarse oracle grids).
  void validate_model() const {
    detail::require(k >= 1 && k <= 8, "SolverConfig: k must lie in [1, 8]");
    detail::require(n > 2 * k, "SolverConfig: requires n > 2k");
    detail::require(p > 2.0 && p <= critical_exponent() + 1e-12, "SolverConfig: requires 2 < p <= 2n/(n-2k)");
    detail::require(L > 0.0 && N >= 8, "SolverConfig: bad grid");
    detail::require((n - 1) * L < 700.0, "SolverConfig: volume weights overflow, need (n - 1) L < 700");
    detail::require(tol > 0.0 && max_iter >= 1, "SolverConfig: bad iteration limits");
    detail::require(damping >= 0.0 && damping <= 1.0, "SolverConfig: damping must lie in (0, 1]");
    detail::require(seed == "sech" || seed == "gaussian", "SolverConfig: unknown seed profile");
  }
};

enum class SolverStatus { converged, concentrated, max_iter };

inline const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::converged: return "converged";
    case SolverStatus::concentrated: return "concentrated";
    default: return "max_iter";
  }
}

struct QuotientReport {
  double energy = 0.0;
  double lp_norm = 0.0;
  double quotient = 0.0;
  double seed_quotient = 0.0;
  double el_residual = 0.0;         // ||G^{-1}(u^{p-1}) - u|| / ||u||
  double el_residual_strong = 0.0;  // ||G u - u^{p-1}|| / ||u^{p-1}||
  int iterations = 0;
  bool converged = false;
  SolverStatus status = SolverStatus::max_iter;
  double decay_exponent_fit = 0.0;
  double sup_growth = 1.0;          // sup of final iterate over sup of seed
  double monotone_fraction = 1.0;   // steps with C_{m+1} <= C_m + 1e-8
  std::vector<double> trace;        // quotient per iteration
  std::vector<double> sup_trace;    // f(rho_0) per iteration
};

struct ExtremalResult {
  RadialProfile f;  // unit L^p norm
  RadialProfile u;  // scaled solution of G_k u = u^{p-1}
  QuotientReport report;
};

namespace detail {

inline double lp_norm(const DiscreteOperator& op, std::span<const double> f, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += op.volume[i] * std::pow(std::abs(f[i]), p);
  return std::pow(s, 1.0 / p);
}

inline void clip_roundoff(std::vector<double>& g) {
  const double mx = *std::max_element(g.begin(), g.end());
  const double mn = *std::min_element(g.begin(), g.end());
  if (!(mx > 0.0)) throw NumericalError("duality_iterate: solve produced no positive values");
  if (mn < -1e-10 * mx) throw NumericalError("duality_iterate: negative values beyond roundoff after a solve");
  for (double& v : g) v = std::max(v, 0.0);
}

}  // namespace detail

/// Rayleigh quotient <G_k f, f> / ||f||_p^2.
inline double rayleigh_quotient(const DiscreteOperator& op, std::span<const double> f, int k, double p) {
  const double nrm = detail::lp_norm(op, f, p);
  return energy_form(op, f, k) / (nrm * nrm);
}

/// One step f -> normalize((1-s) f + s g / ||g||_p), g = G_k^{-1}(f^{p-1}).
inline std::vector<double> duality_iterate(const GkSolver& solver, std::span<const double> f, double p, double s) {
  const auto& op = solver.op();
  std::vector<double> rhs(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    detail::require(f[i] >= 0.0, "duality_iterate: iterate must be nonnegative");
    rhs[i] = std::pow(f[i], p - 1.0);
  }
  auto g = solver.solve(rhs);
  detail::clip_roundoff(g);
  const double gn = detail::lp_norm(op, g, p);
  if (!(gn > 0.0)) throw NumericalError("duality_iterate: G_k^{-1} f^{p-1} vanished");
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = (1.0 - s) * f[i] + s * g[i] / gn;
  const double on = detail::lp_norm(op, out, p);
  for (double& v : out) v /= on;
  return out;
}

inline RadialProfile duality_iterate(const RadialProfile& f, const SolverConfig& cfg) {
  cfg.validate_model();
  const GkSolver solver(assemble_p1(f.grid), factorization_roots(cfg.k));
  return {f.grid, duality_iterate(solver, f.values, cfg.p, cfg.effective_damping())};
}

/// sech^{(n-2k)/2}(rho/2) or a Gaussian, normalized in L^p.
inline std::vector<double> seed_profile(const DiscreteOperator& op, const SolverConfig& cfg) {
  std::vector<double> f(op.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = op.grid->nodes[i];
    f[i] = cfg.seed == "gaussian" ? std::exp(-r * r) : std::pow(1.0 / std::cosh(0.5 * r), 0.5 * (cfg.n - 2.0 * cfg.k));
  }
  const double nrm = detail::lp_norm(op, f, cfg.p);
  for (double& v : f) v /= nrm;
  return f;
}

/// EL residuals of u = C^{1/(p-2)} f for G_k u = u^{p-1}.
inline std::pair<double, double> el_residuals(const GkSolver& solver, std::span<const double> u, int k, double p) {
  const auto& op = solver.op();
  std::vector<double> up(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) up[i] = std::pow(u[i], p - 1.0);
  const auto w = solver.solve(up);
  std::vector<double> d(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = w[i] - u[i];
  const double inv = std::sqrt(op.inner(d, d) / op.inner(u, u));
  const auto gu = apply_gk(op, u, k);
  for (std::size_t i = 0; i < u.size(); ++i) d[i] = gu[i] - up[i];
  const double strong = std::sqrt(op.inner(d, d) / op.inner(up, up));
  return {inv, strong};
}

struct DecayReport {
  bool passed = false;
  double q = 0.0;
  double fitted_constant = 0.0;
  double bound_exponent = 0.0;  // (n-1)/q
  double fitted_log_slope = 0.0;
  long first_violation = -1;
};

/// f(rho) <= D exp(-(n-1) rho / q) on [L/3, 2L/3], q = 1 + n/(n-2k), with D
/// fitted at rho = L/3. Also reports the least-squares slope of log f.
inline DecayReport decay_check(const RadialProfile& f, const SolverConfig& cfg) {
  DecayReport r;
  r.q = 1.0 + cfg.n / (cfg.n - 2.0 * cfg.k);
  r.bound_exponent = (cfg.n - 1.0) / r.q;
  const double L = f.grid->is_cells() ? f.grid->faces.back() : f.grid->rho_max();
  const double lo = L / 3.0, hi = 2.0 * L / 3.0;
  std::size_t i0 = 0;
  while (i0 < f.size() && f.grid->nodes[i0] < lo) ++i0;
  if (i0 >= f.size()) return r;
  if (!(f.values[i0] > 0.0)) {
    r.first_violation = static_cast<long>(i0);
    return r;
  }
  r.fitted_constant = f.values[i0] * std::exp(r.bound_exponent * f.grid->nodes[i0]);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  r.passed = true;
  for (std::size_t i = i0; i < f.size() && f.grid->nodes[i] <= hi; ++i) {
    const double rho = f.grid->nodes[i];
    const double bound = r.fitted_constant * std::exp(-r.bound_exponent * rho);
    if (f.values[i] > bound * (1.0 + 1e-9) && r.passed) {
      r.passed = false;
      r.first_violation = static_cast<long>(i);
    }
    if (f.values[i] > 0.0) {
      const double y = std::log(f.values[i]);
      sx += rho;
      sy += y;
      sxx += rho * rho;
      sxy += rho * y;
      ++m;
    }
  }
  if (m >= 2) r.fitted_log_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return r;
}

/// Duality iteration from the seed profile until the quotient and the
/// profile settle, the iterate concentrates, or max_iter is reached.
/// `check_limits` = false skips the production grid limits (coarse oracles).
inline ExtremalResult solve_extremal(const SolverConfig& cfg, bool check_limits = true) {
  if (check_limits) cfg.validate();
  else cfg.validate_model();
  const auto grid = RadialGrid::graded_cells(cfg.n, cfg.L, cfg.N, cfg.grading);
  const GkSolver solver(assemble_p1(grid), factorization_roots(cfg.k));
  const auto& op = solver.op();
  const double s = cfg.effective_damping();

  ExtremalResult res;
  QuotientReport& rep = res.report;
  auto f = seed_profile(op, cfg);
  double C = rayleigh_quotient(op, f, cfg.k, cfg.p);
  rep.seed_quotient = C;
  rep.trace.push_back(C);
  rep.sup_trace.push_back(f[0]);
  const double sup0 = f[0];
  int calm = 0, monotone_steps = 0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    auto next = duality_iterate(solver, f, cfg.p, s);
    const double Cn = rayleigh_quotient(op, next, cfg.k, cfg.p);
    std::vector<double> d(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) d[i] = next[i] - f[i];
    const double change = std::sqrt(op.inner(d, d) / op.inner(next, next));
    if (Cn <= C + 1e-8) ++monotone_steps;
    const bool quiet = std::abs(Cn - C) / Cn < cfg.tol && change < 10.0 * cfg.tol;
    calm = quiet ? calm + 1 : 0;
    f = std::move(next);
    C = Cn;
    rep.trace.push_back(C);
    rep.sup_trace.push_back(f[0]);
    rep.iterations = it;
    // mass piling into the first cells at fixed L^p norm
    double inner_mass = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, f.size()); ++i) inner_mass += op.volume[i] * std::pow(f[i], cfg.p);
    rep.sup_growth = f[0] / sup0;
    if (inner_mass > 0.5) {
      rep.status = SolverStatus::concentrated;
      break;
    }
    if (calm >= 5) {
      rep.status = SolverStatus::converged;
      rep.converged = true;
      break;
    }
  }
  rep.monotone_fraction = rep.iterations > 0 ? static_cast<double>(monotone_steps) / rep.iterations : 1.0;
  rep.quotient = C;
  rep.energy = energy_form(op, f, cfg.k);
  rep.lp_norm = detail::lp_norm(op, f, cfg.p);
  std::vector<double> u(f.size());
  const double scale = std::pow(C, 1.0 / (cfg.p - 2.0));
  for (std::size_t i = 0; i < f.size(); ++i) u[i] = scale * f[i];
  std::tie(rep.el_residual, rep.el_residual_strong) = el_residuals(solver, u, cfg.k, cfg.p);
  res.f = {grid, std::move(f)};
  res.u = {grid, std::move(u)};
  rep.decay_exponent_fit = decay_check(res.f, cfg).fitted_log_slope;
  return res;
}

/// Strict positivity and strict decrease at every node.
inline MonotonicityReport profile_certificate(const RadialProfile& f) {
  KernelProfile K;
  K.grid = f.grid;
  K.values = f.values;
  K.n = f.dim();
  return monotonicity_certificate(K);
}

}  // namespace hyperlab

// hyperlab-cli: solve, verify, constants, kernel, transform, rearrange.
// Exit codes: 0 success, 1 computation or verification failure, 2 usage error.

#include <CLI11.hpp>
#include <boost/math/interpolators/barycentric_rational.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hyperlab/hyperlab.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace hyperlab;
using report::Json;
using report::num;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // solver
  int n = 5, k = 2;
  double p = 0.0;  // 0 selects the critical exponent
  double L = 40.0;
  int N = 4000;
  double grading = 0.0;
  double tol = 1e-10;
  int max_iter = 2000;
  double damping = 0.0;
  std::string seed_profile = "sech";
  // output
  std::string out = ".";
  bool json_only = false;
  // verify / constants / kernel / transform / rearrange
  std::string suite;
  int k_max = 6;
  std::vector<std::string> pairs;
  std::string route = "spectral";
  double rho_max = 8.0;
  std::string input;
  long samples = 100000;
  int trials = 10;
  std::uint64_t seed = 1;
  std::string kernel = "exp";
};

SolverConfig solver_config(const Options& o) {
  SolverConfig c;
  c.n = o.n;
  c.k = o.k;
  c.p = o.p > 0.0 ? o.p : (o.n > 2 * o.k ? 2.0 * o.n / (o.n - 2.0 * o.k) : 0.0);
  c.L = o.L;
  c.N = o.N;
  c.grading = o.grading;
  c.tol = o.tol;
  c.max_iter = o.max_iter;
  c.damping = o.damping;
  c.seed = o.seed_profile;
  return c;
}

Json options_json(const Options& o, const std::string& command) {
  Json j;
  j["command"] = command;
  j["n"] = o.n;
  j["k"] = o.k;
  j["p"] = num(o.p);
  j["L"] = num(o.L);
  j["N"] = o.N;
  j["grading"] = num(o.grading);
  j["tol"] = num(o.tol);
  j["max_iter"] = o.max_iter;
  j["damping"] = num(o.damping);
  j["seed_profile"] = o.seed_profile;
  j["suite"] = o.suite;
  j["k_max"] = o.k_max;
  j["pairs"] = o.pairs;
  j["route"] = o.route;
  j["rho_max"] = num(o.rho_max);
  j["input"] = o.input;
  j["samples"] = o.samples;
  j["trials"] = o.trials;
  j["seed"] = o.seed;
  j["kernel"] = o.kernel;
  j["json_only"] = o.json_only;
  return j;
}

/// Values from a JSON config file; command-line flags parsed afterwards win.
void load_config(const std::string& path, Options& o) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config file " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw UsageError(std::string("config file is not valid JSON: ") + e.what());
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  try {
    get("n", o.n);
    get("k", o.k);
    get("p", o.p);
    get("L", o.L);
    get("N", o.N);
    get("grading", o.grading);
    get("tol", o.tol);
    get("max_iter", o.max_iter);
    get("damping", o.damping);
    get("seed_profile", o.seed_profile);
    get("out", o.out);
    get("json_only", o.json_only);
    get("k_max", o.k_max);
    get("pairs", o.pairs);
    get("route", o.route);
    get("rho_max", o.rho_max);
    get("input", o.input);
    get("samples", o.samples);
    get("trials", o.trials);
    get("seed", o.seed);
    get("kernel", o.kernel);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
}

void ensure_dir(const std::string& d) {
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw UsageError("cannot create output directory " + d);
}

int finish(const Json& doc, const std::string& path) {
  report::write_json(path, doc);
  std::cout << doc.dump(2) << '\n';
  return report::all_passed(doc) ? 0 : 1;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

int cmd_solve(const Options& o) {
  const SolverConfig cfg = solver_config(o);
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  ensure_dir(o.out);
  Json doc = report::document(report::to_json(cfg));
  const auto res = solve_extremal(cfg);
  const auto cert = profile_certificate(res.f);
  const auto decay = decay_check(res.f, cfg);
  doc["results"]["quotient_report"] = report::to_json(res.report);
  if (cfg.critical()) {
    const double S = euclidean_sobolev_constant(cfg.n, cfg.k);
    doc["results"]["sobolev_constant"] = num(S);
    doc["results"]["margin"] = num((S - res.report.quotient) / S);
  }
  doc["certificates"].push_back(report::certificate(
      "converged", res.report.converged,
      {{"status", to_string(res.report.status)}, {"iterations", res.report.iterations}}));
  doc["certificates"].push_back(report::certificate(
      "strictly_decreasing_positive", cert.passed,
      {{"min_value", num(cert.min_value)}, {"first_violation", cert.first_violation}}));
  doc["certificates"].push_back(report::certificate(
      "decay_bound", decay.passed,
      {{"q", num(decay.q)}, {"bound_exponent", num(decay.bound_exponent)},
       {"fitted_log_slope", num(decay.fitted_log_slope)}, {"first_violation", decay.first_violation}}));
  report::write_profile_csv((fs::path(o.out) / "profile.csv").string(), res.f, res.u);
  if (!o.json_only) {
    char title[96];
    std::snprintf(title, sizeof title, "extremal profile n=%d k=%d p=%.4g", cfg.n, cfg.k, cfg.p);
    report::write_svg_loglinear((fs::path(o.out) / "profile.svg").string(), res.f.grid->nodes, res.f.values, title);
  }
  if (!res.report.converged)
    std::cerr << "solver did not converge: " << to_string(res.report.status) << " after " << res.report.iterations
              << " iterations\n";
  return finish(doc, (fs::path(o.out) / "report.json").string());
}

// ---------------------------------------------------------------------------
// verify suites
// ---------------------------------------------------------------------------

void suite_plancherel(const Options& o, Json& doc) {
  std::vector<int> dims = o.n == 0 ? std::vector<int>{3, 4, 6} : std::vector<int>{o.n};
  for (int n : dims) {
    const auto grid = RadialGrid::composite(n);
    const auto fg = FrequencyGrid::gauss_legendre(n);
    for (double sigma : {0.5, 1.0, 1.5}) {
      std::vector<double> v(grid->size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-std::pow(grid->nodes[i] / sigma, 2));
      const RadialProfile f{grid, v};
      const auto F = radial_ht_forward(f, fg);
      const auto back = radial_ht_inverse(F, grid);
      double num2 = 0.0, den = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) {
        num2 += grid->weights[i] * std::pow(back.values[i] - v[i], 2);
        den += grid->weights[i] * v[i] * v[i];
      }
      const double roundtrip = std::sqrt(num2 / den);
      const double identity = std::abs(F.l2_norm_pow() / den - 1.0);
      char name[64];
      std::snprintf(name, sizeof name, "plancherel n=%d sigma=%.2g", n, sigma);
      doc["certificates"].push_back(report::certificate(
          name, roundtrip < 1e-6 && identity < 1e-6,
          {{"roundtrip_l2_error", num(roundtrip)}, {"norm_identity_error", num(identity)}}));
    }
  }
}

void suite_roots(const Options& o, Json& doc) {
  if (o.k_max < 1 || o.k_max > 8) throw UsageError("--k-max must lie in [1, 8]");
  Json table = Json::array();
  for (int k = 1; k <= o.k_max; ++k) {
    const auto spec = factorization_roots(k);
    double quarter = INFINITY, max_re = -INFINITY, max_res = 0.0;
    Json roots = Json::array();
    for (const auto& z : spec.roots) {
      quarter = std::min(quarter, std::abs(z - cplx(0.25, 0.0)));
      max_re = std::max(max_re, z.real());
      const auto [res, scale] = gk_polynomial_residual(z, k);
      max_res = std::max(max_res, std::abs(res) / scale);
      roots.push_back({{"re", num(z.real())}, {"im", num(z.imag())}});
    }
    table.push_back({{"k", k}, {"alpha", num(spec.alpha)}, {"roots", roots}});
    doc["certificates"].push_back(report::certificate(
        "roots k=" + std::to_string(k), quarter < 1e-12 && max_res < 1e-10 && max_re <= 0.25 + 1e-12,
        {{"distance_to_quarter", num(quarter)}, {"max_relative_residual", num(max_res)}, {"max_real_part", num(max_re)}}));
  }
  doc["results"]["roots"] = table;
}

void suite_kernels(const Options& o, Json& doc) {
  if (o.n <= 2 * o.k || o.k < 1 || o.k > 3) throw UsageError("kernels suite needs 1 <= k <= 3 and n > 2k");
  const auto grid = RadialGrid::kernel(o.n, 1e-3, 0.5, 6.0, 30, 0.1);
  const auto t0 = std::chrono::steady_clock::now();
  const auto spectral = gk_inverse_kernel(o.k, o.n, grid, KernelRoute::spectral);
  const auto conv = gk_inverse_kernel(o.k, o.n, grid, KernelRoute::convolution);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto agree = compare_routes(conv, spectral, 0.2, 4.0, 1e-4);
  doc["certificates"].push_back(report::certificate(
      "route_agreement", agree.passed,
      {{"max_relative_difference", num(agree.max_relative_difference)}, {"rho_at_max", num(agree.rho_at_max)},
       {"seconds", num(secs)}}));
  for (const auto* K : {&spectral, &conv}) {
    const auto m = monotonicity_certificate(*K);
    doc["certificates"].push_back(report::certificate(
        std::string("monotone ") + K->route, m.passed,
        {{"min_value", num(m.min_value)}, {"min_relative_decrement", num(m.min_relative_decrement)},
         {"first_violation", m.first_violation}}));
  }
  // K sinh^{n-2k} can stay bounded only when the kernel decay e^{-(n-1) rho/2}
  // beats the growth e^{(n-2k) rho}, i.e. n <= 4k - 1
  if (o.n <= 4 * o.k - 1) {
    const auto b = sinh_bound_check(spectral, o.k);
    doc["certificates"].push_back(report::certificate(
        "sinh_bound", b.passed, {{"fitted_constant", num(b.fitted_constant)}, {"tail_ratio", num(b.tail_ratio)}}));
  } else {
    doc["results"]["sinh_bound"] = "not applicable for n > 4k - 1";
  }
}

StepFunction random_two_bump(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::normal_distribution<double> G(0.0, 1.0);
  auto point = [&](double rho) {
    std::vector<double> d(n);
    double s = 0.0;
    for (double& x : d) s += (x = G(rng)) * x;
    for (double& x : d) x /= std::sqrt(s);
    return BallPoint::along(d, rho);
  };
  const double r1 = 0.3 + U(rng), r2 = 0.3 + U(rng);
  const BallPoint c1 = point(0.5 * U(rng));
  BallPoint c2 = point(2.0 + 2.0 * U(rng));
  while (geodesic_distance(c1, c2).value() < r1 + r2) c2 = point(geodesic_radius(c2).value() + 0.5);
  return StepFunction(n, {{c1, 0.0, r1, 0.5 + U(rng)}, {c2, 0.0, r2, 0.5 + U(rng)}});
}

void suite_rearrangement(const Options& o, Json& doc) {
  const int n = 3;
  std::mt19937_64 rng(o.seed);
  double worst_lp = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto h = random_two_bump(n, rng);
    const auto hs = h.rearranged();
    for (double p : {2.0, 3.0}) worst_lp = std::max(worst_lp, std::abs(hs.lp_norm_pow(p) / h.lp_norm_pow(p) - 1.0));
  }
  doc["certificates"].push_back(report::certificate("lp_preservation", worst_lp < 1e-3, {{"max_relative_error", num(worst_lp)}}));
  int held = 0;
  double worst_z = INFINITY;
  for (int t = 0; t < o.trials; ++t) {
    const auto h = random_two_bump(n, rng);
    const auto r = symmetrization_gap_with(h, [](double rho) { return std::exp(-rho); }, o.samples, o.seed + 1000 + t);
    if (r.holds(2.0)) ++held;
    worst_z = std::min(worst_z, r.gap / r.se_gap);
  }
  doc["certificates"].push_back(report::certificate(
      "symmetrization", held == o.trials,
      {{"held", held}, {"trials", o.trials}, {"samples", o.samples}, {"min_z_score", num(worst_z)}}));
}

void suite_decay(const Options& o, Json& doc) {
  SolverConfig cfg = solver_config(o);
  if (o.p == 0.0 && o.n == 5 && o.k == 2) cfg.p = 3.0;
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const auto res = solve_extremal(cfg);
  const auto d = decay_check(res.f, cfg);
  doc["certificates"].push_back(report::certificate("solver_converged", res.report.converged,
                                                    {{"status", to_string(res.report.status)}}));
  doc["certificates"].push_back(report::certificate(
      "decay_bound", d.passed,
      {{"q", num(d.q)}, {"bound_exponent", num(d.bound_exponent)}, {"fitted_log_slope", num(d.fitted_log_slope)},
       {"first_violation", d.first_violation}}));
}

void suite_constants(const Options&, Json& doc) {
  for (int n : {3, 4, 5}) {
    const double S = euclidean_sobolev_constant(n, 1);
    const double closed = 0.25 * n * (n - 2) * std::pow(special::sphere_area(n + 1), 2.0 / n);
    const double err = std::abs(S / closed - 1.0);
    doc["certificates"].push_back(report::certificate("sobolev S_{" + std::to_string(n) + ",1}", err < 1e-4,
                                                      {{"bubble", num(S)}, {"closed_form", num(closed)},
                                                       {"relative_error", num(err)}}));
  }
}

int cmd_verify(const Options& o) {
  Json doc = report::document(options_json(o, "verify"));
  if (o.suite == "plancherel") suite_plancherel(o, doc);
  else if (o.suite == "roots") suite_roots(o, doc);
  else if (o.suite == "kernels") suite_kernels(o, doc);
  else if (o.suite == "rearrangement") suite_rearrangement(o, doc);
  else if (o.suite == "decay") suite_decay(o, doc);
  else if (o.suite == "constants") suite_constants(o, doc);
  else throw UsageError("unknown suite '" + o.suite + "'");
  ensure_dir(o.out);
  return finish(doc, (fs::path(o.out) / ("verify_" + o.suite + ".json")).string());
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

int cmd_constants(const Options& o) {
  if (o.pairs.empty()) throw UsageError("constants: empty --pairs list");
  std::vector<SolverConfig> runs;
  for (const auto& s : o.pairs) {
    int n = 0, k = 0;
    char extra = 0;
    if (std::sscanf(s.c_str(), "%d,%d%c", &n, &k, &extra) != 2) throw UsageError("constants: bad pair '" + s + "'");
    Options q = o;
    q.n = n;
    q.k = k;
    q.p = 0.0;
    SolverConfig c = solver_config(q);
    try {
      c.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    runs.push_back(c);
  }
  ensure_dir(o.out);
  Json doc = report::document(options_json(o, "constants"));
  std::ofstream csv((fs::path(o.out) / "constants.csv").string());
  csv << "n,k,p,S,C,margin,verdict\n";
  Json rows = Json::array();
  for (const auto& c : runs) {
    const auto r = compare_constants(c);
    rows.push_back(report::to_json(r));
    csv << r.n << ',' << r.k << ',' << num(r.p) << ',' << num(r.S_value) << ',' << num(r.C_value) << ','
        << num(r.margin) << ',' << r.verdict << '\n';
    doc["certificates"].push_back(report::certificate(
        "constants n=" + std::to_string(r.n) + " k=" + std::to_string(r.k), r.passed,
        {{"margin", num(r.margin)}, {"status", to_string(r.status)}}));
  }
  doc["results"]["rows"] = rows;
  return finish(doc, (fs::path(o.out) / "constants.json").string());
}

// ---------------------------------------------------------------------------
// kernel, transform, rearrange
// ---------------------------------------------------------------------------

int cmd_kernel(const Options& o) {
  if (o.n <= 2 * o.k || o.k < 1 || o.k > 8) throw UsageError("kernel: needs 1 <= k <= 8 and n > 2k");
  if (o.route != "spectral" && o.route != "convolution") throw UsageError("kernel: route must be spectral or convolution");
  if (!(o.rho_max > 0.5)) throw UsageError("kernel: --rho-max must exceed 0.5");
  ensure_dir(o.out);
  const auto grid = RadialGrid::kernel(o.n, 1e-3, 0.5, o.rho_max, 40, 0.05);
  const auto K = gk_inverse_kernel(o.k, o.n, grid, o.route == "spectral" ? KernelRoute::spectral : KernelRoute::convolution);
  std::ofstream csv((fs::path(o.out) / "kernel.csv").string());
  K.write_csv(csv);
  Json doc = report::document(options_json(o, "kernel"));
  const auto m = monotonicity_certificate(K);
  doc["certificates"].push_back(report::certificate(
      "monotone", m.passed, {{"min_value", num(m.min_value)}, {"first_violation", m.first_violation}}));
  return finish(doc, (fs::path(o.out) / "kernel.json").string());
}

int cmd_transform(const Options& o) {
  if (o.input.empty()) throw UsageError("transform: --input is required");
  if (o.n < 2) throw UsageError("transform: --n must be at least 2");
  std::ifstream is(o.input);
  if (!is) throw UsageError("transform: cannot read " + o.input);
  std::string line;
  std::getline(is, line);
  std::vector<double> rho, val;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    try {
      rho.push_back(std::stod(a));
      val.push_back(std::stod(b));
    } catch (const std::exception&) {
      throw UsageError("transform: malformed row '" + line + "'");
    }
  }
  if (rho.size() < 4) throw UsageError("transform: need at least four rows");
  if (rho.front() < 0.0 || !std::is_sorted(rho.begin(), rho.end(), std::less_equal<>()))
    throw UsageError("transform: rho must start at 0 or above and increase strictly");
  // carry the profile onto a quadrature grid with a smooth rational
  // interpolant of the even extension
  const auto grid = RadialGrid::composite(o.n, 1e-3, 0.5, rho.back(), 2000);
  std::vector<double> v(grid->size());
  {
    std::vector<double> x, y;
    for (std::size_t i = rho.size(); i-- > 0;)
      if (rho[i] > 0.0) {
        x.push_back(-rho[i]);
        y.push_back(val[i]);
      }
    x.insert(x.end(), rho.begin(), rho.end());
    y.insert(y.end(), val.begin(), val.end());
    boost::math::barycentric_rational<double> ip(std::move(x), std::move(y), 3);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = ip(std::clamp(grid->nodes[i], rho.front(), rho.back()));
  }
  const RadialProfile f{grid, v};
  const auto F = radial_ht_forward(f, FrequencyGrid::gauss_legendre(o.n));
  const auto back = radial_ht_inverse(F, grid);
  double e = 0.0, d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    e += grid->weights[i] * std::pow(back.values[i] - v[i], 2);
    d += grid->weights[i] * v[i] * v[i];
  }
  const double roundtrip = std::sqrt(e / d), identity = std::abs(F.l2_norm_pow() / d - 1.0);
  ensure_dir(o.out);
  Json doc = report::document(options_json(o, "transform"));
  doc["certificates"].push_back(report::certificate(
      "roundtrip", roundtrip < 1e-6 && identity < 1e-6,
      {{"roundtrip_l2_error", num(roundtrip)}, {"norm_identity_error", num(identity)}}));
  return finish(doc, (fs::path(o.out) / "transform.json").string());
}

int cmd_rearrange(const Options& o) {
  if (o.n < 2 || o.trials < 1 || o.samples < 2) throw UsageError("rearrange: bad arguments");
  if (o.kernel != "exp" && o.kernel != "g1") throw UsageError("rearrange: kernel must be exp or g1");
  std::mt19937_64 rng(o.seed);
  Json doc = report::document(options_json(o, "rearrange"));
  Json trials = Json::array();
  std::optional<KernelProfile> g1;
  if (o.kernel == "g1") {
    if (o.n < 3) throw UsageError("rearrange: g1 kernel needs n >= 3");
    g1 = resolvent_kernel(0.25, o.n, RadialGrid::kernel(o.n, 1e-4, 0.5, 12.0, 60, 0.05));
  }
  int held = 0;
  for (int t = 0; t < o.trials; ++t) {
    const auto h = random_two_bump(o.n, rng);
    const auto r = g1 ? symmetrization_gap(h, *g1, o.samples, o.seed + 1000 + t)
                      : symmetrization_gap_with(h, [](double x) { return std::exp(-x); }, o.samples, o.seed + 1000 + t);
    held += r.holds(2.0);
    trials.push_back({{"original", num(r.bilinear_original)}, {"rearranged", num(r.bilinear_rearranged)},
                      {"gap", num(r.gap)}, {"se_gap", num(r.se_gap)}});
  }
  doc["results"]["trials"] = trials;
  doc["certificates"].push_back(report::certificate("symmetrization", held == o.trials, {{"held", held}, {"trials", o.trials}}));
  ensure_dir(o.out);
  return finish(doc, (fs::path(o.out) / "rearrange.json").string());
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Hyperbolic Poincare-Sobolev laboratory"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  auto add_solver = [&](CLI::App* c) {
    c->add_option("--n", o.n, "dimension");
    c->add_option("--k", o.k, "order");
    c->add_option("--p", o.p, "Lebesgue exponent (default: critical 2n/(n-2k))");
    c->add_option("--L", o.L, "truncation radius");
    c->add_option("--N", o.N, "number of cells");
    c->add_option("--grading", o.grading, "cell grading toward the origin (0 = uniform)");
    c->add_option("--tol", o.tol, "convergence tolerance");
    c->add_option("--max-iter", o.max_iter, "iteration limit");
    c->add_option("--damping", o.damping, "damping in (0, 1]; 0 picks the default");
    c->add_option("--seed-profile", o.seed_profile, "sech | gaussian");
  };
  auto* solve = app.add_subcommand("solve", "compute an extremal profile");
  add_solver(solve);
  solve->add_option("--out", o.out, "output directory");
  solve->add_flag("--json-only", o.json_only, "skip the SVG plot");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", o.suite, "plancherel | roots | kernels | rearrangement | decay | constants")->required();
  add_solver(verify);
  verify->add_option("--k-max", o.k_max, "largest order for the roots suite");
  verify->add_option("--samples", o.samples, "Monte Carlo samples per trial");
  verify->add_option("--trials", o.trials, "Monte Carlo trials");
  verify->add_option("--seed", o.seed, "random seed");
  verify->add_option("--out", o.out, "output directory");

  auto* constants = app.add_subcommand("constants", "compare C_{n,k,p} with S_{n,k}");
  add_solver(constants);
  constants->add_option("--pairs", o.pairs, "n,k pairs (critical exponent)");
  constants->add_option("--out", o.out, "output directory");

  auto* kernel = app.add_subcommand("kernel", "dump a G_k^{-1} kernel profile");
  kernel->add_option("--n", o.n, "dimension");
  kernel->add_option("--k", o.k, "order");
  kernel->add_option("--route", o.route, "spectral | convolution");
  kernel->add_option("--rho-max", o.rho_max, "largest radius");
  kernel->add_option("--out", o.out, "output directory");

  auto* transform = app.add_subcommand("transform", "Helgason-Fourier roundtrip of a profile CSV");
  transform->add_option("--input", o.input, "CSV with columns rho,value");
  transform->add_option("--n", o.n, "dimension");
  transform->add_option("--out", o.out, "output directory");

  auto* rearrange = app.add_subcommand("rearrange", "Monte Carlo symmetrization test");
  rearrange->add_option("--n", o.n, "dimension");
  rearrange->add_option("--samples", o.samples, "paired samples per trial");
  rearrange->add_option("--trials", o.trials, "number of random two-bump functions");
  rearrange->add_option("--seed", o.seed, "random seed");
  rearrange->add_option("--kernel", o.kernel, "exp | g1");
  rearrange->add_option("--out", o.out, "output directory");

  try {
    for (int i = 1; i + 1 < argc; ++i)
      if (std::string(argv[i]) == "--config") load_config(argv[i + 1], o);
    app.parse(argc, argv);
    if (*rearrange && rearrange->get_option("--n")->count() == 0) o.n = 3;
    if (*verify && verify->get_option("--n")->count() == 0 && o.suite == "plancherel") o.n = 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*verify) return cmd_verify(o);
    if (*constants) return cmd_constants(o);
    if (*kernel) return cmd_kernel(o);
    if (*transform) return cmd_transform(o);
    if (*rearrange) return cmd_rearrange(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

#pragma once

// JSON, CSV and SVG emission for the command-line driver. Numbers in JSON are
// decimal strings with 12 significant digits so outputs are byte-stable.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperlab/hyperlab.hpp"

namespace hyperlab::report {

using Json = nlohmann::ordered_json;

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline Json document(Json config) {
  Json doc;
  doc["config"] = std::move(config);
  doc["results"] = Json::object();
  doc["certificates"] = Json::array();
  doc["meta"] = {{"generator", "hyperlab-cli"}, {"version", kVersion}};
  return doc;
}

inline Json certificate(const std::string& name, bool passed, Json measured) {
  return {{"name", name}, {"status", passed ? "PASS" : "FAIL"}, {"measured", std::move(measured)}};
}

inline bool all_passed(const Json& doc) {
  for (const auto& c : doc["certificates"])
    if (c["status"] != "PASS") return false;
  return true;
}

inline Json to_json(const SolverConfig& c) {
  return {{"n", c.n},           {"k", c.k},          {"p", num(c.p)},
          {"L", num(c.L)},      {"N", c.N},          {"grading", num(c.grading)},
          {"tol", num(c.tol)},  {"max_iter", c.max_iter},
          {"damping", num(c.effective_damping())},   {"seed", c.seed}};
}

inline Json to_json(const QuotientReport& q) {
  return {{"status", to_string(q.status)},
          {"converged", q.converged},
          {"iterations", q.iterations},
          {"energy", num(q.energy)},
          {"lp_norm", num(q.lp_norm)},
          {"quotient", num(q.quotient)},
          {"seed_quotient", num(q.seed_quotient)},
          {"el_residual", num(q.el_residual)},
          {"el_residual_strong", num(q.el_residual_strong)},
          {"decay_exponent_fit", num(q.decay_exponent_fit)},
          {"sup_growth", num(q.sup_growth)},
          {"monotone_fraction", num(q.monotone_fraction)}};
}

inline Json to_json(const ConstantsReport& r) {
  return {{"n", r.n},
          {"k", r.k},
          {"p", num(r.p)},
          {"regime", to_string(r.regime)},
          {"S", num(r.S_value)},
          {"C", num(r.C_value)},
          {"margin", num(r.margin)},
          {"status", to_string(r.status)},
          {"verdict", r.verdict},
          {"notes", r.notes}};
}

inline void write_json(const std::string& path, const Json& doc) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << doc.dump(2) << '\n';
}

inline void write_profile_csv(const std::string& path, const RadialProfile& f, const RadialProfile& u) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << "rho,f,u_el\n";
  char buf[96];
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", f.grid->nodes[i], f.values[i], u.values[i]);
    os << buf;
  }
}

/// Polyline of log10(values) against x with plain axes and tick labels.
inline void write_svg_loglinear(const std::string& path, std::span<const double> x, std::span<const double> values,
                                const std::string& title) {
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  std::vector<double> ly;
  std::vector<double> lx;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (values[i] > 0.0) {
      lx.push_back(x[i]);
      ly.push_back(std::log10(values[i]));
    }
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << title << "</text>\n";
  if (lx.size() >= 2) {
    const double x0 = lx.front(), x1 = lx.back();
    const double y0 = std::floor(*std::min_element(ly.begin(), ly.end()));
    const double y1 = std::ceil(*std::max_element(ly.begin(), ly.end()));
    auto px = [&](double v) { return ml + (v - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (v - y0) / std::max(1e-12, y1 - y0) * (H - mt - mb); };
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    char buf[64];
    for (int t = 0; t <= 5; ++t) {
      const double v = x0 + (x1 - x0) * t / 5.0;
      std::snprintf(buf, sizeof buf, "%.3g", v);
      os << "<text x=\"" << px(v) << "\" y=\"" << H - mb + 18
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    }
    const int step = std::max(1, static_cast<int>((y1 - y0) / 8.0));
    for (double v = y0; v <= y1; v += step) {
      std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(v));
      os << "<text x=\"" << ml - 6 << "\" y=\"" << py(v) + 4
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << buf << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">rho</text>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < lx.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(lx[i]), py(ly[i]));
      os << buf;
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace hyperlab::report

#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "polyak_rates/harness.hpp"
#include "polyak_rates/slope_fit.hpp"

namespace polyak::io {

/// {exponent_name, slope, r_squared, radii, points}; points are the fitted (x, y) pairs.
inline nlohmann::json probe_to_json(const std::string& exponent_name, const SlopeFit& fit,
                                    const std::vector<double>& radii) {
  nlohmann::json j;
  j["exponent_name"] = exponent_name;
  j["slope"] = fit.slope;
  j["r_squared"] = fit.r_squared;
  j["radii"] = radii;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [x, y] : fit.points) pts.push_back({x, y});
  j["points"] = pts;
  return j;
}

inline nlohmann::json slope_fit_to_json(const SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
}

inline nlohmann::json verdict_to_json(const VerdictReport& rep) {
  nlohmann::json j;
  j["model"] = to_string(rep.model);
  j["regime"] = to_string(rep.regime);
  j["all_pass"] = rep.all_pass();
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"method", c.method},
                      {"quantity", c.quantity},
                      {"expected", c.expected},
                      {"fitted", c.fitted},
                      {"tolerance", c.tolerance},
                      {"r_squared", c.r_squared},
                      {"pass", c.pass}});
  j["checks"] = checks;
  return j;
}

inline nlohmann::json fits_to_json(const SweepResult& res) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [m, f] : res.slope_fits) {
    nlohmann::json e;
    if (f.radius_slope) e["radius_slope"] = slope_fit_to_json(*f.radius_slope);
    if (f.iter_slope) {
      e["iter_log_fit"] = slope_fit_to_json(f.iter_slope->log_fit);
      e["iter_power_fit"] = slope_fit_to_json(f.iter_slope->power_fit);
      e["iter_preferred"] = f.iter_slope->preferred;
    }
    j[to_string(m)] = e;
  }
  return j;
}

/// Fixed-width expected-vs-fitted table, one line per check.
inline std::string format_verdict_table(const VerdictReport& rep) {
  std::ostringstream o;
  o << "model " << to_string(rep.model) << ", regime " << to_string(rep.regime) << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-15s %-9s %-9s %-6s %-6s %s\n", "method", "quantity", "expected", "fitted",
                "tol", "r2", "verdict");
  o << line;
  for (const auto& c : rep.checks) {
    std::snprintf(line, sizeof line, "%-16s %-15s %-9s %-9s %-6.2f %-6.3f %s\n", c.method.c_str(), c.quantity.c_str(),
                  c.expected.c_str(), c.fitted.c_str(), c.tolerance, c.r_squared, c.pass ? "PASS" : "FAIL");
    o << line;
  }
  o << (rep.all_pass() ? "all checks pass" : "some checks FAILED") << '\n';
  return o.str();
}

}  // namespace polyak::io

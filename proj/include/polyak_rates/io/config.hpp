#pragma once

// JSON experiment configs. Every file carries "schema_version": 1; unknown
// keys are rejected so that typos do not silently fall back to defaults.

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "polyak_rates/errors.hpp"
#include "polyak_rates/harness.hpp"

namespace polyak::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

/// 1-based line and column of a byte offset (nlohmann reports offset + 1).
inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] inline void field_error(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

template <class T>
T get_as(const Json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    field_error(field, "has the wrong type");
  }
}

inline double get_number(const Json& j, const std::string& field) {
  if (!j.is_number()) field_error(field, "must be a number");
  return j.get<double>();
}

inline long long get_integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) field_error(field, "must be an integer");
  return j.get<long long>();
}

inline std::string get_string(const Json& j, const std::string& field) {
  if (!j.is_string()) field_error(field, "must be a string");
  return j.get<std::string>();
}

}  // namespace detail

/// Builds a config from a parsed document; errors name the offending field.
inline ExperimentConfig config_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  if (!j.contains("schema_version")) field_error("schema_version", "is required");
  if (get_integer(j.at("schema_version"), "schema_version") != kSchemaVersion)
    field_error("schema_version", "unsupported version (expected 1)");
  if (!j.contains("model")) field_error("model", "is required");
  if (!j.contains("regime")) field_error("regime", "is required");

  ModelKind model;
  Regime regime;
  try {
    model = parse_model(get_string(j.at("model"), "model"));
  } catch (const ConfigError& e) {
    field_error("model", e.what());
  }
  try {
    regime = parse_regime(get_string(j.at("regime"), "regime"));
  } catch (const ConfigError& e) {
    field_error("regime", e.what());
  }
  ExperimentConfig cfg = default_config(model, regime);

  for (const auto& [key, v] : j.items()) {
    if (key == "schema_version" || key == "model" || key == "regime") continue;
    if (key == "d") {
      cfg.d = static_cast<int>(get_integer(v, key));
    } else if (key == "p") {
      cfg.p = static_cast<int>(get_integer(v, key));
    } else if (key == "sigma") {
      cfg.sigma = get_number(v, key);
    } else if (key == "theta_star") {
      if (!v.is_array() || v.empty()) field_error(key, "must be a nonempty array of numbers");
      ParamVector t(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) t[static_cast<Eigen::Index>(i)] = get_number(v[i], key);
      cfg.theta_star = t;
    } else if (key == "n_grid") {
      if (!v.is_array() || v.empty()) field_error(key, "must be a nonempty array of integers");
      cfg.n_grid.clear();
      for (const auto& e : v) {
        const long long n = get_integer(e, key);
        if (n < 1) field_error(key, "entries must be >= 1");
        cfg.n_grid.push_back(static_cast<std::size_t>(n));
      }
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(get_integer(v, key));
    } else if (key == "methods") {
      if (!v.is_array() || v.empty()) field_error(key, "must be a nonempty array of strings");
      cfg.methods.clear();
      for (const auto& e : v) {
        try {
          cfg.methods.push_back(parse_method(get_string(e, key)));
        } catch (const ConfigError& err) {
          field_error(key, err.what());
        }
      }
    } else if (key == "init_radius") {
      cfg.init_radius = get_number(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) field_error(key, "must be a nonnegative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "surrogate") {
      if (!v.is_object()) field_error(key, "must be an object {form, c0}");
      SurrogateSpec s = cfg.resolved_surrogate();
      for (const auto& [sk, sv] : v.items()) {
        if (sk == "form") {
          try {
            s.form = parse_surrogate_form(get_string(sv, "surrogate.form"));
          } catch (const ConfigError& err) {
            field_error("surrogate.form", err.what());
          }
        } else if (sk == "c0") {
          s.c0 = get_number(sv, "surrogate.c0");
        } else {
          field_error("surrogate." + sk, "unknown key");
        }
      }
      cfg.surrogate = s;
    } else if (key == "eta") {
      cfg.eta = get_number(v, key);
    } else if (key == "polyak_budget") {
      cfg.polyak_budget = static_cast<int>(get_integer(v, key));
    } else if (key == "fixed_budget") {
      cfg.fixed_budget = static_cast<int>(get_integer(v, key));
    } else if (key == "radius_factor") {
      cfg.radius_factor = get_number(v, key);
    } else if (key == "fixed_step_tol") {
      cfg.fixed_step_tol = get_number(v, key);
    } else if (key == "threads") {
      const long long t = get_integer(v, key);
      if (t < 0) field_error(key, "must be >= 0");
      cfg.threads = static_cast<unsigned>(t);
    } else {
      field_error(key, "unknown key");
    }
  }
  cfg.validate();
  return cfg;
}

inline Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["model"] = to_string(cfg.model);
  j["regime"] = to_string(cfg.regime);
  j["d"] = cfg.d;
  j["p"] = cfg.p;
  if (cfg.sigma) j["sigma"] = *cfg.sigma;
  if (cfg.theta_star) j["theta_star"] = std::vector<double>(cfg.theta_star->begin(), cfg.theta_star->end());
  j["n_grid"] = cfg.n_grid;
  j["trials"] = cfg.trials;
  Json methods = Json::array();
  for (Method m : cfg.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  if (cfg.init_radius) j["init_radius"] = *cfg.init_radius;
  j["seed"] = cfg.seed;
  if (cfg.surrogate) {
    j["surrogate"]["form"] = to_string(cfg.surrogate->form);
    if (cfg.surrogate->c0) j["surrogate"]["c0"] = *cfg.surrogate->c0;
  }
  if (cfg.eta) j["eta"] = *cfg.eta;
  j["polyak_budget"] = cfg.polyak_budget;
  if (cfg.fixed_budget) j["fixed_budget"] = *cfg.fixed_budget;
  j["radius_factor"] = cfg.radius_factor;
  if (cfg.fixed_step_tol) j["fixed_step_tol"] = *cfg.fixed_step_tol;
  j["threads"] = cfg.threads;
  return j;
}

/// Parses JSON text; syntax errors are reported with line and column.
inline Json parse_json_text(const std::string& text, const std::string& origin = "config") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = detail::line_col(text, e.byte);
    throw ConfigError(origin + ": malformed JSON at line " + std::to_string(line) + ", column " +
                      std::to_string(col));
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ExperimentConfig load_config(const std::string& path) {
  return config_from_json(parse_json_text(read_text_file(path), path));
}

}  // namespace polyak::io

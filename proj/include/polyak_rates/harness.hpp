#pragma once

// Sample-size sweeps: for each (n, trial) draw a dataset and an initial point,
// run every requested method, and record distances and iteration counts; then
// fit radius and iteration slopes and compare them to the predicted exponents.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/models/glm.hpp"
#include "polyak_rates/models/gmm.hpp"
#include "polyak_rates/models/mlr.hpp"
#include "polyak_rates/numerics.hpp"
#include "polyak_rates/objective.hpp"
#include "polyak_rates/optimizers.hpp"
#include "polyak_rates/parallel.hpp"
#include "polyak_rates/slope_fit.hpp"

namespace polyak {

enum class ModelKind { Glm, Gmm, Mlr };
enum class Regime { LowSnr, StrongSnr };
enum class Method { FixedGd, Polyak, AdaptivePolyak, EmUnitStep };
enum class SurrogateForm { InvSqrtN, InvN };

inline const char* to_string(ModelKind m) {
  switch (m) {
    case ModelKind::Glm: return "glm";
    case ModelKind::Gmm: return "gmm";
    case ModelKind::Mlr: return "mlr";
  }
  return "unknown";
}

inline const char* to_string(Regime r) { return r == Regime::LowSnr ? "low_snr" : "strong_snr"; }

inline const char* to_string(Method m) {
  switch (m) {
    case Method::FixedGd: return "fixed_gd";
    case Method::Polyak: return "polyak";
    case Method::AdaptivePolyak: return "adaptive_polyak";
    case Method::EmUnitStep: return "em_unit_step";
  }
  return "unknown";
}

inline ModelKind parse_model(const std::string& s) {
  if (s == "glm") return ModelKind::Glm;
  if (s == "gmm") return ModelKind::Gmm;
  if (s == "mlr") return ModelKind::Mlr;
  throw ConfigError("unknown model '" + s + "' (expected glm, gmm or mlr)");
}

inline Regime parse_regime(const std::string& s) {
  if (s == "low_snr") return Regime::LowSnr;
  if (s == "strong_snr") return Regime::StrongSnr;
  throw ConfigError("unknown regime '" + s + "' (expected low_snr or strong_snr)");
}

inline Method parse_method(const std::string& s) {
  if (s == "fixed_gd") return Method::FixedGd;
  if (s == "polyak") return Method::Polyak;
  if (s == "adaptive_polyak") return Method::AdaptivePolyak;
  if (s == "em_unit_step") return Method::EmUnitStep;
  throw ConfigError("unknown method '" + s + "' (expected fixed_gd, polyak, adaptive_polyak or em_unit_step)");
}

inline SurrogateForm parse_surrogate_form(const std::string& s) {
  if (s == "c/sqrt(n)" || s == "inv_sqrt_n") return SurrogateForm::InvSqrtN;
  if (s == "c/n" || s == "inv_n") return SurrogateForm::InvN;
  throw ConfigError("unknown surrogate form '" + s + "' (expected c/sqrt(n) or c/n)");
}

inline const char* to_string(SurrogateForm f) { return f == SurrogateForm::InvSqrtN ? "c/sqrt(n)" : "c/n"; }

constexpr double kTheoryDelta = 0.05;

/// eps(n, delta) = sqrt((d + log(1/delta)) / n).
inline double noise_function(std::size_t n, int d, double delta = kTheoryDelta) {
  if (n < 1 || d < 1 || !(delta > 0.0 && delta < 1.0)) throw ConfigError("noise_function: invalid arguments");
  return std::sqrt((d + std::log(1.0 / delta)) / static_cast<double>(n));
}

/// Predicted statistical radius with unit constant and delta = 0.05.
inline double theory_radius(ModelKind model, Regime regime, std::size_t n, int d, int p = 2) {
  if (n < 1 || d < 1) throw ConfigError("theory_radius: n and d must be >= 1");
  const double nn = static_cast<double>(n);
  const double logd = std::log(1.0 / kTheoryDelta);
  if (model == ModelKind::Glm) {
    if (p < 2) throw ConfigError("theory_radius: p must be >= 2");
    const double base = (d + logd) / nn;
    return regime == Regime::StrongSnr ? std::sqrt(base) : std::pow(base, 1.0 / (2.0 * p));
  }
  const double base = d * logd / nn;
  return regime == Regime::StrongSnr ? std::sqrt(base) : std::pow(base, 0.25);
}

struct SurrogateSpec {
  SurrogateForm form = SurrogateForm::InvSqrtN;
  std::optional<double> c0;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::Gmm;
  Regime regime = Regime::LowSnr;
  int d = 2;
  int p = 2;
  std::optional<double> sigma;  ///< default: glm 10 (low_snr) or 0.1 (strong_snr), 1 otherwise
  std::optional<ParamVector> theta_star;
  std::vector<std::size_t> n_grid;
  int trials = 20;
  std::vector<Method> methods;
  std::optional<double> init_radius;
  std::uint64_t seed = 0;
  std::optional<SurrogateSpec> surrogate;
  std::optional<double> eta;  ///< fixed_gd step; default 0.01 for glm, sigma^2 otherwise
  int polyak_budget = 2000;
  std::optional<int> fixed_budget;  ///< default ceil(20 sqrt(n_max))
  double radius_factor = 2.0;
  /// Fixed-step runs stop early once eta |grad| <= fixed_step_tol |theta|; 0 runs the full budget.
  std::optional<double> fixed_step_tol;  ///< default 1e-5 (low_snr) or 1e-9 (strong_snr)
  unsigned threads = 0;  ///< 0: worker_count()

  double resolved_sigma() const {
    if (sigma) return *sigma;
    if (model != ModelKind::Glm) return 1.0;
    // Low SNR: large noise puts the statistical radius where the fixed-step
    // budget can reach it; the radius still scales as (sigma^2 / n)^(1/4).
    return regime == Regime::LowSnr ? 10.0 : 0.1;
  }

  ParamVector resolved_theta_star() const {
    if (theta_star) return *theta_star;
    if (regime == Regime::LowSnr) return ParamVector::Zero(d);
    if (d != 2) throw ConfigError("ExperimentConfig: strong_snr default theta* is defined for d = 2 only");
    ParamVector t(2);
    switch (model) {
      case ModelKind::Glm: t << 0.5, 1.0; break;
      case ModelKind::Gmm: t << 6.0, 6.0; break;
      case ModelKind::Mlr: t << 4.0, 3.0; break;
    }
    return t;
  }

  double resolved_init_radius() const {
    if (init_radius) return *init_radius;
    const ParamVector ts = resolved_theta_star();
    if (regime == Regime::StrongSnr) {
      const double frac = model == ModelKind::Mlr ? 1.0 / 32.0 : 0.25;
      return frac * ts.norm();
    }
    return model == ModelKind::Glm ? 1.0 : 1.5 * resolved_sigma();
  }

  double resolved_eta(Method m) const {
    const double s = resolved_sigma();
    if (m == Method::EmUnitStep) return s * s;
    if (eta) return *eta;
    return model == ModelKind::Glm ? 0.01 : s * s;
  }

  int resolved_fixed_budget() const {
    if (fixed_budget) return *fixed_budget;
    if (n_grid.empty()) return 1;
    return static_cast<int>(std::ceil(20.0 * std::sqrt(static_cast<double>(n_grid.back()))));
  }

  // Strong SNR radii shrink like n^{-1/2}, so the stop must sit well below
  // sigma / sqrt(n_max) or it truncates the linear phase.
  double resolved_fixed_step_tol() const {
    if (fixed_step_tol) return *fixed_step_tol;
    return regime == Regime::LowSnr ? 1e-5 : 1e-9;
  }

  SurrogateSpec resolved_surrogate() const {
    if (surrogate) return *surrogate;
    return {model == ModelKind::Glm ? SurrogateForm::InvSqrtN : SurrogateForm::InvN, std::nullopt};
  }

  void validate() const {
    if (d < 1 || d > 16) throw ConfigError("config field 'd': must lie in [1, 16]");
    if (model == ModelKind::Glm && (p < 2 || p > 8)) throw ConfigError("config field 'p': must lie in [2, 8]");
    if (!(resolved_sigma() > 0.0)) throw ConfigError("config field 'sigma': must be > 0");
    if (n_grid.empty()) throw ConfigError("config field 'n_grid': must be nonempty");
    if (n_grid.front() < 1) throw ConfigError("config field 'n_grid': entries must be >= 1");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
      if (n_grid[i] <= n_grid[i - 1]) throw ConfigError("config field 'n_grid': must be strictly increasing");
    if (trials < 1) throw ConfigError("config field 'trials': must be >= 1");
    if (methods.empty()) throw ConfigError("config field 'methods': must be nonempty");
    for (std::size_t i = 0; i < methods.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (methods[i] == methods[j]) throw ConfigError("config field 'methods': duplicate method");
    if (theta_star && theta_star->size() != d) throw ConfigError("config field 'theta_star': length must equal d");
    if (theta_star && !theta_star->allFinite()) throw ConfigError("config field 'theta_star': must be finite");
    if (!(resolved_init_radius() > 0.0)) throw ConfigError("config field 'init_radius': must be > 0");
    if (eta && !(*eta > 0.0)) throw ConfigError("config field 'eta': must be > 0");
    if (polyak_budget < 1) throw ConfigError("config field 'polyak_budget': must be >= 1");
    if (fixed_budget && *fixed_budget < 1) throw ConfigError("config field 'fixed_budget': must be >= 1");
    if (!(radius_factor > 0.0)) throw ConfigError("config field 'radius_factor': must be > 0");
    if (fixed_step_tol && !(*fixed_step_tol >= 0.0)) throw ConfigError("config field 'fixed_step_tol': must be >= 0");
    if (surrogate && surrogate->c0 && !(*surrogate->c0 >= 0.0))
      throw ConfigError("config field 'surrogate.c0': must be >= 0");
  }
};

/// n_grid of `count` geometric steps from lo to hi, rounded to integers.
inline std::vector<std::size_t> geometric_n_grid(std::size_t lo, std::size_t hi, int count) {
  if (lo < 1 || hi <= lo || count < 2) throw ConfigError("geometric_n_grid: need 1 <= lo < hi and count >= 2");
  std::vector<std::size_t> out;
  const double step = std::log(static_cast<double>(hi) / static_cast<double>(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) {
    const auto v = static_cast<std::size_t>(std::llround(static_cast<double>(lo) * std::exp(step * i)));
    if (out.empty() || v > out.back()) out.push_back(v);
  }
  out.back() = hi;
  return out;
}

/// The fixed-step method is plain GD for glm and the EM update otherwise.
inline std::vector<Method> default_methods(ModelKind model) {
  return {model == ModelKind::Glm ? Method::FixedGd : Method::EmUnitStep, Method::AdaptivePolyak, Method::Polyak};
}

/// Documented defaults: n in 10^3..10^5 over 10 geometric steps, 20 trials.
inline ExperimentConfig default_config(ModelKind model, Regime regime) {
  ExperimentConfig cfg;
  cfg.model = model;
  cfg.regime = regime;
  cfg.n_grid = geometric_n_grid(1000, 100000, 10);
  cfg.methods = default_methods(model);
  return cfg;
}

struct SweepRow {
  std::size_t n = 0;
  int trial = 0;
  Method method = Method::Polyak;
  double min_dist = 0.0;
  std::size_t argmin_k = 0;
  std::optional<std::size_t> iters_to_radius;
  double last_dist = 0.0;
  double wall_ms = 0.0;
  bool failed = false;
};

/// Field-wise equality; wall time is excluded unless requested.
inline bool same_row(const SweepRow& a, const SweepRow& b, bool compare_wall = false) {
  return a.n == b.n && a.trial == b.trial && a.method == b.method && a.min_dist == b.min_dist &&
         a.argmin_k == b.argmin_k && a.iters_to_radius == b.iters_to_radius && a.last_dist == b.last_dist &&
         a.failed == b.failed && (!compare_wall || a.wall_ms == b.wall_ms);
}

struct IterationFit {
  SlopeFit log_fit;    ///< iterations = a + b log n
  SlopeFit power_fit;  ///< log iterations = a + b log n
  std::string preferred;  ///< "log" or "power"
};

struct MethodFits {
  std::optional<SlopeFit> radius_slope;
  std::optional<IterationFit> iter_slope;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::map<Method, MethodFits> slope_fits;
};

/// A dataset realized as a sample oracle, plus what the optimizers need to know about it.
struct SampleProblem {
  Oracle oracle;
  double floor = 0.0;  ///< lower bound on the sample optimum
  double scale = 1.0;  ///< surrogate scale g(n)
};

inline SampleProblem make_sample_problem(const ExperimentConfig& cfg, std::size_t n, std::uint64_t data_seed) {
  const ParamVector ts = cfg.resolved_theta_star();
  const double sigma = cfg.resolved_sigma();
  const SurrogateSpec sur = cfg.resolved_surrogate();
  const double scale =
      sur.form == SurrogateForm::InvSqrtN ? 1.0 / std::sqrt(static_cast<double>(n)) : 1.0 / static_cast<double>(n);
  const double two_pi_var = 2.0 * std::numbers::pi * sigma * sigma;
  switch (cfg.model) {
    case ModelKind::Glm: {
      auto data = std::make_shared<const GlmDataset>(glm_generate({cfg.d, cfg.p, ts, sigma, n, data_seed}));
      return {glm_sample_oracle(data, cfg.p), 0.0, scale};
    }
    case ModelKind::Gmm: {
      auto X = std::make_shared<const RowMatrix>(gmm_generate({cfg.d, ts, sigma, n, data_seed}));
      return {gmm_sample_oracle(X, sigma), 0.5 * cfg.d * std::log(two_pi_var), scale};
    }
    case ModelKind::Mlr: {
      auto data = std::make_shared<const MlrDataset>(mlr_generate({cfg.d, ts, sigma, n, data_seed}));
      return {mlr_sample_oracle(data, sigma), 0.5 * std::log(two_pi_var), scale};
    }
  }
  throw ConfigError("make_sample_problem: unknown model");
}

inline std::uint64_t dataset_seed(std::uint64_t master, std::size_t n, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial), 0});
}

inline std::uint64_t init_seed(std::uint64_t master, std::size_t n, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(trial), 1});
}

inline SurrogateSearchConfig surrogate_search_config(const ExperimentConfig& cfg, const SampleProblem& prob) {
  SurrogateSearchConfig s;
  s.floor = prob.floor;
  s.scale = prob.scale;
  s.c0 = cfg.resolved_surrogate().c0;
  // theta = 0 is a stationary point of every model's sample loss, so its value bounds the optimum from above.
  s.upper = prob.oracle.value(ParamVector::Zero(cfg.d));
  s.max_iters = cfg.polyak_budget;
  return s;
}

namespace detail {

inline SweepRow summarize(const Trajectory& traj, const ParamVector& theta_star, double target) {
  SweepRow row;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double dist = (traj.iterates[k] - theta_star).norm();
    if (dist < best) {
      best = dist;
      row.argmin_k = k;
    }
  }
  row.min_dist = best;
  row.last_dist = (traj.iterates.back() - theta_star).norm();
  row.iters_to_radius = iterations_to_radius(traj, theta_star, target);
  row.wall_ms = traj.wall_ms;
  return row;
}

}  // namespace detail

/// Runs one (n, trial) cell: the dataset and theta0 are shared by all methods.
/// `polyak` uses, as its optimal value, the lowest value reached by the
/// adaptive surrogate search on the same dataset.
inline std::vector<SweepRow> run_cell(const ExperimentConfig& cfg, std::size_t n, int trial,
                                      std::vector<Trajectory>* trajectories = nullptr) {
  const ParamVector ts = cfg.resolved_theta_star();
  const SampleProblem prob = make_sample_problem(cfg, n, dataset_seed(cfg.seed, n, trial));
  Rng rng(init_seed(cfg.seed, n, trial));
  const ParamVector theta0 = sample_sphere(rng, ts, cfg.resolved_init_radius());
  const double target = cfg.radius_factor * theory_radius(cfg.model, cfg.regime, n, cfg.d, cfg.p);

  std::optional<SurrogateSearchResult> search;
  auto run_search = [&]() -> const SurrogateSearchResult& {
    if (!search) search = polyak_surrogate_search(prob.oracle, theta0, surrogate_search_config(cfg, prob), ts);
    return *search;
  };

  std::vector<SweepRow> rows;
  for (Method m : cfg.methods) {
    Trajectory traj;
    bool failed = false;
    try {
      switch (m) {
        case Method::FixedGd:
        case Method::EmUnitStep: {
          FixedStepConfig fc;
          fc.eta = cfg.resolved_eta(m);
          fc.max_iters = cfg.resolved_fixed_budget();
          fc.grad_tol = 0.0;
          fc.step_tol = cfg.resolved_fixed_step_tol();
          traj = fixed_step_gd(prob.oracle, theta0, fc, ts);
          break;
        }
        case Method::AdaptivePolyak: traj = run_search().trajectory; break;
        case Method::Polyak: {
          PolyakConfig pc;
          const auto& s = run_search();
          pc.f_opt = s.trajectory.values[s.best_index];
          pc.max_iters = cfg.polyak_budget;
          traj = polyak_gd(prob.oracle, theta0, pc, ts);
          break;
        }
      }
    } catch (const DivergenceError& e) {
      traj = e.partial();
      failed = true;
    } catch (const StalledError& e) {
      traj = e.partial();
      failed = true;
    }
    SweepRow row;
    if (traj.empty()) {
      row.min_dist = row.last_dist = std::numeric_limits<double>::infinity();
    } else {
      row = detail::summarize(traj, ts, target);
    }
    row.n = n;
    row.trial = trial;
    row.method = m;
    row.failed = failed;
    if (trajectories) trajectories->push_back(std::move(traj));
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<SweepRow> run_sweep_rows(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t cells = cfg.n_grid.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<SweepRow>> out(cells);
  const unsigned threads = cfg.threads ? std::min(cfg.threads, worker_count()) : worker_count();
  parallel_for(
      cells,
      [&](std::size_t idx) {
        const std::size_t i = idx / static_cast<std::size_t>(cfg.trials);
        const int trial = static_cast<int>(idx % static_cast<std::size_t>(cfg.trials));
        out[idx] = run_cell(cfg, cfg.n_grid[i], trial);
      },
      threads);
  std::vector<SweepRow> rows;
  rows.reserve(cells * cfg.methods.size());
  for (auto& c : out)
    for (auto& r : c) rows.push_back(r);
  for (Method m : cfg.methods) {
    std::size_t total = 0, failed = 0;
    for (const auto& r : rows)
      if (r.method == m) {
        ++total;
        failed += r.failed;
      }
    if (2 * failed > total)
      throw Error(std::string("run_sweep: method ") + to_string(m) + " failed on " + std::to_string(failed) + " of " +
                  std::to_string(total) + " rows");
  }
  return rows;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw FitError("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Log-log fit of the median (over trials) min_dist on n, failed rows excluded.
inline SlopeFit fit_radius_slope(const SweepResult& result, Method method) {
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : result.rows)
    if (r.method == method && !r.failed && std::isfinite(r.min_dist) && r.min_dist > 0.0)
      by_n[r.n].push_back(r.min_dist);
  std::vector<double> xs, ys;
  for (auto& [n, v] : by_n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(median(v));
  }
  if (xs.size() < 3) throw FitError(std::string("fit_radius_slope: fewer than 3 sample sizes for ") + to_string(method));
  return fit_loglog(xs, ys);
}

/// Mean iterations-to-radius per n over the trials that reached the radius,
/// fitted against log n on a linear and on a log scale; the better r^2 is
/// preferred. An n where half or more of the trials never reached it is dropped.
inline IterationFit fit_iteration_scaling(const SweepResult& result, Method method) {
  std::map<std::size_t, std::pair<std::vector<double>, std::size_t>> by_n;
  for (const auto& r : result.rows)
    if (r.method == method && !r.failed) {
      auto& [reached, total] = by_n[r.n];
      ++total;
      if (r.iters_to_radius) reached.push_back(static_cast<double>(*r.iters_to_radius));
    }
  std::vector<double> ns, its;
  for (auto& [n, cell] : by_n) {
    const auto& [reached, total] = cell;
    if (2 * reached.size() <= total) continue;
    double m = 0.0;
    for (double v : reached) m += v;
    m /= static_cast<double>(reached.size());
    if (m > 0.0) {
      ns.push_back(static_cast<double>(n));
      its.push_back(m);
    }
  }
  if (ns.size() < 3)
    throw FitError(std::string("fit_iteration_scaling: fewer than 3 sample sizes with iteration counts for ") +
                   to_string(method));
  std::vector<double> logn(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) logn[i] = std::log(ns[i]);
  IterationFit f;
  f.log_fit = fit_line(logn, its);
  f.power_fit = fit_loglog(ns, its);
  f.preferred = f.log_fit.r_squared >= f.power_fit.r_squared ? "log" : "power";
  return f;
}

/// Fills slope_fits from rows for every method present.
inline void compute_slope_fits(SweepResult& res) {
  res.slope_fits.clear();
  std::vector<Method> present;
  for (const auto& r : res.rows)
    if (std::find(present.begin(), present.end(), r.method) == present.end()) present.push_back(r.method);
  for (Method m : present) {
    MethodFits mf;
    try {
      mf.radius_slope = fit_radius_slope(res, m);
    } catch (const FitError&) {
    }
    try {
      mf.iter_slope = fit_iteration_scaling(res, m);
    } catch (const FitError&) {
    }
    res.slope_fits[m] = mf;
  }
}

inline SweepResult run_sweep(const ExperimentConfig& cfg) {
  SweepResult res;
  res.rows = run_sweep_rows(cfg);
  compute_slope_fits(res);
  return res;
}

// ---------------------------------------------------------------------------
// Predicted exponents.

struct TheoryEntry {
  double alpha = 0.0;
  double gamma = 0.0;
  double radius_slope = -0.5;  ///< exponent of n in the statistical radius
  /// Fixed-step iterations grow like n^{fixed_iter_exponent}; 0 means logarithmic.
  double fixed_iter_exponent = 0.0;
};

/// radius ~ eps^{1/(alpha+1-gamma)} and fixed-step iterations ~
/// eps^{-alpha/(alpha+1-gamma)}, with eps ~ n^{-1/2}.
inline TheoryEntry theory_entry(double alpha, double gamma) {
  if (alpha < gamma || gamma < 0.0) throw ConfigError("theory_entry: need alpha >= gamma >= 0");
  const double denom = alpha + 1.0 - gamma;
  return {alpha, gamma, -0.5 / denom, 0.5 * alpha / denom};
}

struct TheoryTable {
  double radius_tol = 0.08;
  double iter_exponent_tol = 0.15;

  TheoryEntry entry(ModelKind model, Regime regime, int p = 2) const {
    if (regime == Regime::StrongSnr) return theory_entry(0.0, 0.0);
    if (model == ModelKind::Glm) {
      if (p < 2) throw ConfigError("TheoryTable: p must be >= 2");
      return theory_entry(2.0 * p - 2.0, p - 1.0);
    }
    return theory_entry(2.0, 1.0);
  }
};

struct VerdictCheck {
  std::string method;
  std::string quantity;  ///< "radius_slope", "iter_preferred", "iter_exponent"
  std::string expected;
  std::string fitted;
  double tolerance = 0.0;
  double r_squared = 0.0;
  bool pass = false;
};

struct VerdictReport {
  ModelKind model = ModelKind::Gmm;
  Regime regime = Regime::LowSnr;
  std::vector<VerdictCheck> checks;
  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerdictCheck& c) { return c.pass; });
  }
};

inline std::string format_fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline bool is_fixed_step(Method m) { return m == Method::FixedGd || m == Method::EmUnitStep; }

/// Checks every method with fits: the radius slope always; in the low-SNR
/// regime also the preferred iteration model, and the power exponent for
/// fixed-step methods. A method whose fit is missing fails that check.
inline VerdictReport compare_to_theory(const SweepResult& result, const TheoryTable& table, ModelKind model,
                                       Regime regime, int p = 2) {
  VerdictReport rep;
  rep.model = model;
  rep.regime = regime;
  const TheoryEntry th = table.entry(model, regime, p);
  for (const auto& [m, fits] : result.slope_fits) {
    const std::string name = to_string(m);
    VerdictCheck rc{name, "radius_slope", format_fixed(th.radius_slope), "missing", table.radius_tol, 0.0, false};
    if (fits.radius_slope) {
      rc.fitted = format_fixed(fits.radius_slope->slope);
      rc.r_squared = fits.radius_slope->r_squared;
      rc.pass = std::abs(fits.radius_slope->slope - th.radius_slope) <= table.radius_tol;
    }
    rep.checks.push_back(rc);
    if (regime != Regime::LowSnr) continue;
    const std::string want = is_fixed_step(m) ? "power" : "log";
    VerdictCheck pc{name, "iter_preferred", want, "missing", 0.0, 0.0, false};
    if (fits.iter_slope) {
      pc.fitted = fits.iter_slope->preferred;
      pc.r_squared =
          want == "log" ? fits.iter_slope->log_fit.r_squared : fits.iter_slope->power_fit.r_squared;
      pc.pass = pc.fitted == want;
    }
    rep.checks.push_back(pc);
    if (!is_fixed_step(m)) continue;
    VerdictCheck ec{name, "iter_exponent", format_fixed(th.fixed_iter_exponent), "missing", table.iter_exponent_tol,
                    0.0, false};
    if (fits.iter_slope) {
      ec.fitted = format_fixed(fits.iter_slope->power_fit.slope);
      ec.r_squared = fits.iter_slope->power_fit.r_squared;
      ec.pass = std::abs(fits.iter_slope->power_fit.slope - th.fixed_iter_exponent) <= table.iter_exponent_tol;
    }
    rep.checks.push_back(ec);
  }
  return rep;
}

}  // namespace polyak

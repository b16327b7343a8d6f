// Command-line front end: gen | fit | sweep | probe | report | plot.
// Exit codes: 0 ok, 1 a checked assertion failed, 2 bad configuration, 3 runtime or IO error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyak_rates/harness.hpp"
#include "polyak_rates/io/config.hpp"
#include "polyak_rates/io/csv.hpp"
#include "polyak_rates/io/report.hpp"
#include "polyak_rates/io/svg.hpp"
#include "polyak_rates/models/glm.hpp"
#include "polyak_rates/models/gmm.hpp"
#include "polyak_rates/models/mlr.hpp"
#include "polyak_rates/numerics.hpp"
#include "polyak_rates/probe.hpp"

using namespace polyak;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssert = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);)
    if (!item.empty()) out.push_back(item);
  return out;
}

double to_number(const std::string& s, const std::string& flag) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ConfigError("flag " + flag + ": '" + s + "' is not a number");
  return v;
}

ParamVector parse_vector(const std::string& s, const std::string& flag) {
  const auto parts = split(s, ',');
  if (parts.empty()) throw ConfigError("flag " + flag + ": expected a comma-separated list of numbers");
  ParamVector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_number(parts[i], flag);
  return v;
}

/// "1000,2000,5000" or "lo:hi:count" for a geometric grid.
std::vector<std::size_t> parse_n_grid(const std::string& s) {
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw ConfigError("flag --n-grid: geometric form is lo:hi:count");
    return geometric_n_grid(static_cast<std::size_t>(to_number(parts[0], "--n-grid")),
                            static_cast<std::size_t>(to_number(parts[1], "--n-grid")),
                            static_cast<int>(to_number(parts[2], "--n-grid")));
  }
  std::vector<std::size_t> out;
  for (const auto& part : split(s, ',')) {
    const double v = to_number(part, "--n-grid");
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw ConfigError("flag --n-grid: entries must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError("flag --n-grid: empty list");
  return out;
}

/// Flags shared by the experiment-describing subcommands. Strings so that
/// "not given" is distinguishable from any value and file settings survive.
struct CommonFlags {
  std::string config, model, regime, sigma, theta_star, n_grid, methods;
  int p = 0, trials = 0, d = 0;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app, bool sweep_flags) {
    app->add_option("--config", config, "JSON config file (schema_version 1); flags override it");
    app->add_option("--model", model, "glm | gmm | mlr");
    app->add_option("--regime", regime, "low_snr | strong_snr");
    app->add_option("--p", p, "GLM link power (default 2)");
    app->add_option("--d", d, "dimension (default 2)");
    app->add_option("--sigma", sigma, "noise standard deviation");
    app->add_option("--theta-star", theta_star, "true parameter, comma separated");
    app->add_option("--seed", seed, "master seed");
    if (sweep_flags) {
      app->add_option("--n-grid", n_grid, "sample sizes: comma list or lo:hi:count");
      app->add_option("--trials", trials, "trials per sample size");
      app->add_option("--methods", methods, "comma list of fixed_gd, polyak, adaptive_polyak, em_unit_step");
    }
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config.empty()) {
      cfg = io::load_config(config);
    } else {
      if (model.empty() || regime.empty()) throw ConfigError("--model and --regime are required without --config");
      cfg = default_config(parse_model(model), parse_regime(regime));
    }
    if (!model.empty() && parse_model(model) != cfg.model) {
      cfg.model = parse_model(model);
      cfg.methods = default_methods(cfg.model);
    }
    if (!regime.empty()) cfg.regime = parse_regime(regime);
    if (p) cfg.p = p;
    if (d) cfg.d = d;
    if (!sigma.empty()) cfg.sigma = to_number(sigma, "--sigma");
    if (!theta_star.empty()) cfg.theta_star = parse_vector(theta_star, "--theta-star");
    if (seed) cfg.seed = *seed;
    if (!n_grid.empty()) cfg.n_grid = parse_n_grid(n_grid);
    if (trials) cfg.trials = trials;
    if (!methods.empty()) {
      cfg.methods.clear();
      for (const auto& m : split(methods, ',')) cfg.methods.push_back(parse_method(m));
    }
    cfg.validate();
    return cfg;
  }
};

void write_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write to '" + path + "' failed");
}

Oracle population_oracle(const ExperimentConfig& cfg, std::size_t mc_samples) {
  const ParamVector ts = cfg.resolved_theta_star();
  const double sigma = cfg.resolved_sigma();
  const auto rule = gauss_hermite(80);
  switch (cfg.model) {
    case ModelKind::Glm: {
      GlmSpec spec{cfg.d, cfg.p, ts, sigma, 1, cfg.seed};
      return glm_population_oracle(spec, is_zero(ts) ? std::nullopt : std::optional<std::size_t>(mc_samples));
    }
    case ModelKind::Gmm: return gmm_population_oracle(ts, sigma, rule);
    case ModelKind::Mlr:
      return mlr_population_oracle(ts, sigma, rule,
                                   is_zero(ts) ? std::nullopt : std::optional<std::size_t>(mc_samples));
  }
  throw ConfigError("unknown model");
}

int run_gen(const CommonFlags& flags, std::size_t n, const std::string& out) {
  ExperimentConfig cfg = flags.resolve();
  const ParamVector ts = cfg.resolved_theta_star();
  const double sigma = cfg.resolved_sigma();
  switch (cfg.model) {
    case ModelKind::Glm: {
      const auto data = glm_generate({cfg.d, cfg.p, ts, sigma, n, cfg.seed});
      io::write_dataset_csv(out, data.X, &data.Y);
      break;
    }
    case ModelKind::Gmm: io::write_dataset_csv(out, gmm_generate({cfg.d, ts, sigma, n, cfg.seed})); break;
    case ModelKind::Mlr: {
      const auto data = mlr_generate({cfg.d, ts, sigma, n, cfg.seed});
      io::write_dataset_csv(out, data.X, &data.Y);
      break;
    }
  }
  std::printf("wrote %zu rows to %s\n", n, out.c_str());
  return kExitOk;
}

int run_fit(const CommonFlags& flags, std::size_t n, int trial, const std::string& method, const std::string& out) {
  ExperimentConfig cfg = flags.resolve();
  cfg.methods = {parse_method(method)};
  cfg.n_grid = {n};
  cfg.validate();
  std::vector<Trajectory> trajs;
  const auto rows = run_cell(cfg, n, trial, &trajs);
  const auto& r = rows.front();
  io::write_trajectory_csv(out, trajs.front());
  std::printf("%s n=%zu trial=%d: %zu iterates, min_dist=%s at k=%zu, last_dist=%s, stop=%s%s\n", method.c_str(), n,
              trial, trajs.front().size(), io::format_double(r.min_dist).c_str(), r.argmin_k,
              io::format_double(r.last_dist).c_str(), to_string(trajs.front().stop), r.failed ? " (failed)" : "");
  return kExitOk;
}

int run_sweep_cmd(const CommonFlags& flags, const std::string& out, const std::string& fits_out) {
  const ExperimentConfig cfg = flags.resolve();
  {  // fail on an unwritable path before spending the sweep
    std::ofstream probe(out, std::ios::app);
    if (!probe) throw IoError("cannot open '" + out + "' for writing");
  }
  const SweepResult res = run_sweep(cfg);
  io::write_sweep_csv(out, res.rows);
  std::printf("wrote %zu rows to %s\n", res.rows.size(), out.c_str());
  for (const auto& [m, f] : res.slope_fits) {
    std::printf("%-16s", to_string(m));
    if (f.radius_slope)
      std::printf(" radius_slope=%.3f (r2 %.3f)", f.radius_slope->slope, f.radius_slope->r_squared);
    if (f.iter_slope)
      std::printf(" iters: %s preferred (log r2 %.3f, power r2 %.3f, exponent %.3f)", f.iter_slope->preferred.c_str(),
                  f.iter_slope->log_fit.r_squared, f.iter_slope->power_fit.r_squared, f.iter_slope->power_fit.slope);
    std::printf("\n");
  }
  if (!fits_out.empty()) write_json(io::fits_to_json(res), fits_out);
  return kExitOk;
}

int run_probe(const CommonFlags& flags, const std::string& exponent, std::size_t n, int trials, const std::string& out) {
  ExperimentConfig cfg = flags.resolve();
  const ParamVector ts = cfg.resolved_theta_star();
  const Oracle pop = population_oracle(cfg, 200000);
  const double rho = cfg.resolved_init_radius();
  const ProbeGrid grid = make_probe_grid(0.05 * rho, 0.5 * rho, 8, 200, cfg.seed);
  SlopeFit fit;
  if (exponent == "alpha") {
    fit = estimate_alpha_smoothness(pop, ts, grid, FiniteDiffSpec{});
  } else if (exponent == "lojasiewicz") {
    fit = estimate_lojasiewicz_exponent(pop, ts, grid);
  } else if (exponent == "gamma") {
    const double sigma = cfg.resolved_sigma();
    SampleOracleFactory factory = [&cfg, ts, sigma, n](std::uint64_t seed) {
      switch (cfg.model) {
        case ModelKind::Glm:
          return glm_sample_oracle(std::make_shared<const GlmDataset>(glm_generate({cfg.d, cfg.p, ts, sigma, n, seed})),
                                   cfg.p);
        case ModelKind::Gmm:
          return gmm_sample_oracle(std::make_shared<const RowMatrix>(gmm_generate({cfg.d, ts, sigma, n, seed})), sigma);
        case ModelKind::Mlr:
          return mlr_sample_oracle(std::make_shared<const MlrDataset>(mlr_generate({cfg.d, ts, sigma, n, seed})),
                                   sigma);
      }
      throw ConfigError("unknown model");
    };
    fit = estimate_gamma_stability(factory, pop, ts, grid, trials);
  } else {
    throw ConfigError("flag --exponent: expected alpha, lojasiewicz or gamma");
  }
  write_json(io::probe_to_json(exponent, fit, grid.radii), out);
  if (!out.empty() && out != "-")
    std::printf("%s: slope=%.4f r2=%.4f -> %s\n", exponent.c_str(), fit.slope, fit.r_squared, out.c_str());
  return kExitOk;
}

SweepResult load_result(const std::string& path) {
  SweepResult res;
  res.rows = io::read_sweep_csv(path);
  if (res.rows.empty()) throw Error("results file '" + path + "' has no rows");
  compute_slope_fits(res);
  return res;
}

int run_report(const std::string& results, const std::string& model, const std::string& regime, int p,
               const std::string& json_out) {
  const SweepResult res = load_result(results);
  if (res.slope_fits.empty()) throw Error("report: no slope fits could be computed from '" + results + "'");
  const VerdictReport rep = compare_to_theory(res, TheoryTable{}, parse_model(model), parse_regime(regime), p);
  std::cout << io::format_verdict_table(rep);
  if (!json_out.empty()) write_json(io::verdict_to_json(rep), json_out);
  return rep.all_pass() ? kExitOk : kExitAssert;
}

int run_plot(const std::string& results, const std::string& trajectory, const std::string& kind,
             const std::string& title, const std::string& out) {
  io::PlotSpec spec;
  spec.kind = io::parse_plot_kind(kind);
  spec.title = title;
  if (spec.kind == io::PlotKind::PopulationConvergence) {
    if (trajectory.empty()) throw ConfigError("plot --kind population_convergence needs --trajectory");
    std::ifstream in(trajectory);
    if (!in) throw IoError("cannot open '" + trajectory + "' for reading");
    std::string line;
    std::getline(in, line);
    io::PlotSeries s{"distance", {}};
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      const auto f = split(line, ',');
      if (f.size() < 4) throw ParseError("row " + std::to_string(row) + ": expected k,value,grad_norm,dist", row);
      s.points.emplace_back(to_number(f[0], "k") + 1.0, to_number(f[3], "dist"));
    }
    spec.series.push_back(std::move(s));
  } else {
    if (results.empty()) throw ConfigError("plot needs --results");
    const auto rows = io::read_sweep_csv(results);
    std::map<Method, std::map<std::size_t, std::vector<double>>> by;
    for (const auto& r : rows) {
      if (r.failed) continue;
      if (spec.kind == io::PlotKind::RadiusVsN) {
        if (r.min_dist > 0.0) by[r.method][r.n].push_back(r.min_dist);
      } else if (r.iters_to_radius && *r.iters_to_radius > 0) {
        by[r.method][r.n].push_back(static_cast<double>(*r.iters_to_radius));
      }
    }
    for (auto& [m, cells] : by) {
      io::PlotSeries s{to_string(m), {}};
      for (auto& [n, v] : cells) s.points.emplace_back(static_cast<double>(n), median(v));
      spec.series.push_back(std::move(s));
    }
  }
  io::emit_plot(spec, out);
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polyak step-size rate experiments"};
  app.require_subcommand(1);

  CommonFlags gen_flags, fit_flags, sweep_flags, probe_flags;
  std::size_t gen_n = 1000, fit_n = 1000, probe_n = 10000;
  int fit_trial = 0, probe_trials = 10, report_p = 2;
  std::string gen_out, fit_out, fit_method = "polyak", sweep_out, sweep_fits, probe_exponent, probe_out = "-";
  std::string report_results, report_model, report_regime, report_json;
  std::string plot_results, plot_traj, plot_kind = "radius_vs_n", plot_title, plot_out;

  auto* gen = app.add_subcommand("gen", "simulate a dataset and write it as CSV");
  gen_flags.attach(gen, false);
  gen->add_option("--n", gen_n, "sample size");
  gen->add_option("--out", gen_out, "output CSV")->required();

  auto* fit = app.add_subcommand("fit", "run one method on one simulated dataset; trajectory CSV out");
  fit_flags.attach(fit, false);
  fit->add_option("--n", fit_n, "sample size");
  fit->add_option("--trial", fit_trial, "trial index (selects the derived seeds)");
  fit->add_option("--method", fit_method, "fixed_gd | polyak | adaptive_polyak | em_unit_step");
  fit->add_option("--out", fit_out, "output trajectory CSV")->required();

  auto* sweep = app.add_subcommand("sweep", "sample-size sweep; SweepResult CSV out");
  sweep_flags.attach(sweep, true);
  sweep->add_option("--out", sweep_out, "output sweep CSV")->required();
  sweep->add_option("--fits-out", sweep_fits, "optional JSON file for the fitted slopes");

  auto* probe = app.add_subcommand("probe", "estimate a landscape exponent; JSON out");
  probe_flags.attach(probe, false);
  probe->add_option("--exponent", probe_exponent, "alpha | lojasiewicz | gamma")->required();
  probe->add_option("--n", probe_n, "sample size for the gamma probe");
  probe->add_option("--trials", probe_trials, "datasets per radius for the gamma probe");
  probe->add_option("--out", probe_out, "output JSON ('-' for stdout)");

  auto* report = app.add_subcommand("report", "compare a sweep to the predicted exponents");
  report->add_option("--results", report_results, "sweep CSV")->required();
  report->add_option("--model", report_model, "glm | gmm | mlr")->required();
  report->add_option("--regime", report_regime, "low_snr | strong_snr")->required();
  report->add_option("--p", report_p, "GLM link power");
  report->add_option("--out", report_json, "optional verdict JSON");

  auto* plot = app.add_subcommand("plot", "log-log SVG figure");
  plot->add_option("--results", plot_results, "sweep CSV (radius_vs_n, iters_vs_n)");
  plot->add_option("--trajectory", plot_traj, "trajectory CSV (population_convergence)");
  plot->add_option("--kind", plot_kind, "radius_vs_n | iters_vs_n | population_convergence");
  plot->add_option("--title", plot_title, "figure title");
  plot->add_option("--out", plot_out, "output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) return run_gen(gen_flags, gen_n, gen_out);
    if (*fit) return run_fit(fit_flags, fit_n, fit_trial, fit_method, fit_out);
    if (*sweep) return run_sweep_cmd(sweep_flags, sweep_out, sweep_fits);
    if (*probe) return run_probe(probe_flags, probe_exponent, probe_n, probe_trials, probe_out);
    if (*report) return run_report(report_results, report_model, report_regime, report_p, report_json);
    if (*plot) return run_plot(plot_results, plot_traj, plot_kind, plot_title, plot_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitRuntime;
}

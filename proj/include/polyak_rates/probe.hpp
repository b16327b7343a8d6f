#pragma once

// Numerical probes for the local landscape exponents: curvature growth
// (lambda_max ~ r^alpha), the Lojasiewicz exponent (|grad| ~ gap^{1-1/(alpha+2)}),
// and the growth of the sample-vs-population gradient deviation (~ r^gamma).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/models/common.hpp"
#include "polyak_rates/numerics.hpp"
#include "polyak_rates/objective.hpp"
#include "polyak_rates/optimizers.hpp"
#include "polyak_rates/parallel.hpp"
#include "polyak_rates/slope_fit.hpp"

namespace polyak {

struct ProbeGrid {
  std::vector<double> radii;
  int samples_per_radius = 1;
  std::uint64_t seed = 0;
  /// Radius of the ball the probe is confined to; every radius must lie below it.
  double rho = 1.0;

  void validate() const {
    if (radii.empty()) throw ConfigError("ProbeGrid: radii must be nonempty");
    if (samples_per_radius < 1) throw ConfigError("ProbeGrid: samples_per_radius must be >= 1");
    if (!(radii.front() > 0.0)) throw ConfigError("ProbeGrid: radii must be positive");
    for (std::size_t i = 1; i < radii.size(); ++i)
      if (!(radii[i] > radii[i - 1])) throw ConfigError("ProbeGrid: radii must be strictly increasing");
    if (!(radii.back() < rho)) throw ConfigError("ProbeGrid: radii must lie below rho");
  }
};

/// `count` geometrically spaced values from lo to hi inclusive.
inline std::vector<double> geometric_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw ConfigError("geometric_grid: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = lo * std::exp(step * i);
  out.back() = hi;
  return out;
}

inline ProbeGrid make_probe_grid(double lo, double hi, int count, int samples, std::uint64_t seed) {
  ProbeGrid g{geometric_grid(lo, hi, count), samples, seed, hi * 1.0000001};
  g.validate();
  return g;
}

struct TheoryExponents {
  double alpha = 0.0;
  double gamma = 0.0;
  std::optional<double> kappa;
  std::optional<double> r_n;

  void validate() const {
    if (alpha < 0.0 || gamma < 0.0) throw ConfigError("TheoryExponents: alpha and gamma must be >= 0");
    if (alpha < gamma) throw ConfigError("TheoryExponents: alpha must be >= gamma");
    if (kappa && !(*kappa > 0.0 && *kappa < 1.0)) throw ConfigError("TheoryExponents: kappa must lie in (0, 1)");
    if (r_n && !(*r_n > 0.0)) throw ConfigError("TheoryExponents: r_n must be positive");
  }
};

/// alpha implied by a Lojasiewicz slope s = 1 - 1/(alpha + 2).
inline double alpha_from_lojasiewicz_slope(double slope) {
  if (!(slope < 1.0)) throw DomainError("alpha_from_lojasiewicz_slope: slope must be < 1");
  return 1.0 / (1.0 - slope) - 2.0;
}

namespace detail {

inline std::vector<ParamVector> sphere_points(const ParamVector& center, double radius, int count,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ParamVector> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) pts.push_back(sample_sphere(rng, center, radius));
  return pts;
}

}  // namespace detail

/// Fits log max_{|theta - theta*| = r} lambda_max(Hessian) against log r.
inline SlopeFit estimate_alpha_smoothness(const Oracle& oracle, const ParamVector& theta_star, const ProbeGrid& grid,
                                          const FiniteDiffSpec& spec = {}) {
  grid.validate();
  require_param(theta_star, "estimate_alpha_smoothness");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < grid.radii.size(); ++k) {
    const auto pts =
        detail::sphere_points(theta_star, grid.radii[k], grid.samples_per_radius, derive_seed(grid.seed, {1, k}));
    double lam = -std::numeric_limits<double>::infinity();
    for (const auto& p : pts) lam = std::max(lam, hessian_top_eigenvalue(oracle, p, spec));
    if (lam > 0.0) {
      xs.push_back(grid.radii[k]);
      ys.push_back(lam);
    }
  }
  if (xs.empty()) throw DegenerateLandscapeError("estimate_alpha_smoothness: no positive curvature on the grid");
  return fit_loglog(xs, ys);
}

/// Fits log |grad f| against log (f - f*) over every probe point.
inline SlopeFit estimate_lojasiewicz_exponent(const Oracle& oracle, const ParamVector& theta_star,
                                              const ProbeGrid& grid) {
  grid.validate();
  require_param(theta_star, "estimate_lojasiewicz_exponent");
  const auto fstar = oracle.optimum_value();
  if (!fstar) throw ContractViolation("estimate_lojasiewicz_exponent: oracle has no optimum value");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < grid.radii.size(); ++k) {
    const auto pts =
        detail::sphere_points(theta_star, grid.radii[k], grid.samples_per_radius, derive_seed(grid.seed, {2, k}));
    for (const auto& p : pts) {
      const double gap = oracle.gap(p, *fstar);
      if (!(gap > 0.0))
        throw OrderingViolationError("estimate_lojasiewicz_exponent: f(theta) <= f(theta*) at radius " +
                                     std::to_string(grid.radii[k]));
      xs.push_back(gap);
      ys.push_back(oracle.gradient(p).norm());
    }
  }
  return fit_loglog(xs, ys);
}

/// Builds the sample oracle of a fresh dataset from its seed.
using SampleOracleFactory = std::function<Oracle(std::uint64_t seed)>;

struct StabilityProbe {
  SlopeFit fit;
  /// Mean over trials of the max deviation, one entry per radius.
  std::vector<double> mean_max_deviation;
};

/// For each radius and trial, draws a dataset, takes the max over sphere
/// directions of |grad f_n - grad f|, averages the maxima over trials and fits
/// the log-mean against log r. Directions per radius are shared by all trials.
/// The max over samples lower-bounds the true supremum.
inline StabilityProbe estimate_gamma_stability_detailed(const SampleOracleFactory& make_sample,
                                                        const Oracle& population, const ParamVector& theta_star,
                                                        const ProbeGrid& grid, int trials) {
  grid.validate();
  if (trials < 1) throw ConfigError("estimate_gamma_stability: trials must be >= 1");
  require_param(theta_star, "estimate_gamma_stability");
  const std::size_t R = grid.radii.size();
  std::vector<std::vector<ParamVector>> dirs(R);
  std::vector<std::vector<ParamVector>> pop_grads(R);
  for (std::size_t k = 0; k < R; ++k) {
    dirs[k] = detail::sphere_points(theta_star, grid.radii[k], grid.samples_per_radius, derive_seed(grid.seed, {3, k}));
    for (const auto& p : dirs[k]) pop_grads[k].push_back(population.gradient(p));
  }
  std::vector<double> cell(R * static_cast<std::size_t>(trials), 0.0);
  parallel_for(cell.size(), [&](std::size_t idx) {
    const std::size_t k = idx / static_cast<std::size_t>(trials);
    const std::size_t trial = idx % static_cast<std::size_t>(trials);
    const Oracle sample = make_sample(derive_seed(grid.seed, {4, k, trial}));
    double worst = 0.0;
    for (std::size_t j = 0; j < dirs[k].size(); ++j)
      worst = std::max(worst, (sample.gradient(dirs[k][j]) - pop_grads[k][j]).norm());
    cell[idx] = worst;
  });
  StabilityProbe out;
  out.mean_max_deviation.assign(R, 0.0);
  for (std::size_t k = 0; k < R; ++k) {
    double s = 0.0;
    for (int t = 0; t < trials; ++t) s += cell[k * trials + t];
    out.mean_max_deviation[k] = s / trials;
  }
  out.fit = fit_loglog(grid.radii, out.mean_max_deviation);
  return out;
}

inline SlopeFit estimate_gamma_stability(const SampleOracleFactory& make_sample, const Oracle& population,
                                         const ParamVector& theta_star, const ProbeGrid& grid, int trials) {
  return estimate_gamma_stability_detailed(make_sample, population, theta_star, grid, trials).fit;
}

/// Explicit Euler on d theta/dt = -grad f(theta). Returns |theta(t_k) - theta*|
/// for k = 0..steps (theta* defaults to the origin).
inline std::vector<double> gradient_flow_distance_bound(const Oracle& oracle, const ParamVector& theta0, int steps,
                                                        double dt,
                                                        const std::optional<ParamVector>& theta_star = std::nullopt) {
  require_param(theta0, "gradient_flow_distance_bound");
  if (steps < 0) throw ConfigError("gradient_flow_distance_bound: steps must be >= 0");
  if (!(dt > 0.0)) throw ConfigError("gradient_flow_distance_bound: dt must be > 0");
  const ParamVector star = theta_star ? *theta_star : ParamVector::Zero(theta0.size());
  ParamVector theta = theta0;
  const double d0 = (theta - star).norm();
  const double blowup = 1e6 * std::max(1.0, d0);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  out.push_back(d0);
  for (int k = 0; k < steps; ++k) {
    theta -= dt * oracle.gradient(theta);
    const double dist = (theta - star).norm();
    if (!std::isfinite(dist) || dist > blowup)
      throw StepSizeError("gradient_flow_distance_bound: Euler iteration blew up at step " + std::to_string(k + 1));
    out.push_back(dist);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inhomogeneous example f = theta1^2 + theta2^4 under exact Polyak steps.

enum class InhomogeneousRegime { Stable, Intermediate, Unstable };

inline const char* to_string(InhomogeneousRegime r) {
  switch (r) {
    case InhomogeneousRegime::Stable: return "stable";
    case InhomogeneousRegime::Intermediate: return "intermediate";
    case InhomogeneousRegime::Unstable: return "unstable";
  }
  return "unknown";
}

struct InhomogeneousReport {
  Trajectory trajectory;
  std::vector<InhomogeneousRegime> regimes;  ///< regime of each pre-step iterate
  std::vector<double> theta2_ratios;         ///< theta2^{t+1} / theta2^t where theta2^t != 0
  int stable_steps = 0;
  int intermediate_steps = 0;
  int unstable_steps = 0;
  int theta1_sign_flips = 0;
  int theta1_growth_steps = 0;  ///< steps with |theta1^{t+1}| > |theta1^t|
  bool slow_coordinate = false;  ///< theta2 contraction ratios climb toward 1
  bool instability_flag = false;
  double constant_C = 8.0;
};

inline Oracle inhomogeneous_oracle() {
  return Oracle(
      2, [](const ParamVector& t) { return t[0] * t[0] + ipow(t[1], 4); },
      [](const ParamVector& t) -> ParamVector {
        ParamVector g(2);
        g << 2.0 * t[0], 4.0 * t[1] * t[1] * t[1];
        return g;
      },
      0.0);
}

/// Stable when |theta1| >= C theta2^2, unstable when |theta1| <= C |theta2|^3.
inline InhomogeneousReport inhomogeneous_demo(const ParamVector& theta0, int iters, double C = 8.0) {
  if (theta0.size() != 2) throw ConfigError("inhomogeneous_demo: theta0 must have length 2");
  require_param(theta0, "inhomogeneous_demo");
  if (iters < 0) throw ConfigError("inhomogeneous_demo: iters must be >= 0");
  InhomogeneousReport rep;
  rep.constant_C = C;
  const Oracle f = inhomogeneous_oracle();
  PolyakConfig cfg;
  cfg.f_opt = 0.0;
  cfg.max_iters = std::max(iters, 1);
  cfg.grad_floor = 1e-300;
  cfg.value_tol = 0.0;
  try {
    rep.trajectory = polyak_gd(f, theta0, cfg, ParamVector::Zero(2));
  } catch (const StalledError& e) {
    rep.trajectory = e.partial();
  }
  if (iters == 0) {
    rep.trajectory.iterates.resize(1);
    rep.trajectory.values.resize(1);
    rep.trajectory.grad_norms.resize(1);
    if (rep.trajectory.distances) rep.trajectory.distances->resize(1);
  }
  const auto& it = rep.trajectory.iterates;
  for (std::size_t t = 0; t + 1 < it.size(); ++t) {
    const double a = std::abs(it[t][0]), b = std::abs(it[t][1]);
    InhomogeneousRegime reg = InhomogeneousRegime::Intermediate;
    if (a >= C * b * b)
      reg = InhomogeneousRegime::Stable;
    else if (a <= C * b * b * b)
      reg = InhomogeneousRegime::Unstable;
    rep.regimes.push_back(reg);
    if (reg == InhomogeneousRegime::Stable) ++rep.stable_steps;
    else if (reg == InhomogeneousRegime::Unstable) ++rep.unstable_steps;
    else ++rep.intermediate_steps;
    if (it[t][1] != 0.0) rep.theta2_ratios.push_back(it[t + 1][1] / it[t][1]);
    if (it[t][0] * it[t + 1][0] < 0.0) ++rep.theta1_sign_flips;
    if (std::abs(it[t + 1][0]) > a) ++rep.theta1_growth_steps;
  }
  const auto& r = rep.theta2_ratios;
  if (r.size() >= 4) {
    const std::size_t q = r.size() / 4;
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      early += r[i];
      late += r[r.size() - 1 - i];
    }
    rep.slow_coordinate = late > early && late / q > 0.9;
  }
  rep.instability_flag = rep.unstable_steps > 0 && (rep.theta1_sign_flips > 0 || rep.theta1_growth_steps > 0);
  return rep;
}

}  // namespace polyak

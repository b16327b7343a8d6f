#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "polyak_rates/harness.hpp"
#include "polyak_rates/models/glm.hpp"
#include "polyak_rates/models/gmm.hpp"
#include "polyak_rates/models/mlr.hpp"
#include "polyak_rates/numerics.hpp"
#include "polyak_rates/optimizers.hpp"
#include "polyak_rates/slope_fit.hpp"

using namespace polyak;

namespace {

ParamVector vec(std::initializer_list<double> xs) {
  ParamVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Oracle half_sq(Eigen::Index d) {
  return Oracle(
      d, [](const ParamVector& t) { return 0.5 * t.squaredNorm(); },
      [](const ParamVector& t) -> ParamVector { return t; }, 0.0);
}

/// |theta|^{a+2} / (a+2), minimized at 0.
Oracle power_norm(Eigen::Index d, double a) {
  return Oracle(
      d, [a](const ParamVector& t) { return std::pow(t.norm(), a + 2) / (a + 2); },
      [a](const ParamVector& t) -> ParamVector { return std::pow(t.norm(), a) * t; }, 0.0);
}

Oracle glm_zero_signal(int p, double sigma = 1.0, int d = 2) {
  GlmSpec spec;
  spec.d = d;
  spec.p = p;
  spec.sigma = sigma;
  spec.theta_star = ParamVector::Zero(d);
  return glm_population_oracle(spec);
}

}  // namespace

// ---------------------------------------------------------------------------
// fixed_step_gd

TEST(FixedStep, UnitStepSolvesQuadraticInOneStep) {
  FixedStepConfig cfg;
  cfg.eta = 1.0;
  const auto traj = fixed_step_gd(half_sq(2), vec({1, 1}), cfg);
  ASSERT_EQ(traj.size(), 2u);
  EXPECT_EQ(traj.iterates[1], vec({0, 0}));
  EXPECT_EQ(traj.stop, StopReason::GradTol);
}

TEST(FixedStep, QuarticSlopeMatchesInverseAlpha) {
  FixedStepConfig cfg;
  cfg.eta = 0.1;
  cfg.max_iters = 10000;
  const auto traj = fixed_step_gd(power_norm(1, 2.0), vec({1.0}), cfg, vec({0.0}));
  std::vector<double> ts, ds;
  for (std::size_t t = 100; t <= 10000; t += 100) {
    ts.push_back(static_cast<double>(t));
    ds.push_back((*traj.distances)[t]);
  }
  const auto fit = fit_loglog(ts, ds);
  EXPECT_NEAR(fit.slope, -0.5, 0.05);
}

TEST(FixedStep, SublinearRateProperty) {
  for (double a : {1.0, 2.0, 4.0}) {
    FixedStepConfig cfg;
    cfg.eta = 0.1;
    cfg.max_iters = 10000;
    const auto traj = fixed_step_gd(power_norm(2, a), vec({0.6, 0.8}), cfg, vec({0, 0}));
    std::vector<double> ts, ds;
    for (double t = 100; t <= 10000; t *= 1.2) {
      ts.push_back(t);
      ds.push_back((*traj.distances)[static_cast<std::size_t>(t)]);
    }
    const auto fit = fit_loglog(ts, ds);
    EXPECT_NEAR(fit.slope, -1.0 / a, 0.05) << "alpha=" << a;
    EXPECT_GE(fit.r_squared, 0.99);
  }
}

TEST(FixedStep, TooLargeStepDiverges) {
  // theta - eta * theta^3 with eta * theta0^2 = 10 grows without bound.
  FixedStepConfig cfg;
  cfg.eta = 0.1;
  cfg.max_iters = 100;
  try {
    fixed_step_gd(power_norm(1, 2.0), vec({10.0}), cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.partial().size(), 1u);
    EXPECT_EQ(e.partial().iterates[0], vec({10.0}));
  }
}

TEST(FixedStep, StepTolStopsOnTinySteps) {
  FixedStepConfig cfg;
  cfg.eta = 0.5;
  cfg.max_iters = 1000;
  cfg.step_tol = 1e-3;
  const auto traj = fixed_step_gd(power_norm(1, 2.0), vec({1.0}), cfg);
  EXPECT_EQ(traj.stop, StopReason::StepTol);
  EXPECT_LT(traj.size(), 1001u);
}

TEST(FixedStep, TrajectoryInvariants) {
  FixedStepConfig cfg;
  cfg.max_iters = 50;
  const auto traj = fixed_step_gd(power_norm(3, 1.0), vec({1, -1, 2}), cfg, vec({0, 0, 0}));
  EXPECT_EQ(traj.values.size(), traj.size());
  EXPECT_EQ(traj.grad_norms.size(), traj.size());
  EXPECT_EQ(traj.distances->size(), traj.size());
  for (double g : traj.grad_norms) EXPECT_GE(g, 0.0);
  EXPECT_THROW(fixed_step_gd(half_sq(1), vec({NAN}), cfg), NumericalDomainError);
  cfg.eta = 0.0;
  EXPECT_THROW(fixed_step_gd(half_sq(1), vec({1}), cfg), ConfigError);
}

// ---------------------------------------------------------------------------
// polyak_gd

TEST(Polyak, QuadraticHalvesEachStep) {
  PolyakConfig cfg;
  cfg.max_iters = 1;
  const auto traj = polyak_gd(half_sq(2), vec({2, 0}), cfg);
  ASSERT_EQ(traj.size(), 2u);
  EXPECT_EQ(traj.iterates[1], vec({1, 0}));
}

TEST(Polyak, ZeroSignalGlmContractsByThreeQuarters) {
  const Oracle f = glm_zero_signal(2, 1.0);
  PolyakConfig cfg;
  cfg.f_opt = 0.5;
  cfg.max_iters = 1;
  const ParamVector t0 = vec({0.3, -0.4});
  const auto traj = polyak_gd(f, t0, cfg);
  EXPECT_NEAR((traj.iterates[1] - 0.75 * t0).norm(), 0.0, 1e-15);
  // value (sigma^2 + 3 |theta|^4) / 2 as a direct check of the oracle
  EXPECT_NEAR(f.value(t0), 0.5 * (1.0 + 3.0 * std::pow(0.25, 2)), 1e-15);
}

TEST(Polyak, ExactContractionPropertyForDegrees) {
  Rng rng(1);
  for (int p : {2, 3, 4}) {
    const Oracle f = glm_zero_signal(p);
    const double kappa = 1.0 - 1.0 / (2.0 * p);
    PolyakConfig cfg;
    cfg.f_opt = *f.optimum_value();
    cfg.max_iters = 5;
    cfg.value_tol = 0.0;
    for (int s = 0; s < 100; ++s) {
      const ParamVector t0 = sample_ball(rng, ParamVector::Zero(2), 0.5);
      const auto traj = polyak_gd(f, t0, cfg);
      for (std::size_t k = 1; k < traj.size(); ++k)
        for (Eigen::Index i = 0; i < 2; ++i) {
          const double want = kappa * traj.iterates[k - 1][i];
          EXPECT_LE(std::abs(traj.iterates[k][i] - want), 1e-12 * std::abs(want)) << "p=" << p;
        }
    }
  }
}

TEST(Polyak, StartAtMinimizerStopsImmediately) {
  const auto traj = polyak_gd(half_sq(2), vec({0, 0}), PolyakConfig{});
  EXPECT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj.stop, StopReason::ValueReached);
}

TEST(Polyak, FlatGradientAboveTargetStalls) {
  Oracle flat(1, [](const ParamVector&) { return 1.0; },
              [](const ParamVector& t) -> ParamVector { return ParamVector::Zero(t.size()); });
  EXPECT_THROW(polyak_gd(flat, vec({1.0}), PolyakConfig{}), StalledError);
}

TEST(Polyak, TargetAboveValueCountsAsClamp) {
  PolyakConfig cfg;
  cfg.f_opt = 10.0;
  const auto traj = polyak_gd(half_sq(1), vec({1.0}), cfg);
  EXPECT_EQ(traj.stop, StopReason::ValueReached);
  EXPECT_EQ(traj.clamp_events, 1);
}

TEST(Polyak, ScaleInvarianceProperty) {
  GlmSpec spec;
  spec.n = 2000;
  spec.seed = 9;
  spec.theta_star = vec({0.5, 1.0});
  auto data = std::make_shared<const GlmDataset>(glm_generate(spec));
  const Oracle f = glm_sample_oracle(data, 2);
  const double f_opt = f.value(spec.theta_star) - 0.05;
  // Power-of-two factors scale exactly, so whole runs agree bit for bit.
  for (double c : {0.25, 4.0, 1024.0}) {
    PolyakConfig a, b;
    a.f_opt = f_opt;
    b.f_opt = c * f_opt;
    a.max_iters = b.max_iters = 30;
    a.value_tol = b.value_tol = 0.0;
    const auto ta = polyak_gd(f, vec({0.2, 0.9}), a);
    const auto tb = polyak_gd(f.scaled(c), vec({0.2, 0.9}), b);
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t k = 0; k < ta.size(); ++k) EXPECT_EQ(ta.iterates[k], tb.iterates[k]);
  }
  // Other factors: each single step of the map agrees to rounding.
  Rng rng(3);
  for (double c : {3.0, 100.0, 0.1}) {
    for (int s = 0; s < 20; ++s) {
      const ParamVector t0 = sample_ball(rng, vec({0.5, 1.0}), 0.5);
      PolyakConfig a, b;
      a.f_opt = f_opt;
      b.f_opt = c * f_opt;
      a.max_iters = b.max_iters = 1;
      const auto ta = polyak_gd(f, t0, a);
      const auto tb = polyak_gd(f.scaled(c), t0, b);
      ASSERT_EQ(ta.size(), tb.size());
      EXPECT_LE((ta.iterates.back() - tb.iterates.back()).norm(), 1e-12 * std::max(1.0, t0.norm()));
    }
  }
}

TEST(Polyak, PopulationDistanceIsMonotone) {
  const auto rule = gauss_hermite(60);
  std::vector<std::pair<const char*, Oracle>> oracles;
  oracles.emplace_back("glm", glm_zero_signal(2));
  oracles.emplace_back("gmm", gmm_population_oracle(ParamVector::Zero(2), 1.0, rule));
  oracles.emplace_back("mlr", mlr_population_oracle(ParamVector::Zero(2), 1.0, rule));
  Rng rng(4);
  for (const auto& [name, f] : oracles) {
    PolyakConfig cfg;
    cfg.f_opt = *f.optimum_value();
    cfg.max_iters = 20;
    for (int s = 0; s < 100; ++s) {
      const ParamVector t0 = sample_ball(rng, ParamVector::Zero(2), 0.5);
      const auto traj = polyak_gd(f, t0, cfg, ParamVector::Zero(2));
      const auto& d = *traj.distances;
      for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LE(d[k], d[k - 1] * (1 + 1e-12)) << name;
    }
  }
}

// ---------------------------------------------------------------------------
// adaptive_polyak

TEST(Adaptive, QuadraticBoundApproachesOptimum) {
  AdaptivePolyakConfig cfg;
  cfg.f_lower0 = -1.0;
  cfg.horizon_T = 20;
  cfg.epochs_K = 6;
  const auto res = adaptive_polyak(half_sq(2), vec({1, 1}), cfg);
  EXPECT_LE(std::abs(res.f_lower_final), 0.015625);
  EXPECT_LE(res.best.norm(), 0.2);
  EXPECT_EQ(res.bounds.size(), 6u);
  EXPECT_EQ(res.trajectory.values[res.best_index], *std::min_element(res.trajectory.values.begin(),
                                                                      res.trajectory.values.end()));
}

TEST(Adaptive, ExactLowerBoundFollowsPolyak) {
  AdaptivePolyakConfig cfg;
  cfg.f_lower0 = 0.0;
  cfg.horizon_T = 15;
  cfg.epochs_K = 1;
  const Oracle f = power_norm(2, 2.0);
  const auto res = adaptive_polyak(f, vec({0.5, -0.3}), cfg);
  PolyakConfig pc;
  pc.max_iters = 15;
  const auto traj = polyak_gd(f, vec({0.5, -0.3}), pc);
  ASSERT_EQ(res.trajectory.size(), traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) EXPECT_EQ(res.trajectory.iterates[k], traj.iterates[k]);
  EXPECT_EQ(res.best, traj.iterates.back());
}

TEST(Adaptive, BoundGapHalvingProperty) {
  for (double lo : {-4.0, -1.0, -0.01}) {
    AdaptivePolyakConfig cfg;
    cfg.f_lower0 = lo;
    cfg.horizon_T = 10;
    cfg.epochs_K = 8;
    const auto res = adaptive_polyak(half_sq(3), vec({1, 2, -1}), cfg);
    std::vector<double> bounds = res.bounds;
    bounds.push_back(res.f_lower_final);
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
      const std::size_t first = res.epoch_starts[k];
      const std::size_t last = k + 1 < res.epoch_starts.size() ? res.epoch_starts[k + 1] + 1 : res.trajectory.size();
      const double best = res.trajectory.values[argmin_value(res.trajectory.values, first, last)];
      EXPECT_LE(std::abs(bounds[k + 1]), 0.5 * std::abs(bounds[k]) + best + 1e-15);
    }
  }
}

TEST(Adaptive, LiteralUpdateDiffersFromMidpoint) {
  AdaptivePolyakConfig cfg;
  cfg.f_lower0 = -1.0;
  cfg.horizon_T = 5;
  cfg.epochs_K = 3;
  cfg.update = BoundUpdate::Literal;
  const auto lit = adaptive_polyak(half_sq(2), vec({1, 1}), cfg);
  cfg.update = BoundUpdate::Midpoint;
  const auto mid = adaptive_polyak(half_sq(2), vec({1, 1}), cfg);
  EXPECT_NE(lit.bounds[1], mid.bounds[1]);
}

TEST(Adaptive, LowerBoundAboveStartRejected) {
  AdaptivePolyakConfig cfg;
  cfg.f_lower0 = 10.0;
  EXPECT_THROW(adaptive_polyak(half_sq(1), vec({1.0}), cfg), ContractViolation);
}

TEST(SurrogateSearch, ReplayIsDeterministicAndMatchesHarness) {
  ExperimentConfig cfg = default_config(ModelKind::Glm, Regime::StrongSnr);
  cfg.n_grid = {2000};
  cfg.trials = 1;
  cfg.methods = {Method::AdaptivePolyak};
  const auto prob = make_sample_problem(cfg, 2000, dataset_seed(cfg.seed, 2000, 0));
  Rng rng(init_seed(cfg.seed, 2000, 0));
  const ParamVector t0 = sample_sphere(rng, cfg.resolved_theta_star(), cfg.resolved_init_radius());
  const auto a = polyak_surrogate_search(prob.oracle, t0, surrogate_search_config(cfg, prob));
  const auto b = polyak_surrogate_search(prob.oracle, t0, surrogate_search_config(cfg, prob));
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  EXPECT_EQ(a.trajectory.values, b.trajectory.values);
  std::vector<Trajectory> trajs;
  run_cell(cfg, 2000, 0, &trajs);
  ASSERT_EQ(trajs.size(), 1u);
  EXPECT_EQ(trajs[0].values, a.trajectory.values);
  // The surrogate never leaves the bracket [floor, f(0)].
  for (const auto& e : a.epochs) {
    EXPECT_GE(e.surrogate, prob.floor);
    EXPECT_LE(e.surrogate, prob.oracle.value(ParamVector::Zero(2)));
  }
  EXPECT_LE(a.trajectory.values[a.best_index], a.trajectory.values[0]);
}

// ---------------------------------------------------------------------------
// select_best_iterate and iterations_to_radius

TEST(SelectBest, SingleCandidate) {
  Trajectory t;
  t.push(vec({1.0}), 0.0, 0.0, nullptr);
  EXPECT_EQ(select_best_iterate(t, half_sq(1)).first, 0u);
}

TEST(SelectBest, TiesGoToSmallestIndex) {
  Trajectory t;
  for (int i = 0; i < 4; ++i) t.push(vec({static_cast<double>(i)}), 0.0, 0.0, nullptr);
  const std::vector<double> table{5, 3, 4, 3};
  Oracle holdout(1, [table](const ParamVector& x) { return table[static_cast<std::size_t>(x[0])]; },
                 [](const ParamVector& x) -> ParamVector { return ParamVector::Zero(x.size()); });
  const auto [idx, theta] = select_best_iterate(t, holdout);
  EXPECT_EQ(idx, 1u);
  EXPECT_EQ(theta, vec({1.0}));
}

TEST(SelectBest, HoldoutSelectionNearBestDistanceOnGmm) {
  // Low-SNR mixture: a fresh sample of the same size picks an iterate whose
  // distance to theta* is within 2x the best distance along the run.
  int close = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    ExperimentConfig cfg = default_config(ModelKind::Gmm, Regime::LowSnr);
    cfg.n_grid = {10000};
    const auto prob = make_sample_problem(cfg, 10000, dataset_seed(100 + s, 10000, 0));
    auto hold = std::make_shared<const RowMatrix>(
        gmm_generate({2, ParamVector::Zero(2), 1.0, 10000, derive_seed(100 + s, {99})}));
    const Oracle holdout = gmm_sample_oracle(hold, 1.0);
    Rng rng(init_seed(100 + s, 10000, 0));
    const ParamVector t0 = sample_sphere(rng, ParamVector::Zero(2), cfg.resolved_init_radius());
    const auto res = polyak_surrogate_search(prob.oracle, t0, surrogate_search_config(cfg, prob));
    double best = INFINITY;
    for (const auto& it : res.trajectory.iterates) best = std::min(best, it.norm());
    const auto [idx, theta] = select_best_iterate(res.trajectory, holdout);
    if (theta.norm() <= 2.0 * best) ++close;
  }
  EXPECT_GE(close, seeds * 3 / 4);
}

TEST(ItersToRadius, AlreadyInside) {
  Trajectory t;
  t.push(vec({0.0}), 0.0, 0.0, nullptr);
  EXPECT_EQ(iterations_to_radius(t, vec({0.0}), 0.1), 0u);
}

TEST(ItersToRadius, ExactContractionCount) {
  const Oracle f = glm_zero_signal(2);
  PolyakConfig cfg;
  cfg.f_opt = 0.5;
  cfg.max_iters = 30;
  cfg.value_tol = 0.0;
  const auto traj = polyak_gd(f, vec({0.6, 0.8}), cfg);
  const auto t = iterations_to_radius(traj, vec({0, 0}), 1e-3);
  ASSERT_TRUE(t.has_value());
  EXPECT_EQ(*t, static_cast<std::size_t>(std::ceil(std::log(1e-3) / std::log(0.75))));
  EXPECT_EQ(*t, 25u);
}

TEST(ItersToRadius, NeverReached) {
  Trajectory t;
  t.push(vec({1.0}), 0.0, 0.0, nullptr);
  t.push(vec({0.9}), 0.0, 0.0, nullptr);
  EXPECT_FALSE(iterations_to_radius(t, vec({0.0}), 0.5).has_value());
}

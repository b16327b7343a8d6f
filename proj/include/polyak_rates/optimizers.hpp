#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/objective.hpp"

namespace polyak {

enum class StopReason {
  MaxIters,      ///< iteration cap reached
  GradTol,       ///< gradient norm below tolerance
  ValueReached,  ///< f(theta) <= target value
  GradFloor,     ///< Polyak zero-gradient guard hit at the target value
  EpochsDone,    ///< adaptive schemes: all epochs / adjustments used
  StepTol,       ///< fixed step: relative step length below tolerance
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::MaxIters: return "max_iters";
    case StopReason::GradTol: return "grad_tol";
    case StopReason::ValueReached: return "value_reached";
    case StopReason::GradFloor: return "grad_floor";
    case StopReason::EpochsDone: return "epochs_done";
    case StopReason::StepTol: return "step_tol";
  }
  return "unknown";
}

/// Ordered iterate log. Index 0 is the initialization; all lists have equal length.
struct Trajectory {
  std::vector<ParamVector> iterates;
  std::vector<double> values;
  std::vector<double> grad_norms;
  std::optional<std::vector<double>> distances;
  double wall_ms = 0.0;
  StopReason stop = StopReason::MaxIters;
  /// Steps where f < f_opt made the Polyak scalar negative and it was clamped to zero.
  int clamp_events = 0;

  std::size_t size() const noexcept { return iterates.size(); }
  bool empty() const noexcept { return iterates.empty(); }

  void push(const ParamVector& theta, double value, double grad_norm, const ParamVector* theta_star) {
    iterates.push_back(theta);
    values.push_back(value);
    grad_norms.push_back(grad_norm);
    if (theta_star) {
      if (!distances) distances.emplace();
      distances->push_back((theta - *theta_star).norm());
    }
  }
};

/// Iterate became non-finite. Carries everything recorded before the blow-up.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

/// Polyak run hit a flat gradient while still above the target value.
class StalledError : public Error {
 public:
  StalledError(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  Trajectory partial_;
};

struct FixedStepConfig {
  double eta = 0.01;
  int max_iters = 1000;
  double grad_tol = 0.0;
  /// Stop once eta * |grad| <= step_tol * |theta|. Zero disables the test.
  double step_tol = 0.0;

  void validate() const {
    if (!(eta > 0.0)) throw ConfigError("FixedStepConfig: eta must be > 0");
    if (max_iters < 1) throw ConfigError("FixedStepConfig: max_iters must be >= 1");
    if (!(grad_tol >= 0.0)) throw ConfigError("FixedStepConfig: grad_tol must be >= 0");
    if (!(step_tol >= 0.0)) throw ConfigError("FixedStepConfig: step_tol must be >= 0");
  }
};

struct PolyakConfig {
  double f_opt = 0.0;
  int max_iters = 1000;
  double grad_floor = 1e-12;
  /// The target counts as reached once f - f_opt <= value_tol * max(1, |f_opt|).
  double value_tol = 1e-12;

  void validate() const {
    if (max_iters < 1) throw ConfigError("PolyakConfig: max_iters must be >= 1");
    if (!(grad_floor > 0.0)) throw ConfigError("PolyakConfig: grad_floor must be > 0");
  }
};

/// How the lower bound is refreshed between epochs of the adaptive scheme.
enum class BoundUpdate {
  Midpoint,  ///< f_{k+1} = f_k + (f(best) - f_k) / 2
  Literal,   ///< f_{k+1} = (f(best) - f_k) / 2, as printed in the original pseudocode
};

struct AdaptivePolyakConfig {
  double f_lower0 = 0.0;
  int horizon_T = 50;
  int epochs_K = 10;
  double grad_floor = 1e-12;
  BoundUpdate update = BoundUpdate::Midpoint;

  void validate() const {
    if (horizon_T < 1) throw ConfigError("AdaptivePolyakConfig: horizon_T must be >= 1");
    if (epochs_K < 1) throw ConfigError("AdaptivePolyakConfig: epochs_K must be >= 1");
    if (!(grad_floor > 0.0)) throw ConfigError("AdaptivePolyakConfig: grad_floor must be > 0");
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

/// The Polyak scalar gap / |g|^2, clamped at zero when the gap is negative.
inline double polyak_scalar(double gap, double grad_sq, bool& clamped) {
  clamped = gap < 0.0;
  return clamped ? 0.0 : gap / grad_sq;
}

}  // namespace detail

/// theta_{t+1} = theta_t - eta * grad f(theta_t).
inline Trajectory fixed_step_gd(const Oracle& oracle, const ParamVector& theta0, const FixedStepConfig& cfg,
                                const std::optional<ParamVector>& theta_star = std::nullopt) {
  cfg.validate();
  require_param(theta0, "fixed_step_gd");
  const auto start = detail::Clock::now();
  const ParamVector* star = theta_star ? &*theta_star : nullptr;

  Trajectory traj;
  ParamVector theta = theta0;
  ParamVector grad(theta.size());
  double value = oracle.value_and_gradient(theta, grad);
  traj.push(theta, value, grad.norm(), star);
  traj.stop = StopReason::MaxIters;
  for (int t = 0; t < cfg.max_iters; ++t) {
    if (traj.grad_norms.back() <= cfg.grad_tol) {
      traj.stop = StopReason::GradTol;
      break;
    }
    if (cfg.step_tol > 0.0 && cfg.eta * traj.grad_norms.back() <= cfg.step_tol * theta.norm()) {
      traj.stop = StopReason::StepTol;
      break;
    }
    theta -= cfg.eta * grad;
    if (!theta.allFinite()) {
      traj.wall_ms = detail::elapsed_ms(start);
      throw DivergenceError("fixed_step_gd: iterate became non-finite at step " + std::to_string(t + 1),
                            std::move(traj));
    }
    value = oracle.value_and_gradient(theta, grad);
    const double gnorm = grad.norm();
    if (!std::isfinite(value) || !std::isfinite(gnorm)) {
      traj.wall_ms = detail::elapsed_ms(start);
      throw DivergenceError("fixed_step_gd: non-finite value at step " + std::to_string(t + 1), std::move(traj));
    }
    traj.push(theta, value, gnorm, star);
  }
  if (traj.stop == StopReason::MaxIters && traj.grad_norms.back() <= cfg.grad_tol) traj.stop = StopReason::GradTol;
  traj.wall_ms = detail::elapsed_ms(start);
  return traj;
}

/// Polyak step size: theta_{t+1} = theta_t - ((f - f_opt) / |grad f|^2) grad f.
/// Stops when f(theta) <= f_opt, at the iteration cap, or when the gradient
/// falls below the floor (an error unless the target value is reached).
inline Trajectory polyak_gd(const Oracle& oracle, const ParamVector& theta0, const PolyakConfig& cfg,
                            const std::optional<ParamVector>& theta_star = std::nullopt) {
  cfg.validate();
  require_param(theta0, "polyak_gd");
  const auto start = detail::Clock::now();
  const ParamVector* star = theta_star ? &*theta_star : nullptr;
  const double slack = cfg.value_tol * std::max(1.0, std::abs(cfg.f_opt));

  Trajectory traj;
  ParamVector theta = theta0;
  ParamVector grad(theta.size());
  double gap = oracle.gap_and_gradient(theta, cfg.f_opt, grad);
  traj.push(theta, cfg.f_opt + gap, grad.norm(), star);
  traj.stop = StopReason::MaxIters;
  for (int t = 0;; ++t) {
    if (gap <= slack) {
      if (gap < 0.0) ++traj.clamp_events;
      traj.stop = StopReason::ValueReached;
      break;
    }
    const double gnorm = traj.grad_norms.back();
    if (gnorm <= cfg.grad_floor) {
      traj.wall_ms = detail::elapsed_ms(start);
      throw StalledError("polyak_gd: gradient vanished above the target value", std::move(traj));
    }
    if (t >= cfg.max_iters) break;
    bool clamped = false;
    const double step = detail::polyak_scalar(gap, gnorm * gnorm, clamped);
    theta -= step * grad;
    if (!theta.allFinite()) {
      traj.wall_ms = detail::elapsed_ms(start);
      throw DivergenceError("polyak_gd: iterate became non-finite at step " + std::to_string(t + 1),
                            std::move(traj));
    }
    gap = oracle.gap_and_gradient(theta, cfg.f_opt, grad);
    if (!std::isfinite(gap)) {
      traj.wall_ms = detail::elapsed_ms(start);
      throw DivergenceError("polyak_gd: non-finite value at step " + std::to_string(t + 1), std::move(traj));
    }
    traj.push(theta, cfg.f_opt + gap, grad.norm(), star);
  }
  traj.wall_ms = detail::elapsed_ms(start);
  return traj;
}

/// Index of the smallest value in [first, last), ties to the smallest index.
inline std::size_t argmin_value(const std::vector<double>& values, std::size_t first, std::size_t last) {
  std::size_t best = first;
  for (std::size_t i = first + 1; i < last; ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

struct AdaptivePolyakResult {
  Trajectory trajectory;
  ParamVector best;
  std::size_t best_index = 0;
  double f_lower_final = 0.0;
  /// Lower bound used in each epoch, in order.
  std::vector<double> bounds;
  /// Trajectory index at which each epoch started.
  std::vector<std::size_t> epoch_starts;
};

/// Adaptive Polyak step size: K epochs of T Polyak steps against a surrogate
/// lower bound. Each epoch restarts from the lowest-valued iterate of the
/// previous one; the bound moves toward that value between epochs. A restart
/// does not add a trajectory entry, since the restart point was already logged.
inline AdaptivePolyakResult adaptive_polyak(const Oracle& oracle, const ParamVector& theta0,
                                            const AdaptivePolyakConfig& cfg,
                                            const std::optional<ParamVector>& theta_star = std::nullopt) {
  cfg.validate();
  require_param(theta0, "adaptive_polyak");
  const auto start = detail::Clock::now();
  const ParamVector* star = theta_star ? &*theta_star : nullptr;

  AdaptivePolyakResult out;
  Trajectory& traj = out.trajectory;
  ParamVector grad(theta0.size());
  double value = oracle.value_and_gradient(theta0, grad);
  if (cfg.f_lower0 > value)
    throw ContractViolation("adaptive_polyak: f_lower0 must not exceed f(theta0)");
  traj.push(theta0, value, grad.norm(), star);
  std::vector<ParamVector> grads{grad};

  double bound = cfg.f_lower0;
  std::size_t restart = 0;
  for (int k = 0; k < cfg.epochs_K; ++k) {
    out.bounds.push_back(bound);
    out.epoch_starts.push_back(traj.size() - 1);
    ParamVector theta = traj.iterates[restart];
    grad = grads[restart];
    double gap = oracle.gap(theta, bound);  // same as values[restart] - bound, computed without cancellation
    // Epoch members: the restart point plus every new iterate of this epoch.
    std::vector<std::size_t> members{restart};
    for (int i = 0; i < cfg.horizon_T; ++i) {
      const double gnorm = grad.norm();
      if (gnorm <= cfg.grad_floor) break;
      bool clamped = false;
      const double step = detail::polyak_scalar(gap, gnorm * gnorm, clamped);
      if (clamped) ++traj.clamp_events;
      if (step == 0.0) break;
      theta -= step * grad;
      if (!theta.allFinite()) {
        traj.wall_ms = detail::elapsed_ms(start);
        throw DivergenceError("adaptive_polyak: iterate became non-finite", std::move(traj));
      }
      gap = oracle.gap_and_gradient(theta, bound, grad);
      if (!std::isfinite(gap)) {
        traj.wall_ms = detail::elapsed_ms(start);
        throw DivergenceError("adaptive_polyak: non-finite value", std::move(traj));
      }
      traj.push(theta, bound + gap, grad.norm(), star);
      grads.push_back(grad);
      members.push_back(traj.size() - 1);
    }
    restart = members.front();
    for (std::size_t m : members)
      if (traj.values[m] < traj.values[restart]) restart = m;
    const double best_value = traj.values[restart];
    bound = cfg.update == BoundUpdate::Midpoint ? bound + 0.5 * (best_value - bound) : 0.5 * (best_value - bound);
  }
  out.f_lower_final = bound;
  out.best_index = argmin_value(traj.values, 0, traj.size());
  out.best = traj.iterates[out.best_index];
  traj.stop = StopReason::EpochsDone;
  traj.wall_ms = detail::elapsed_ms(start);
  return out;
}

// ---------------------------------------------------------------------------
// Surrogate search: the adaptive scheme driven by a parametrized lower bound
// f(c) = floor + c * scale (e.g. scale = 1/sqrt(n) or 1/n), where c is
// bisected from the observed behaviour of each epoch. An epoch that stalls or
// reaches the surrogate means f(c) is at or above the attainable value, so c
// shrinks; an epoch whose gap over the surrogate grows means f(c) is too low,
// so c grows.

struct SurrogateSearchConfig {
  double floor = 0.0;  ///< a value known to lie below f_n(theta_hat)
  double scale = 1.0;  ///< g(n) in f(c) = floor + c * g(n)
  /// A value known to lie above f_n(theta_hat), e.g. f_n at a stationary point.
  std::optional<double> upper;
  /// Explicit starting c; by default the search starts initial_gap below the upper bound.
  std::optional<double> c0;
  /// Until an unstable epoch brackets the optimum from below, each stuck epoch
  /// lowers c to (best c) - gap and doubles gap, starting from this value.
  double initial_gap = 1.0 / 256.0;
  int horizon_T = 100;
  int max_adjustments = 60;
  int max_iters = 2000;
  int stall_window = 20;
  double stall_rel_tol = 1e-10;
  double unstable_growth = 0.10;
  /// Gaps at or below value_tol * max(1, |surrogate|) count as the surrogate being reached.
  double value_tol = 1e-12;
  /// An epoch whose best value has not improved for this many steps, while its
  /// gap is still above oscillation_gap_ratio times the starting gap, is judged
  /// unstable (the iterates are bouncing around a point below the surrogate).
  int oscillation_window = 5;
  double oscillation_gap_ratio = 1e-3;
  double grad_floor = 1e-12;

  void validate() const {
    if (!(scale > 0.0)) throw ConfigError("SurrogateSearchConfig: scale must be > 0");
    if (!(initial_gap > 0.0)) throw ConfigError("SurrogateSearchConfig: initial_gap must be > 0");
    if (horizon_T < 1 || max_iters < 1 || stall_window < 1 || oscillation_window < 1)
      throw ConfigError("SurrogateSearchConfig: horizon, budget and windows must be >= 1");
    if (max_adjustments < 0) throw ConfigError("SurrogateSearchConfig: max_adjustments must be >= 0");
    if (upper && !(*upper > floor)) throw ConfigError("SurrogateSearchConfig: upper must exceed floor");
  }
};

enum class EpochVerdict { Stuck, Unstable, Progressing };

inline const char* to_string(EpochVerdict v) {
  switch (v) {
    case EpochVerdict::Stuck: return "stuck";
    case EpochVerdict::Unstable: return "unstable";
    case EpochVerdict::Progressing: return "progressing";
  }
  return "unknown";
}

struct SurrogateEpoch {
  double c;
  double surrogate;
  EpochVerdict verdict;
  std::size_t start_index;
};

struct SurrogateSearchResult {
  Trajectory trajectory;
  ParamVector best;
  std::size_t best_index = 0;
  double c_final = 0.0;
  double surrogate_final = 0.0;
  int adjustments = 0;
  std::vector<SurrogateEpoch> epochs;
};

/// Polyak steps against a surrogate optimum floor + c * scale, with c tuned
/// between epochs. The search starts just below the upper bound (or f(theta0))
/// and widens the gap geometrically while epochs get stuck: the gap closes, the
/// gradient vanishes or progress stalls. The first unstable epoch (gap growth
/// beyond unstable_growth, or no new best gap for oscillation_window steps)
/// brackets the optimum and later epochs bisect. Rejected steps are logged as a
/// repeat of the epoch's best point so the trajectory length still counts every
/// gradient evaluation. Epochs continue from the best point found so far.
inline SurrogateSearchResult polyak_surrogate_search(const Oracle& oracle, const ParamVector& theta0,
                                                     const SurrogateSearchConfig& cfg,
                                                     const std::optional<ParamVector>& theta_star = std::nullopt) {
  cfg.validate();
  require_param(theta0, "polyak_surrogate_search");
  const auto start = detail::Clock::now();
  const ParamVector* star = theta_star ? &*theta_star : nullptr;

  SurrogateSearchResult out;
  Trajectory& traj = out.trajectory;
  ParamVector grad(theta0.size());
  const double v0 = oracle.value_and_gradient(theta0, grad);
  if (!std::isfinite(v0)) throw NumericalDomainError("polyak_surrogate_search: non-finite initial value");
  if (cfg.floor >= v0) throw ContractViolation("polyak_surrogate_search: floor must lie below f(theta0)");
  traj.push(theta0, v0, grad.norm(), star);
  std::vector<ParamVector> grads{grad};

  // Bracket on c. lo is a surrogate judged to be below the optimum; hi tracks
  // the best observed value, which is always an upper bound on it.
  auto c_of = [&](double f) { return (f - cfg.floor) / cfg.scale; };
  double c_lo = 0.0;
  double c_hi = c_of(cfg.upper ? std::min(v0, *cfg.upper) : v0);
  double gap_units = cfg.initial_gap;
  bool bracketed = false;
  double c = cfg.c0 ? std::clamp(*cfg.c0, c_lo, c_hi) : std::max(c_lo, c_hi - gap_units);
  std::size_t restart = 0;

  while (static_cast<int>(traj.size()) - 1 < cfg.max_iters) {
    const double surrogate = cfg.floor + c * cfg.scale;
    out.epochs.push_back({c, surrogate, EpochVerdict::Progressing, traj.size() - 1});
    ParamVector theta = traj.iterates[restart];
    grad = grads[restart];
    double gap = oracle.gap(theta, surrogate);
    std::vector<double> window{traj.values[restart]};
    std::vector<std::size_t> members{restart};
    const double start_gap = gap;
    double best_gap = gap;
    int since_best = 0;
    EpochVerdict verdict = EpochVerdict::Progressing;
    const double reached = cfg.value_tol * std::max(1.0, std::abs(surrogate));
    for (int i = 0; i < cfg.horizon_T && static_cast<int>(traj.size()) - 1 < cfg.max_iters; ++i) {
      const double gnorm = grad.norm();
      if (gap <= reached) {
        if (gap < 0.0) ++traj.clamp_events;
        verdict = EpochVerdict::Stuck;
        break;
      }
      if (gnorm <= cfg.grad_floor) {
        verdict = EpochVerdict::Stuck;
        break;
      }
      bool clamped = false;
      const double step = detail::polyak_scalar(gap, gnorm * gnorm, clamped);
      theta -= step * grad;
      if (!theta.allFinite()) {
        traj.wall_ms = detail::elapsed_ms(start);
        throw DivergenceError("polyak_surrogate_search: iterate became non-finite", std::move(traj));
      }
      const double prev_gap = gap;
      gap = oracle.gap_and_gradient(theta, surrogate, grad);
      if (!std::isfinite(gap)) {
        traj.wall_ms = detail::elapsed_ms(start);
        throw DivergenceError("polyak_surrogate_search: non-finite value", std::move(traj));
      }
      const double value = surrogate + gap;
      if (gap > (1.0 + cfg.unstable_growth) * prev_gap && gap - prev_gap > reached) {
        // Rejected: the evaluation is still counted, but the log records the
        // epoch's best point so that overshoots never enter the trajectory.
        std::size_t keep = members.front();
        for (std::size_t m : members)
          if (traj.values[m] < traj.values[keep]) keep = m;
        const ParamVector kept = traj.iterates[keep];
        traj.push(kept, traj.values[keep], traj.grad_norms[keep], star);
        grads.push_back(grads[keep]);
        verdict = EpochVerdict::Unstable;
        break;
      }
      traj.push(theta, value, grad.norm(), star);
      grads.push_back(grad);
      members.push_back(traj.size() - 1);
      window.push_back(value);
      if (gap < best_gap) {
        best_gap = gap;
        since_best = 0;
      } else if (++since_best >= cfg.oscillation_window && best_gap > cfg.oscillation_gap_ratio * start_gap) {
        verdict = EpochVerdict::Unstable;
        break;
      }
      if (static_cast<int>(window.size()) > cfg.stall_window) {
        const double old = window[window.size() - 1 - cfg.stall_window];
        if (std::abs(old - value) <= cfg.stall_rel_tol * std::max(1.0, std::abs(value))) {
          verdict = EpochVerdict::Stuck;
          break;
        }
      }
    }
    out.epochs.back().verdict = verdict;
    for (std::size_t m : members)
      if (traj.values[m] < traj.values[restart]) restart = m;
    c_hi = std::min(c_hi, c_of(traj.values[restart]));

    if (verdict == EpochVerdict::Progressing) continue;
    if (out.adjustments >= cfg.max_adjustments) break;
    ++out.adjustments;
    if (verdict == EpochVerdict::Stuck) {
      c_hi = std::min(c_hi, c);
    } else {
      c_lo = std::max(c_lo, c);
      bracketed = true;
    }
    if (c_hi <= c_lo) c_lo = 0.5 * c_hi;  // best value fell below a surrogate judged too low
    if (bracketed) {
      c = 0.5 * (c_lo + c_hi);
    } else {
      gap_units *= 2.0;
      c = std::max(c_lo, c_hi - gap_units);
    }
  }
  out.c_final = c;
  out.surrogate_final = cfg.floor + c * cfg.scale;
  out.best_index = argmin_value(traj.values, 0, traj.size());
  out.best = traj.iterates[out.best_index];
  traj.stop = static_cast<int>(traj.size()) - 1 >= cfg.max_iters ? StopReason::MaxIters : StopReason::EpochsDone;
  traj.wall_ms = detail::elapsed_ms(start);
  return out;
}

/// Iterate with the lowest held-out value, ties to the smallest index.
inline std::pair<std::size_t, ParamVector> select_best_iterate(const Trajectory& traj, const Oracle& holdout) {
  if (traj.empty()) throw ContractViolation("select_best_iterate: empty trajectory");
  std::size_t best = 0;
  double best_value = holdout.value(traj.iterates[0]);
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double v = holdout.value(traj.iterates[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  return {best, traj.iterates[best]};
}

/// Smallest t with |theta^t - theta*| <= radius.
inline std::optional<std::size_t> iterations_to_radius(const Trajectory& traj, const ParamVector& theta_star,
                                                       double radius) {
  for (std::size_t t = 0; t < traj.size(); ++t)
    if ((traj.iterates[t] - theta_star).norm() <= radius) return t;
  return std::nullopt;
}

}  // namespace polyak

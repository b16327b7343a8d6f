#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "polyak_rates/errors.hpp"

namespace polyak {

/// A point theta in R^d.
using ParamVector = Eigen::VectorXd;

inline bool all_finite(const ParamVector& v) { return v.size() > 0 && v.allFinite(); }

inline void require_param(const ParamVector& v, const char* what) {
  if (v.size() < 1) throw ContractViolation(std::string(what) + ": empty parameter vector");
  if (!v.allFinite()) throw NumericalDomainError(std::string(what) + ": non-finite coordinate");
}

/// Objective with value and gradient. Immutable after construction, so one
/// instance may be evaluated from several threads.
///
/// The value is stored as `constant + variable(theta)`. Models whose loss has a
/// large theta-independent term (noise variance, Gaussian normalizers) put it
/// in `constant`, so that gaps f(theta) - f_ref can be formed without
/// cancellation. A fused evaluator may be supplied when value and gradient share
/// most of their work; without one the fused call does two evaluations.
class Oracle {
 public:
  using ValueFn = std::function<double(const ParamVector&)>;
  using GradFn = std::function<ParamVector(const ParamVector&)>;
  using FusedFn = std::function<double(const ParamVector&, ParamVector&)>;

  Oracle(Eigen::Index dim, ValueFn variable, GradFn grad, std::optional<double> optimum_value = std::nullopt,
         FusedFn fused = {}, double constant = 0.0)
      : dim_(dim),
        variable_(std::move(variable)),
        grad_(std::move(grad)),
        fused_(std::move(fused)),
        optimum_(optimum_value),
        constant_(constant) {
    if (dim_ < 1) throw ContractViolation("Oracle: dimension must be >= 1");
  }

  Eigen::Index dim() const noexcept { return dim_; }
  std::optional<double> optimum_value() const noexcept { return optimum_; }
  double constant() const noexcept { return constant_; }

  double value(const ParamVector& theta) const {
    check_input(theta);
    return constant_ + variable_(theta);
  }

  /// f(theta) - reference, evaluated as variable(theta) - (reference - constant).
  double gap(const ParamVector& theta, double reference) const {
    check_input(theta);
    return variable_(theta) - (reference - constant_);
  }

  ParamVector gradient(const ParamVector& theta) const {
    check_input(theta);
    ParamVector g = grad_(theta);
    check_output(g);
    return g;
  }

  /// Returns f(theta) and writes the gradient into `grad`.
  double value_and_gradient(const ParamVector& theta, ParamVector& grad) const {
    return constant_ + variable_and_gradient(theta, grad);
  }

  /// Returns f(theta) - reference and writes the gradient into `grad`.
  double gap_and_gradient(const ParamVector& theta, double reference, ParamVector& grad) const {
    return variable_and_gradient(theta, grad) - (reference - constant_);
  }

  /// The oracle c*f with optimum c*f_opt, for c > 0.
  Oracle scaled(double c) const {
    if (!(c > 0.0)) throw ContractViolation("Oracle::scaled: factor must be positive");
    FusedFn fused;
    if (fused_) {
      fused = [inner = fused_, c](const ParamVector& t, ParamVector& g) {
        const double v = inner(t, g);
        g *= c;
        return c * v;
      };
    }
    std::optional<double> opt;
    if (optimum_) opt = c * *optimum_;
    return Oracle(
        dim_, [inner = variable_, c](const ParamVector& t) { return c * inner(t); },
        [inner = grad_, c](const ParamVector& t) -> ParamVector { return c * inner(t); }, opt, std::move(fused),
        c * constant_);
  }

  Oracle with_optimum(std::optional<double> optimum_value) const {
    Oracle o = *this;
    o.optimum_ = optimum_value;
    return o;
  }

 private:
  double variable_and_gradient(const ParamVector& theta, ParamVector& grad) const {
    check_input(theta);
    double v;
    if (fused_) {
      v = fused_(theta, grad);
    } else {
      v = variable_(theta);
      grad = grad_(theta);
    }
    check_output(grad);
    return v;
  }

  void check_input(const ParamVector& theta) const {
    if (theta.size() != dim_)
      throw ContractViolation("Oracle: expected parameter of length " + std::to_string(dim_) + ", got " +
                              std::to_string(theta.size()));
  }
  void check_output(const ParamVector& g) const {
    if (g.size() != dim_)
      throw ContractViolation("Oracle: gradient has length " + std::to_string(g.size()) + ", expected " +
                              std::to_string(dim_));
  }

  Eigen::Index dim_;
  ValueFn variable_;
  GradFn grad_;
  FusedFn fused_;
  std::optional<double> optimum_;
  double constant_;
};

struct FiniteDiffSpec {
  double step = 1e-5;
  int hessian_iters = 200;
  /// Seed for the random unit start of the power iteration.
  std::uint64_t seed = 0x5eedULL;

  void validate() const {
    if (!(step > 0.0)) throw ContractViolation("FiniteDiffSpec: step must be > 0");
    if (hessian_iters < 1) throw ContractViolation("FiniteDiffSpec: hessian_iters must be >= 1");
  }
};

/// Central differences, component i = (f(theta + h e_i) - f(theta - h e_i)) / 2h.
inline ParamVector finite_diff_gradient(const Oracle& oracle, const ParamVector& theta,
                                        const FiniteDiffSpec& spec = {}) {
  spec.validate();
  require_param(theta, "finite_diff_gradient");
  ParamVector g(theta.size());
  ParamVector probe = theta;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    probe[i] = theta[i] + spec.step;
    const double up = oracle.value(probe);
    probe[i] = theta[i] - spec.step;
    const double down = oracle.value(probe);
    probe[i] = theta[i];
    if (!std::isfinite(up) || !std::isfinite(down))
      throw NumericalDomainError("finite_diff_gradient: non-finite value near theta");
    g[i] = (up - down) / (2.0 * spec.step);
  }
  return g;
}

/// Hessian-vector product from gradient differences.
inline ParamVector hessian_vector_product(const Oracle& oracle, const ParamVector& theta, const ParamVector& v,
                                          double step) {
  const ParamVector up = oracle.gradient(theta + step * v);
  const ParamVector down = oracle.gradient(theta - step * v);
  ParamVector hv = (up - down) / (2.0 * step);
  if (!hv.allFinite()) throw NumericalDomainError("hessian_vector_product: non-finite gradient");
  return hv;
}

namespace detail {

// Power iteration on (H - shift I). Returns the Rayleigh quotient of H.
inline double power_iteration(const Oracle& oracle, const ParamVector& theta, const FiniteDiffSpec& spec,
                              double shift) {
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal;
  ParamVector v(theta.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();

  double estimate = 0.0;
  for (int it = 0; it < spec.hessian_iters; ++it) {
    const ParamVector hv = hessian_vector_product(oracle, theta, v, spec.step);
    const double rayleigh = v.dot(hv);
    ParamVector w = hv - shift * v;
    const double norm = w.norm();
    if (norm == 0.0) return rayleigh;
    w /= norm;
    const double scale = std::max(std::abs(rayleigh), 1e-300);
    // Sign-flip of w is irrelevant for the eigenvalue; compare Rayleigh quotients.
    if (it > 0 && std::abs(rayleigh - estimate) <= 1e-9 * scale + 1e-12) {
      return rayleigh;
    }
    estimate = rayleigh;
    v = w;
  }
  throw ConvergenceError("hessian_top_eigenvalue: power iteration did not converge", estimate);
}

}  // namespace detail

/// Largest algebraic eigenvalue of the Hessian at theta. Avoids forming the
/// matrix: power iteration on finite-difference Hessian-vector products, with
/// a shifted second pass when the dominant eigenvalue is negative.
inline double hessian_top_eigenvalue(const Oracle& oracle, const ParamVector& theta,
                                     const FiniteDiffSpec& spec = {}) {
  spec.validate();
  require_param(theta, "hessian_top_eigenvalue");
  const double dominant = detail::power_iteration(oracle, theta, spec, 0.0);
  if (dominant >= 0.0 || theta.size() == 1) return dominant;
  return detail::power_iteration(oracle, theta, spec, dominant);
}

struct GradientCheckPoint {
  ParamVector theta;
  double relative_error = 0.0;
  bool passed = true;
};

struct GradientCheckReport {
  std::vector<GradientCheckPoint> points;
  double tolerance = 1e-6;
  double max_error = 0.0;
  bool passed = true;
};

/// Compares the analytic gradient against central differences at each point.
/// Relative error uses the denominator max(1, |grad_fd|).
inline GradientCheckReport check_gradient(const Oracle& oracle, const std::vector<ParamVector>& thetas,
                                          const FiniteDiffSpec& spec = {}, double tolerance = 1e-6) {
  if (thetas.empty()) throw ContractViolation("check_gradient: empty point list");
  GradientCheckReport report;
  report.tolerance = tolerance;
  for (const auto& theta : thetas) {
    const ParamVector analytic = oracle.gradient(theta);
    const ParamVector numeric = finite_diff_gradient(oracle, theta, spec);
    GradientCheckPoint point;
    point.theta = theta;
    point.relative_error = (analytic - numeric).norm() / std::max(1.0, numeric.norm());
    point.passed = point.relative_error <= tolerance;
    report.max_error = std::max(report.max_error, point.relative_error);
    report.passed = report.passed && point.passed;
    report.points.push_back(std::move(point));
  }
  return report;
}

}  // namespace polyak

#pragma once

// Symmetric two-component Gaussian mixture 1/2 N(-theta*, sigma^2 I) + 1/2 N(theta*, sigma^2 I)
// with known sigma, fitted by maximum likelihood.
//
// Per-sample negative log-likelihood, written to avoid overflow:
//   -log(1/2 phi(x|theta) + 1/2 phi(x|-theta))
//     = d/2 log(2 pi sigma^2) + |x|^2/(2 sigma^2) + |theta|^2/(2 sigma^2) - log cosh(x.theta / sigma^2)

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/models/common.hpp"
#include "polyak_rates/numerics.hpp"
#include "polyak_rates/objective.hpp"

namespace polyak {

struct GmmSpec {
  int d = 2;
  ParamVector theta_star = ParamVector::Zero(2);
  double sigma = 1.0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 1) throw ConfigError("GmmSpec: d must be >= 1");
    if (!(sigma > 0.0)) throw ConfigError("GmmSpec: sigma must be > 0");
    if (n < 1) throw ConfigError("GmmSpec: n must be >= 1");
    if (theta_star.size() != d) throw ConfigError("GmmSpec: theta_star length must equal d");
    if (!theta_star.allFinite()) throw ConfigError("GmmSpec: theta_star must be finite");
  }
};

inline RowMatrix gmm_generate(const GmmSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  const auto n = static_cast<Eigen::Index>(spec.n);
  RowMatrix X(n, spec.d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = coin(rng) ? 1.0 : -1.0;
    for (int j = 0; j < spec.d; ++j) X(i, j) = s * spec.theta_star[j] + spec.sigma * normal(rng);
  }
  return X;
}

namespace detail {

inline double gmm_constant(const RowMatrix& X, double sigma) {
  const double var = sigma * sigma;
  return 0.5 * static_cast<double>(X.cols()) * std::log(2.0 * std::numbers::pi * var) +
         X.squaredNorm() / (2.0 * var * static_cast<double>(X.rows()));
}

// theta-dependent part of the NLL; grad (if given) is the full gradient.
inline double gmm_accumulate(const RowMatrix& X, const ParamVector& theta, double sigma, ParamVector* grad) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const double inv_var = 1.0 / (sigma * sigma);
  double lc_sum = 0.0;
  ParamVector acc = ParamVector::Zero(d);
  BlockArray z, t, lc;
  for (Eigen::Index s = 0; s < n; s += kKernelBlock) {
    const Eigen::Index m = std::min(kKernelBlock, n - s);
    const auto Xb = X.middleRows(s, m);
    block_dot(Xb, theta, z);
    z *= inv_var;
    block_tanh_logcosh(z, t, &lc);
    lc_sum += lc.sum();
    if (grad) block_accumulate(Xb, t, acc);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad) *grad = (theta - inv_n * acc) * inv_var;
  return 0.5 * theta.squaredNorm() * inv_var - lc_sum * inv_n;
}

// (1/n) sum x_i tanh(x_i . theta / sigma^2)
inline ParamVector gmm_tanh_mean(const RowMatrix& X, const ParamVector& theta, double sigma) {
  const Eigen::Index n = X.rows(), d = X.cols();
  const double inv_var = 1.0 / (sigma * sigma);
  ParamVector acc = ParamVector::Zero(d);
  BlockArray z, t;
  for (Eigen::Index s = 0; s < n; s += kKernelBlock) {
    const Eigen::Index m = std::min(kKernelBlock, n - s);
    const auto Xb = X.middleRows(s, m);
    block_dot(Xb, theta, z);
    z *= inv_var;
    block_tanh_logcosh(z, t, nullptr);
    block_accumulate(Xb, t, acc);
  }
  return acc / static_cast<double>(n);
}

}  // namespace detail

inline double gmm_nll(const RowMatrix& X, const ParamVector& theta, double sigma) {
  require_dims(X.cols(), theta, "gmm_nll");
  return detail::gmm_constant(X, sigma) + detail::gmm_accumulate(X, theta, sigma, nullptr);
}

/// (1/sigma^2) (theta - (1/n) sum X_i tanh(X_i . theta / sigma^2)).
inline ParamVector gmm_grad(const RowMatrix& X, const ParamVector& theta, double sigma) {
  require_dims(X.cols(), theta, "gmm_grad");
  return (theta - detail::gmm_tanh_mean(X, theta, sigma)) / (sigma * sigma);
}

/// Classical EM update for the symmetric mixture: (1/n) sum X_i tanh(X_i . theta / sigma^2).
/// Equal to a gradient step of size sigma^2 on the NLL.
inline ParamVector gmm_em_update(const RowMatrix& X, const ParamVector& theta, double sigma) {
  require_dims(X.cols(), theta, "gmm_em_update");
  return detail::gmm_tanh_mean(X, theta, sigma);
}

inline Oracle gmm_sample_oracle(std::shared_ptr<const RowMatrix> X, double sigma) {
  if (!X || X->rows() < 1) throw ContractViolation("gmm_sample_oracle: empty dataset");
  if (!(sigma > 0.0)) throw ConfigError("gmm_sample_oracle: sigma must be > 0");
  const double constant = detail::gmm_constant(*X, sigma);
  return Oracle(
      X->cols(),
      [X, sigma](const ParamVector& t) {
        require_dims(X->cols(), t, "gmm_sample_oracle");
        return detail::gmm_accumulate(*X, t, sigma, nullptr);
      },
      [X, sigma](const ParamVector& t) { return gmm_grad(*X, t, sigma); }, std::nullopt,
      [X, sigma](const ParamVector& t, ParamVector& g) {
        require_dims(X->cols(), t, "gmm_sample_oracle");
        return detail::gmm_accumulate(*X, t, sigma, &g);
      },
      constant);
}

/// Population NLL. Without `mc_samples` the expectation reduces to one
/// dimension: X . theta = s theta*.theta + sigma |theta| V with V ~ N(0, 1),
/// and the sign s drops out by symmetry, so
///   value    = const + |theta|^2/(2 sigma^2) - E log cosh(a + c V),
///   gradient = (theta - E[tanh(a + c V)] theta* - sigma E[V tanh(a + c V)] theta/|theta|) / sigma^2,
/// with a = theta*.theta / sigma^2 and c = |theta| / sigma. The 1-D expectations
/// use `rule`. With `mc_samples` the oracle averages over a fixed bank of
/// mixture draws instead. The gradient at theta = 0 is exactly zero.
inline Oracle gmm_population_oracle(const ParamVector& theta_star, double sigma, const QuadratureRule& rule,
                                    std::optional<std::size_t> mc_samples = std::nullopt,
                                    std::uint64_t mc_seed = 0x9a55) {
  if (!(sigma > 0.0)) throw ConfigError("gmm_population_oracle: sigma must be > 0");
  require_param(theta_star, "gmm_population_oracle");
  const Eigen::Index d = theta_star.size();
  const double var = sigma * sigma;
  const double base = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi * var);

  if (mc_samples) {
    if (*mc_samples < 1) throw ConfigError("gmm_population_oracle: mc_samples must be >= 1");
    GmmSpec bank{static_cast<int>(d), theta_star, sigma, *mc_samples, mc_seed};
    auto X = std::make_shared<const RowMatrix>(gmm_generate(bank));
    Oracle sample = gmm_sample_oracle(X, sigma);
    return sample.with_optimum(sample.value(theta_star));
  }

  rule.validate();
  const double constant = base + (theta_star.squaredNorm() + static_cast<double>(d) * var) / (2.0 * var);
  auto variable = [theta_star, sigma, var, rule](const ParamVector& t) {
    const double r = t.norm();
    const double a = theta_star.dot(t) / var;
    const double c = r / sigma;
    const double e = rule.expect([a, c](double v) { return log_cosh(a + c * v); });
    return r * r / (2.0 * var) - e;
  };
  auto grad = [theta_star, sigma, var, rule](const ParamVector& t) -> ParamVector {
    const double r = t.norm();
    if (r == 0.0) return ParamVector::Zero(t.size());
    const double a = theta_star.dot(t) / var;
    const double c = r / sigma;
    double e_t = 0.0, e_vt = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double th = stable_tanh(a + c * rule.nodes[i]);
      e_t += rule.weights[i] * th;
      e_vt += rule.weights[i] * rule.nodes[i] * th;
    }
    return (t - e_t * theta_star - (sigma * e_vt / r) * t) / var;
  };
  Oracle oracle(d, variable, grad, std::nullopt, {}, constant);
  return oracle.with_optimum(oracle.value(is_zero(theta_star) ? ParamVector::Zero(d) : theta_star));
}

}  // namespace polyak

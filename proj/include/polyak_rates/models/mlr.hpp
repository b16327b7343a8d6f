#pragma once

// Symmetric two-component mixed linear regression:
//   Y = s (X . theta*) + N(0, sigma^2),  s = +-1 with probability 1/2,  X ~ N(0, I_d).
// Per-sample NLL:
//   1/2 log(2 pi sigma^2) + Y^2/(2 sigma^2) + (X.theta)^2/(2 sigma^2) - log cosh(Y X.theta / sigma^2)

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

struct MlrSpec {
  int d = 2;
  ParamVector theta_star = ParamVector::Zero(2);
  double sigma = 1.0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 1) throw ConfigError("MlrSpec: d must be >= 1");
    if (!(sigma > 0.0)) throw ConfigError("MlrSpec: sigma must be > 0");
    if (n < 1) throw ConfigError("MlrSpec: n must be >= 1");
    if (theta_star.size() != d) throw ConfigError("MlrSpec: theta_star length must equal d");
    if (!theta_star.allFinite()) throw ConfigError("MlrSpec: theta_star must be finite");
  }
};

struct MlrDataset {
  RowMatrix X;
  Eigen::VectorXd Y;

  Eigen::Index n() const noexcept { return X.rows(); }
  Eigen::Index d() const noexcept { return X.cols(); }
};

inline MlrDataset mlr_generate(const MlrSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.5);
  MlrDataset data;
  const auto n = static_cast<Eigen::Index>(spec.n);
  data.X.resize(n, spec.d);
  data.Y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double z = 0.0;
    for (int j = 0; j < spec.d; ++j) {
      const double x = normal(rng);
      data.X(i, j) = x;
      z += x * spec.theta_star[j];
    }
    const double s = coin(rng) ? 1.0 : -1.0;
    data.Y[i] = s * z + spec.sigma * normal(rng);
  }
  return data;
}

namespace detail {

inline double mlr_constant(const MlrDataset& data, double sigma) {
  const double var = sigma * sigma;
  return 0.5 * std::log(2.0 * std::numbers::pi * var) + data.Y.squaredNorm() / (2.0 * var * static_cast<double>(data.n()));
}

inline double mlr_accumulate(const MlrDataset& data, const ParamVector& theta, double sigma, ParamVector* grad) {
  const Eigen::Index n = data.n(), d = data.d();
  const double inv_var = 1.0 / (sigma * sigma);
  double acc_value = 0.0;
  ParamVector acc = ParamVector::Zero(d);
  BlockArray z, y, t, lc, w;
  for (Eigen::Index s = 0; s < n; s += kKernelBlock) {
    const Eigen::Index m = std::min(kKernelBlock, n - s);
    const auto Xb = data.X.middleRows(s, m);
    block_dot(Xb, theta, z);
    y = data.Y.segment(s, m).array();
    block_tanh_logcosh(y * z * inv_var, t, &lc);
    acc_value += (0.5 * inv_var * z.square() - lc).sum();
    if (grad) {
      w = z - y * t;
      block_accumulate(Xb, w, acc);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grad) *grad = acc * (inv_n * inv_var);
  return acc_value * inv_n;
}

}  // namespace detail

inline double mlr_nll(const MlrDataset& data, const ParamVector& theta, double sigma) {
  require_dims(data.d(), theta, "mlr_nll");
  return detail::mlr_constant(data, sigma) + detail::mlr_accumulate(data, theta, sigma, nullptr);
}

/// (1/n) sum X_i [(X_i . theta) - Y_i tanh(Y_i X_i . theta / sigma^2)] / sigma^2.
inline ParamVector mlr_grad(const MlrDataset& data, const ParamVector& theta, double sigma) {
  require_dims(data.d(), theta, "mlr_grad");
  ParamVector g;
  detail::mlr_accumulate(data, theta, sigma, &g);
  return g;
}

/// Exact EM update: (sum X_i X_i^T)^{-1} sum Y_i X_i tanh(Y_i X_i . theta / sigma^2).
/// Coincides with a gradient step of size sigma^2 when (1/n) sum X_i X_i^T = I.
inline ParamVector mlr_em_update(const MlrDataset& data, const ParamVector& theta, double sigma) {
  require_dims(data.d(), theta, "mlr_em_update");
  const double inv_var = 1.0 / (sigma * sigma);
  const Eigen::VectorXd w =
      (data.Y.array() * ((data.X * theta).array() * data.Y.array() * inv_var).unaryExpr([](double a) {
        return stable_tanh(a);
      })).matrix();
  const Eigen::MatrixXd gram = data.X.transpose() * data.X;
  const Eigen::VectorXd rhs = data.X.transpose() * w;
  return gram.ldlt().solve(rhs);
}

inline Oracle mlr_sample_oracle(std::shared_ptr<const MlrDataset> data, double sigma) {
  if (!data || data->n() < 1) throw ContractViolation("mlr_sample_oracle: empty dataset");
  if (!(sigma > 0.0)) throw ConfigError("mlr_sample_oracle: sigma must be > 0");
  const double constant = detail::mlr_constant(*data, sigma);
  return Oracle(
      data->d(),
      [data, sigma](const ParamVector& t) {
        require_dims(data->d(), t, "mlr_sample_oracle");
        return detail::mlr_accumulate(*data, t, sigma, nullptr);
      },
      [data, sigma](const ParamVector& t) { return mlr_grad(*data, t, sigma); }, std::nullopt,
      [data, sigma](const ParamVector& t, ParamVector& g) {
        require_dims(data->d(), t, "mlr_sample_oracle");
        return detail::mlr_accumulate(*data, t, sigma, &g);
      },
      constant);
}

/// Population NLL. At theta* = 0, Y/sigma = Z and X . theta = |theta| V with
/// Z, V independent standard normals, so with c = |theta| / sigma
///   value    = 1/2 log(2 pi sigma^2) + 1/2 + |theta|^2/(2 sigma^2) - E log cosh(c Z V),
///   gradient = (theta - sigma E[Z V tanh(c Z V)] theta/|theta|) / sigma^2,
/// evaluated on the tensor grid rule x rule. For theta* != 0 a Monte Carlo
/// bank of `mc_samples` draws is required.
inline Oracle mlr_population_oracle(const ParamVector& theta_star, double sigma, const QuadratureRule& rule,
                                    std::optional<std::size_t> mc_samples = std::nullopt,
                                    std::uint64_t mc_seed = 0x3a1c) {
  if (!(sigma > 0.0)) throw ConfigError("mlr_population_oracle: sigma must be > 0");
  require_param(theta_star, "mlr_population_oracle");
  const Eigen::Index d = theta_star.size();
  const double var = sigma * sigma;

  if (mc_samples) {
    if (*mc_samples < 1) throw ConfigError("mlr_population_oracle: mc_samples must be >= 1");
    MlrSpec bank{static_cast<int>(d), theta_star, sigma, *mc_samples, mc_seed};
    auto data = std::make_shared<const MlrDataset>(mlr_generate(bank));
    Oracle sample = mlr_sample_oracle(data, sigma);
    return sample.with_optimum(sample.value(theta_star));
  }
  if (!is_zero(theta_star))
    throw ConfigError("mlr_population_oracle: theta* != 0 requires mc_samples");

  rule.validate();
  // Products z*v with their weights, precomputed once.
  auto grid = std::make_shared<std::vector<std::pair<double, double>>>();
  grid->reserve(rule.size() * rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    for (std::size_t j = 0; j < rule.size(); ++j)
      grid->emplace_back(rule.nodes[i] * rule.nodes[j], rule.weights[i] * rule.weights[j]);

  const double constant = 0.5 * std::log(2.0 * std::numbers::pi * var) + 0.5;
  auto variable = [grid, sigma, var](const ParamVector& t) {
    const double r = t.norm();
    const double c = r / sigma;
    double e = 0.0;
    for (const auto& [zv, w] : *grid) e += w * log_cosh(c * zv);
    return r * r / (2.0 * var) - e;
  };
  auto grad = [grid, sigma, var](const ParamVector& t) -> ParamVector {
    const double r = t.norm();
    if (r == 0.0) return ParamVector::Zero(t.size());
    const double c = r / sigma;
    double e = 0.0;
    for (const auto& [zv, w] : *grid) e += w * zv * stable_tanh(c * zv);
    return (t - (sigma * e / r) * t) / var;
  };
  return Oracle(d, variable, grad, constant, {}, constant);
}

}  // namespace polyak

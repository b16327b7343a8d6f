#pragma once

// Generalized linear model with power link: Y = (X . theta*)^p + noise,
// X ~ N(0, I_d), noise ~ N(0, sigma^2), fitted by least squares.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/models/common.hpp"
#include "polyak_rates/numerics.hpp"
#include "polyak_rates/objective.hpp"

namespace polyak {

struct GlmSpec {
  int d = 2;
  int p = 2;
  ParamVector theta_star = ParamVector::Zero(2);
  double sigma = 1.0;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  void validate() const {
    if (d < 1) throw ConfigError("GlmSpec: d must be >= 1");
    if (p < 2) throw ConfigError("GlmSpec: p must be >= 2");
    if (!(sigma > 0.0)) throw ConfigError("GlmSpec: sigma must be > 0");
    if (n < 1) throw ConfigError("GlmSpec: n must be >= 1");
    if (theta_star.size() != d) throw ConfigError("GlmSpec: theta_star length must equal d");
    if (!theta_star.allFinite()) throw ConfigError("GlmSpec: theta_star must be finite");
  }
};

struct GlmDataset {
  RowMatrix X;
  Eigen::VectorXd Y;

  Eigen::Index n() const noexcept { return X.rows(); }
  Eigen::Index d() const noexcept { return X.cols(); }
};

inline GlmDataset glm_generate(const GlmSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal;
  GlmDataset data;
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
    data.Y[i] = ipow(z, spec.p) + spec.sigma * normal(rng);
  }
  return data;
}

namespace detail {

// Row loop with the dimension fixed at compile time (D > 0) or read at run time (D = 0).
template <int D>
double glm_accumulate_rows(const GlmDataset& data, const ParamVector& theta, int p, double* g) {
  const Eigen::Index n = data.n(), d = D > 0 ? D : data.d();
  const double* x = data.X.data();
  const double* y = data.Y.data();
  const double* th = theta.data();
  // Local accumulators: writing through g in the loop would force reloads.
  std::array<double, (D > 0 ? D : 1)> acc{};
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i, x += d) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) z += x[j] * th[j];
    const double zp1 = p == 2 ? z : ipow(z, p - 1);
    const double r = y[i] - zp1 * z;
    loss += r * r;
    if (g) {
      const double w = r * zp1;
      if constexpr (D > 0) {
        for (int j = 0; j < D; ++j) acc[j] += w * x[j];
      } else {
        for (Eigen::Index j = 0; j < d; ++j) g[j] += w * x[j];
      }
    }
  }
  if constexpr (D > 0)
    if (g)
      for (int j = 0; j < D; ++j) g[j] = acc[j];
  return loss;
}

// (1/2n) sum r_i^2 and, if grad != nullptr, -(p/n) sum r_i z_i^{p-1} x_i.
inline double glm_accumulate(const GlmDataset& data, const ParamVector& theta, int p, ParamVector* grad) {
  const Eigen::Index d = data.d();
  if (grad) grad->setZero(d);
  double* g = grad ? grad->data() : nullptr;
  double loss;
  switch (d) {
    case 1: loss = glm_accumulate_rows<1>(data, theta, p, g); break;
    case 2: loss = glm_accumulate_rows<2>(data, theta, p, g); break;
    case 3: loss = glm_accumulate_rows<3>(data, theta, p, g); break;
    case 4: loss = glm_accumulate_rows<4>(data, theta, p, g); break;
    default: loss = glm_accumulate_rows<0>(data, theta, p, g);
  }
  const double inv_n = 1.0 / static_cast<double>(data.n());
  if (grad) *grad *= -static_cast<double>(p) * inv_n;
  return 0.5 * loss * inv_n;
}

}  // namespace detail

/// L_n(theta) = (1/2n) sum (Y_i - (X_i . theta)^p)^2.
inline double glm_sample_loss(const GlmDataset& data, const ParamVector& theta, int p) {
  require_dims(data.d(), theta, "glm_sample_loss");
  return detail::glm_accumulate(data, theta, p, nullptr);
}

/// grad L_n(theta) = -(p/n) sum (Y_i - (X_i . theta)^p) (X_i . theta)^{p-1} X_i.
inline ParamVector glm_sample_grad(const GlmDataset& data, const ParamVector& theta, int p) {
  require_dims(data.d(), theta, "glm_sample_grad");
  ParamVector g;
  detail::glm_accumulate(data, theta, p, &g);
  return g;
}

inline Oracle glm_sample_oracle(std::shared_ptr<const GlmDataset> data, int p) {
  if (!data || data->n() < 1) throw ContractViolation("glm_sample_oracle: empty dataset");
  if (p < 2) throw ConfigError("glm_sample_oracle: p must be >= 2");
  const auto d = data->d();
  return Oracle(
      d, [data, p](const ParamVector& t) { return glm_sample_loss(*data, t, p); },
      [data, p](const ParamVector& t) { return glm_sample_grad(*data, t, p); }, std::nullopt,
      [data, p](const ParamVector& t, ParamVector& g) {
        require_dims(data->d(), t, "glm_sample_oracle");
        return detail::glm_accumulate(*data, t, p, &g);
      });
}

/// Population least-squares loss. With theta* = 0 this is the closed form
/// (sigma^2 + (2p-1)!! |theta|^{2p}) / 2 with gradient p (2p-1)!! |theta|^{2p-2} theta.
/// Otherwise it is a Monte Carlo average over a fixed bank of `mc_samples`
/// covariate draws (common random numbers, so value and gradient agree).
inline Oracle glm_population_oracle(const GlmSpec& spec, std::optional<std::size_t> mc_samples = std::nullopt) {
  spec.validate();
  const int p = spec.p;
  const double half_var = 0.5 * spec.sigma * spec.sigma;
  if (is_zero(spec.theta_star)) {
    const double moment = double_factorial_odd(p);
    auto variable = [p, moment](const ParamVector& t) { return 0.5 * moment * ipow(t.squaredNorm(), p); };
    auto grad = [p, moment](const ParamVector& t) -> ParamVector {
      return (p * moment * ipow(t.squaredNorm(), p - 1)) * t;
    };
    return Oracle(spec.d, variable, grad, half_var, {}, half_var);
  }
  if (!mc_samples || *mc_samples < 1)
    throw ConfigError("glm_population_oracle: theta* != 0 requires mc_samples >= 1");

  // Noise-free responses on the bank: the sigma^2/2 term is carried as the constant.
  GlmSpec bank_spec = spec;
  bank_spec.n = *mc_samples;
  bank_spec.sigma = 1.0;
  auto bank = std::make_shared<GlmDataset>(glm_generate(bank_spec));
  for (Eigen::Index i = 0; i < bank->n(); ++i) bank->Y[i] = ipow(bank->X.row(i).dot(spec.theta_star), p);
  std::shared_ptr<const GlmDataset> cbank = bank;
  return Oracle(
      spec.d, [cbank, p](const ParamVector& t) { return glm_sample_loss(*cbank, t, p); },
      [cbank, p](const ParamVector& t) { return glm_sample_grad(*cbank, t, p); }, half_var,
      [cbank, p](const ParamVector& t, ParamVector& g) {
        require_dims(cbank->d(), t, "glm_population_oracle");
        return detail::glm_accumulate(*cbank, t, p, &g);
      },
      half_var);
}

}  // namespace polyak

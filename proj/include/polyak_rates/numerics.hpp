#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/objective.hpp"

namespace polyak {

/// (2p-1)!! = 1*3*...*(2p-1). Supported for 1 <= p <= 8.
inline double double_factorial_odd(int p) {
  if (p < 1 || p > 8) throw ConfigError("double factorial (2p-1)!! supported for 1 <= p <= 8, got p=" + std::to_string(p));
  double acc = 1.0;
  for (int k = 1; k <= 2 * p - 1; k += 2) acc *= k;
  return acc;
}

/// tanh(x) and log(cosh(x)) from one expm1 call, stable for any x.
struct TanhLogCosh {
  double tanh;
  double log_cosh;
};

inline TanhLogCosh tanh_log_cosh(double x) {
  const double a = std::abs(x);
  const double em = std::expm1(-2.0 * a);  // e^{-2|x|} - 1, in (-1, 0]
  const double t = -em / (2.0 + em);
  double lc;
  if (a < 0.5) {
    lc = -0.5 * std::log1p(-t * t);
  } else {
    lc = a + std::log1p(1.0 + em) - std::numbers::ln2;
  }
  return {x < 0 ? -t : t, lc};
}

inline double stable_tanh(double x) {
  const double a = std::abs(x);
  const double em = std::expm1(-2.0 * a);
  const double t = -em / (2.0 + em);
  return x < 0 ? -t : t;
}

inline double log_cosh(double x) { return tanh_log_cosh(x).log_cosh; }

/// Nodes and weights for expectations under N(0, 1): E[g(V)] ~ sum_i w_i g(x_i).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double expect(F&& g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * g(nodes[i]);
    return acc;
  }

  /// Throws ConfigError unless weights sum to 1 and the second moment is 1.
  void validate() const {
    if (nodes.empty() || nodes.size() != weights.size())
      throw ConfigError("QuadratureRule: nodes and weights must be nonempty and of equal length");
    double mass = 0.0, second = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      mass += weights[i];
      second += weights[i] * nodes[i] * nodes[i];
    }
    if (std::abs(mass - 1.0) > 1e-12) throw ConfigError("QuadratureRule: weights do not sum to 1");
    if (std::abs(second - 1.0) > 1e-10) throw ConfigError("QuadratureRule: second moment is not 1");
  }
};

/// Gauss-Hermite rule for the standard normal (probabilists' Hermite
/// polynomials). Golub-Welsch for starting nodes, then Newton polishing on the
/// orthonormal three-term recurrence; weights 1 / (n p_{n-1}(x)^2).
inline QuadratureRule gauss_hermite(int n = 80) {
  if (n < 1 || n > 200) throw ConfigError("gauss_hermite: order must be in [1, 200]");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  const Eigen::VectorXd start = solver.eigenvalues();

  // Orthonormal p_k = He_k / sqrt(k!): p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
  auto evaluate = [n](double x, double& pn, double& pn1) {
    double prev = 0.0, cur = 1.0;
    for (int k = 0; k < n; ++k) {
      const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(static_cast<double>(k + 1));
      prev = cur;
      cur = next;
    }
    pn = cur;
    pn1 = prev;
  };

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = start[i];
    double pn = 0.0, pn1 = 0.0;
    for (int it = 0; it < 8; ++it) {
      evaluate(x, pn, pn1);
      const double deriv = std::sqrt(static_cast<double>(n)) * pn1;  // p_n' = sqrt(n) p_{n-1}
      const double dx = pn / deriv;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    evaluate(x, pn, pn1);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (n * pn1 * pn1);
  }
  // Symmetrize: the rule is exactly symmetric; enforce it bitwise.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  // Renormalize the residual rounding in the total mass.
  double mass = 0.0;
  for (double w : rule.weights) mass += w;
  for (double& w : rule.weights) w /= mass;
  return rule;
}

// ---------------------------------------------------------------------------
// Seeded randomness. Every random stream is derived from a master seed and a
// tuple of integers, so results do not depend on scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(master);
  for (auto p : parts) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

using Rng = std::mt19937_64;

/// Uniform point on the sphere of radius `radius` around `center`.
inline ParamVector sample_sphere(Rng& rng, const ParamVector& center, double radius) {
  std::normal_distribution<double> normal;
  ParamVector dir(center.size());
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = normal(rng);
    norm = dir.norm();
  } while (norm == 0.0);
  return center + (radius / norm) * dir;
}

/// Uniform point in the ball of radius `radius` around `center`.
inline ParamVector sample_ball(Rng& rng, const ParamVector& center, double radius) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(center.size()));
  return sample_sphere(rng, center, r);
}

}  // namespace polyak

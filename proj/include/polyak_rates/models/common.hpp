#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <string>

#include "polyak_rates/errors.hpp"
#include "polyak_rates/objective.hpp"

namespace polyak {

/// Row-major design matrix: one observation per row, contiguous coordinates.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool is_zero(const ParamVector& v) { return (v.array() == 0.0).all(); }

inline void require_dims(Eigen::Index data_dim, const ParamVector& theta, const char* who) {
  if (theta.size() != data_dim)
    throw ContractViolation(std::string(who) + ": parameter length " + std::to_string(theta.size()) +
                            " does not match data dimension " + std::to_string(data_dim));
}

inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

namespace detail {

// Row blocks for the vectorized likelihood kernels; fixed capacity, no heap.
constexpr Eigen::Index kKernelBlock = 256;
using BlockArray = Eigen::Array<double, Eigen::Dynamic, 1, 0, kKernelBlock, 1>;

// z = Xb * theta column by column; for small d this beats a row-major matrix-vector product.
template <class Block>
void block_dot(const Block& Xb, const ParamVector& theta, BlockArray& z) {
  z = Xb.col(0).array() * theta[0];
  for (Eigen::Index j = 1; j < theta.size(); ++j) z += Xb.col(j).array() * theta[j];
}

// acc += Xb^T w, column by column.
template <class Block>
void block_accumulate(const Block& Xb, const BlockArray& w, ParamVector& acc) {
  for (Eigen::Index j = 0; j < acc.size(); ++j) acc[j] += (Xb.col(j).array() * w).sum();
}

// tanh(z) and, if requested, log cosh(z) elementwise, from one vectorized exp.
// Below |z| = 0.01 a short Taylor series keeps tanh relatively accurate.
inline void block_tanh_logcosh(const BlockArray& z, BlockArray& t, BlockArray* lc) {
  constexpr double kSmall = 0.01;
  const BlockArray a = z.abs();
  const BlockArray e = (-2.0 * a).exp();
  const BlockArray z2 = z.square();
  const BlockArray series = z * (1.0 + z2 * (-1.0 / 3.0 + z2 * (2.0 / 15.0 - z2 * (17.0 / 315.0))));
  t = (a < kSmall).select(series, z.sign() * (1.0 - e) / (1.0 + e));
  if (lc) {
    const BlockArray lc_series = z2 * (0.5 + z2 * (-1.0 / 12.0 + z2 * (1.0 / 45.0 - z2 * (17.0 / 2520.0))));
    *lc = (a < kSmall).select(lc_series, a + (1.0 + e).log() - std::numbers::ln2);
  }
}

}  // namespace detail

}  // namespace polyak

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <utility>

#include "landau/error.hpp"

namespace landau {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Particle data is stored column-wise: a d×N matrix whose column i is
/// particle i. Per-particle Jacobians are stored as a (d·d)×N matrix, each
/// column holding one column-major d×d block with J(r, c) = ∂s_r/∂v_c.
inline Eigen::Map<const Matrix> jacobian_block(const Matrix& jac, Eigen::Index col, int dim) {
  return Eigen::Map<const Matrix>(jac.col(col).data(), dim, dim);
}

inline Eigen::Map<Matrix> jacobian_block(Matrix& jac, Eigen::Index col, int dim) {
  return Eigen::Map<Matrix>(jac.col(col).data(), dim, dim);
}

/// Calls `fn.template operator()<D>()` with D the compile-time counterpart of
/// the runtime dimension. Supported dimensions are 2 and 3.
template <class Fn>
decltype(auto) with_dim(int dim, Fn&& fn) {
  switch (dim) {
    case 2: return std::forward<Fn>(fn).template operator()<2>();
    case 3: return std::forward<Fn>(fn).template operator()<3>();
    default: fail(ErrorKind::InvalidArgument, "unsupported dimension " + std::to_string(dim));
  }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace landau

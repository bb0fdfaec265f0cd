#pragma once

#include <cmath>
#include <cstddef>

#include "landau/error.hpp"
#include "landau/linalg.hpp"

namespace landau {

/// Uniform mesh of n₁^d cells on [−L, L]^d. Cell index is row-major with the
/// last coordinate varying fastest.
struct MeshSpec {
  double half_width = 4.0;
  int cells_per_dim = 100;
  int dim = 2;

  void validate() const {
    require(half_width > 0.0, "mesh.half_width must be positive");
    require(cells_per_dim >= 1, "mesh.cells_per_dim must be positive");
    require(dim >= 1, "mesh.dim must be positive");
  }

  double spacing() const { return 2.0 * half_width / cells_per_dim; }
  double cell_volume() const { return std::pow(spacing(), dim); }

  Eigen::Index cell_count() const {
    Eigen::Index n = 1;
    for (int k = 0; k < dim; ++k) n *= cells_per_dim;
    return n;
  }

  Matrix centers() const {
    validate();
    const Eigen::Index n = cell_count();
    const double h = spacing();
    Matrix c(dim, n);
    for (Eigen::Index idx = 0; idx < n; ++idx) {
      Eigen::Index rem = idx;
      for (int k = dim - 1; k >= 0; --k) {
        c(k, idx) = -half_width + h * (static_cast<double>(rem % cells_per_dim) + 0.5);
        rem /= cells_per_dim;
      }
    }
    return c;
  }
};

}  // namespace landau

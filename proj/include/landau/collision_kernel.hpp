#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include "landau/error.hpp"
#include "landau/linalg.hpp"

namespace landau {

/// Parameters of A(z) = C_γ |z|^γ (|z|² I − z⊗z).
struct KernelParams {
  double c_gamma = 1.0;
  double gamma = 0.0;
  int dim = 2;

  void validate() const {
    require(c_gamma > 0.0, "kernel.c_gamma must be positive");
    require(dim >= 2, "kernel.dim must be at least 2");
    require(gamma >= -dim - 1.0 && gamma <= 1.0,
            "kernel.gamma must lie in [-d-1, 1], got " + std::to_string(gamma));
  }
};

inline constexpr double kDefaultPairFloor = 1e-12;

struct LandauKernel {
  KernelParams params;
  /// Pairs with |z| at or below this floor contribute nothing to the drift.
  double floor = kDefaultPairFloor;
};

/// A(z) = I_d for every z. Reduces the logdet evolution to −∇·s.
struct IdentityKernel {
  int dim = 2;
};

using KernelKind = std::variant<LandauKernel, IdentityKernel>;

inline KernelKind make_landau(double c_gamma, double gamma, int dim,
                              double floor = kDefaultPairFloor) {
  KernelParams p{c_gamma, gamma, dim};
  p.validate();
  return LandauKernel{p, floor};
}

inline int kernel_dim(const KernelKind& k) {
  return std::visit(
      [](const auto& kk) {
        if constexpr (std::is_same_v<std::decay_t<decltype(kk)>, LandauKernel>)
          return kk.params.dim;
        else
          return kk.dim;
      },
      k);
}

namespace detail {

inline void check_size(const Vector& z, int dim) {
  require(z.size() == dim, "vector dimension does not match kernel dimension");
}

inline void check_not_degenerate(double norm, double floor) {
  if (!(norm > floor)) fail(ErrorKind::DegeneratePair, "|z| below pair floor");
}

// Scalar factor C_γ |z|^γ as a function of |z|². The common exponents get
// closed forms so the O(N²) loops avoid std::pow.
struct MaxwellWeight {
  double c;
  double operator()(double) const { return c; }
};

struct CoulombWeight {
  double c;
  double operator()(double r2) const { return c / (r2 * std::sqrt(r2)); }
};

struct PowerWeight {
  double c;
  double half_gamma;
  double operator()(double r2) const { return c * std::pow(r2, half_gamma); }
};

template <class Fn>
decltype(auto) with_weight(const KernelParams& p, Fn&& fn) {
  if (p.gamma == 0.0) return std::forward<Fn>(fn)(MaxwellWeight{p.c_gamma});
  if (p.gamma == -3.0) return std::forward<Fn>(fn)(CoulombWeight{p.c_gamma});
  return std::forward<Fn>(fn)(PowerWeight{p.c_gamma, 0.5 * p.gamma});
}

}  // namespace detail

/// Projection onto the orthogonal complement of z.
inline Matrix eval_Pi(const Vector& z, double floor = kDefaultPairFloor) {
  const double norm = z.norm();
  detail::check_not_degenerate(norm, floor);
  const auto d = z.size();
  return Matrix::Identity(d, d) - z * z.transpose() / (norm * norm);
}

inline Matrix eval_A(const KernelKind& kernel, const Vector& z) {
  const int d = kernel_dim(kernel);
  detail::check_size(z, d);
  if (std::holds_alternative<IdentityKernel>(kernel)) return Matrix::Identity(d, d);
  const auto& k = std::get<LandauKernel>(kernel);
  const double r2 = z.squaredNorm();
  if (k.params.gamma < 0.0) detail::check_not_degenerate(std::sqrt(r2), k.floor);
  const double w = k.params.gamma == 0.0 ? k.params.c_gamma
                                         : k.params.c_gamma * std::pow(r2, 0.5 * k.params.gamma);
  return w * (r2 * Matrix::Identity(d, d) - z * z.transpose());
}

/// Row-wise divergence of A: K(z) = C_γ (1 − d) |z|^γ z.
inline Vector eval_K(const KernelKind& kernel, const Vector& z) {
  const int d = kernel_dim(kernel);
  detail::check_size(z, d);
  if (std::holds_alternative<IdentityKernel>(kernel)) return Vector::Zero(d);
  const auto& k = std::get<LandauKernel>(kernel);
  const double r2 = z.squaredNorm();
  if (k.params.gamma < 0.0) detail::check_not_degenerate(std::sqrt(r2), k.floor);
  const double w = k.params.gamma == 0.0 ? k.params.c_gamma
                                         : k.params.c_gamma * std::pow(r2, 0.5 * k.params.gamma);
  return w * (1.0 - d) * z;
}

/// Row-wise divergence of Π: −(d − 1) z / |z|².
inline Vector eval_div_Pi(const KernelKind& kernel, const Vector& z) {
  const int d = kernel_dim(kernel);
  detail::check_size(z, d);
  const double floor = std::holds_alternative<LandauKernel>(kernel)
                           ? std::get<LandauKernel>(kernel).floor
                           : kDefaultPairFloor;
  const double r2 = z.squaredNorm();
  detail::check_not_degenerate(std::sqrt(r2), floor);
  return -(d - 1.0) * z / r2;
}

}  // namespace landau

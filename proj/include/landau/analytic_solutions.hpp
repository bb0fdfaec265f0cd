#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "landau/error.hpp"
#include "landau/linalg.hpp"

namespace landau {

// ---------------------------------------------------------------------------
// BKW solutions of the Maxwell-molecule Landau equation. Both are radial with
// score s(v) = φ(|v|²) v; the Jacobian is φ I + 2φ'(|v|²) v vᵀ.

/// K(t) = 1 − exp(−t/8)/2 for the 2D BKW solution (kernel constant 1/16).
inline double bkw2d_K(double t) { return 1.0 - 0.5 * std::exp(-t / 8.0); }

/// K(t) = 1 − exp(−t/6) for the 3D BKW solution (kernel constant 1/24).
inline double bkw3d_K(double t) { return 1.0 - std::exp(-t / 6.0); }

/// Earliest time at which the 3D BKW density is nonnegative (K = 3/5).
inline double bkw3d_min_time() { return -6.0 * std::log(0.4); }

inline double bkw2d_density_r2(double t, double r2) {
  require(t >= 0.0, "BKW time must be nonnegative");
  const double K = bkw2d_K(t);
  return std::exp(-r2 / (2.0 * K)) / (2.0 * std::numbers::pi * K) *
         ((2.0 * K - 1.0) / K + (1.0 - K) * r2 / (2.0 * K * K));
}

inline double bkw2d_density(double t, const Vector& v) { return bkw2d_density_r2(t, v.squaredNorm()); }

namespace detail {

struct RadialFactor {
  double phi;   // s = φ v
  double dphi;  // dφ/d(|v|²)
};

inline RadialFactor bkw2d_factor(double t, double r2) {
  const double K = bkw2d_K(t);
  const double den = (2.0 * K - 1.0) * K + 0.5 * (1.0 - K) * r2;
  if (!(den > 0.0)) fail(ErrorKind::ScoreSingular, "BKW2D score undefined where the density vanishes");
  return {-1.0 / K + (1.0 - K) / den, -0.5 * (1.0 - K) * (1.0 - K) / (den * den)};
}

inline double bkw3d_checked_K(double t) {
  const double K = bkw3d_K(t);
  if (K < 0.6) fail(ErrorKind::InvalidTime, "BKW3D requires t >= " + std::to_string(bkw3d_min_time()));
  return K;
}

inline RadialFactor bkw3d_factor(double t, double r2) {
  const double K = bkw3d_checked_K(t);
  const double a = (5.0 * K - 3.0) / (2.0 * K);
  const double b = (1.0 - K) / (2.0 * K * K);
  const double den = a + b * r2;
  if (!(den > 0.0)) fail(ErrorKind::ScoreSingular, "BKW3D score undefined where the density vanishes");
  return {-1.0 / K + 2.0 * b / den, -2.0 * b * b / (den * den)};
}

inline void radial_jacobian(const RadialFactor& f, const Vector& v, Eigen::Ref<Matrix> J) {
  J = f.phi * Matrix::Identity(v.size(), v.size()) + 2.0 * f.dphi * v * v.transpose();
}

}  // namespace detail

inline Vector bkw2d_score(double t, const Vector& v) {
  require(v.size() == 2, "BKW2D expects 2-vectors");
  return detail::bkw2d_factor(t, v.squaredNorm()).phi * v;
}

inline double bkw3d_density_r2(double t, double r2) {
  const double K = detail::bkw3d_checked_K(t);
  return std::exp(-r2 / (2.0 * K)) / std::pow(2.0 * std::numbers::pi * K, 1.5) *
         ((5.0 * K - 3.0) / (2.0 * K) + (1.0 - K) * r2 / (2.0 * K * K));
}

inline double bkw3d_density(double t, const Vector& v) { return bkw3d_density_r2(t, v.squaredNorm()); }

inline Vector bkw3d_score(double t, const Vector& v) {
  require(v.size() == 3, "BKW3D expects 3-vectors");
  return detail::bkw3d_factor(t, v.squaredNorm()).phi * v;
}

// ---------------------------------------------------------------------------
// Bi-Maxwellian initial condition: equal mixture of unit-temperature
// Maxwellians centred at u1 and u2.

struct BiMaxwellianParams {
  Eigen::Vector2d u1{-2.0, 1.0};
  Eigen::Vector2d u2{0.0, -1.0};
};

inline double bimaxwellian_density(const Vector& v, const BiMaxwellianParams& p = {}) {
  require(v.size() == 2, "bi-Maxwellian expects 2-vectors");
  return (std::exp(-0.5 * (v - p.u1).squaredNorm()) + std::exp(-0.5 * (v - p.u2).squaredNorm())) /
         (4.0 * std::numbers::pi);
}

inline Vector bimaxwellian_score(const Vector& v, const BiMaxwellianParams& p = {}) {
  require(v.size() == 2, "bi-Maxwellian expects 2-vectors");
  const Vector d1 = v - p.u1;
  const Vector d2 = v - p.u2;
  // Weights relative to the larger exponent keep the ratio finite far out.
  const double e1 = -0.5 * d1.squaredNorm();
  const double e2 = -0.5 * d2.squaredNorm();
  const double m = std::max(e1, e2);
  const double w1 = std::exp(e1 - m);
  const double w2 = std::exp(e2 - m);
  return -(w1 * d1 + w2 * d2) / (w1 + w2);
}

inline Matrix bimaxwellian_jacobian(const Vector& v, const BiMaxwellianParams& p = {}) {
  const Vector d1 = v - p.u1;
  const Vector d2 = v - p.u2;
  const double e1 = -0.5 * d1.squaredNorm();
  const double e2 = -0.5 * d2.squaredNorm();
  const double m = std::max(e1, e2);
  const double w1 = std::exp(e1 - m);
  const double w2 = std::exp(e2 - m);
  const double W = w1 + w2;
  const Matrix I = Matrix::Identity(2, 2);
  const Matrix hess_over_f =
      (w1 * (d1 * d1.transpose() - I) + w2 * (d2 * d2.transpose() - I)) / W;
  const Vector s = -(w1 * d1 + w2 * d2) / W;
  return hess_over_f - s * s.transpose();
}

// ---------------------------------------------------------------------------
// Rosenbluth shell: f(v) = (1/S²) exp(−S (|v| − σ)² / σ²), kept unnormalized;
// `rosenbluth_normalization` gives Z = ∫ f so that f/Z is a probability density.

struct RosenbluthParams {
  double sigma = 0.3;
  double S = 10.0;
};

inline double rosenbluth_density(const Vector& v, const RosenbluthParams& p = {}) {
  require(v.size() == 3, "Rosenbluth expects 3-vectors");
  const double x = v.norm() - p.sigma;
  return std::exp(-p.S * x * x / (p.sigma * p.sigma)) / (p.S * p.S);
}

inline double rosenbluth_cutoff_radius(const RosenbluthParams& p) {
  // Exponent reaches −400 here.
  return p.sigma + 20.0 * p.sigma / std::sqrt(p.S);
}

inline double rosenbluth_normalization(const RosenbluthParams& p = {}) {
  auto integrand = [&](double r) {
    const double x = r - p.sigma;
    return 4.0 * std::numbers::pi * r * r * std::exp(-p.S * x * x / (p.sigma * p.sigma)) / (p.S * p.S);
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, rosenbluth_cutoff_radius(p), 15, 1e-14, &err);
}

namespace detail {

// s = ψ(r) v with ψ(r) = −(2S/σ²)(1 − σ/r).
inline void rosenbluth_psi(const RosenbluthParams& p, double r, double& psi, double& dpsi_dr) {
  if (!(r > 0.0)) fail(ErrorKind::ScoreSingular, "Rosenbluth score undefined at the origin");
  const double c = 2.0 * p.S / (p.sigma * p.sigma);
  psi = -c * (1.0 - p.sigma / r);
  dpsi_dr = -c * p.sigma / (r * r);
}

}  // namespace detail

inline Vector rosenbluth_score(const Vector& v, const RosenbluthParams& p = {}) {
  double psi, dpsi;
  detail::rosenbluth_psi(p, v.norm(), psi, dpsi);
  return psi * v;
}

// ---------------------------------------------------------------------------

enum class SolutionKind { BKW2D, BKW3D, BiMaxwellian2D, Rosenbluth3D };

inline std::string_view to_string(SolutionKind k) {
  switch (k) {
    case SolutionKind::BKW2D: return "bkw2d";
    case SolutionKind::BKW3D: return "bkw3d";
    case SolutionKind::BiMaxwellian2D: return "bimaxwellian2d";
    case SolutionKind::Rosenbluth3D: return "rosenbluth3d";
  }
  return "unknown";
}

inline SolutionKind parse_solution_kind(std::string_view s) {
  for (auto k : {SolutionKind::BKW2D, SolutionKind::BKW3D, SolutionKind::BiMaxwellian2D,
                 SolutionKind::Rosenbluth3D})
    if (to_string(k) == s) return k;
  fail(ErrorKind::InvalidArgument, "unknown initial law '" + std::string(s) + "'");
}

/// One member of the closed-form family. The BKW variants are exact for all
/// admissible t; the bi-Maxwellian and Rosenbluth variants describe only the
/// initial law, so their time argument must equal `initial_time()`.
class AnalyticSolution {
 public:
  explicit AnalyticSolution(SolutionKind kind) : kind_(kind) {
    if (kind_ == SolutionKind::Rosenbluth3D) rosen_z_ = rosenbluth_normalization(rosen_);
  }

  SolutionKind kind() const { return kind_; }
  int dim() const { return (kind_ == SolutionKind::BKW3D || kind_ == SolutionKind::Rosenbluth3D) ? 3 : 2; }
  bool time_dependent() const { return kind_ == SolutionKind::BKW2D || kind_ == SolutionKind::BKW3D; }
  double initial_time() const { return 0.0; }
  const RosenbluthParams& rosenbluth_params() const { return rosen_; }
  const BiMaxwellianParams& bimaxwellian_params() const { return bimax_; }
  double rosenbluth_z() const { return rosen_z_; }

  /// Normalized density f_t(v).
  double density(double t, const Vector& v) const {
    check(t, v);
    switch (kind_) {
      case SolutionKind::BKW2D: return bkw2d_density(t, v);
      case SolutionKind::BKW3D: return bkw3d_density(t, v);
      case SolutionKind::BiMaxwellian2D: return bimaxwellian_density(v, bimax_);
      case SolutionKind::Rosenbluth3D: return rosenbluth_density(v, rosen_) / rosen_z_;
    }
    return 0.0;
  }

  Vector score(double t, const Vector& v) const {
    check(t, v);
    switch (kind_) {
      case SolutionKind::BKW2D: return bkw2d_score(t, v);
      case SolutionKind::BKW3D: return bkw3d_score(t, v);
      case SolutionKind::BiMaxwellian2D: return bimaxwellian_score(v, bimax_);
      case SolutionKind::Rosenbluth3D: return rosenbluth_score(v, rosen_);
    }
    return v;
  }

  Matrix score_jacobian(double t, const Vector& v) const {
    check(t, v);
    const int d = dim();
    Matrix J(d, d);
    switch (kind_) {
      case SolutionKind::BKW2D:
        detail::radial_jacobian(detail::bkw2d_factor(t, v.squaredNorm()), v, J);
        break;
      case SolutionKind::BKW3D:
        detail::radial_jacobian(detail::bkw3d_factor(t, v.squaredNorm()), v, J);
        break;
      case SolutionKind::BiMaxwellian2D: J = bimaxwellian_jacobian(v, bimax_); break;
      case SolutionKind::Rosenbluth3D: {
        const double r = v.norm();
        double psi, dpsi;
        detail::rosenbluth_psi(rosen_, r, psi, dpsi);
        J = psi * Matrix::Identity(d, d) + (dpsi / r) * v * v.transpose();
        break;
      }
    }
    return J;
  }

 private:
  void check(double t, const Vector& v) const {
    require(v.size() == dim(), "velocity dimension does not match the analytic solution");
    if (!time_dependent() && t != initial_time())
      fail(ErrorKind::InvalidTime, std::string(to_string(kind_)) + " is only known at t = 0");
    if (kind_ == SolutionKind::BKW2D && t < 0.0) fail(ErrorKind::InvalidTime, "BKW2D needs t >= 0");
  }

  SolutionKind kind_;
  BiMaxwellianParams bimax_;
  RosenbluthParams rosen_;
  double rosen_z_ = 1.0;
};

}  // namespace landau

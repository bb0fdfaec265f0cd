#pragma once

#include <cmath>
#include <cstddef>

#include "landau/collision_kernel.hpp"
#include "landau/error.hpp"
#include "landau/linalg.hpp"
#include "landau/particle_system.hpp"
#include "landau/score_provider.hpp"

namespace landau {

/// log|det ∇_V T(V_i, t)| along each trajectory and the density it implies,
/// f_t(v_i) = f_0(V_i) / exp(logdet_i).
struct TrajectoryDensity {
  Vector logdet;
  Vector initial_density;
  Vector density;

  static TrajectoryDensity start(const Vector& f0) {
    if (f0.size() == 0) fail(ErrorKind::InitialDensityUnavailable, "no initial density values");
    for (Eigen::Index i = 0; i < f0.size(); ++i)
      if (!(f0[i] > 0.0) || !std::isfinite(f0[i]))
        fail(ErrorKind::DensityInvalid, "initial density must be positive and finite", i);
    return {Vector::Zero(f0.size()), f0, f0};
  }

  Eigen::Index size() const { return logdet.size(); }
};

/// Rate d/dt log|det ∇T| for every particle:
///   −(1/N) Σ_j [ A(z_ij) : ∇s(v_i)ᵀ + K(z_ij)·(s_i − s_j) ],
/// where K = ∇·A, so for the Landau kernel the second term is
/// −C_γ (d−1)|z|^γ z·(s_i − s_j).
inline Vector logdet_increment_from(const Matrix& velocities, const Matrix& scores, const Matrix& jac,
                                    const KernelKind& kernel) {
  Vector rate;
  detail::pair_sweep(kernel, velocities, scores, &jac, nullptr, &rate);
  return rate;
}

inline Vector logdet_increment(const ParticleEnsemble& ens, const KernelKind& kernel,
                               const ScoreProvider& provider) {
  Matrix s, jac;
  provider.evaluate_with_jacobian(ens.velocities, s, jac);
  return logdet_increment_from(ens.velocities, s, jac, kernel);
}

/// Drift and logdet rate from one pair sweep.
inline void drift_and_logdet_rate(const ParticleEnsemble& ens, const KernelKind& kernel,
                                  const ScoreProvider& provider, DriftField& drift, Vector& rate) {
  Matrix s, jac;
  provider.evaluate_with_jacobian(ens.velocities, s, jac);
  detail::pair_sweep(kernel, ens.velocities, s, &jac, &drift, &rate);
}

inline void advance_density(TrajectoryDensity& tracker, const Vector& increments, double dt) {
  require(dt > 0.0, "time step must be positive");
  require(increments.size() == tracker.size(), "increment count does not match the tracker");
  tracker.logdet += dt * increments;
  for (Eigen::Index i = 0; i < tracker.size(); ++i) {
    const double f = tracker.initial_density[i] * std::exp(-tracker.logdet[i]);
    if (!std::isfinite(f) || !(f > 0.0))
      fail(ErrorKind::DensityOverflow, "density left the representable range", i);
    tracker.density[i] = f;
  }
}

/// (1/N) Σ log f(v_i).
inline double ensemble_entropy(const TrajectoryDensity& tracker) {
  require(tracker.density.size() > 0, "empty tracker");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < tracker.density.size(); ++i) {
    if (!(tracker.density[i] > 0.0)) fail(ErrorKind::DensityInvalid, "nonpositive density", i);
    acc += std::log(tracker.density[i]);
  }
  return acc / static_cast<double>(tracker.density.size());
}

}  // namespace landau

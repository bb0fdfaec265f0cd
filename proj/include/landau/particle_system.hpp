#pragma once

#include <cmath>
#include <cstddef>
#include <variant>

#include "landau/collision_kernel.hpp"
#include "landau/error.hpp"
#include "landau/linalg.hpp"
#include "landau/score_provider.hpp"

namespace landau {

/// N equally weighted particles; column i of `velocities` is particle i.
struct ParticleEnsemble {
  Matrix velocities;
  double time = 0.0;

  int dim() const { return static_cast<int>(velocities.rows()); }
  Eigen::Index size() const { return velocities.cols(); }
};

/// Per-particle drift G(v_i) = (1/N) Σ_j A(v_i − v_j)(s_i − s_j), d×N.
using DriftField = Matrix;

struct Moments {
  double mass = 1.0;
  Vector momentum;
  double energy = 0.0;
};

namespace detail {

// One pass over unordered pairs i < j. Each pair term is added to particle i
// and subtracted from particle j, so Σ_i G_i cancels pairwise. The logdet
// rate accumulates A(z):∇s_i + K(z)·(s_i − s_j) for both members of a pair;
// the K term is even under (z, Δs) → (−z, −Δs).
template <int D, class Weight>
void landau_sweep(const Matrix& v, const Matrix& s, const Matrix* jac, double floor2, Weight weight,
                  Matrix* drift, Vector* rate) {
  using Vec = Eigen::Matrix<double, D, 1>;
  using Mat = Eigen::Matrix<double, D, D>;
  const Eigen::Index n = v.cols();
  if (drift) drift->setZero(D, n);
  if (rate) rate->setZero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec vi = v.template block<D, 1>(0, i);
    const Vec si = s.template block<D, 1>(0, i);
    Vec gi = Vec::Zero();
    double ri = 0.0;
    Mat Ji;
    double tri = 0.0;
    if (rate) {
      Ji = Eigen::Map<const Mat>(jac->col(i).data());
      tri = Ji.trace();
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Vec z = vi - v.template block<D, 1>(0, j);
      const double r2 = z.squaredNorm();
      if (r2 <= floor2) continue;
      const Vec ds = si - s.template block<D, 1>(0, j);
      const double zds = z.dot(ds);
      const double w = weight(r2);
      if (drift) {
        const Vec term = w * (r2 * ds - zds * z);
        gi += term;
        drift->template block<D, 1>(0, j) -= term;
      }
      if (rate) {
        const Eigen::Map<const Mat> Jj(jac->col(j).data());
        const double k_term = (1.0 - D) * w * zds;
        ri += w * (r2 * tri - z.dot(Ji * z)) + k_term;
        (*rate)[j] += w * (r2 * Jj.trace() - z.dot(Jj * z)) + k_term;
      }
    }
    if (drift) drift->template block<D, 1>(0, i) += gi;
    if (rate) (*rate)[i] += ri;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (drift) *drift *= inv_n;
  if (rate) *rate *= -inv_n;
}

// A = I: G_i = (1/N) Σ_j (s_i − s_j); every j (including j = i) contributes
// I:∇s_i = tr ∇s_i to the logdet rate.
inline void identity_sweep(const Matrix& v, const Matrix& s, const Matrix* jac, Matrix* drift,
                           Vector* rate) {
  const Eigen::Index n = v.cols();
  const int d = static_cast<int>(v.rows());
  if (drift) {
    drift->setZero(d, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) drift->col(i) += s.col(i) - s.col(j);
    *drift /= static_cast<double>(n);
  }
  if (rate) {
    rate->setZero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double tr = jacobian_block(*jac, i, d).trace();
      for (Eigen::Index j = 0; j < n; ++j) (*rate)[i] += tr;
    }
    *rate /= -static_cast<double>(n);
  }
}

inline void pair_sweep(const KernelKind& kernel, const Matrix& v, const Matrix& s, const Matrix* jac,
                       Matrix* drift, Vector* rate) {
  require(v.rows() == kernel_dim(kernel), "particle dimension does not match the kernel");
  require(s.rows() == v.rows() && s.cols() == v.cols(), "score shape does not match particles");
  if (!s.allFinite()) fail(ErrorKind::ModelDiverged, "score is not finite at some particle");
  if (rate && !jac->allFinite()) fail(ErrorKind::ModelDiverged, "score Jacobian is not finite");
  if (std::holds_alternative<IdentityKernel>(kernel)) {
    identity_sweep(v, s, jac, drift, rate);
    return;
  }
  const auto& lk = std::get<LandauKernel>(kernel);
  const double floor2 = lk.floor * lk.floor;
  with_dim(lk.params.dim, [&]<int D>() {
    with_weight(lk.params, [&](auto weight) { landau_sweep<D>(v, s, jac, floor2, weight, drift, rate); });
  });
}

}  // namespace detail

inline DriftField compute_drift_from_scores(const Matrix& velocities, const Matrix& scores,
                                            const KernelKind& kernel) {
  DriftField g;
  detail::pair_sweep(kernel, velocities, scores, nullptr, &g, nullptr);
  return g;
}

inline DriftField compute_drift(const ParticleEnsemble& ens, const KernelKind& kernel,
                                const ScoreProvider& provider) {
  return compute_drift_from_scores(ens.velocities, provider.evaluate(ens.velocities), kernel);
}

inline void euler_step(ParticleEnsemble& ens, const DriftField& drift, double dt) {
  require(dt > 0.0, "time step must be positive");
  require(drift.rows() == ens.velocities.rows() && drift.cols() == ens.velocities.cols(),
          "drift shape does not match the ensemble");
  ens.velocities -= dt * drift;
  if (!ens.velocities.allFinite()) fail(ErrorKind::ModelDiverged, "non-finite velocity after Euler step");
  ens.time += dt;
}

struct MidpointResult {
  int iterations = 0;
  double last_update = 0.0;
};

/// Implicit midpoint update with scores frozen at the start of the step,
///   v^{n+1} = v^n − Δt G(v^{n+½}; s(v^n)),  v^{n+½} = (v^n + v^{n+1})/2,
/// solved by fixed-point iteration from the Euler predictor.
inline MidpointResult midpoint_step(ParticleEnsemble& ens, const KernelKind& kernel,
                                    const ScoreProvider& provider, double dt, double fp_tol = 1e-10,
                                    int fp_max_iters = 100) {
  require(dt > 0.0, "time step must be positive");
  const Matrix s = provider.evaluate(ens.velocities);
  const Matrix& v0 = ens.velocities;
  Matrix next = v0 - dt * compute_drift_from_scores(v0, s, kernel);
  MidpointResult res;
  for (int it = 1; it <= fp_max_iters; ++it) {
    const Matrix mid = 0.5 * (v0 + next);
    Matrix candidate = v0 - dt * compute_drift_from_scores(mid, s, kernel);
    res.iterations = it;
    res.last_update = (candidate - next).cwiseAbs().maxCoeff();
    next = std::move(candidate);
    if (!next.allFinite()) fail(ErrorKind::ModelDiverged, "non-finite velocity in midpoint iteration");
    if (res.last_update < fp_tol) {
      ens.velocities = std::move(next);
      ens.time += dt;
      return res;
    }
  }
  fail(ErrorKind::FixedPointNotConverged,
       "midpoint iteration stalled at update " + std::to_string(res.last_update));
}

inline Moments moments(const ParticleEnsemble& ens) {
  Moments m;
  const double inv_n = 1.0 / static_cast<double>(ens.size());
  m.momentum = ens.velocities.rowwise().sum() * inv_n;
  m.energy = ens.velocities.colwise().squaredNorm().sum() * inv_n;
  return m;
}

/// (1/N) Σ |v_i'|² − |v_i|², evaluated per particle as (v' − v)·(v' + v) so
/// the O(Δt²) change is not lost against the O(1) energy.
inline double energy_increment(const Matrix& before, const Matrix& after) {
  require(before.rows() == after.rows() && before.cols() == after.cols(), "ensemble shapes differ");
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < before.cols(); ++i)
    acc += static_cast<long double>((after.col(i) - before.col(i)).dot(after.col(i) + before.col(i)));
  return static_cast<double>(acc / static_cast<long double>(before.cols()));
}

/// Literal double sum −(1/N²) Σ_{i,j} s_i · A(v_i − v_j)(s_i − s_j).
inline double entropy_decay_estimate_direct(const Matrix& velocities, const Matrix& scores,
                                            const KernelKind& kernel) {
  const Eigen::Index n = velocities.cols();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vector z = velocities.col(i) - velocities.col(j);
      if (const auto* lk = std::get_if<LandauKernel>(&kernel); lk && z.norm() <= lk->floor) continue;
      acc += scores.col(i).dot(eval_A(kernel, z) * (scores.col(i) - scores.col(j)));
    }
  return -acc / (static_cast<double>(n) * static_cast<double>(n));
}

/// Entropy decay rate estimate, evaluated in the symmetrized form
/// −(1/N²) Σ_{i<j} Δs·A(z)Δs. For the Landau kernel Δs·A(z)Δs = w |z ∧ Δs|²,
/// a sum of squares, so the result is never positive.
inline double entropy_decay_from_scores(const Matrix& velocities, const Matrix& scores,
                                        const KernelKind& kernel) {
  const Eigen::Index n = velocities.cols();
  require(scores.rows() == velocities.rows() && scores.cols() == n, "score shape does not match particles");
  double acc = 0.0;
  if (std::holds_alternative<IdentityKernel>(kernel)) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) acc += (scores.col(i) - scores.col(j)).squaredNorm();
  } else {
    const auto& lk = std::get<LandauKernel>(kernel);
    const double floor2 = lk.floor * lk.floor;
    with_dim(lk.params.dim, [&]<int D>() {
      detail::with_weight(lk.params, [&](auto weight) {
        using Vec = Eigen::Matrix<double, D, 1>;
        for (Eigen::Index i = 0; i < n; ++i) {
          const Vec vi = velocities.template block<D, 1>(0, i);
          const Vec si = scores.template block<D, 1>(0, i);
          for (Eigen::Index j = i + 1; j < n; ++j) {
            const Vec z = vi - velocities.template block<D, 1>(0, j);
            const double r2 = z.squaredNorm();
            if (r2 <= floor2) continue;
            const Vec ds = si - scores.template block<D, 1>(0, j);
            double wedge2;
            if constexpr (D == 2) {
              const double c = z[0] * ds[1] - z[1] * ds[0];
              wedge2 = c * c;
            } else {
              wedge2 = z.cross(ds).squaredNorm();
            }
            acc += weight(r2) * wedge2;
          }
        }
      });
    });
  }
  return -acc / (static_cast<double>(n) * static_cast<double>(n));
}

inline double entropy_decay_estimate(const ParticleEnsemble& ens, const KernelKind& kernel,
                                     const ScoreProvider& provider) {
  return entropy_decay_from_scores(ens.velocities, provider.evaluate(ens.velocities), kernel);
}

}  // namespace landau

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "landau/analytic_solutions.hpp"
#include "landau/error.hpp"
#include "landau/linalg.hpp"
#include "landau/rng.hpp"

namespace landau {

struct SamplerConfig {
  std::uint64_t seed = 0;
  /// Sample the positive orthant only and reflect each draw with random
  /// signs (radially symmetric laws only).
  bool symmetry_fill = true;
  /// Multiplier on the grid maximum of target/proposal.
  double envelope_safety = 1.05;
};

struct SampleSet {
  Matrix velocities;
  Vector density;  // exact f at each sample
  std::uint64_t seed = 0;
  std::size_t proposals = 0;
  double envelope = 0.0;
};

namespace detail {

/// Rejection sampler for a radial target f(|v|²) against N(0, I_d).
class RadialGaussianRejection {
 public:
  template <class Density>
  RadialGaussianRejection(int dim, Density f, double safety) : dim_(dim) {
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * dim);
    double best = 0.0;
    // Spot-check the ratio on a fine radial grid; it decays beyond r = 12.
    for (int k = 0; k <= 24000; ++k) {
      const double r = 12.0 * k / 24000.0;
      const double q = norm * std::exp(-0.5 * r * r);
      best = std::max(best, f(r * r) / q);
    }
    envelope_ = safety * best;
  }

  double envelope() const { return envelope_; }

  template <class Density>
  Vector draw(Rng& rng, Density f, bool positive_orthant, std::size_t& proposals,
              std::size_t& accepted) const {
    const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * dim_);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
      Vector x(dim_);
      for (int k = 0; k < dim_; ++k) x[k] = normal(rng);
      if (positive_orthant) x = x.cwiseAbs();
      ++proposals;
      const double r2 = x.squaredNorm();
      const double q = norm * std::exp(-0.5 * r2);
      if (rng.uniform() * envelope_ * q <= f(r2)) {
        ++accepted;
        return x;
      }
      if (proposals >= 1000000 && static_cast<double>(accepted) < 1e-4 * static_cast<double>(proposals))
        fail(ErrorKind::EnvelopeTooLoose, "acceptance rate below 1e-4 over 1e6 proposals");
    }
  }

 private:
  int dim_;
  double envelope_ = 0.0;
};

/// Tabulated inverse CDF of the Rosenbluth radial law p(r) ∝ r² f(r).
class RosenbluthRadius {
 public:
  explicit RosenbluthRadius(const RosenbluthParams& p, int points = 20001) {
    const double rmax = rosenbluth_cutoff_radius(p);
    r_.resize(points);
    cdf_.resize(points);
    double prev = 0.0;
    for (int k = 0; k < points; ++k) {
      r_[k] = rmax * k / (points - 1);
      const double x = r_[k] - p.sigma;
      const double pdf = r_[k] * r_[k] * std::exp(-p.S * x * x / (p.sigma * p.sigma));
      cdf_[k] = k == 0 ? 0.0 : cdf_[k - 1] + 0.5 * (pdf + prev) * (r_[k] - r_[k - 1]);
      prev = pdf;
    }
    for (double& c : cdf_) c /= cdf_.back();
  }

  double invert(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.begin()) return r_.front();
    if (it == cdf_.end()) return r_.back();
    const auto k = static_cast<std::size_t>(it - cdf_.begin());
    const double t = (u - cdf_[k - 1]) / (cdf_[k] - cdf_[k - 1]);
    return r_[k - 1] + t * (r_[k] - r_[k - 1]);
  }

 private:
  std::vector<double> r_, cdf_;
};

/// Gives each positive-orthant draw an independent random sign per axis.
template <class Draw>
Matrix fill_by_reflection(int dim, std::size_t n, Rng& rng, Draw draw) {
  Matrix out(dim, static_cast<Eigen::Index>(n));
  for (std::size_t col = 0; col < n; ++col) {
    Vector v = draw();
    const std::uint64_t bits = rng();
    for (int k = 0; k < dim; ++k)
      if (bits & (std::uint64_t{1} << k)) v[k] = -v[k];
    out.col(static_cast<Eigen::Index>(col)) = v;
  }
  return out;
}

}  // namespace detail

/// i.i.d. samples of the solution at time t together
/// with the exact density at every sample.
inline SampleSet sample(const AnalyticSolution& sol, double t, std::size_t n, const SamplerConfig& cfg) {
  require(n >= 1, "sample count must be positive");
  SampleSet out;
  out.seed = cfg.seed;
  Rng rng(cfg.seed);
  const int d = sol.dim();

  auto fill = [&](auto draw_one, bool symmetric) {
    if (symmetric) return detail::fill_by_reflection(d, n, rng, draw_one);
    Matrix m(d, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) m.col(static_cast<Eigen::Index>(i)) = draw_one();
    return m;
  };

  switch (sol.kind()) {
    case SolutionKind::BKW2D:
    case SolutionKind::BKW3D: {
      const bool two = sol.kind() == SolutionKind::BKW2D;
      if (!two) (void)bkw3d_density_r2(t, 0.0);  // validates t
      auto f = [&](double r2) { return two ? bkw2d_density_r2(t, r2) : bkw3d_density_r2(t, r2); };
      detail::RadialGaussianRejection rej(d, f, cfg.envelope_safety);
      out.envelope = rej.envelope();
      std::size_t accepted = 0;
      out.velocities = fill(
          [&] { return rej.draw(rng, f, cfg.symmetry_fill, out.proposals, accepted); },
          cfg.symmetry_fill);
      break;
    }
    case SolutionKind::BiMaxwellian2D: {
      std::normal_distribution<double> normal(0.0, 1.0);
      const auto& p = sol.bimaxwellian_params();
      out.velocities = fill(
          [&] {
            const Vector c = rng.uniform() < 0.5 ? Vector(p.u1) : Vector(p.u2);
            ++out.proposals;
            return Vector(c + Vector{{normal(rng), normal(rng)}});
          },
          false);
      break;
    }
    case SolutionKind::Rosenbluth3D: {
      detail::RosenbluthRadius radius(sol.rosenbluth_params());
      std::normal_distribution<double> normal(0.0, 1.0);
      auto draw = [&] {
        Vector dir(3);
        do {
          for (int k = 0; k < 3; ++k) dir[k] = normal(rng);
        } while (dir.norm() < 1e-12);
        ++out.proposals;
        Vector v = radius.invert(rng.uniform()) * dir.normalized();
        if (cfg.symmetry_fill) v = v.cwiseAbs();
        return v;
      };
      out.velocities = fill(draw, cfg.symmetry_fill);
      break;
    }
  }

  out.density.resize(out.velocities.cols());
  for (Eigen::Index i = 0; i < out.velocities.cols(); ++i)
    out.density[i] = sol.density(t, out.velocities.col(i));
  return out;
}

}  // namespace landau

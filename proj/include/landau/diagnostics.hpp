#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <ostream>
#include <utility>
#include <vector>

#include "landau/analytic_solutions.hpp"
#include "landau/error.hpp"
#include "landau/linalg.hpp"
#include "landau/mesh.hpp"
#include "landau/particle_system.hpp"
#include "landau/score_provider.hpp"

namespace landau {

struct KdeConfig {
  double bandwidth = 0.15;

  void validate() const { require(bandwidth > 0.0, "kde.bandwidth must be positive"); }
};

/// f^kde(c) = (1/N) Σ_j ψ_ε(c − v_j) at every mesh centre, with the
/// normalized isotropic Gaussian ψ_ε(x) = (2πε²)^{−d/2} exp(−|x|²/2ε²).
inline Vector kde_on_mesh(const Matrix& velocities, const MeshSpec& mesh, const KdeConfig& kde) {
  kde.validate();
  require(velocities.rows() == mesh.dim, "mesh dimension does not match particles");
  require(velocities.cols() > 0, "kde needs at least one particle");
  const Matrix centers = mesh.centers();
  const double e2 = kde.bandwidth * kde.bandwidth;
  const double norm = std::pow(2.0 * std::numbers::pi * e2, -0.5 * mesh.dim) /
                      static_cast<double>(velocities.cols());
  const double inv2e2 = 0.5 / e2;
  Vector out(centers.cols());
  with_dim(mesh.dim, [&]<int D>() {
    using Vec = Eigen::Matrix<double, D, 1>;
    for (Eigen::Index l = 0; l < centers.cols(); ++l) {
      const Vec c = centers.template block<D, 1>(0, l);
      double acc = 0.0;
      for (Eigen::Index j = 0; j < velocities.cols(); ++j)
        acc += std::exp(-inv2e2 * (c - velocities.template block<D, 1>(0, j)).squaredNorm());
      out[l] = norm * acc;
    }
  });
  return out;
}

inline Vector kde_on_mesh(const ParticleEnsemble& ens, const MeshSpec& mesh, const KdeConfig& kde) {
  return kde_on_mesh(ens.velocities, mesh, kde);
}

inline Vector reference_on_mesh(const AnalyticSolution& sol, double t, const MeshSpec& mesh) {
  require(sol.dim() == mesh.dim, "mesh dimension does not match the solution");
  const Matrix centers = mesh.centers();
  Vector out(centers.cols());
  for (Eigen::Index l = 0; l < centers.cols(); ++l) out[l] = sol.density(t, centers.col(l));
  return out;
}

/// ‖f − f̃‖₂ / ‖f̃‖₂ over mesh cells.
inline double relative_l2_error(const Vector& reconstructed, const Vector& reference) {
  require(reconstructed.size() == reference.size(), "field sizes differ");
  const double denom = reference.norm();
  if (!(denom > 0.0) || !std::isfinite(denom))
    fail(ErrorKind::DegenerateReference, "reference field has zero norm");
  return (reconstructed - reference).norm() / denom;
}

/// Σ|s_i − g_i|² / Σ|g_i|² for scores and reference scores (d×N).
inline double relative_fisher(const Matrix& scores, const Matrix& reference) {
  require(scores.rows() == reference.rows() && scores.cols() == reference.cols(), "score shapes differ");
  const double denom = reference.squaredNorm();
  if (!(denom > 0.0) || !std::isfinite(denom))
    fail(ErrorKind::DegenerateReference, "reference score has zero norm");
  return (scores - reference).squaredNorm() / denom;
}

using ScoreFunction = std::function<Vector(const Vector&)>;

inline Matrix evaluate_columns(const ScoreFunction& fn, const Matrix& velocities) {
  Matrix out(velocities.rows(), velocities.cols());
  for (Eigen::Index i = 0; i < velocities.cols(); ++i) out.col(i) = fn(velocities.col(i));
  return out;
}

inline double relative_fisher(const ScoreProvider& provider, const ScoreFunction& reference_score,
                              const Matrix& velocities) {
  return relative_fisher(provider.evaluate(velocities), evaluate_columns(reference_score, velocities));
}

// ---------------------------------------------------------------------------
// Convergence statistics

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

namespace detail {

inline LogLogFit least_squares_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(y[k] > 0.0) || !std::isfinite(y[k]))
      fail(ErrorKind::InsufficientData, "rate fit needs positive finite errors");
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  LogLogFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace detail

/// Least-squares line through (log x, log y). Needs at least three points
/// whose x values span a factor of ten or more.
inline LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "loglog_fit: x and y differ in length");
  if (x.size() < 3) fail(ErrorKind::InsufficientData, "need at least three points for a rate fit");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (!(*lo > 0.0) || *hi < 10.0 * *lo)
    fail(ErrorKind::InsufficientData, "fit points must span at least one decade");
  return detail::least_squares_loglog(x, y);
}

struct ConvergenceSeries {
  std::vector<double> parameter;  // N or Δt at which each error is reported
  std::vector<double> error;
  LogLogFit fit;
};

/// e_N = sqrt((1/J) Σ_j |H_j − H_ext|²) for each sample size, and its rate.
/// `entropies[k]` holds the J end-time entropies obtained with `sizes[k]`.
inline ConvergenceSeries sample_size_convergence(const std::vector<double>& sizes,
                                                 const std::vector<std::vector<double>>& entropies,
                                                 double reference) {
  require(sizes.size() == entropies.size(), "one entropy list per sample size is required");
  ConvergenceSeries out;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (entropies[k].empty()) fail(ErrorKind::InsufficientData, "no runs for a sample size");
    double acc = 0.0;
    for (double h : entropies[k]) acc += (h - reference) * (h - reference);
    out.parameter.push_back(sizes[k]);
    out.error.push_back(std::sqrt(acc / static_cast<double>(entropies[k].size())));
  }
  out.fit = loglog_fit(out.parameter, out.error);
  return out;
}

/// e_Δt = |H_Δt − H_{Δt/2}| for every step in `steps` whose half also
/// appears. The decade requirement applies to the whole sweep, so a halving
/// ladder 0.0025…0.04 yields four differences at 0.005…0.04.
inline ConvergenceSeries time_step_convergence(const std::vector<double>& steps,
                                               const std::vector<double>& entropies) {
  require(steps.size() == entropies.size(), "one entropy value per step size is required");
  if (steps.size() < 4) fail(ErrorKind::InsufficientData, "need at least four step sizes");
  const auto [lo, hi] = std::minmax_element(steps.begin(), steps.end());
  if (!(*lo > 0.0) || *hi < 10.0 * *lo) fail(ErrorKind::InsufficientData, "step sizes must span a decade");
  ConvergenceSeries out;
  for (std::size_t a = 0; a < steps.size(); ++a)
    for (std::size_t b = 0; b < steps.size(); ++b)
      if (std::abs(steps[b] - 0.5 * steps[a]) <= 1e-12 * steps[a]) {
        out.parameter.push_back(steps[a]);
        out.error.push_back(std::abs(entropies[a] - entropies[b]));
      }
  if (out.parameter.size() < 3) fail(ErrorKind::InsufficientData, "need at least three halving pairs");
  out.fit = detail::least_squares_loglog(out.parameter, out.error);
  return out;
}

struct ConvergenceStats {
  ConvergenceSeries sample_size;
  ConvergenceSeries time_step;
};

inline ConvergenceStats convergence_stats(const std::vector<double>& sizes,
                                          const std::vector<std::vector<double>>& size_entropies,
                                          double reference, const std::vector<double>& steps,
                                          const std::vector<double>& step_entropies) {
  return {sample_size_convergence(sizes, size_entropies, reference),
          time_step_convergence(steps, step_entropies)};
}

// ---------------------------------------------------------------------------
// Quadrature

/// Composite tensor-product Gauss–Legendre rule (20 nodes per panel) on
/// [−L, L]^d.
inline double tensor_gauss(int dim, double half_width, int panels, const std::function<double(const Vector&)>& fn) {
  require(dim >= 1 && dim <= 3, "tensor_gauss supports d ≤ 3");
  require(panels >= 1, "panel count must be positive");
  using Rule = boost::math::quadrature::gauss<double, 20>;
  std::vector<double> nodes, weights;
  const double width = 2.0 * half_width / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -half_width + (p + 0.5) * width;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    for (std::size_t k = 0; k < x.size(); ++k) {
      nodes.push_back(mid + 0.5 * width * x[k]);
      weights.push_back(0.5 * width * w[k]);
      nodes.push_back(mid - 0.5 * width * x[k]);
      weights.push_back(0.5 * width * w[k]);
    }
  }
  const std::size_t m = nodes.size();
  std::size_t total = 1;
  for (int k = 0; k < dim; ++k) total *= m;
  Vector v(dim);
  // Neumaier-compensated sum; 3D rules reach ~10^7 terms.
  double acc = 0.0, carry = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    double w = 1.0;
    for (int k = 0; k < dim; ++k) {
      const std::size_t i = rem % m;
      rem /= m;
      v[k] = nodes[i];
      w *= weights[i];
    }
    const double term = w * fn(v);
    const double sum = acc + term;
    carry += std::abs(acc) >= std::abs(term) ? (acc - sum) + term : (term - sum) + acc;
    acc = sum;
  }
  return acc + carry;
}

/// ∫ f_t log f_t dv for a time-dependent closed-form solution.
inline double entropy_reference(const AnalyticSolution& sol, double t, double half_width = 10.0,
                                int panels = 0) {
  if (panels == 0) panels = sol.dim() == 2 ? 40 : 12;
  return tensor_gauss(sol.dim(), half_width, panels, [&](const Vector& v) {
    const double f = sol.density(t, v);
    return f > 0.0 ? f * std::log(f) : 0.0;
  });
}

// ---------------------------------------------------------------------------
// Shape diagnostics

/// Variance of the velocities along unit(axis) minus the mean variance over
/// the orthogonal complement.
inline double anisotropy(const Matrix& velocities, const Vector& axis) {
  require(axis.size() == velocities.rows() && axis.norm() > 0.0, "anisotropy needs a nonzero axis");
  const Vector e = axis.normalized();
  const Matrix centered = velocities.colwise() - velocities.rowwise().mean();
  const double n = static_cast<double>(velocities.cols());
  const Matrix cov = centered * centered.transpose() / n;
  const double along = e.dot(cov * e);
  const double ortho = (cov.trace() - along) / static_cast<double>(velocities.rows() - 1);
  return along - ortho;
}

/// CSV rows cell_center_1..d, f_kde[, f_reference].
inline void write_mesh_csv(std::ostream& os, const MeshSpec& mesh, const Vector& kde, const Vector* reference) {
  require(kde.size() == mesh.cell_count(), "kde field does not match the mesh");
  if (reference) require(reference->size() == kde.size(), "reference field does not match the mesh");
  const Matrix centers = mesh.centers();
  for (int k = 0; k < mesh.dim; ++k) os << "cell_center_" << (k + 1) << ',';
  os << "f_kde";
  if (reference) os << ",f_reference";
  os << '\n';
  const auto prec = os.precision(17);
  for (Eigen::Index l = 0; l < centers.cols(); ++l) {
    for (int k = 0; k < mesh.dim; ++k) os << centers(k, l) << ',';
    os << kde[l];
    if (reference) os << ',' << (*reference)[l];
    os << '\n';
  }
  os.precision(prec);
}

}  // namespace landau

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <utility>

#include "landau/analytic_solutions.hpp"
#include "landau/error.hpp"
#include "landau/linalg.hpp"
#include "landau/mesh.hpp"
#include "landau/score_model.hpp"

namespace landau {

/// Source of the score s_t(v) seen by the particle system. Velocities and
/// scores are d×N; Jacobians use the (d·d)×N layout from linalg.hpp.
class ScoreProvider {
 public:
  virtual ~ScoreProvider() = default;

  virtual int dim() const = 0;
  virtual Matrix evaluate(const Matrix& v) const = 0;
  virtual void evaluate_with_jacobian(const Matrix& v, Matrix& s, Matrix& jac) const = 0;

  /// Called by the time loop before the provider is used at a new step.
  virtual void update(double /*time*/, const Matrix& /*velocities*/) {}
};

class LearnedScore final : public ScoreProvider {
 public:
  explicit LearnedScore(ScoreModel model) : model_(std::move(model)) {}

  int dim() const override { return model_.dim(); }
  Matrix evaluate(const Matrix& v) const override { return model_.score(v); }
  void evaluate_with_jacobian(const Matrix& v, Matrix& s, Matrix& jac) const override {
    model_.score_and_jacobian(v, s, jac);
  }

  ScoreModel& model() { return model_; }
  const ScoreModel& model() const { return model_; }

 private:
  ScoreModel model_;
};

/// Closed-form ∇log f_t, with t taken from the last `update` call.
class AnalyticScore final : public ScoreProvider {
 public:
  AnalyticScore(AnalyticSolution solution, double time) : sol_(std::move(solution)), time_(time) {}

  int dim() const override { return sol_.dim(); }

  Matrix evaluate(const Matrix& v) const override {
    Matrix s(v.rows(), v.cols());
    for (Eigen::Index i = 0; i < v.cols(); ++i) s.col(i) = sol_.score(time_, v.col(i));
    return s;
  }

  void evaluate_with_jacobian(const Matrix& v, Matrix& s, Matrix& jac) const override {
    const int d = dim();
    s.resize(d, v.cols());
    jac.resize(d * d, v.cols());
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      s.col(i) = sol_.score(time_, v.col(i));
      jacobian_block(jac, i, d) = sol_.score_jacobian(time_, v.col(i));
    }
  }

  void update(double time, const Matrix&) override { time_ = time; }

  double time() const { return time_; }
  const AnalyticSolution& solution() const { return sol_; }

 private:
  AnalyticSolution sol_;
  double time_;
};

/// Blob-method score: the gradient of the variational derivative of the
/// Gaussian-regularized entropy, discretized on a uniform mesh,
///   s(v) = Σ_l h^d ∇ψ_ε(v − c_l) log( (1/N) Σ_k ψ_ε(c_l − v_k) ).
/// With `cells_per_dim == 0` the mesh is rebuilt on every update with
/// ⌈N^{1/d}⌉ cells per axis, so the mesh count tracks the particle count.
class BlobScore final : public ScoreProvider {
 public:
  BlobScore(int dim, double bandwidth, double half_width, int cells_per_dim = 0)
      : dim_(dim), eps_(bandwidth), half_width_(half_width), cells_per_dim_(cells_per_dim) {
    require(bandwidth > 0.0, "blob bandwidth must be positive");
    require(half_width > 0.0, "blob mesh half-width must be positive");
  }

  int dim() const override { return dim_; }

  void update(double, const Matrix& velocities) override {
    require(velocities.rows() == dim_ && velocities.cols() > 0, "blob update needs particles");
    int n1 = cells_per_dim_;
    if (n1 == 0)
      n1 = static_cast<int>(std::ceil(std::pow(static_cast<double>(velocities.cols()), 1.0 / dim_) - 1e-9));
    mesh_ = MeshSpec{half_width_, std::max(n1, 1), dim_};
    centers_ = mesh_.centers();
    weights_.resize(centers_.cols());
    const double inv2e2 = 1.0 / (2.0 * eps_ * eps_);
    const double log_norm = -0.5 * dim_ * std::log(2.0 * std::numbers::pi * eps_ * eps_) -
                            std::log(static_cast<double>(velocities.cols()));
    Vector expo(velocities.cols());
    for (Eigen::Index l = 0; l < centers_.cols(); ++l) {
      // log-sum-exp keeps far cells finite
      expo = -inv2e2 * (velocities.colwise() - centers_.col(l)).colwise().squaredNorm().transpose();
      const double m = expo.maxCoeff();
      weights_[l] = mesh_.cell_volume() * (log_norm + m + std::log((expo.array() - m).exp().sum()));
    }
    ready_ = true;
  }

  Matrix evaluate(const Matrix& v) const override {
    Matrix s;
    compute(v, s, nullptr);
    return s;
  }

  void evaluate_with_jacobian(const Matrix& v, Matrix& s, Matrix& jac) const override {
    compute(v, s, &jac);
  }

  const MeshSpec& mesh() const { return mesh_; }

 private:
  void compute(const Matrix& v, Matrix& s, Matrix* jac) const {
    if (!ready_) fail(ErrorKind::InvalidArgument, "blob score used before update()");
    require(v.rows() == dim_, "velocity dimension does not match the blob score");
    with_dim(dim_, [&]<int D>() { compute_fixed<D>(v, s, jac); });
  }

  template <int D>
  void compute_fixed(const Matrix& v, Matrix& s, Matrix* jac) const {
    using Vec = Eigen::Matrix<double, D, 1>;
    using Mat = Eigen::Matrix<double, D, D>;
    const double e2 = eps_ * eps_;
    const double inv2e2 = 0.5 / e2;
    const double norm = std::pow(2.0 * std::numbers::pi * e2, -0.5 * D);
    s.setZero(D, v.cols());
    if (jac) jac->setZero(D * D, v.cols());
    const Eigen::Index n_cells = centers_.cols();
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
      const Vec vi = v.col(i);
      Vec acc = Vec::Zero();
      Mat hess = Mat::Zero();
      for (Eigen::Index l = 0; l < n_cells; ++l) {
        const Vec x = vi - centers_.template block<D, 1>(0, l);
        const double psi = norm * std::exp(-inv2e2 * x.squaredNorm()) * weights_[l];
        acc -= (psi / e2) * x;
        if (jac) hess += (psi / e2) * (x * x.transpose() / e2 - Mat::Identity());
      }
      s.col(i) = acc;
      if (jac) jacobian_block(*jac, i, D) = hess;
    }
  }

  int dim_;
  double eps_;
  double half_width_;
  int cells_per_dim_;
  MeshSpec mesh_;
  Matrix centers_;
  Vector weights_;  // h^d · log f_ε at each cell centre
  bool ready_ = false;
};

// ---------------------------------------------------------------------------
// Single-point and aggregate operations over any provider.

inline Vector score_eval(const ScoreProvider& p, const Vector& v) {
  require(v.allFinite(), "score_eval needs a finite velocity");
  Matrix s = p.evaluate(v);
  if (!s.allFinite()) fail(ErrorKind::ModelDiverged, "score is not finite");
  return s.col(0);
}

inline Matrix score_jacobian(const ScoreProvider& p, const Vector& v) {
  require(v.allFinite(), "score_jacobian needs a finite velocity");
  Matrix s, jac;
  p.evaluate_with_jacobian(v, s, jac);
  if (!jac.allFinite()) fail(ErrorKind::ModelDiverged, "score Jacobian is not finite");
  return jacobian_block(jac, 0, p.dim());
}

inline double score_divergence(const ScoreProvider& p, const Vector& v) {
  return score_jacobian(p, v).trace();
}

/// (1/N) Σ |s(v_i)|² + 2 ∇·s(v_i).
inline double ism_loss(const ScoreProvider& p, const Matrix& velocities) {
  require(velocities.cols() > 0, "ism_loss needs at least one particle");
  Matrix s, jac;
  p.evaluate_with_jacobian(velocities, s, jac);
  const int d = p.dim();
  double total = s.squaredNorm();
  for (Eigen::Index i = 0; i < velocities.cols(); ++i) total += 2.0 * jacobian_block(jac, i, d).trace();
  if (!std::isfinite(total)) fail(ErrorKind::ModelDiverged, "ISM loss is not finite");
  return total / static_cast<double>(velocities.cols());
}

/// Σ|s(V_i) − g_i|² / Σ|g_i|² against reference scores g_i (d×N).
inline double initial_fit_loss(const ScoreProvider& p, const Matrix& velocities, const Matrix& reference) {
  require(reference.rows() == velocities.rows() && reference.cols() == velocities.cols(),
          "reference scores must match velocity shape");
  const double denom = reference.squaredNorm();
  if (!(denom > 0.0) || !std::isfinite(denom))
    fail(ErrorKind::DegenerateReference, "reference score norm is zero or non-finite");
  return (p.evaluate(velocities) - reference).squaredNorm() / denom;
}

}  // namespace landau

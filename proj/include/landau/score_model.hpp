#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "landau/error.hpp"
#include "landau/linalg.hpp"
#include "landau/rng.hpp"

namespace landau {

enum class Activation { Swish };

/// Feedforward score network. With `radial` the network is a scalar h(|v|)
/// and the score is h(|v|)·v; otherwise it maps ℝ^d → ℝ^d directly.
/// With `residual`, every hidden layer whose fan-in equals its width gets an
/// identity skip: h_l = swish(W h_{l−1} + b) + h_{l−1}.
struct MlpArchitecture {
  int input_dim = 2;
  int hidden_layers = 3;
  int hidden_width = 32;
  Activation activation = Activation::Swish;
  bool residual = false;
  bool radial = false;

  int network_inputs() const { return radial ? 1 : input_dim; }
  int network_outputs() const { return radial ? 1 : input_dim; }

  void validate() const {
    require(input_dim >= 1, "mlp.input_dim must be positive");
    require(hidden_layers >= 1, "mlp.hidden_layers must be positive");
    require(hidden_width >= 1, "mlp.hidden_width must be positive");
  }

  bool operator==(const MlpArchitecture&) const = default;
};

struct LayerShape {
  int fan_in = 0;
  int fan_out = 0;
  std::size_t weight_offset = 0;  // column-major fan_out × fan_in block
  std::size_t bias_offset = 0;
  bool skip = false;
};

inline std::vector<LayerShape> layer_layout(const MlpArchitecture& arch) {
  std::vector<LayerShape> layers;
  std::size_t offset = 0;
  int fan_in = arch.network_inputs();
  auto push = [&](int fan_out, bool hidden) {
    LayerShape l;
    l.fan_in = fan_in;
    l.fan_out = fan_out;
    l.weight_offset = offset;
    offset += static_cast<std::size_t>(fan_in) * fan_out;
    l.bias_offset = offset;
    offset += fan_out;
    l.skip = hidden && arch.residual && fan_in == fan_out;
    layers.push_back(l);
    fan_in = fan_out;
  };
  for (int i = 0; i < arch.hidden_layers; ++i) push(arch.hidden_width, true);
  push(arch.network_outputs(), false);
  return layers;
}

inline std::size_t parameter_count(const MlpArchitecture& arch) {
  std::size_t n = 0;
  for (const auto& l : layer_layout(arch))
    n += static_cast<std::size_t>(l.fan_in) * l.fan_out + l.fan_out;
  return n;
}

namespace detail {

// swish(x) = x·σ(x) and its first two derivatives.
inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) { return 1.0 / (1.0 + (-x).exp()); }

struct SwishEval {
  Eigen::ArrayXXd value, d1, d2;
};

inline SwishEval swish(const Eigen::ArrayXXd& x, bool need_d2) {
  SwishEval e;
  const Eigen::ArrayXXd sg = sigmoid(x);
  const Eigen::ArrayXXd sg1 = sg * (1.0 - sg);
  e.value = x * sg;
  e.d1 = sg + x * sg1;
  if (need_d2) e.d2 = sg1 * (2.0 + x * (1.0 - 2.0 * sg));
  return e;
}

}  // namespace detail

/// Network parameters plus exact forward-mode derivatives and reverse-mode
/// parameter gradients (including through the forward-mode tangents, which
/// the implicit score-matching loss needs for its divergence term).
class ScoreModel {
 public:
  ScoreModel() = default;

  explicit ScoreModel(const MlpArchitecture& arch)
      : arch_(arch), layers_(layer_layout(arch)), params_(Vector::Zero(parameter_count(arch))) {
    arch_.validate();
  }

  ScoreModel(const MlpArchitecture& arch, Vector params) : ScoreModel(arch) {
    if (params.size() != params_.size())
      fail(ErrorKind::InvalidArgument, "parameter vector has " + std::to_string(params.size()) +
                                           " entries, architecture needs " +
                                           std::to_string(params_.size()));
    params_ = std::move(params);
  }

  /// Zero biases; weights from a normal truncated at ±2σ (re-sampled), scaled
  /// so the truncated distribution has variance 1/fan_in.
  static ScoreModel initialize(const MlpArchitecture& arch, Rng& rng) {
    ScoreModel m(arch);
    // Standard deviation of N(0,1) truncated to [−2, 2].
    constexpr double kTruncatedStd = 0.87962566103423978;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const auto& l : m.layers_) {
      const double scale = std::sqrt(1.0 / l.fan_in) / kTruncatedStd;
      for (int k = 0; k < l.fan_in * l.fan_out; ++k) {
        double x;
        do {
          x = normal(rng);
        } while (std::abs(x) > 2.0);
        m.params_[static_cast<Eigen::Index>(l.weight_offset) + k] = scale * x;
      }
    }
    return m;
  }

  const MlpArchitecture& arch() const { return arch_; }
  const std::vector<LayerShape>& layers() const { return layers_; }
  const Vector& parameters() const { return params_; }
  Vector& parameters() { return params_; }
  int dim() const { return arch_.input_dim; }

  void check_finite() const {
    if (!params_.allFinite()) fail(ErrorKind::ModelDiverged, "non-finite network parameter");
  }

  /// Scores at the columns of v (d×B).
  Matrix score(const Matrix& v) const {
    check_input(v);
    Matrix out(v.rows(), v.cols());
    for_each_chunk(v.cols(), [&](Eigen::Index c0, Eigen::Index n) {
      const Matrix vb = v.middleCols(c0, n);
      Pass p;
      forward(network_input(vb), {}, p, false);
      if (arch_.radial)
        out.middleCols(c0, n) = vb.array().rowwise() * p.y.row(0).array();
      else
        out.middleCols(c0, n) = p.y;
    });
    return out;
  }

  /// Scores and exact Jacobians, jac column i holding ∂s_r/∂v_c at (r + c·d).
  void score_and_jacobian(const Matrix& v, Matrix& s, Matrix& jac) const {
    check_input(v);
    const int d = dim();
    s.resize(d, v.cols());
    jac.resize(d * d, v.cols());
    for_each_chunk(v.cols(), [&](Eigen::Index c0, Eigen::Index n) {
      const Matrix vb = v.middleCols(c0, n);
      Pass p;
      if (!arch_.radial) {
        forward(vb, unit_seeds(d, n), p, false);
        s.middleCols(c0, n) = p.y;
        for (int c = 0; c < d; ++c) jac.block(c * d, c0, d, n) = p.yt[c];
        return;
      }
      const Matrix r = network_input(vb);
      forward(r, {Matrix::Ones(1, n)}, p, false);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double g = p.y(0, i);
        const double gp = p.yt[0](0, i);
        const double ri = r(0, i);
        s.col(c0 + i) = g * vb.col(i);
        auto J = jacobian_block(jac, c0 + i, d);
        J.setIdentity();
        J *= g;
        if (ri > 0.0) J += (gp / ri) * vb.col(i) * vb.col(i).transpose();
      }
    });
  }

  /// (1/N) Σ |s(v_i)|² + 2 ∇·s(v_i); accumulates ∂loss/∂θ into *grad when given.
  double ism_loss(const Matrix& v, Vector* grad = nullptr) const {
    check_input(v);
    require(v.cols() > 0, "ism_loss needs at least one particle");
    const double inv_n = 1.0 / static_cast<double>(v.cols());
    const int d = dim();
    if (grad) grad->setZero(params_.size());
    double total = 0.0;
    for_each_chunk(v.cols(), [&](Eigen::Index c0, Eigen::Index n) {
      const Matrix vb = v.middleCols(c0, n);
      Pass p;
      Matrix ybar;
      std::vector<Matrix> ytbar;
      if (!arch_.radial) {
        forward(vb, unit_seeds(d, n), p, grad != nullptr);
        double div = 0.0;
        for (int k = 0; k < d; ++k) div += p.yt[k].row(k).sum();
        total += p.y.squaredNorm() + 2.0 * div;
        if (grad) {
          ybar = 2.0 * inv_n * p.y;
          for (int k = 0; k < d; ++k) {
            Matrix t = Matrix::Zero(d, n);
            t.row(k).setConstant(2.0 * inv_n);
            ytbar.push_back(std::move(t));
          }
        }
      } else {
        const Matrix r = network_input(vb);
        forward(r, {Matrix::Ones(1, n)}, p, grad != nullptr);
        const auto g = p.y.row(0).array();
        const auto gp = p.yt[0].row(0).array();
        const auto rr = r.row(0).array();
        total += (g * g * rr * rr + 2.0 * d * g + 2.0 * rr * gp).sum();
        if (grad) {
          ybar = (2.0 * inv_n * (g * rr * rr + d)).matrix();
          ytbar.push_back((2.0 * inv_n * rr).matrix());
        }
      }
      if (grad) backward(p, ybar, ytbar, *grad);
    });
    return total * inv_n;
  }

  /// Σ|s(V_i) − target_i|² / Σ|target_i|².
  double initial_fit_loss(const Matrix& v, const Matrix& target, Vector* grad = nullptr) const {
    check_input(v);
    require(target.rows() == v.rows() && target.cols() == v.cols(),
            "target scores must match velocity shape");
    const double denom = target.squaredNorm();
    if (!(denom > 0.0) || !std::isfinite(denom))
      fail(ErrorKind::DegenerateReference, "reference score norm is zero or non-finite");
    if (grad) grad->setZero(params_.size());
    double total = 0.0;
    for_each_chunk(v.cols(), [&](Eigen::Index c0, Eigen::Index n) {
      const Matrix vb = v.middleCols(c0, n);
      const Matrix tb = target.middleCols(c0, n);
      Pass p;
      forward(network_input(vb), {}, p, false);
      Matrix diff;
      if (arch_.radial)
        diff = (vb.array().rowwise() * p.y.row(0).array()).matrix() - tb;
      else
        diff = p.y - tb;
      total += diff.squaredNorm();
      if (grad) {
        Matrix ybar = arch_.radial ? Matrix((2.0 / denom) * (diff.cwiseProduct(vb)).colwise().sum())
                                   : Matrix((2.0 / denom) * diff);
        backward(p, ybar, {}, *grad);
      }
    });
    return total / denom;
  }

 private:
  struct Pass {
    std::vector<Matrix> z;                // pre-activations, one per hidden layer
    std::vector<Matrix> h;                // h[0] input, h[l+1] hidden outputs
    std::vector<Eigen::ArrayXXd> d1, d2;  // swish', swish'' at z
    std::vector<std::vector<Matrix>> zt;  // [tangent][hidden layer]
    std::vector<std::vector<Matrix>> ht;  // [tangent][0..L]
    Matrix y;
    std::vector<Matrix> yt;
  };

  static constexpr Eigen::Index kChunk = 32;

  template <class Fn>
  static void for_each_chunk(Eigen::Index n, Fn&& fn) {
    for (Eigen::Index c0 = 0; c0 < n; c0 += kChunk) fn(c0, std::min(kChunk, n - c0));
  }

  void check_input(const Matrix& v) const {
    require(v.rows() == dim(), "velocity dimension does not match the score model");
    check_finite();
  }

  Matrix network_input(const Matrix& v) const {
    if (!arch_.radial) return v;
    return v.colwise().norm();
  }

  static std::vector<Matrix> unit_seeds(int d, Eigen::Index n) {
    std::vector<Matrix> seeds;
    for (int k = 0; k < d; ++k) {
      Matrix s = Matrix::Zero(d, n);
      s.row(k).setOnes();
      seeds.push_back(std::move(s));
    }
    return seeds;
  }

  Eigen::Map<const Matrix> weight(const LayerShape& l) const {
    return {params_.data() + l.weight_offset, l.fan_out, l.fan_in};
  }
  Eigen::Map<const Vector> bias(const LayerShape& l) const {
    return {params_.data() + l.bias_offset, l.fan_out};
  }

  void forward(const Matrix& x, const std::vector<Matrix>& seeds, Pass& p, bool need_d2) const {
    const std::size_t hidden = layers_.size() - 1;
    const std::size_t nt = seeds.size();
    p.h.assign(1, x);
    p.z.clear();
    p.d1.clear();
    p.d2.clear();
    p.zt.assign(nt, {});
    p.ht.assign(nt, {});
    for (std::size_t t = 0; t < nt; ++t) p.ht[t].push_back(seeds[t]);

    for (std::size_t l = 0; l < hidden; ++l) {
      const auto& L = layers_[l];
      const auto W = weight(L);
      Matrix z = W * p.h[l];
      z.colwise() += bias(L);
      auto act = detail::swish(z.array(), need_d2 && nt > 0);
      Matrix h = act.value.matrix();
      if (L.skip) h += p.h[l];
      for (std::size_t t = 0; t < nt; ++t) {
        Matrix zt = W * p.ht[t][l];
        Matrix ht = (act.d1 * zt.array()).matrix();
        if (L.skip) ht += p.ht[t][l];
        p.zt[t].push_back(std::move(zt));
        p.ht[t].push_back(std::move(ht));
      }
      p.z.push_back(std::move(z));
      p.d1.push_back(std::move(act.d1));
      p.d2.push_back(std::move(act.d2));
      p.h.push_back(std::move(h));
    }

    const auto& O = layers_.back();
    const auto Wo = weight(O);
    p.y = Wo * p.h.back();
    p.y.colwise() += bias(O);
    p.yt.clear();
    for (std::size_t t = 0; t < nt; ++t) p.yt.push_back(Wo * p.ht[t].back());
  }

  void backward(const Pass& p, const Matrix& ybar, const std::vector<Matrix>& ytbar,
                Vector& grad) const {
    const std::size_t hidden = layers_.size() - 1;
    const std::size_t nt = ytbar.size();

    const auto& O = layers_.back();
    const auto Wo = weight(O);
    Eigen::Map<Matrix> gWo(grad.data() + O.weight_offset, O.fan_out, O.fan_in);
    Eigen::Map<Vector> gbo(grad.data() + O.bias_offset, O.fan_out);
    gWo.noalias() += ybar * p.h.back().transpose();
    gbo += ybar.rowwise().sum();
    Matrix hbar = Wo.transpose() * ybar;
    std::vector<Matrix> htbar(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      gWo.noalias() += ytbar[t] * p.ht[t].back().transpose();
      htbar[t] = Wo.transpose() * ytbar[t];
    }

    for (std::size_t l = hidden; l-- > 0;) {
      const auto& L = layers_[l];
      const auto W = weight(L);
      Eigen::Map<Matrix> gW(grad.data() + L.weight_offset, L.fan_out, L.fan_in);
      Eigen::Map<Vector> gb(grad.data() + L.bias_offset, L.fan_out);
      Eigen::ArrayXXd zbar = p.d1[l] * hbar.array();
      const bool need_prev = l > 0;
      for (std::size_t t = 0; t < nt; ++t) {
        const Matrix ztbar = (p.d1[l] * htbar[t].array()).matrix();
        zbar += p.d2[l] * p.zt[t][l].array() * htbar[t].array();
        gW.noalias() += ztbar * p.ht[t][l].transpose();
        if (need_prev) {
          Matrix prev = W.transpose() * ztbar;
          if (L.skip) prev += htbar[t];
          htbar[t] = std::move(prev);
        }
      }
      const Matrix zb = zbar.matrix();
      gW.noalias() += zb * p.h[l].transpose();
      gb += zb.rowwise().sum();
      if (need_prev) {
        Matrix prev = W.transpose() * zb;
        if (L.skip) prev += hbar;
        hbar = std::move(prev);
      }
    }
  }

  MlpArchitecture arch_;
  std::vector<LayerShape> layers_;
  Vector params_;
};

}  // namespace landau

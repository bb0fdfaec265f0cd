#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "landau/error.hpp"
#include "landau/linalg.hpp"

namespace landau {

enum class OptimizerKind { Adam, Adamax };

inline std::string_view to_string(OptimizerKind k) {
  return k == OptimizerKind::Adam ? "adam" : "adamax";
}

inline OptimizerKind parse_optimizer_kind(std::string_view s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "adamax") return OptimizerKind::Adamax;
  fail(ErrorKind::InvalidArgument, "unknown optimizer '" + std::string(s) + "'");
}

/// Moment accumulators for Adam / Adamax. For Adamax `second` holds the
/// exponentially weighted infinity norm u_t = max(β2·u_{t−1}, |g_t|).
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Adamax;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Vector first;
  Vector second;
  std::int64_t step = 0;

  static OptimizerState make(OptimizerKind kind, double learning_rate, Eigen::Index n_params) {
    require(learning_rate > 0.0, "learning rate must be positive");
    OptimizerState s;
    s.kind = kind;
    s.learning_rate = learning_rate;
    s.first = Vector::Zero(n_params);
    s.second = Vector::Zero(n_params);
    return s;
  }
};

inline void optimizer_step(OptimizerState& state, Vector& params, const Vector& grad) {
  require(grad.size() == params.size(), "gradient and parameter sizes differ");
  if (state.first.size() != params.size()) {
    state.first = Vector::Zero(params.size());
    state.second = Vector::Zero(params.size());
  }
  if (!grad.allFinite()) fail(ErrorKind::GradientDiverged, "non-finite gradient", state.step);

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  state.first = b1 * state.first + (1.0 - b1) * grad;
  const double lr_hat = state.learning_rate / (1.0 - std::pow(b1, t));

  if (state.kind == OptimizerKind::Adam) {
    state.second = b2 * state.second + (1.0 - b2) * grad.cwiseAbs2();
    const double c2 = 1.0 - std::pow(b2, t);
    params.array() -=
        lr_hat * state.first.array() / ((state.second.array() / c2).sqrt() + state.epsilon);
  } else {
    state.second = (b2 * state.second).cwiseMax(grad.cwiseAbs());
    params.array() -= lr_hat * state.first.array() / (state.second.array() + state.epsilon);
  }
}

}  // namespace landau

#pragma once

#include <cstddef>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "landau/error.hpp"
#include "landau/optimizer.hpp"
#include "landau/score_model.hpp"

namespace landau {

struct InitialFitResult {
  double final_loss = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;  // loss before each optimizer step, then the final loss
};

inline constexpr std::size_t kDefaultInitialFitCap = 200000;

/// Runs the optimizer on the relative L² fit to the analytic score until the
/// loss drops to `tolerance` or `max_iters` steps have been taken.
inline InitialFitResult train_initial(ScoreModel& model, const Matrix& velocities,
                                      const Matrix& target_scores, double tolerance,
                                      OptimizerState& opt,
                                      std::size_t max_iters = kDefaultInitialFitCap,
                                      bool allow_unconverged = false) {
  require(tolerance > 0.0, "initial-fit tolerance must be positive");
  InitialFitResult res;
  Vector grad(model.parameters().size());
  for (;;) {
    const double loss = model.initial_fit_loss(velocities, target_scores, &grad);
    res.history.push_back(loss);
    res.final_loss = loss;
    if (loss <= tolerance) {
      res.converged = true;
      return res;
    }
    if (res.iterations >= max_iters) break;
    optimizer_step(opt, model.parameters(), grad);
    ++res.iterations;
  }
  if (!allow_unconverged)
    fail(ErrorKind::InitialFitNotConverged,
         "loss " + std::to_string(res.final_loss) + " above tolerance after " +
             std::to_string(res.iterations) + " iterations");
  std::fprintf(stderr, "warning: initial score fit stopped at loss %.3e after %zu iterations\n",
               res.final_loss, res.iterations);
  return res;
}

/// Exactly `max_iters` optimizer steps on the implicit score-matching loss.
/// Returns the loss evaluated before the last step (NaN when max_iters = 0).
inline double train_step_ism(ScoreModel& model, const Matrix& velocities, int max_iters,
                             OptimizerState& opt) {
  double loss = std::numeric_limits<double>::quiet_NaN();
  Vector grad(model.parameters().size());
  for (int it = 0; it < max_iters; ++it) {
    loss = model.ism_loss(velocities, &grad);
    optimizer_step(opt, model.parameters(), grad);
  }
  model.check_finite();
  return loss;
}

}  // namespace landau

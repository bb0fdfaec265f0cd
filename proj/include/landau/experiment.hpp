#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "landau/analytic_solutions.hpp"
#include "landau/collision_kernel.hpp"
#include "landau/config.hpp"
#include "landau/density_tracker.hpp"
#include "landau/diagnostics.hpp"
#include "landau/error.hpp"
#include "landau/io.hpp"
#include "landau/optimizer.hpp"
#include "landau/particle_system.hpp"
#include "landau/rng.hpp"
#include "landau/sampling.hpp"
#include "landau/score_model.hpp"
#include "landau/score_provider.hpp"
#include "landau/training.hpp"

#ifndef LANDAU_VERSION
#define LANDAU_VERSION "0.1.0"
#endif
#ifndef LANDAU_GIT_HASH
#define LANDAU_GIT_HASH "unknown"
#endif

namespace landau {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PhaseTimes {
  double train = 0.0;
  double score = 0.0;
  double drift = 0.0;
  double density = 0.0;
  double metrics = 0.0;
};

/// One row per time level t_n = t0 + nΔt, n = 0..N_T. Quantities describing
/// the update n → n+1 (energy increment, Δt²·mean|G|²) are NaN on the last row.
struct StepMetrics {
  std::int64_t step = 0;
  double time = 0.0;
  Vector momentum;
  double energy = 0.0;
  double energy_increment = kNaN;
  double drift_energy = kNaN;  // Δt² (1/N) Σ|G_i|²
  double max_drift_sq = kNaN;  // max_i |G_i|²
  double entropy_decay = kNaN;
  double ism_loss = kNaN;
  double relative_fisher = kNaN;
  double entropy = kNaN;
  int fp_iterations = 0;
  PhaseTimes times;
};

struct RunRecord {
  ExperimentConfig config;
  InitialFitResult initial_fit;
  std::vector<StepMetrics> rows;
  ParticleEnsemble initial_state;
  ParticleEnsemble final_state;
  std::optional<TrajectoryDensity> density;
  std::optional<ScoreModel> model;
  double wall_seconds = 0.0;
};

using StepObserver =
    std::function<void(std::int64_t step, const ParticleEnsemble&, const ScoreProvider&, const TrajectoryDensity*)>;

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  StepObserver observer;
  std::ostream* log = nullptr;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

template <class Fn>
double timed(Fn&& fn) {
  Stopwatch w;
  fn();
  return w.seconds();
}

inline Matrix analytic_scores(const AnalyticSolution& sol, double t, const Matrix& v) {
  Matrix out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.cols(); ++i) out.col(i) = sol.score(t, v.col(i));
  return out;
}

inline bool oracle_available(const AnalyticSolution& sol, double t) {
  return sol.time_dependent() || t == sol.initial_time();
}

inline std::uint64_t model_seed(std::uint64_t seed) { return Rng(seed).split(1)(); }

}  // namespace detail

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [path, value] : config_entries(cfg)) {
    const auto dot = path.find('.');
    j[path.substr(0, dot)][path.substr(dot + 1)] = value;
  }
  return j;
}

inline nlohmann::json manifest_json(const RunRecord& rec) {
  return {{"name", rec.config.name},
          {"seed", rec.config.seed},
          {"deterministic", rec.config.deterministic},
          {"version", LANDAU_VERSION},
          {"git_hash", LANDAU_GIT_HASH},
          {"particles", rec.config.particles},
          {"steps", rec.config.steps()},
          {"initial_fit_iterations", rec.initial_fit.iterations},
          {"initial_fit_loss", rec.initial_fit.final_loss},
          {"outputs", {"metrics.csv", "timings.csv", "config.json", "config.ini", "snapshots.csv"}}};
}

namespace detail {

inline void put(std::ostream& os, double x) {
  if (std::isnan(x))
    os << "nan";
  else
    os << x;
}

}  // namespace detail

inline void write_metrics_csv(std::ostream& os, const RunRecord& rec) {
  const int d = rec.config.dim();
  os << "step,time";
  for (int k = 0; k < d; ++k) os << ",momentum_" << (k + 1);
  os << ",energy,energy_increment,drift_energy,max_drift_sq,entropy_decay,ism_loss,relative_fisher,entropy,"
        "fp_iterations\n";
  const auto prec = os.precision(17);
  for (const auto& r : rec.rows) {
    os << r.step << ',';
    detail::put(os, r.time);
    for (int k = 0; k < d; ++k) {
      os << ',';
      detail::put(os, r.momentum[k]);
    }
    for (double x : {r.energy, r.energy_increment, r.drift_energy, r.max_drift_sq, r.entropy_decay, r.ism_loss,
                     r.relative_fisher, r.entropy}) {
      os << ',';
      detail::put(os, x);
    }
    os << ',' << r.fp_iterations << '\n';
  }
  os.precision(prec);
}

inline void write_timings_csv(std::ostream& os, const RunRecord& rec) {
  os << "step,train_s,score_s,drift_s,density_s,metrics_s\n";
  for (const auto& r : rec.rows)
    os << r.step << ',' << r.times.train << ',' << r.times.score << ',' << r.times.drift << ','
       << r.times.density << ',' << r.times.metrics << '\n';
}

/// Runs one experiment: Algorithm 2 when density tracking is enabled,
/// Algorithm 1 otherwise.
inline RunRecord run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {}) {
  cfg.validate();
  detail::Stopwatch wall;
  RunRecord rec;
  rec.config = cfg;

  const AnalyticSolution sol(cfg.initial);
  const int d = sol.dim();
  const double dt = cfg.dt;
  const std::int64_t n_steps = cfg.steps();
  const KernelKind kernel = cfg.kernel_kind();

  SamplerConfig scfg;
  scfg.seed = cfg.seed;
  const SampleSet init = sample(sol, cfg.t0, static_cast<std::size_t>(cfg.particles), scfg);
  ParticleEnsemble ens{init.velocities, cfg.t0};
  rec.initial_state = ens;

  std::optional<TrajectoryDensity> tracker;
  if (cfg.density_tracking) tracker = TrajectoryDensity::start(init.density);

  std::unique_ptr<ScoreProvider> provider;
  LearnedScore* learned = nullptr;
  OptimizerState optimizer;
  double initial_train_seconds = 0.0;
  switch (cfg.score.provider) {
    case ProviderKind::Learned: {
      Rng rng(detail::model_seed(cfg.seed));
      ScoreModel model = ScoreModel::initialize(cfg.architecture(), rng);
      optimizer = OptimizerState::make(cfg.score.optimizer, cfg.score.learning_rate, model.parameters().size());
      const Matrix target = detail::analytic_scores(sol, cfg.t0, ens.velocities);
      initial_train_seconds = detail::timed([&] {
        rec.initial_fit = train_initial(model, ens.velocities, target, cfg.score.tolerance, optimizer,
                                        static_cast<std::size_t>(cfg.score.initial_fit_cap),
                                        cfg.score.allow_unconverged);
      });
      if (opt.log)
        *opt.log << "initial fit: loss " << rec.initial_fit.final_loss << " after " << rec.initial_fit.iterations
                 << " iterations\n";
      auto p = std::make_unique<LearnedScore>(std::move(model));
      learned = p.get();
      provider = std::move(p);
      break;
    }
    case ProviderKind::Analytic: provider = std::make_unique<AnalyticScore>(sol, cfg.t0); break;
    case ProviderKind::Blob:
      provider = std::make_unique<BlobScore>(d, cfg.score.blob_bandwidth, cfg.score.blob_half_width,
                                             cfg.score.blob_cells);
      break;
  }

  std::ofstream snapshots;
  if (opt.output_dir && cfg.diagnostics.snapshot_cadence > 0)
    snapshots = open_output(*opt.output_dir / "snapshots.csv");
  bool snapshot_header = true;
  const MeshSpec mesh{cfg.diagnostics.mesh_half_width, cfg.diagnostics.mesh_cells, d};
  const KdeConfig kde{cfg.diagnostics.kde_bandwidth};

  rec.rows.reserve(static_cast<std::size_t>(n_steps + 1));
  Matrix s, jac;
  for (std::int64_t n = 0; n <= n_steps; ++n) {
    StepMetrics row;
    row.step = n;
    row.time = cfg.t0 + static_cast<double>(n) * dt;
    ens.time = row.time;
    const bool full_metrics = n % cfg.diagnostics.metric_cadence == 0 || n == n_steps;
    try {
      if (learned) {
        row.times.train = n == 0 ? initial_train_seconds : detail::timed([&] {
          train_step_ism(learned->model(), ens.velocities, cfg.score.max_iters, optimizer);
        });
      }
      provider->update(row.time, ens.velocities);
      row.times.score = detail::timed([&] {
        if (tracker)
          provider->evaluate_with_jacobian(ens.velocities, s, jac);
        else
          s = provider->evaluate(ens.velocities);
      });
      if (!s.allFinite()) fail(ErrorKind::ModelDiverged, "score is not finite at some particle");

      row.times.metrics = detail::timed([&] {
        const Moments m = moments(ens);
        row.momentum = m.momentum;
        row.energy = m.energy;
        if (tracker) row.entropy = ensemble_entropy(*tracker);
        if (!full_metrics) return;
        row.entropy_decay = entropy_decay_from_scores(ens.velocities, s, kernel);
        if (learned) row.ism_loss = learned->model().ism_loss(ens.velocities);
        if (cfg.diagnostics.fisher && detail::oracle_available(sol, row.time))
          row.relative_fisher = relative_fisher(s, detail::analytic_scores(sol, row.time, ens.velocities));
      });

      if (opt.observer) opt.observer(n, ens, *provider, tracker ? &*tracker : nullptr);
      const int cadence = cfg.diagnostics.snapshot_cadence;
      if (cadence > 0 && (n % cadence == 0 || n == n_steps) && opt.output_dir) {
        write_snapshot_csv(snapshots, row.time, ens.velocities, tracker ? &*tracker : nullptr, snapshot_header);
        snapshot_header = false;
        if (cfg.diagnostics.mesh_dumps) {
          const Vector f = kde_on_mesh(ens, mesh, kde);
          std::optional<Vector> ref;
          if (detail::oracle_available(sol, row.time)) ref = reference_on_mesh(sol, row.time, mesh);
          auto os = open_output(*opt.output_dir / ("mesh_" + std::to_string(n) + ".csv"));
          write_mesh_csv(os, mesh, f, ref ? &*ref : nullptr);
        }
      }

      if (n == n_steps) {
        rec.rows.push_back(std::move(row));
        break;
      }

      const Matrix before = ens.velocities;
      row.times.drift = detail::timed([&] {
        if (cfg.integrator == Integrator::Euler) {
          const DriftField g = compute_drift_from_scores(ens.velocities, s, kernel);
          const Eigen::RowVectorXd g2 = g.colwise().squaredNorm();
          row.drift_energy = dt * dt * g2.mean();
          row.max_drift_sq = g2.maxCoeff();
          euler_step(ens, g, dt);
        } else {
          const MidpointResult r =
              midpoint_step(ens, kernel, *provider, dt, cfg.fp_tol, cfg.fp_max_iters);
          row.fp_iterations = r.iterations;
        }
      });
      row.energy_increment = energy_increment(before, ens.velocities);
      if (tracker) {
        row.times.density = detail::timed([&] {
          const Vector rate = logdet_increment_from(before, s, jac, kernel);
          advance_density(*tracker, rate, dt);
        });
      }
    } catch (const Error& e) {
      throw e.at_step(n);
    }
    if (opt.log && (n % 50 == 0))
      *opt.log << "step " << n << "/" << n_steps << " t=" << row.time << " energy=" << row.energy << '\n';
    rec.rows.push_back(std::move(row));
  }

  ens.time = cfg.t0 + static_cast<double>(n_steps) * dt;
  rec.final_state = std::move(ens);
  rec.density = std::move(tracker);
  if (learned) rec.model = learned->model();
  rec.wall_seconds = wall.seconds();

  if (opt.output_dir) {
    const auto& dir = *opt.output_dir;
    std::filesystem::create_directories(dir);
    {
      auto os = open_output(dir / "metrics.csv");
      write_metrics_csv(os, rec);
    }
    {
      auto os = open_output(dir / "timings.csv");
      write_timings_csv(os, rec);
    }
    {
      auto os = open_output(dir / "config.json");
      os << config_json(cfg).dump(2) << '\n';
    }
    {
      auto os = open_output(dir / "config.ini");
      write_config(os, cfg);
    }
    {
      auto os = open_output(dir / "manifest.json");
      os << manifest_json(rec).dump(2) << '\n';
    }
    if (rec.model) save_checkpoint(dir / "model.json", *rec.model);
  }
  return rec;
}

inline RunRecord run_algorithm1(ExperimentConfig cfg, const RunOptions& opt = {}) {
  cfg.density_tracking = false;
  return run_experiment(cfg, opt);
}

inline RunRecord run_algorithm2(ExperimentConfig cfg, const RunOptions& opt = {}) {
  cfg.density_tracking = true;
  return run_experiment(cfg, opt);
}

// ---------------------------------------------------------------------------
// Sweeps

/// Seed of run j at sweep level k, independent across levels and runs.
inline std::uint64_t sweep_seed(std::uint64_t base, std::size_t level, std::size_t run) {
  return Rng(base).split(1000 + 1000 * level + run)();
}

struct SampleSizeSweep {
  double reference_entropy = 0.0;
  std::vector<std::vector<double>> entropies;
  ConvergenceSeries series;
};

/// e_N study: J independent density-tracking runs per particle count, each
/// scored against the quadrature entropy of the exact solution at t_end.
inline SampleSizeSweep run_sample_size_sweep(const ExperimentConfig& base, const std::vector<std::int64_t>& sizes,
                                             int runs, std::ostream* log = nullptr) {
  require(runs >= 1, "sweep needs at least one run per level");
  const AnalyticSolution sol(base.initial);
  if (!sol.time_dependent()) fail(ErrorKind::InvalidArgument, "entropy sweeps need a closed-form solution");
  SampleSizeSweep out;
  out.reference_entropy = entropy_reference(sol, base.t_end);
  std::vector<double> xs;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    std::vector<double> hs;
    for (int j = 0; j < runs; ++j) {
      ExperimentConfig cfg = base;
      cfg.particles = sizes[k];
      cfg.seed = sweep_seed(base.seed, k, static_cast<std::size_t>(j));
      hs.push_back(run_algorithm2(cfg).rows.back().entropy);
    }
    if (log) *log << "N=" << sizes[k] << " done\n";
    xs.push_back(static_cast<double>(sizes[k]));
    out.entropies.push_back(std::move(hs));
  }
  out.series = sample_size_convergence(xs, out.entropies, out.reference_entropy);
  return out;
}

struct TimeStepSweep {
  std::vector<double> entropies;
  ConvergenceSeries series;
};

/// e_Δt study: one run per step size from the same initial particles.
inline TimeStepSweep run_time_step_sweep(const ExperimentConfig& base, const std::vector<double>& steps,
                                         std::ostream* log = nullptr) {
  TimeStepSweep out;
  for (double h : steps) {
    ExperimentConfig cfg = base;
    cfg.dt = h;
    out.entropies.push_back(run_algorithm2(cfg).rows.back().entropy);
    if (log) *log << "dt=" << h << " done\n";
  }
  out.series = time_step_convergence(steps, out.entropies);
  return out;
}

// ---------------------------------------------------------------------------
// Timing study

struct TimingRow {
  std::int64_t particles = 0;
  double learned_score_s = 0.0;  // I_max ISM steps + one evaluation
  double blob_score_s = 0.0;     // mesh KDE + evaluation, ⌈N^{1/d}⌉ cells per axis
  double drift_s = 0.0;
};

struct TimingStudy {
  std::vector<TimingRow> rows;
  LogLogFit learned;
  LogLogFit blob;
  LogLogFit drift;
};

/// Minimum wall-clock time over `repeats` for each phase at each N.
inline TimingStudy run_timing_study(const ExperimentConfig& cfg, const std::vector<std::int64_t>& sizes,
                                    int repeats = 3, std::ostream* log = nullptr) {
  cfg.validate();
  require(repeats >= 1, "timing study needs at least one repeat");
  const AnalyticSolution sol(cfg.initial);
  const KernelKind kernel = cfg.kernel_kind();
  TimingStudy out;
  std::vector<double> xs, ys_learned, ys_blob, ys_drift;
  for (std::int64_t n : sizes) {
    SamplerConfig scfg;
    scfg.seed = cfg.seed;
    const Matrix v = sample(sol, cfg.t0, static_cast<std::size_t>(n), scfg).velocities;
    Rng rng(detail::model_seed(cfg.seed));
    const ScoreModel init = ScoreModel::initialize(cfg.architecture(), rng);
    TimingRow row;
    row.particles = n;
    row.learned_score_s = row.blob_score_s = row.drift_s = std::numeric_limits<double>::infinity();
    Matrix s;
    for (int r = 0; r < repeats; ++r) {
      ScoreModel model = init;
      OptimizerState o = OptimizerState::make(cfg.score.optimizer, cfg.score.learning_rate, model.parameters().size());
      row.learned_score_s = std::min(row.learned_score_s, detail::timed([&] {
        train_step_ism(model, v, cfg.score.max_iters, o);
        s = model.score(v);
      }));
      BlobScore blob(sol.dim(), cfg.score.blob_bandwidth, cfg.score.blob_half_width, 0);
      row.blob_score_s = std::min(row.blob_score_s, detail::timed([&] {
        blob.update(cfg.t0, v);
        (void)blob.evaluate(v);
      }));
      row.drift_s = std::min(row.drift_s, detail::timed([&] { (void)compute_drift_from_scores(v, s, kernel); }));
    }
    if (log)
      *log << "N=" << n << " learned=" << row.learned_score_s << "s blob=" << row.blob_score_s
           << "s drift=" << row.drift_s << "s\n";
    xs.push_back(static_cast<double>(n));
    ys_learned.push_back(row.learned_score_s);
    ys_blob.push_back(row.blob_score_s);
    ys_drift.push_back(row.drift_s);
    out.rows.push_back(row);
  }
  out.learned = loglog_fit(xs, ys_learned);
  out.blob = loglog_fit(xs, ys_blob);
  out.drift = loglog_fit(xs, ys_drift);
  return out;
}

inline void write_timing_csv(std::ostream& os, const TimingStudy& t) {
  os << "particles,learned_score_s,blob_score_s,drift_s\n";
  for (const auto& r : t.rows)
    os << r.particles << ',' << r.learned_score_s << ',' << r.blob_score_s << ',' << r.drift_s << '\n';
}

}  // namespace landau

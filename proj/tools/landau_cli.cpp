#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "landau.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  bool lenient = false;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  auto* cfg = app->add_option("--config", c.config_path, "INI experiment file")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "Built-in preset name")->excludes(cfg);
  app->add_option("--seed", c.seed, "Override the run seed");
  app->add_flag("--deterministic", c.deterministic, "Fixed summation order (recorded in the manifest)");
  app->add_flag("--lenient", c.lenient, "Warn instead of failing on unknown config keys");
  app->add_option("--out", c.out, "Output directory");
}

landau::ExperimentConfig load(const Common& c) {
  landau::ExperimentConfig cfg;
  if (!c.config_path.empty()) {
    std::ifstream is(c.config_path);
    auto res = landau::parse_config(is, {.strict = !c.lenient});
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    cfg = res.config;
  } else if (!c.preset.empty()) {
    cfg = landau::preset(c.preset);
  } else {
    throw CLI::ValidationError("one of --config or --preset is required");
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.deterministic) cfg.deterministic = true;
  if (!c.out.empty()) cfg.output_dir = c.out;
  cfg.validate();
  return cfg;
}

void print_series(const char* label, const landau::ConvergenceSeries& s) {
  for (std::size_t k = 0; k < s.parameter.size(); ++k)
    std::cout << label << '=' << s.parameter[k] << " error=" << s.error[k] << '\n';
  std::cout << "slope " << s.fit.slope << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Score-based particle solver for the homogeneous Landau equation"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, timing_opts, validate_opts;

  auto* run = app.add_subcommand("run", "Run one experiment");
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "Entropy convergence study in N or in the time step");
  add_common(sweep, sweep_opts);
  std::string sweep_kind = "samples";
  std::vector<std::int64_t> sweep_sizes{100, 1000, 10000};
  std::vector<double> sweep_steps{0.0025, 0.005, 0.01, 0.02, 0.04};
  int sweep_runs = 20;
  sweep->add_option("--kind", sweep_kind, "samples | steps")->check(CLI::IsMember({"samples", "steps"}));
  sweep->add_option("--sizes", sweep_sizes, "Particle counts for a samples sweep");
  sweep->add_option("--steps", sweep_steps, "Step sizes for a steps sweep");
  sweep->add_option("--runs", sweep_runs, "Independent runs per particle count");

  auto* timing = app.add_subcommand("timing", "Phase timings of learned score, blob score and drift");
  add_common(timing, timing_opts);
  std::vector<std::int64_t> timing_sizes{1000, 3000, 10000, 30000};
  int timing_repeats = 2;
  timing->add_option("--sizes", timing_sizes, "Particle counts");
  timing->add_option("--repeats", timing_repeats, "Repeats per size (minimum is reported)");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config, then print it");
  add_common(validate, validate_opts);
  std::string write_path;
  validate->add_option("--write", write_path, "Also write the normalized config to this path");

  auto* presets = app.add_subcommand("presets", "List built-in presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      for (const auto& n : landau::preset_names()) std::cout << n << '\n';
      return 0;
    }
    if (*validate) {
      const auto cfg = load(validate_opts);
      landau::write_config(std::cout, cfg);
      if (!write_path.empty()) {
        auto os = landau::open_output(write_path);
        landau::write_config(os, cfg);
      }
      return 0;
    }
    if (*run) {
      const auto cfg = load(run_opts);
      landau::RunOptions opt;
      opt.output_dir = std::filesystem::path(cfg.output_dir);
      opt.log = &std::cerr;
      const auto rec = landau::run_experiment(cfg, opt);
      const auto& last = rec.rows.back();
      std::cout << "t=" << last.time << " energy=" << last.energy << " momentum=" << last.momentum.transpose();
      if (!std::isnan(last.entropy)) std::cout << " entropy=" << last.entropy;
      std::cout << "\nwrote " << cfg.output_dir << " (" << rec.wall_seconds << " s)\n";
      return 0;
    }
    if (*sweep) {
      const auto cfg = load(sweep_opts);
      const std::filesystem::path dir(cfg.output_dir);
      std::filesystem::create_directories(dir);
      auto os = landau::open_output(dir / "sweep.csv");
      os.precision(17);
      if (sweep_kind == "samples") {
        const auto res = landau::run_sample_size_sweep(cfg, sweep_sizes, sweep_runs, &std::cerr);
        os << "particles,run,entropy,reference\n";
        for (std::size_t k = 0; k < sweep_sizes.size(); ++k)
          for (std::size_t j = 0; j < res.entropies[k].size(); ++j)
            os << sweep_sizes[k] << ',' << j << ',' << res.entropies[k][j] << ',' << res.reference_entropy << '\n';
        print_series("N", res.series);
      } else {
        const auto res = landau::run_time_step_sweep(cfg, sweep_steps, &std::cerr);
        os << "dt,entropy\n";
        for (std::size_t k = 0; k < sweep_steps.size(); ++k) os << sweep_steps[k] << ',' << res.entropies[k] << '\n';
        print_series("dt", res.series);
      }
      return 0;
    }
    if (*timing) {
      const auto cfg = load(timing_opts);
      const auto res = landau::run_timing_study(cfg, timing_sizes, timing_repeats, &std::cerr);
      const std::filesystem::path dir(cfg.output_dir);
      auto os = landau::open_output(dir / "timing.csv");
      landau::write_timing_csv(os, res);
      landau::write_timing_csv(std::cout, res);
      std::cout << "slopes learned=" << res.learned.slope << " blob=" << res.blob.slope
                << " drift=" << res.drift.slope << '\n';
      return 0;
    }
  } catch (const landau::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

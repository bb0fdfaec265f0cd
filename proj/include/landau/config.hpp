#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "landau/analytic_solutions.hpp"
#include "landau/collision_kernel.hpp"
#include "landau/error.hpp"
#include "landau/optimizer.hpp"
#include "landau/score_model.hpp"

namespace landau {

enum class ProviderKind { Learned, Analytic, Blob };
enum class Integrator { Euler, Midpoint };
enum class KernelChoice { Landau, Identity };

inline std::string_view to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::Learned: return "learned";
    case ProviderKind::Analytic: return "analytic";
    case ProviderKind::Blob: return "blob";
  }
  return "?";
}

inline std::string_view to_string(Integrator k) { return k == Integrator::Euler ? "euler" : "midpoint"; }
inline std::string_view to_string(KernelChoice k) { return k == KernelChoice::Landau ? "landau" : "identity"; }

struct ScoreSettings {
  ProviderKind provider = ProviderKind::Learned;
  int hidden_layers = 3;
  int hidden_width = 32;
  bool residual = false;
  bool radial = false;
  OptimizerKind optimizer = OptimizerKind::Adamax;
  double learning_rate = 1e-4;
  double tolerance = 5e-5;  // δ, initial fit target
  int max_iters = 25;       // I_max per time step
  std::int64_t initial_fit_cap = 200000;
  bool allow_unconverged = false;
  double blob_bandwidth = 0.15;
  double blob_half_width = 4.0;
  int blob_cells = 0;  // 0: ⌈N^{1/d}⌉ per axis
};

struct DiagnosticSettings {
  double mesh_half_width = 4.0;
  int mesh_cells = 100;
  double kde_bandwidth = 0.15;
  int metric_cadence = 1;
  int snapshot_cadence = 50;
  bool mesh_dumps = false;
  bool fisher = true;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool deterministic = true;

  KernelChoice kernel = KernelChoice::Landau;
  double c_gamma = 1.0 / 16.0;
  double gamma = 0.0;
  double pair_floor = kDefaultPairFloor;

  SolutionKind initial = SolutionKind::BKW2D;
  std::int64_t particles = 2000;
  double dt = 0.01;
  double t0 = 0.0;
  double t_end = 1.0;

  Integrator integrator = Integrator::Euler;
  double fp_tol = 1e-10;
  int fp_max_iters = 100;

  bool density_tracking = false;

  ScoreSettings score;
  DiagnosticSettings diagnostics;

  int dim() const { return AnalyticSolution(initial).dim(); }

  std::int64_t steps() const { return std::llround((t_end - t0) / dt); }

  KernelKind kernel_kind() const {
    if (kernel == KernelChoice::Identity) return IdentityKernel{dim()};
    return make_landau(c_gamma, gamma, dim(), pair_floor);
  }

  MlpArchitecture architecture() const {
    MlpArchitecture a;
    a.input_dim = dim();
    a.hidden_layers = score.hidden_layers;
    a.hidden_width = score.hidden_width;
    a.residual = score.residual;
    a.radial = score.radial;
    return a;
  }

  void validate() const;
};

namespace detail {

inline void config_error(const std::string& path, const std::string& what) {
  fail(ErrorKind::ConfigError, path + ": " + what);
}

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_floating_point_v<T>) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  } else if constexpr (std::is_enum_v<T>) {
    return std::string(to_string(v));
  } else {
    return std::to_string(v);
  }
}

template <class T>
T parse_number(const std::string& path, const std::string& text) {
  T v{};
  const char* b = text.data();
  const char* e = b + text.size();
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc{} || r.ptr != e) config_error(path, "cannot parse '" + text + "'");
  return v;
}

template <class T>
T parse_value(const std::string& path, const std::string& text) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    config_error(path, "expected a boolean, got '" + text + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_same_v<T, ProviderKind>) {
    for (auto k : {ProviderKind::Learned, ProviderKind::Analytic, ProviderKind::Blob})
      if (text == to_string(k)) return k;
    config_error(path, "expected learned|analytic|blob, got '" + text + "'");
  } else if constexpr (std::is_same_v<T, Integrator>) {
    for (auto k : {Integrator::Euler, Integrator::Midpoint})
      if (text == to_string(k)) return k;
    config_error(path, "expected euler|midpoint, got '" + text + "'");
  } else if constexpr (std::is_same_v<T, KernelChoice>) {
    for (auto k : {KernelChoice::Landau, KernelChoice::Identity})
      if (text == to_string(k)) return k;
    config_error(path, "expected landau|identity, got '" + text + "'");
  } else if constexpr (std::is_same_v<T, OptimizerKind>) {
    for (auto k : {OptimizerKind::Adam, OptimizerKind::Adamax})
      if (text == to_string(k)) return k;
    config_error(path, "expected adam|adamax, got '" + text + "'");
  } else if constexpr (std::is_same_v<T, SolutionKind>) {
    for (auto k : {SolutionKind::BKW2D, SolutionKind::BKW3D, SolutionKind::BiMaxwellian2D,
                   SolutionKind::Rosenbluth3D})
      if (text == to_string(k)) return k;
    config_error(path, "unknown initial law '" + text + "'");
  } else {
    return parse_number<T>(path, text);
  }
  return T{};
}

struct Field {
  std::string path;  // section.key
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

template <class T>
Field bind_field(std::string path, T& ref) {
  return {path, [&ref] { return format_value(ref); },
          [&ref, path](const std::string& s) { ref = parse_value<T>(path, s); }};
}

inline std::vector<Field> fields(ExperimentConfig& c) {
  return {
      bind_field("run.name", c.name),
      bind_field("run.seed", c.seed),
      bind_field("run.output_dir", c.output_dir),
      bind_field("run.deterministic", c.deterministic),
      bind_field("run.integrator", c.integrator),
      bind_field("run.fp_tol", c.fp_tol),
      bind_field("run.fp_max_iters", c.fp_max_iters),
      bind_field("run.density_tracking", c.density_tracking),
      bind_field("kernel.kind", c.kernel),
      bind_field("kernel.c_gamma", c.c_gamma),
      bind_field("kernel.gamma", c.gamma),
      bind_field("kernel.pair_floor", c.pair_floor),
      bind_field("initial.law", c.initial),
      bind_field("initial.particles", c.particles),
      bind_field("time.t0", c.t0),
      bind_field("time.t_end", c.t_end),
      bind_field("time.dt", c.dt),
      bind_field("score.provider", c.score.provider),
      bind_field("score.hidden_layers", c.score.hidden_layers),
      bind_field("score.hidden_width", c.score.hidden_width),
      bind_field("score.residual", c.score.residual),
      bind_field("score.radial", c.score.radial),
      bind_field("score.optimizer", c.score.optimizer),
      bind_field("score.learning_rate", c.score.learning_rate),
      bind_field("score.tolerance", c.score.tolerance),
      bind_field("score.max_iters", c.score.max_iters),
      bind_field("score.initial_fit_cap", c.score.initial_fit_cap),
      bind_field("score.allow_unconverged", c.score.allow_unconverged),
      bind_field("score.blob_bandwidth", c.score.blob_bandwidth),
      bind_field("score.blob_half_width", c.score.blob_half_width),
      bind_field("score.blob_cells", c.score.blob_cells),
      bind_field("diagnostics.mesh_half_width", c.diagnostics.mesh_half_width),
      bind_field("diagnostics.mesh_cells", c.diagnostics.mesh_cells),
      bind_field("diagnostics.kde_bandwidth", c.diagnostics.kde_bandwidth),
      bind_field("diagnostics.metric_cadence", c.diagnostics.metric_cadence),
      bind_field("diagnostics.snapshot_cadence", c.diagnostics.snapshot_cadence),
      bind_field("diagnostics.mesh_dumps", c.diagnostics.mesh_dumps),
      bind_field("diagnostics.fisher", c.diagnostics.fisher),
  };
}

}  // namespace detail

inline void ExperimentConfig::validate() const {
  using detail::config_error;
  auto positive = [](const char* path, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) config_error(path, "must be positive, got " + detail::format_value(v));
  };
  positive("time.dt", dt);
  if (!std::isfinite(t0)) config_error("time.t0", "must be finite");
  if (!(t_end >= t0)) config_error("time.t_end", "must not precede time.t0");
  const double n_steps = (t_end - t0) / dt;
  if (std::abs(n_steps - std::round(n_steps)) > 1e-6 * std::max(1.0, n_steps))
    config_error("time.dt", "must divide t_end − t0 into a whole number of steps");
  if (particles < 1) config_error("initial.particles", "must be positive");
  if (kernel == KernelChoice::Landau) {
    positive("kernel.c_gamma", c_gamma);
    const int d = dim();
    if (!(gamma >= -d - 1.0 && gamma <= 1.0)) config_error("kernel.gamma", "must lie in [-d-1, 1]");
  }
  if (!(pair_floor >= 0.0)) config_error("kernel.pair_floor", "must be nonnegative");
  if (initial == SolutionKind::BKW3D && t0 < bkw3d_min_time() - 1e-12)
    config_error("time.t0", "the 3D BKW solution is only valid from t = " + detail::format_value(bkw3d_min_time()));
  if ((initial == SolutionKind::BiMaxwellian2D || initial == SolutionKind::Rosenbluth3D) && t0 != 0.0)
    config_error("time.t0", "this initial law is only available at t = 0");
  if (score.provider == ProviderKind::Analytic && !AnalyticSolution(initial).time_dependent() && t_end > t0)
    config_error("score.provider", "no closed-form score exists for this law beyond t = 0");
  if (score.hidden_layers < 1) config_error("score.hidden_layers", "must be positive");
  if (score.hidden_width < 1) config_error("score.hidden_width", "must be positive");
  positive("score.learning_rate", score.learning_rate);
  positive("score.tolerance", score.tolerance);
  if (score.max_iters < 0) config_error("score.max_iters", "must be nonnegative");
  if (score.initial_fit_cap < 0) config_error("score.initial_fit_cap", "must be nonnegative");
  positive("score.blob_bandwidth", score.blob_bandwidth);
  positive("score.blob_half_width", score.blob_half_width);
  if (score.blob_cells < 0) config_error("score.blob_cells", "must be nonnegative");
  positive("run.fp_tol", fp_tol);
  if (fp_max_iters < 1) config_error("run.fp_max_iters", "must be positive");
  positive("diagnostics.mesh_half_width", diagnostics.mesh_half_width);
  if (diagnostics.mesh_cells < 1) config_error("diagnostics.mesh_cells", "must be positive");
  positive("diagnostics.kde_bandwidth", diagnostics.kde_bandwidth);
  if (diagnostics.metric_cadence < 1) config_error("diagnostics.metric_cadence", "must be positive");
  if (diagnostics.snapshot_cadence < 0) config_error("diagnostics.snapshot_cadence", "must be nonnegative");
}

struct ParseOptions {
  bool strict = true;
};

struct ParseResult {
  ExperimentConfig config;
  std::vector<std::string> warnings;
};

/// Reads an INI document. Missing keys keep their defaults; unknown keys are
/// errors in strict mode and warnings otherwise.
inline ParseResult parse_config(std::istream& is, const ParseOptions& opt = {}, ExperimentConfig base = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::ConfigError, std::string("malformed config: ") + e.what());
  }
  ParseResult out{std::move(base), {}};
  auto table = detail::fields(out.config);
  std::map<std::string, detail::Field*> by_path;
  for (auto& f : table) by_path[f.path] = &f;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      const std::string msg = section + ": keys must live inside a [section]";
      if (opt.strict) fail(ErrorKind::ConfigError, msg);
      out.warnings.push_back(msg);
      continue;
    }
    for (const auto& [key, value] : body) {
      const std::string path = section + "." + key;
      auto it = by_path.find(path);
      if (it == by_path.end()) {
        if (opt.strict) fail(ErrorKind::ConfigError, path + ": unknown key");
        out.warnings.push_back(path + ": unknown key ignored");
        continue;
      }
      it->second->set(value.data());
    }
  }
  out.config.validate();
  return out;
}

inline ParseResult parse_config_string(const std::string& text, const ParseOptions& opt = {}) {
  std::istringstream is(text);
  return parse_config(is, opt);
}

/// Writes every field, grouped by section, in a form `parse_config` reads back
/// to an identical config.
inline void write_config(std::ostream& os, const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  std::string current;
  for (const auto& f : detail::fields(copy)) {
    const auto dot = f.path.find('.');
    const std::string section = f.path.substr(0, dot);
    if (section != current) {
      if (!current.empty()) os << '\n';
      os << '[' << section << "]\n";
      current = section;
    }
    os << f.path.substr(dot + 1) << " = " << f.get() << '\n';
  }
}

inline std::string config_to_string(const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_config(os, cfg);
  return os.str();
}

/// Flat section.key → value view, used for the JSON echo.
inline std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& f : detail::fields(copy)) out.emplace_back(f.path, f.get());
  return out;
}

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return config_entries(a) == config_entries(b);
}

// ---------------------------------------------------------------------------
// Presets

inline std::vector<std::string> preset_names() {
  return {"example1",      "example1_desk", "example2",      "example2_desk", "example3",
          "example3_desk", "example4",      "example4_desk", "example5"};
}

inline ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  c.name = std::string(name);
  c.output_dir = "out/" + c.name;
  if (name == "example1" || name == "example1_desk") {
    c.initial = SolutionKind::BKW2D;
    c.c_gamma = 1.0 / 16.0;
    c.gamma = 0.0;
    c.particles = 150 * 150;
    c.dt = 0.01;
    c.t_end = 5.0;
    c.score.tolerance = 5e-5;
    if (name == "example1_desk") {
      c.particles = 2000;
      c.t_end = 1.0;
      c.score.tolerance = 1e-3;
    }
  } else if (name == "example2" || name == "example2_desk") {
    c.initial = SolutionKind::BKW3D;
    c.c_gamma = 1.0 / 24.0;
    c.gamma = 0.0;
    c.particles = 40 * 40 * 40;
    c.t0 = 5.5;
    c.t_end = 6.0;
    c.dt = 0.01;
    c.score.tolerance = 1e-4;
    c.diagnostics.mesh_cells = 40;
    if (name == "example2_desk") {
      c.particles = 2000;
      c.t_end = 5.6;
      c.score.tolerance = 1e-3;
    }
  } else if (name == "example3" || name == "example3_desk") {
    c.initial = SolutionKind::BiMaxwellian2D;
    c.c_gamma = 1.0 / 16.0;
    c.gamma = -3.0;
    c.particles = 120 * 120;
    c.dt = 0.1;
    c.t_end = 40.0;
    c.score.hidden_layers = 2;
    c.score.tolerance = 1e-5;
    c.diagnostics.mesh_half_width = 10.0;
    c.diagnostics.mesh_cells = 120;
    c.diagnostics.kde_bandwidth = 0.3;
    if (name == "example3_desk") {
      c.particles = 1000;
      c.t_end = 20.0;
      c.score.tolerance = 1e-3;
    }
  } else if (name == "example4" || name == "example4_desk") {
    c.initial = SolutionKind::Rosenbluth3D;
    c.c_gamma = 1.0 / (4.0 * std::numbers::pi);
    c.gamma = -3.0;
    c.particles = 30 * 30 * 30;
    c.dt = 0.2;
    c.t_end = 20.0;
    c.score.residual = true;
    c.score.optimizer = OptimizerKind::Adam;
    c.score.tolerance = 5e-4;
    c.diagnostics.mesh_half_width = 1.0;
    c.diagnostics.mesh_cells = 64;
    c.diagnostics.kde_bandwidth = 0.045;
    if (name == "example4_desk") {
      c.particles = 1000;
      c.t_end = 4.0;
      c.score.tolerance = 5e-3;
    }
  } else if (name == "example5") {
    c.initial = SolutionKind::BKW2D;
    c.c_gamma = 1.0 / 16.0;
    c.gamma = 0.0;
    c.particles = 10000;
    c.dt = 0.01;
    c.t_end = 0.1;
    c.score.provider = ProviderKind::Analytic;
    c.density_tracking = true;
    c.diagnostics.fisher = false;
  } else {
    fail(ErrorKind::ConfigError, "unknown preset '" + std::string(name) + "'");
  }
  c.validate();
  return c;
}

}  // namespace landau

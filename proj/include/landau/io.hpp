#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "landau/density_tracker.hpp"
#include "landau/error.hpp"
#include "landau/linalg.hpp"
#include "landau/score_model.hpp"

namespace landau {

inline constexpr int kCheckpointVersion = 1;

/// Rows t, particle_id, v_1..v_d[, logdet, density]. The header is written
/// when `header` is set so consecutive snapshots can share one file.
inline void write_snapshot_csv(std::ostream& os, double t, const Matrix& velocities,
                               const TrajectoryDensity* tracker = nullptr, bool header = true) {
  if (tracker) require(tracker->size() == velocities.cols(), "tracker size does not match the ensemble");
  const auto d = velocities.rows();
  if (header) {
    os << "t,particle_id";
    for (Eigen::Index k = 0; k < d; ++k) os << ",v_" << (k + 1);
    if (tracker) os << ",logdet,density";
    os << '\n';
  }
  const auto prec = os.precision(17);
  for (Eigen::Index i = 0; i < velocities.cols(); ++i) {
    os << t << ',' << i;
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << velocities(k, i);
    if (tracker) os << ',' << tracker->logdet[i] << ',' << tracker->density[i];
    os << '\n';
  }
  os.precision(prec);
}

inline nlohmann::json checkpoint_json(const ScoreModel& model) {
  const auto& a = model.arch();
  const auto& p = model.parameters();
  return {{"format", "landau-score-checkpoint"},
          {"version", kCheckpointVersion},
          {"architecture",
           {{"input_dim", a.input_dim},
            {"hidden_layers", a.hidden_layers},
            {"hidden_width", a.hidden_width},
            {"activation", "swish"},
            {"residual", a.residual},
            {"radial", a.radial}}},
          {"parameter_count", p.size()},
          {"parameters", std::vector<double>(p.data(), p.data() + p.size())}};
}

inline ScoreModel model_from_checkpoint(const nlohmann::json& j) {
  try {
    if (j.at("format") != "landau-score-checkpoint") fail(ErrorKind::IoError, "not a score checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) fail(ErrorKind::IoError, "unsupported checkpoint version");
    const auto& ja = j.at("architecture");
    if (ja.at("activation") != "swish") fail(ErrorKind::IoError, "unsupported activation");
    MlpArchitecture a;
    a.input_dim = ja.at("input_dim").get<int>();
    a.hidden_layers = ja.at("hidden_layers").get<int>();
    a.hidden_width = ja.at("hidden_width").get<int>();
    a.residual = ja.at("residual").get<bool>();
    a.radial = ja.at("radial").get<bool>();
    a.validate();
    const auto values = j.at("parameters").get<std::vector<double>>();
    const auto declared = j.at("parameter_count").get<std::size_t>();
    if (values.size() != declared || declared != parameter_count(a))
      fail(ErrorKind::IoError, "checkpoint parameter count " + std::to_string(values.size()) +
                                   " does not match the architecture (" +
                                   std::to_string(parameter_count(a)) + ")");
    return ScoreModel(a, Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::IoError, std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const std::filesystem::path& path, const ScoreModel& model) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path.string());
  os << checkpoint_json(model).dump() << '\n';
}

inline ScoreModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::IoError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::IoError, std::string("malformed checkpoint: ") + e.what());
  }
  return model_from_checkpoint(j);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) fail(ErrorKind::IoError, "cannot write " + path.string());
  return os;
}

}  // namespace landau

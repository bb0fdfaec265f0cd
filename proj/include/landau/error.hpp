#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace landau {

enum class ErrorKind {
  DegeneratePair,
  ModelDiverged,
  GradientDiverged,
  DegenerateReference,
  InitialFitNotConverged,
  FixedPointNotConverged,
  DensityOverflow,
  DensityInvalid,
  InitialDensityUnavailable,
  ScoreSingular,
  InvalidTime,
  EnvelopeTooLoose,
  InsufficientData,
  InvalidArgument,
  ConfigError,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegeneratePair: return "DegeneratePair";
    case ErrorKind::ModelDiverged: return "ModelDiverged";
    case ErrorKind::GradientDiverged: return "GradientDiverged";
    case ErrorKind::DegenerateReference: return "DegenerateReference";
    case ErrorKind::InitialFitNotConverged: return "InitialFitNotConverged";
    case ErrorKind::FixedPointNotConverged: return "FixedPointNotConverged";
    case ErrorKind::DensityOverflow: return "DensityOverflow";
    case ErrorKind::DensityInvalid: return "DensityInvalid";
    case ErrorKind::InitialDensityUnavailable: return "InitialDensityUnavailable";
    case ErrorKind::ScoreSingular: return "ScoreSingular";
    case ErrorKind::InvalidTime: return "InvalidTime";
    case ErrorKind::EnvelopeTooLoose: return "EnvelopeTooLoose";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library-wide exception. `index()` carries the offending particle (or step)
/// when the failure is attributable to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }
  std::optional<std::int64_t> step() const noexcept { return step_; }

  /// Same error, tagged with the time step at which it surfaced.
  Error at_step(std::int64_t step) const {
    Error e(*this, "step " + std::to_string(step) + ": " + what());
    e.step_ = step;
    return e;
  }

 private:
  Error(const Error& base, const std::string& message)
      : std::runtime_error(message), kind_(base.kind_), index_(base.index_) {}

  ErrorKind kind_;
  std::optional<std::size_t> index_;
  std::optional<std::int64_t> step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what,
                              std::optional<std::size_t> index = std::nullopt) {
  throw Error(kind, what, index);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace landau

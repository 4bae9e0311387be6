#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nk {

// Machine-readable error kinds. The CLI maps these onto exit codes and the
// JSON error report, so the names here are part of the external contract.
enum class ErrorKind {
  MissingFile,
  SchemaViolation,
  InconsistentTiming,
  UnknownTrial,
  CorruptData,
  DegenerateAxis,
  FactorTooLarge,
  UnrealizableSpec,
  ZeroVariance,
  KinLongerThanEeg,
  SpanTooShort,
  NotEnoughTrials,
  TrialTooShort,
  EmptyPartition,
  ShapeMismatch,
  NonScalarLoss,
  InvalidConfig,
  LengthMismatch,
  DegenerateTarget,
  NonFiniteLoss,
  InsufficientPrePost,
  EmptyInput,
  SingularSystem,
  DatasetMissing,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::InconsistentTiming: return "InconsistentTiming";
    case ErrorKind::UnknownTrial: return "UnknownTrial";
    case ErrorKind::CorruptData: return "CorruptData";
    case ErrorKind::DegenerateAxis: return "DegenerateAxis";
    case ErrorKind::FactorTooLarge: return "FactorTooLarge";
    case ErrorKind::UnrealizableSpec: return "UnrealizableSpec";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::KinLongerThanEeg: return "KinLongerThanEeg";
    case ErrorKind::SpanTooShort: return "SpanTooShort";
    case ErrorKind::NotEnoughTrials: return "NotEnoughTrials";
    case ErrorKind::TrialTooShort: return "TrialTooShort";
    case ErrorKind::EmptyPartition: return "EmptyPartition";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonScalarLoss: return "NonScalarLoss";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateTarget: return "DegenerateTarget";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::InsufficientPrePost: return "InsufficientPrePost";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::DatasetMissing: return "DatasetMissing";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // True for errors caused by user input (bad config, missing files) as
  // opposed to internal failures. Drives the CLI exit code (2 vs 1).
  bool user_error() const noexcept {
    switch (kind_) {
      case ErrorKind::MissingFile:
      case ErrorKind::SchemaViolation:
      case ErrorKind::InconsistentTiming:
      case ErrorKind::UnknownTrial:
      case ErrorKind::CorruptData:
      case ErrorKind::InvalidConfig:
      case ErrorKind::DatasetMissing:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace nk

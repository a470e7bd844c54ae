#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stampede {

enum class ErrorKind {
  // dataset
  FileNotFound,
  MissingColumn,
  BadEnumValue,
  NonNumericField,
  ScoreOutOfRange,
  InvariantViolation,
  DuplicateYear,
  EmptyJoin,
  EmptyInput,
  // regression
  RankDeficient,
  Underdetermined,
  DimensionMismatch,
  DegenerateInput,
  InvalidDof,
  // crowdsim
  InvalidConfig,
  NoOpenExit,
  UnreachableTarget,
  // risk
  BadWeights,
  // textmine
  EmptyCorpus,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::BadEnumValue: return "BadEnumValue";
    case ErrorKind::NonNumericField: return "NonNumericField";
    case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::DuplicateYear: return "DuplicateYear";
    case ErrorKind::EmptyJoin: return "EmptyJoin";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::Underdetermined: return "Underdetermined";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::InvalidDof: return "InvalidDof";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::NoOpenExit: return "NoOpenExit";
    case ErrorKind::UnreachableTarget: return "UnreachableTarget";
    case ErrorKind::BadWeights: return "BadWeights";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
  }
  return "Unknown";
}

/// Every library failure surfaces as this exception. `kind()` is stable and
/// machine-readable; `what()` carries the human detail (offending cell, file).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace stampede

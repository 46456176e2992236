#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace costsel {

enum class ErrorCode {
  InvalidVariableIndex,
  InvalidCost,
  InconsistentProfile,
  NoFeasibleModel,
  EngineNeedsTwoVariables,
  DimensionMismatch,
  EmptyEvaluationSet,
  DegenerateLabels,
  ConvergenceFailure,
  SequenceTooShort,
  ProblemTooLarge,
  InvalidCorrelation,
  MissingFile,
  ParseError,
  UnknownLabelColumn,
  EmptyDataset,
  DatasetTooSmall,
  TooFewPoints,
  IoError,
  InvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidVariableIndex: return "InvalidVariableIndex";
    case ErrorCode::InvalidCost: return "InvalidCost";
    case ErrorCode::InconsistentProfile: return "InconsistentProfile";
    case ErrorCode::NoFeasibleModel: return "NoFeasibleModel";
    case ErrorCode::EngineNeedsTwoVariables: return "EngineNeedsTwoVariables";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyEvaluationSet: return "EmptyEvaluationSet";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::SequenceTooShort: return "SequenceTooShort";
    case ErrorCode::ProblemTooLarge: return "ProblemTooLarge";
    case ErrorCode::InvalidCorrelation: return "InvalidCorrelation";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownLabelColumn: return "UnknownLabelColumn";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Carries the 1-based data row (header excluded) and 1-based column of a bad cell.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : Error(ErrorCode::ParseError,
              "row " + std::to_string(row) + ", col " + std::to_string(col) + ": " + what),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Lasso solver failure for one (class, lambda) slice; both are 1-based.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(int klass, std::size_t lambda_step, const std::string& what)
      : Error(ErrorCode::ConvergenceFailure, "class " + std::to_string(klass) + ", lambda step " +
                                                 std::to_string(lambda_step) + ": " + what),
        klass_(klass),
        lambda_step_(lambda_step) {}

  int klass() const noexcept { return klass_; }
  std::size_t lambda_step() const noexcept { return lambda_step_; }

 private:
  int klass_;
  std::size_t lambda_step_;
};

}  // namespace costsel

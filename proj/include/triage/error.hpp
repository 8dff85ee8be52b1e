#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace triage {

enum class ErrorCode {
  MalformedLine,
  MissingField,
  DuplicatePmid,
  MissingPmid,
  EmptySet,
  InvalidArgument,
  MissingCancer,
  SingleClass,
  LengthMismatch,
  VocabularyMismatch,
  EmptyTrainingSet,
  EmptyInput,
  SizeExceedsTrainSet,
  EmptyGrid,
  VersionMismatch,
  CorruptFile,
  KindMismatch,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::DuplicatePmid: return "DuplicatePmid";
    case ErrorCode::MissingPmid: return "MissingPmid";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingCancer: return "MissingCancer";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::VocabularyMismatch: return "VocabularyMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SizeExceedsTrainSet: return "SizeExceedsTrainSet";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library. `code()` identifies the condition;
/// `line()` is the 1-based input line (or record index) when one applies.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace triage

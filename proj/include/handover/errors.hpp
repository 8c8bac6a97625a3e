#pragma once

#include <exception>
#include <string>
#include <utility>

namespace handover {

/// Root of the library's exception hierarchy.
///
/// Every error carries an optional stage tag ("refine", "detect_missing",
/// ...) that orchestration code attaches while the exception propagates, so
/// the message names where in the pipeline the failure originated.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) { rebuild(); }

  const char* what() const noexcept override { return full_.c_str(); }
  const std::string& message() const noexcept { return message_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Sets the stage tag once; inner stages win over outer ones.
  void tag_stage(const std::string& stage) {
    if (stage_.empty()) {
      stage_ = stage;
      rebuild();
    }
  }

 private:
  void rebuild() { full_ = stage_.empty() ? message_ : "[" + stage_ + "] " + message_; }

  std::string message_;
  std::string stage_;
  std::string full_;
};

/// Malformed or inconsistent caller input (dimension mismatch, empty mask, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Dataset or file loading failure; names the offending entry.
class LoadError : public InputError {
 public:
  using InputError::InputError;
};

/// Geometry without a well-defined answer (coincident points, tied eigenvalues).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage could not produce a result.
class PipelineError : public Error {
 public:
  using Error::Error;
};

/// Part-segmentation backend adapter failed.
class BackendError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

/// Grasp selection failed, e.g. the regeneration budget ran out.
class SelectionError : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

/// Reasoner failures. Subclasses distinguish transport from content problems.
class ReasonerError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public ReasonerError {
 public:
  using ReasonerError::ReasonerError;
};

/// The final answer violated the output structure after all repair attempts.
class SchemaError : public ReasonerError {
 public:
  using ReasonerError::ReasonerError;
};

class RetriesExhaustedError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

/// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kSuccess = 0,
  kInputError = 2,
  kPipelineFailure = 3,
  kReasonerFailure = 4,
};

/// Runs `fn`, tagging any library error that escapes with `stage`.
template <typename Fn>
decltype(auto) with_stage(const std::string& stage, Fn&& fn) {
  try {
    return std::forward<Fn>(fn)();
  } catch (Error& e) {
    e.tag_stage(stage);
    throw;
  }
}

}  // namespace handover

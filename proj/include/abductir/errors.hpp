#pragma once

#include <stdexcept>
#include <string>

namespace abductir {

/// Error categories double as CLI exit codes.
enum class ErrorKind : int {
  config = 1,
  data = 2,
  scorer = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class ScorerError : public Error {
 public:
  explicit ScorerError(const std::string& what) : Error(ErrorKind::scorer, what) {}
};

/// Wraps a failure inside a pipeline stage with the stage name and the
/// offending (question, option). Keeps the category of the original error.
class StageError : public Error {
 public:
  StageError(std::string stage, std::string question_id, std::string option_label,
             const Error& cause)
      : Error(cause.kind(), format(stage, question_id, option_label, cause.what())),
        stage_(std::move(stage)),
        question_id_(std::move(question_id)),
        option_label_(std::move(option_label)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& question_id() const noexcept { return question_id_; }
  const std::string& option_label() const noexcept { return option_label_; }

 private:
  static std::string format(const std::string& stage, const std::string& qid,
                            const std::string& label, const char* cause) {
    std::string out = "stage '" + stage + "' failed";
    if (!qid.empty()) {
      out += " at question " + qid;
      if (!label.empty()) out += " option " + label;
    }
    out += ": ";
    out += cause;
    return out;
  }

  std::string stage_;
  std::string question_id_;
  std::string option_label_;
};

}  // namespace abductir

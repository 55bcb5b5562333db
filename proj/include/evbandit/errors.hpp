#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evbandit {

/// Coarse error category. The C API maps these onto status codes and the
/// CLI onto exit codes, so new kinds should be added at the end.
enum class ErrorKind {
  domain,
  parse,
  validation,
  config,
  sampler_failure,
  degenerate_map,
  no_interior_mode,
  zero_deficit,
  isolated_terminal,
  unreachable,
  mismatched_feedback,
  generation_failure,
  empty_input,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

/// Malformed input file. `line` is 1-based; 0 when the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(ErrorKind::parse, file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct SamplerFailure : Error {
  explicit SamplerFailure(const std::string& what)
      : Error(ErrorKind::sampler_failure, what) {}
};

struct DegenerateMap : Error {
  explicit DegenerateMap(const std::string& what) : Error(ErrorKind::degenerate_map, what) {}
};

struct NoInteriorMode : Error {
  explicit NoInteriorMode(const std::string& what)
      : Error(ErrorKind::no_interior_mode, what) {}
};

struct ZeroDeficit : Error {
  explicit ZeroDeficit(const std::string& what) : Error(ErrorKind::zero_deficit, what) {}
};

struct IsolatedTerminal : Error {
  explicit IsolatedTerminal(const std::string& what)
      : Error(ErrorKind::isolated_terminal, what) {}
};

struct Unreachable : Error {
  explicit Unreachable(const std::string& what) : Error(ErrorKind::unreachable, what) {}
};

struct MismatchedFeedback : Error {
  explicit MismatchedFeedback(const std::string& what)
      : Error(ErrorKind::mismatched_feedback, what) {}
};

struct GenerationFailure : Error {
  explicit GenerationFailure(const std::string& what)
      : Error(ErrorKind::generation_failure, what) {}
};

struct EmptyInput : Error {
  explicit EmptyInput(const std::string& what) : Error(ErrorKind::empty_input, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace evbandit

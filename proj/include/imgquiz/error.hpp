#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace imgquiz {

enum class ErrorKind {
  validation,
  parse,
  argument,
  not_found,
  ambiguous_title,
  transient,
  permanent,
  fixture_miss,
  fixture_load,
  generation,
  empty_quiz,
  no_contrast,
  labeling,
  undefined_correlation,
  degenerate,
  format,
  size,
  io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the raw model output that could not be turned into a quiz.
class GenerationError : public Error {
 public:
  GenerationError(const std::string& message, std::string raw_text)
      : Error(ErrorKind::generation, message), raw_text_(std::move(raw_text)) {}

  const std::string& raw_text() const noexcept { return raw_text_; }

 private:
  std::string raw_text_;
};

}  // namespace imgquiz

#pragma once

#include <stdexcept>
#include <string>

namespace volcolor {

// Failure classes map one-to-one onto CLI exit codes.
enum class ErrorKind {
  validation,  // bad input, shape mismatch, malformed file
  io,          // unreadable/unwritable path
  numerical,   // solver breakdown or non-convergence
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, std::string code, const std::string& what)
      : std::runtime_error(what), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

private:
  ErrorKind kind_;
  std::string code_;
};

inline Error validation_error(std::string code, const std::string& what) {
  return Error(ErrorKind::validation, std::move(code), what);
}

inline Error io_error(std::string code, const std::string& what) {
  return Error(ErrorKind::io, std::move(code), what);
}

inline Error numerical_error(std::string code, const std::string& what) {
  return Error(ErrorKind::numerical, std::move(code), what);
}

}  // namespace volcolor

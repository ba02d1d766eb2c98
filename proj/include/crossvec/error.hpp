#pragma once

#include <stdexcept>
#include <string>

namespace crossvec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed kernel, bad transformation request, or inconsistent inputs.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// External compiler failed, or the produced object could not be loaded.
class ToolchainError : public Error {
public:
  ToolchainError(const std::string& message, int exit_status = -1, std::string diagnostics = {})
      : Error(message), exit_status_(exit_status), diagnostics_(std::move(diagnostics))
  {
  }

  int exit_status() const noexcept { return exit_status_; }
  const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
  int exit_status_;
  std::string diagnostics_;
};

/// Generated code disagreed with the reference assembler.
class VerificationError : public Error {
public:
  VerificationError(const std::string& message, double max_abs_error)
      : Error(message), max_abs_error_(max_abs_error)
  {
  }

  double max_abs_error() const noexcept { return max_abs_error_; }

private:
  double max_abs_error_;
};

} // namespace crossvec

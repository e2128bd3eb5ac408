#pragma once

#include <stdexcept>
#include <string>

namespace cbho {

// Exit codes returned by the command-line runner. Each error type below maps
// onto exactly one of them.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  config_invalid = 2,
  window_overflow = 3,
  numerical_blowup = 4,
  fit_failure = 5,
  io_failure = 6,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::usage; }
};

// Invalid argument or parameter outside its mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config_invalid; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::config_invalid; }
};

// Site window cannot hold the wavepacket (at preparation or during a run).
class WindowError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::window_overflow; }
};

class BlowupError : public Error {
 public:
  BlowupError(const std::string& what, long long step) : Error(what), step_(step) {}
  long long step() const noexcept { return step_; }
  ExitCode exit_code() const noexcept override { return ExitCode::numerical_blowup; }

 private:
  long long step_;
};

class FitError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::fit_failure; }
};

// Closed-form velocity hit a vanishing sideband denominator.
class ResonanceError : public DomainError {
 public:
  using DomainError::DomainError;
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::io_failure; }
};

}  // namespace cbho

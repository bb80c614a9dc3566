#pragma once

#include <stdexcept>
#include <string>

namespace verdict {

// Base of the project error taxonomy. The CLI maps subclasses to exit codes:
// ConfigError -> 2, ValidationError/ParseError/LookupError/NumericError -> 3,
// TransportError/PermanentError -> 4, ThresholdError -> 5.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration (unknown keys, absent seed, unusable flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a documented invariant (duplicate ids, self-matchups,
// mixed judges in an aggregate, out-of-range statistics inputs, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file could not be parsed; message names the offending line or key.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A referenced entity (model, judge, matchup cell) is absent from a table.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Undefined numeric result: zero-variance correlation, singular fit.
class NumericError : public Error {
 public:
  using Error::Error;
};

// The judge's preference reply could not be reduced to 1/2/0.
class PreferenceParseError : public Error {
 public:
  PreferenceParseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Transient backend failure signal; the gateway retry loop consumes these.
class TransientError : public Error {
 public:
  using Error::Error;
};

// Retry budget exhausted. Carries attempt count and the last cause.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_ = 0;
};

// Non-retryable backend failure (4xx other than 408/429). `auth` marks
// 401/403, which abort a judging run instead of being recorded per contest.
class PermanentError : public Error {
 public:
  PermanentError(const std::string& what, int attempts, bool auth = false)
      : Error(what), attempts_(attempts), auth_(auth) {}
  int attempts() const { return attempts_; }
  bool auth() const { return auth_; }

 private:
  int attempts_ = 0;
  bool auth_ = false;
};

// A configured result threshold was not met (CLI exit code 5).
class ThresholdError : public Error {
 public:
  using Error::Error;
};

}  // namespace verdict

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcrf {

// Violated precondition of an API call (programming error on the caller side).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Base class for recoverable runtime failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad flags, duplicate entity types, mask constant too weak.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data inconsistent with the model, e.g. an illegal gold path.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. The message always starts with "line N: ".
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Enumeration oracle asked to visit too many paths.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Model file unreadable, truncated or of the wrong version.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace mcrf

#define MCRF_EXPECT(cond, msg)                                                   \
  do {                                                                           \
    if (!(cond)) throw ::mcrf::ContractViolation(std::string(__func__) + ": " + (msg)); \
  } while (0)

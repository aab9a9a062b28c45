#pragma once

#include <stdexcept>
#include <string>

namespace genrl {

// Base for every error raised by the library. The CLI maps each subclass to a
// machine-readable category string via category().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* category() const noexcept { return "error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
};

class ShapeError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "shape"; }
};

class StateError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "state"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "numeric"; }
};

class InvalidDistributionError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "invalid_distribution"; }
};

class ContractError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "contract"; }
};

class MaskedActionError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "masked_action"; }
};

class ParseError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "parse"; }
};

}  // namespace genrl

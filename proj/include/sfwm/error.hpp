#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace sfwm {

// Base for all library failures; kind() gives a short machine-readable tag.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, std::complex<double> prev, std::complex<double> last)
      : Error(what), previous(prev), latest(last) {}
  const char* kind() const noexcept override { return "quadrature_failure"; }
  std::complex<double> previous;
  std::complex<double> latest;
};

class GridError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "grid_too_narrow"; }
};

class ResolutionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "resolution"; }
};

class FwhmError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "no_crossing"; }
};

class RankError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "rank_deficient"; }
};

class InsufficientEventsError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "insufficient_events"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key_name) : Error(what), key(std::move(key_name)) {}
  const char* kind() const noexcept override { return "config"; }
  std::string key;
};

}  // namespace sfwm

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace usdlab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A size-limited operation would exceed its configured cap.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, double predicted, double cap)
      : Error(what + ": predicted size " + std::to_string(predicted) +
              " exceeds cap " + std::to_string(cap)),
        predicted_(predicted),
        cap_(cap) {}

  double predicted() const noexcept { return predicted_; }
  double cap() const noexcept { return cap_; }

 private:
  double predicted_;
  double cap_;
};

/// The requested quadrature grid cannot resolve the polynomial.
class GridTooCoarse : public Error {
 public:
  GridTooCoarse(std::int64_t grid, std::int64_t required)
      : Error("grid of " + std::to_string(grid) +
              " points per dimension is too coarse; need at least " +
              std::to_string(required)),
        grid_(grid),
        required_(required) {}

  std::int64_t grid() const noexcept { return grid_; }
  std::int64_t required() const noexcept { return required_; }

 private:
  std::int64_t grid_;
  std::int64_t required_;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class NormViolation : public Error {
 public:
  using Error::Error;
};

class ProfileTooShort : public Error {
 public:
  using Error::Error;
};

/// Configuration validation failure; `path` names the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace usdlab

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace marma {

/// An argument lies outside the mathematical domain of the function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Array shapes disagree with the model layout.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A recursion produced a non-finite value. `index()` is the 1-based time.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::size_t index)
      : std::runtime_error(what + " at t=" + std::to_string(index)), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// The data cannot support the requested fit (constant series, too short, ...).
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The conditional information matrix is numerically singular.
class SingularInformationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace marma

#pragma once

#include <stdexcept>
#include <string>

namespace roundcount {

/// Parameter or argument outside its mathematical domain.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation produced a result that fails its own consistency check
/// (e.g. a complex series whose imaginary part did not cancel).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Evaluation point too close to a root of unity for the closed-form pgf.
class NearRootOfUnityError : public NumericalError {
 public:
  explicit NearRootOfUnityError(const std::string& what) : NumericalError(what) {}
};

/// The likelihood is flat (zero) over the whole search bracket.
class NoMaximumError : public NumericalError {
 public:
  explicit NoMaximumError(const std::string& what) : NumericalError(what) {}
};

}  // namespace roundcount

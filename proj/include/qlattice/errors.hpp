// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

#include <stdexcept>
#include <string>

namespace qlattice {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied value is outside the documented domain of an operation.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a point where the function is undefined (z = 0, a node, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series, product, quadrature or truncation search hit its hard cap.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last = 0.0, double previous = 0.0)
      : Error(what), last_(last), previous_(previous) {}

  double last_estimate() const noexcept { return last_; }
  double previous_estimate() const noexcept { return previous_; }

 private:
  double last_;
  double previous_;
};

/// Scaled value does not fit into a plain floating-point number.
class Saturation : public Error {
 public:
  using Error::Error;
};

/// Operation refused because the lattice is too sparse (tau at or above pi).
class RegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace qlattice

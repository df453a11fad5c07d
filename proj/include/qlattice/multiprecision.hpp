// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

// 50-digit reals for the oracle traces whose quotients lose more digits
// than double carries.  Include before instantiating any template on
// HighPrecision.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "qlattice/numeric.hpp"

namespace qlattice {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;
using HighPrecisionComplex = boost::multiprecision::cpp_complex_50;

template <>
struct complex_of<HighPrecision> {
  using type = HighPrecisionComplex;
};

}  // namespace qlattice

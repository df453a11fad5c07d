// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#include <iostream>

#include "qlattice/cli.hpp"

int main(int argc, char** argv) { return qlattice::cli::run(argc, argv, std::cout, std::cerr); }

// Copyright 2026 The mlstm Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "mlstm/cli.hpp"

int main(int argc, char** argv) { return mlstm::run_cli(argc, argv, std::cout, std::cerr); }

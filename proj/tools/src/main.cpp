// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The covmis Authors

#include <iostream>

#include "covmis/cli.hpp"

int main(int argc, char** argv) { return covmis::run_cli(argc, argv, std::cout, std::cerr); }

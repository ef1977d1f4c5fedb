// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/cli.hpp"

int main(int argc, char** argv) { return mtmi::cli::run(argc, argv); }

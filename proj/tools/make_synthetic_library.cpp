// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

// Writes the built-in synthetic rock library as a library CSV.
#include <exception>
#include <iostream>

#include "mtmi/data_model.hpp"
#include "mtmi/simulator.hpp"

int main(int argc, char** argv) {
  const char* path = argc > 1 ? argv[1] : "rocks_synthetic.csv";
  try {
    mtmi::save_library(mtmi::synthetic_rock_library(), path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << path << "\n";
  return 0;
}

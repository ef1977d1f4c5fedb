// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <functional>

#include "mtmi/simulator.hpp"

namespace mtmi {
namespace {

// Gaussian feature on a wavelength axis in micrometres.
double Band(double um, double center, double width, double depth) {
  const double z = (um - center) / width;
  return depth * std::exp(-0.5 * z * z);
}

}  // namespace

SpectralLibrary synthetic_rock_library() {
  constexpr std::size_t kBands = 211;
  SpectralLibrary lib;
  for (std::size_t b = 0; b < kBands; ++b) lib.band_labels.push_back(std::to_string(400 + 10 * b));

  auto make = [&](const std::string& name, const std::function<double(double)>& reflectance) {
    Instance s(kBands);
    for (std::size_t b = 0; b < kBands; ++b) s[b] = reflectance((400.0 + 10.0 * static_cast<double>(b)) / 1000.0);
    lib.entries.push_back({name, std::move(s)});
  };

  // Moderately dark with a broad red-edge absorption none of the other rocks share.
  make("basalt", [](double um) {
    return 0.13 + 0.01 * (um - 0.4) - Band(um, 0.7, 0.18, 0.12) - Band(um, 2.05, 0.28, 0.025) +
           Band(um, 0.6, 0.1, 0.01);
  });
  make("pyroxenite", [](double um) {
    return 0.20 + 0.05 * std::tanh(2.0 * (um - 0.6)) - Band(um, 0.93, 0.11, 0.09) - Band(um, 2.0, 0.24, 0.08);
  });
  // Serpentine-bearing: green peak, broad 1.5-2.3 um hump, sharp OH bands.
  make("verde_antique", [](double um) {
    return 0.22 + Band(um, 0.55, 0.05, 0.03) + Band(um, 1.9, 0.28, 0.12) - Band(um, 1.39, 0.015, 0.07) -
           Band(um, 2.32, 0.025, 0.11) - Band(um, 2.11, 0.02, 0.035) - Band(um, 1.0, 0.15, 0.04);
  });
  make("phyllite", [](double um) {
    return 0.17 + 0.04 * (um - 0.4) - Band(um, 0.9, 0.10, 0.03) - Band(um, 1.41, 0.02, 0.035) -
           Band(um, 1.91, 0.03, 0.05) - Band(um, 2.20, 0.025, 0.06) - Band(um, 2.35, 0.03, 0.025);
  });
  make("slate", [](double um) {
    return 0.09 + 0.015 * (um - 0.4) - Band(um, 2.21, 0.03, 0.012) - Band(um, 0.95, 0.15, 0.008);
  });
  return lib;
}

}  // namespace mtmi

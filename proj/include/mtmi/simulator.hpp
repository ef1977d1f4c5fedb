// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mtmi/data_model.hpp"

namespace mtmi {

// How target types are spread over the target instances of positive bags.
enum class TargetAssignment {
  PerBag,       // positive bag j carries only target j mod T
  PerInstance,  // each target instance draws its type uniformly
};

std::string_view to_string(TargetAssignment mode);
TargetAssignment parse_target_assignment(std::string_view text);  // "per-bag" | "per-instance"

struct SimConfig {
  std::vector<std::string> targets;
  std::vector<std::string> backgrounds;
  std::size_t num_pos_bags = 10;
  std::size_t num_neg_bags = 20;
  std::size_t points_per_bag = 500;
  std::size_t targets_per_pos_bag = 250;
  double mean_target_proportion = 0.3;
  double snr_db = 20.0;  // +infinity disables noise
  std::uint64_t seed = 0;
  TargetAssignment assignment = TargetAssignment::PerBag;

  void validate() const;
};

// p * target + (1 - p) * background + N(0, noise_scale^2) per band.
Instance mix_instance(std::span<const double> target, std::span<const double> background, double proportion,
                      double noise_scale, std::mt19937_64& rng);
// Background-only instance (p = 0).
Instance mix_instance(std::span<const double> background, double noise_scale, std::mt19937_64& rng);

// Target proportions are uniform on [max(0, 2m-1), min(1, 2m)], mean m, and
// strictly positive.
double draw_proportion(double mean, std::mt19937_64& rng);

struct TruthRow {
  std::int64_t bag_id = 0;
  std::size_t instance_index = 0;
  std::string target_name;  // empty for background instances
  double proportion = 0.0;
};

struct SimulatedDataset {
  BagCollection bags;
  std::vector<TruthRow> truth;  // bag order, then instance order
  double noise_scale = 0.0;
};

// Positive bags get ids 1..N+, negative bags N+ + 1 .. N+ + N-.
SimulatedDataset generate_dataset(const SpectralLibrary& library, const SimConfig& config);

// Ground-truth CSV: `bag_id,instance_index,target_name,proportion`; the name
// is `none` for background instances.
void save_truth(const std::vector<TruthRow>& truth, const std::string& path);
std::vector<TruthRow> load_truth(const std::string& path);

// Five smooth rock-like reflectance spectra on 211 bands (400-2500 nm, 10 nm
// steps) named basalt, pyroxenite, verde_antique, phyllite, slate. These are
// synthetic stand-ins with plausible shapes, not measured library data.
SpectralLibrary synthetic_rock_library();

}  // namespace mtmi

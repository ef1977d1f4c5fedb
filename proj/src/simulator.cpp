// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"

namespace mtmi {

std::string_view to_string(TargetAssignment mode) {
  return mode == TargetAssignment::PerBag ? "per-bag" : "per-instance";
}

TargetAssignment parse_target_assignment(std::string_view text) {
  if (text == "per-bag") return TargetAssignment::PerBag;
  if (text == "per-instance") return TargetAssignment::PerInstance;
  throw ValidationError("unknown target assignment '" + std::string(text) + "' (expected per-bag or per-instance)");
}

void SimConfig::validate() const {
  if (targets.empty()) throw ValidationError("simulation needs at least one target spectrum");
  if (backgrounds.empty()) throw ValidationError("simulation needs at least one background spectrum");
  std::set<std::string> t(targets.begin(), targets.end());
  for (const auto& b : backgrounds) {
    if (t.count(b)) throw ValidationError("'" + b + "' is listed as both target and background");
  }
  if (num_pos_bags == 0 || num_neg_bags == 0 || points_per_bag == 0 || targets_per_pos_bag == 0) {
    throw ValidationError("bag counts, points per bag and targets per positive bag must be positive");
  }
  if (targets_per_pos_bag > points_per_bag) {
    throw ValidationError("targets per positive bag (" + std::to_string(targets_per_pos_bag) +
                          ") exceeds points per bag (" + std::to_string(points_per_bag) + ")");
  }
  if (!(mean_target_proportion > 0.0 && mean_target_proportion <= 1.0)) {
    throw ValidationError("mean target proportion must lie in (0, 1]");
  }
  if (std::isnan(snr_db)) throw ValidationError("SNR must be a number or inf");
}

Instance mix_instance(std::span<const double> target, std::span<const double> background, double proportion,
                      double noise_scale, std::mt19937_64& rng) {
  if (target.size() != background.size()) throw DimensionError("target and background lengths differ");
  if (!(proportion >= 0.0 && proportion <= 1.0)) throw ValidationError("proportion must lie in [0, 1]");
  Instance x(background.size());
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t b = 0; b < x.size(); ++b) {
    x[b] = proportion * target[b] + (1.0 - proportion) * background[b];
    if (noise_scale > 0.0) x[b] += noise_scale * noise(rng);
  }
  return x;
}

Instance mix_instance(std::span<const double> background, double noise_scale, std::mt19937_64& rng) {
  return mix_instance(background, background, 0.0, noise_scale, rng);
}

double draw_proportion(double mean, std::mt19937_64& rng) {
  const double lo = std::max(0.0, 2.0 * mean - 1.0);
  const double hi = std::min(1.0, 2.0 * mean);
  if (lo == hi) return hi;
  std::uniform_real_distribution<double> dist(lo, hi);
  double p = 0.0;
  do {
    p = dist(rng);
  } while (p <= 0.0);
  return p;
}

namespace {

std::vector<const Instance*> Resolve(const SpectralLibrary& library, const std::vector<std::string>& names) {
  std::vector<const Instance*> out;
  for (const auto& name : names) {
    const LibraryEntry* e = library.find(name);
    if (!e) throw ValidationError("spectrum '" + name + "' is not in the library");
    out.push_back(&e->spectrum);
  }
  return out;
}

struct Planned {
  std::size_t target = 0;  // index into targets; meaningless when proportion == 0
  std::size_t background = 0;
  double proportion = 0.0;
};

}  // namespace

SimulatedDataset generate_dataset(const SpectralLibrary& library, const SimConfig& config) {
  config.validate();
  library.validate();
  const auto targets = Resolve(library, config.targets);
  const auto backgrounds = Resolve(library, config.backgrounds);
  const std::size_t dim = library.dimensionality();

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick_bg(0, backgrounds.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_target(0, targets.size() - 1);

  // Pass 1: plan every instance (type, background, proportion).
  const std::size_t num_bags = config.num_pos_bags + config.num_neg_bags;
  std::vector<std::vector<Planned>> plan(num_bags);
  for (std::size_t j = 0; j < num_bags; ++j) {
    const bool positive = j < config.num_pos_bags;
    auto& bag = plan[j];
    bag.resize(config.points_per_bag);
    const std::size_t bag_target = j % targets.size();
    for (std::size_t i = 0; i < config.points_per_bag; ++i) {
      Planned& p = bag[i];
      p.background = pick_bg(rng);
      if (positive && i < config.targets_per_pos_bag) {
        p.target = config.assignment == TargetAssignment::PerBag ? bag_target : pick_target(rng);
        p.proportion = draw_proportion(config.mean_target_proportion, rng);
      }
    }
    if (positive) std::shuffle(bag.begin(), bag.end(), rng);
  }

  // Noise level from the clean signals: mean over bands of the per-band RMS.
  std::vector<double> sumsq(dim, 0.0);
  std::size_t count = 0;
  for (const auto& bag : plan) {
    for (const Planned& p : bag) {
      const Instance& t = *targets[p.target];
      const Instance& b = *backgrounds[p.background];
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = p.proportion * t[d] + (1.0 - p.proportion) * b[d];
        sumsq[d] += v * v;
      }
      ++count;
    }
  }
  double rms = 0.0;
  for (double s : sumsq) rms += std::sqrt(s / static_cast<double>(count));
  rms /= static_cast<double>(dim);
  const double noise_scale = std::isinf(config.snr_db) ? 0.0 : rms / std::pow(10.0, config.snr_db / 20.0);

  // Pass 2: realize instances with noise.
  std::vector<Bag> bags;
  std::vector<TruthRow> truth;
  for (std::size_t j = 0; j < num_bags; ++j) {
    const bool positive = j < config.num_pos_bags;
    Bag bag{static_cast<std::int64_t>(j + 1), positive, {}};
    for (std::size_t i = 0; i < plan[j].size(); ++i) {
      const Planned& p = plan[j][i];
      bag.instances.push_back(
          mix_instance(*targets[p.target], *backgrounds[p.background], p.proportion, noise_scale, rng));
      truth.push_back({bag.id, i, p.proportion > 0.0 ? config.targets[p.target] : std::string(), p.proportion});
    }
    bags.push_back(std::move(bag));
  }
  return SimulatedDataset{BagCollection(std::move(bags)), std::move(truth), noise_scale};
}

void save_truth(const std::vector<TruthRow>& truth, const std::string& path) {
  std::string text = "bag_id,instance_index,target_name,proportion\n";
  for (const TruthRow& t : truth) {
    text += std::to_string(t.bag_id) + ',' + std::to_string(t.instance_index) + ',' +
            (t.target_name.empty() ? std::string("none") : csv::quote(t.target_name)) + ',' +
            csv::format_double(t.proportion) + '\n';
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<TruthRow> load_truth(const std::string& path) {
  csv::LineReader reader(path);
  std::string line;
  if (!reader.next(line) || line != "bag_id,instance_index,target_name,proportion") {
    throw ParseError("bad header: expected 'bag_id,instance_index,target_name,proportion' at line 1", 1);
  }
  std::vector<TruthRow> out;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    const bool ok = f.size() == 4;
    const auto id = ok ? csv::parse_int(f[0]) : std::nullopt;
    const auto idx = ok ? csv::parse_int(f[1]) : std::nullopt;
    const auto p = ok ? csv::parse_double(f[3]) : std::nullopt;
    if (!id || !idx || *idx < 0 || !p || *p < 0.0 || *p > 1.0) {
      throw ParseError("malformed ground-truth row at line " + std::to_string(ln), ln);
    }
    out.push_back({*id, static_cast<std::size_t>(*idx), f[2] == "none" ? std::string() : f[2], *p});
  }
  return out;
}

}  // namespace mtmi

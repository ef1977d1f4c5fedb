// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mtmi {

// One spectral sample of D bands.
using Instance = std::vector<double>;

struct Bag {
  std::int64_t id = 0;
  bool positive = false;
  std::vector<Instance> instances;

  int label() const { return positive ? 1 : 0; }
};

// Bags sharing one dimensionality. Construction validates structure: at least
// one bag, every bag non-empty, every instance of length D >= 2 with finite
// values, unique bag ids. Immutable afterwards.
class BagCollection {
 public:
  explicit BagCollection(std::vector<Bag> bags);

  const std::vector<Bag>& bags() const { return bags_; }
  std::size_t dimensionality() const { return dim_; }
  std::size_t num_positive() const { return num_positive_; }
  std::size_t num_negative() const { return bags_.size() - num_positive_; }
  std::size_t num_instances() const;

  // Throws ValidationError unless there is at least one bag of each label.
  void require_trainable() const;

  friend bool operator==(const BagCollection&, const BagCollection&);

 private:
  std::vector<Bag> bags_;
  std::size_t dim_ = 0;
  std::size_t num_positive_ = 0;
};

bool operator==(const Bag& a, const Bag& b);

// Bag CSV: header `bag_id,label,b1,...,bD`, one instance per row. Rows of the
// same bag need not be contiguous; bags appear in first-seen order and rows
// keep their order within a bag.
BagCollection load_bags(const std::string& path);
void save_bags(const BagCollection& collection, const std::string& path);

struct LibraryEntry {
  std::string name;
  Instance spectrum;
};

struct SpectralLibrary {
  std::vector<LibraryEntry> entries;
  std::vector<std::string> band_labels;

  std::size_t dimensionality() const { return band_labels.size(); }
  const LibraryEntry* find(const std::string& name) const;
  // Throws ValidationError on duplicate names, length mismatches, D < 2 or
  // non-finite values.
  void validate() const;
};

// Library CSV: header `name,<band label 1>,...,<band label D>`.
SpectralLibrary load_library(const std::string& path);
void save_library(const SpectralLibrary& library, const std::string& path);

}  // namespace mtmi

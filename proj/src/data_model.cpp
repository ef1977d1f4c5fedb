// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/data_model.hpp"

#include <cmath>
#include <set>
#include <unordered_map>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"

namespace mtmi {
namespace {

bool AllFinite(const Instance& x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string AtLine(std::size_t line) { return " at line " + std::to_string(line); }

}  // namespace

BagCollection::BagCollection(std::vector<Bag> bags) : bags_(std::move(bags)) {
  if (bags_.empty()) throw ValidationError("bag collection has no bags");
  dim_ = bags_.front().instances.empty() ? 0 : bags_.front().instances.front().size();
  if (dim_ < 2) throw ValidationError("instances must have at least 2 bands");
  std::set<std::int64_t> ids;
  for (const Bag& bag : bags_) {
    if (!ids.insert(bag.id).second) {
      throw ValidationError("duplicate bag id " + std::to_string(bag.id));
    }
    if (bag.instances.empty()) {
      throw ValidationError("bag " + std::to_string(bag.id) + " has no instances");
    }
    for (const Instance& x : bag.instances) {
      if (x.size() != dim_) {
        throw ValidationError("bag " + std::to_string(bag.id) + " has an instance of length " +
                              std::to_string(x.size()) + ", expected " + std::to_string(dim_));
      }
      if (!AllFinite(x)) {
        throw ValidationError("bag " + std::to_string(bag.id) + " has a non-finite value");
      }
    }
    if (bag.positive) ++num_positive_;
  }
}

std::size_t BagCollection::num_instances() const {
  std::size_t n = 0;
  for (const Bag& bag : bags_) n += bag.instances.size();
  return n;
}

void BagCollection::require_trainable() const {
  if (num_positive() == 0) throw ValidationError("training requires at least one positive bag");
  if (num_negative() == 0) throw ValidationError("training requires at least one negative bag");
}

bool operator==(const Bag& a, const Bag& b) {
  return a.id == b.id && a.positive == b.positive && a.instances == b.instances;
}

bool operator==(const BagCollection& a, const BagCollection& b) {
  return a.dim_ == b.dim_ && a.bags_ == b.bags_;
}

BagCollection load_bags(const std::string& path) {
  csv::LineReader reader(path);
  std::string line;
  if (!reader.next(line) || line.empty()) throw ParseError("empty bag file '" + path + "'", 1);

  const auto header = csv::split_line(line);
  if (header.size() < 4 || header[0] != "bag_id" || header[1] != "label") {
    throw ParseError("bad header: expected 'bag_id,label,b1,...,bD'" + AtLine(1), 1);
  }
  const std::size_t dim = header.size() - 2;

  std::vector<Bag> bags;
  std::unordered_map<std::int64_t, std::size_t> index_of;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() < 3) throw ParseError("malformed row" + AtLine(ln), ln);
    if (fields.size() != dim + 2) {
      throw ParseError("inconsistent dimensionality" + AtLine(ln) + ": expected " +
                           std::to_string(dim) + " values, found " +
                           std::to_string(fields.size() - 2),
                       ln);
    }
    const auto id = csv::parse_int(fields[0]);
    if (!id) throw ParseError("malformed bag id '" + fields[0] + "'" + AtLine(ln), ln);
    const auto label = csv::parse_int(fields[1]);
    if (!label || (*label != 0 && *label != 1)) {
      throw ParseError("non-binary label '" + fields[1] + "'" + AtLine(ln), ln);
    }
    Instance x(dim);
    for (std::size_t b = 0; b < dim; ++b) {
      const auto v = csv::parse_double(fields[b + 2]);
      if (!v) throw ParseError("malformed value '" + fields[b + 2] + "'" + AtLine(ln), ln);
      if (!std::isfinite(*v)) throw ParseError("non-finite value" + AtLine(ln), ln);
      x[b] = *v;
    }
    auto [it, inserted] = index_of.try_emplace(*id, bags.size());
    if (inserted) bags.push_back(Bag{*id, *label == 1, {}});
    Bag& bag = bags[it->second];
    if (bag.positive != (*label == 1)) {
      throw ParseError("bag " + std::to_string(*id) + " has conflicting labels" + AtLine(ln), ln);
    }
    bag.instances.push_back(std::move(x));
  }
  if (bags.empty()) throw ParseError("bag file '" + path + "' has no data rows", reader.line_number());
  return BagCollection(std::move(bags));
}

void save_bags(const BagCollection& collection, const std::string& path) {
  const std::size_t dim = collection.dimensionality();
  std::string text = "bag_id,label";
  for (std::size_t b = 1; b <= dim; ++b) text += ",b" + std::to_string(b);
  text += '\n';
  for (const Bag& bag : collection.bags()) {
    const std::string prefix = std::to_string(bag.id) + ',' + std::to_string(bag.label());
    for (const Instance& x : bag.instances) {
      text += prefix;
      for (double v : x) {
        text += ',';
        text += csv::format_double(v);
      }
      text += '\n';
    }
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

const LibraryEntry* SpectralLibrary::find(const std::string& name) const {
  for (const LibraryEntry& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

void SpectralLibrary::validate() const {
  if (band_labels.size() < 2) throw ValidationError("spectral library needs at least 2 bands");
  std::set<std::string> names;
  for (const LibraryEntry& e : entries) {
    if (!names.insert(e.name).second) throw ValidationError("duplicate library entry '" + e.name + "'");
    if (e.spectrum.size() != band_labels.size()) {
      throw ValidationError("library entry '" + e.name + "' has " + std::to_string(e.spectrum.size()) +
                            " bands, expected " + std::to_string(band_labels.size()));
    }
    if (!AllFinite(e.spectrum)) throw ValidationError("library entry '" + e.name + "' has a non-finite value");
  }
}

SpectralLibrary load_library(const std::string& path) {
  csv::LineReader reader(path);
  std::string line;
  if (!reader.next(line) || line.empty()) throw ParseError("empty library file '" + path + "'", 1);
  auto header = csv::split_line(line);
  if (header.size() < 3 || header[0] != "name") {
    throw ParseError("bad header: expected 'name,<band>,...'" + AtLine(1), 1);
  }
  SpectralLibrary lib;
  lib.band_labels.assign(header.begin() + 1, header.end());
  const std::size_t dim = lib.band_labels.size();
  std::set<std::string> names;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (line.empty()) continue;
    auto fields = csv::split_line(line);
    if (fields.size() != dim + 1) {
      throw ParseError("inconsistent dimensionality" + AtLine(ln) + ": expected " + std::to_string(dim) +
                           " values, found " + std::to_string(fields.size() - 1),
                       ln);
    }
    if (fields[0].empty()) throw ParseError("empty entry name" + AtLine(ln), ln);
    if (!names.insert(fields[0]).second) {
      throw ParseError("duplicate entry name '" + fields[0] + "'" + AtLine(ln), ln);
    }
    LibraryEntry entry{fields[0], Instance(dim)};
    for (std::size_t b = 0; b < dim; ++b) {
      const auto v = csv::parse_double(fields[b + 1]);
      if (!v || !std::isfinite(*v)) throw ParseError("malformed value '" + fields[b + 1] + "'" + AtLine(ln), ln);
      entry.spectrum[b] = *v;
    }
    lib.entries.push_back(std::move(entry));
  }
  return lib;
}

void save_library(const SpectralLibrary& library, const std::string& path) {
  library.validate();
  std::string text = "name";
  for (const auto& label : library.band_labels) text += ',' + csv::quote(label);
  text += '\n';
  for (const LibraryEntry& e : library.entries) {
    text += csv::quote(e.name);
    for (double v : e.spectrum) text += ',' + csv::format_double(v);
    text += '\n';
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace mtmi

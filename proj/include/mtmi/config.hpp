// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtmi {

// Flat key=value settings. Keys are kept sorted so saved files are stable.
class KeyValueConfig {
 public:
  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  void erase(const std::string& key) { values_.erase(key); }
  // Entries of other win.
  void merge(const KeyValueConfig& other);
  const std::map<std::string, std::string>& entries() const { return values_; }

  bool operator==(const KeyValueConfig&) const = default;

 private:
  std::map<std::string, std::string> values_;
};

// Blank lines and lines starting with '#' are ignored; whitespace around key and value is trimmed.
KeyValueConfig parse_config(std::string_view text);
KeyValueConfig load_config(const std::string& path);
std::string format_config(const KeyValueConfig& config);
void save_config(const KeyValueConfig& config, const std::string& path);

// Named parameter bundles: "sim-a", "muufl", "aviris". Throws ValidationError for unknown names.
KeyValueConfig preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace mtmi

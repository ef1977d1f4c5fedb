// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/config.hpp"

#include <fstream>
#include <sstream>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"

namespace mtmi {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void KeyValueConfig::merge(const KeyValueConfig& other) {
  for (const auto& [k, v] : other.values_) values_[k] = v;
}

KeyValueConfig parse_config(std::string_view text) {
  KeyValueConfig config;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value at line " + std::to_string(line_no), line_no);
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key at line " + std::to_string(line_no), line_no);
    if (config.contains(std::string(key))) throw ParseError("duplicate key '" + std::string(key) + "' at line " + std::to_string(line_no), line_no);
    config.set(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return config;
}

KeyValueConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line());
  }
}

std::string format_config(const KeyValueConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.entries()) out += k + "=" + v + "\n";
  return out;
}

void save_config(const KeyValueConfig& config, const std::string& path) {
  auto out = csv::open_for_write(path);
  out << format_config(config);
}

KeyValueConfig preset(std::string_view name) {
  KeyValueConfig c;
  if (name == "sim-a") {
    c.set("targets", "basalt,verde_antique");
    c.set("backgrounds", "pyroxenite,phyllite,slate");
    c.set("pos-bags", "10");
    c.set("neg-bags", "20");
    c.set("points", "500");
    c.set("targets-per-bag", "250");
    c.set("proportion", "0.3");
    c.set("snr", "20");
    c.set("assignment", "per-bag");
    c.set("k", "4");
    c.set("alpha", "1");
    c.set("detector", "ace");
    c.set("far", "0.001");
  } else if (name == "muufl") {
    c.set("k", "2");
    c.set("alpha", "0.1");
    c.set("detector", "ace");
    c.set("far", "0.001");
  } else if (name == "aviris") {
    // Background statistics come from every instance, not only negative bags.
    c.set("k", "10");
    c.set("alpha", "0.05");
    c.set("detector", "ace");
    c.set("background", "all");
    c.set("far", "0.01");
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "'");
  }
  return c;
}

std::vector<std::string> preset_names() { return {"sim-a", "muufl", "aviris"}; }

}  // namespace mtmi

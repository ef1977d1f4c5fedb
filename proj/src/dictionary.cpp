// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/dictionary.hpp"

#include <cmath>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"

namespace mtmi {

void save_signatures(const RowMatrix& signatures, const std::string& path) {
  std::string text = "target_index";
  for (std::size_t b = 1; b <= signatures.cols(); ++b) text += ",b" + std::to_string(b);
  text += '\n';
  for (std::size_t k = 0; k < signatures.rows(); ++k) {
    text += std::to_string(k + 1);
    for (double v : signatures.row(k)) text += ',' + csv::format_double(v);
    text += '\n';
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

RowMatrix load_signatures(const std::string& path) {
  csv::LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty dictionary file '" + path + "'", 1);
  const auto header = csv::split_line(line);
  if (header.size() < 3 || header[0] != "target_index") {
    throw ParseError("bad header: expected 'target_index,b1,...,bD' at line 1", 1);
  }
  const std::size_t dim = header.size() - 1;
  RowMatrix sigs;
  std::vector<double> values(dim);
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != dim + 1) {
      throw ParseError("inconsistent dimensionality at line " + std::to_string(ln), ln);
    }
    for (std::size_t i = 0; i < dim; ++i) {
      const auto v = csv::parse_double(fields[i + 1]);
      if (!v || !std::isfinite(*v)) throw ParseError("malformed value at line " + std::to_string(ln), ln);
      values[i] = *v;
    }
    sigs.append_row(values);
  }
  if (sigs.empty()) throw ParseError("dictionary file '" + path + "' has no signatures", reader.line_number());
  return sigs;
}

}  // namespace mtmi

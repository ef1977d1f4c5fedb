// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "mtmi/matrix.hpp"

namespace mtmi {

// Learned target signatures, one per row. whitened holds the unit-norm
// signatures in whitened space; output holds their de-whitened, unit-norm
// counterparts in the original spectral space.
struct TargetDictionary {
  RowMatrix whitened;
  RowMatrix output;

  std::size_t size() const { return output.rows(); }
  std::size_t dimensionality() const { return output.cols(); }
  bool empty() const { return output.rows() == 0; }
};

// Dictionary CSV: header `target_index,b1,...,bD`, one signature per row,
// target_index starting at 1.
void save_signatures(const RowMatrix& signatures, const std::string& path);
RowMatrix load_signatures(const std::string& path);

}  // namespace mtmi

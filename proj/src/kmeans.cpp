// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "mtmi/errors.hpp"
#include "mtmi/kernels.hpp"
#include "mtmi/learner.hpp"

namespace mtmi {

RowMatrix kmeans(const RowMatrix& points, std::size_t clusters, std::uint64_t seed, std::size_t max_iter) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (clusters == 0) throw ValidationError("kmeans needs at least one cluster");
  if (n < clusters) {
    throw ValidationError("kmeans: " + std::to_string(n) + " points cannot form " + std::to_string(clusters) +
                          " clusters");
  }

  // Farthest-point seeding.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  RowMatrix centers;
  centers.append_row(points.row(pick(rng)));
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) nearest[i] = kernels::squared_distance(points.row(i), centers.row(0));
  while (centers.rows() < clusters) {
    const std::size_t far = static_cast<std::size_t>(
        std::distance(nearest.begin(), std::max_element(nearest.begin(), nearest.end())));
    centers.append_row(points.row(far));
    const auto added = centers.row(centers.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], kernels::squared_distance(points.row(i), added));
    }
  }

  std::vector<std::size_t> assignment(n, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> counts(clusters);
  RowMatrix sums(clusters, dim);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = kernels::squared_distance(points.row(i), centers.row(0));
      for (std::size_t c = 1; c < clusters; ++c) {
        const double d = kernels::squared_distance(points.row(i), centers.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      kernels::axpy(1.0, points.row(i), sums.row(assignment[i]));
      ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < clusters; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its previous center
      const double inv = 1.0 / static_cast<double>(counts[c]);
      auto dst = centers.row(c);
      const auto src = sums.row(c);
      for (std::size_t d = 0; d < dim; ++d) dst[d] = src[d] * inv;
    }
  }

  std::vector<std::size_t> order(clusters);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ra = centers.row(a);
    const auto rb = centers.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  RowMatrix sorted;
  for (std::size_t c : order) sorted.append_row(centers.row(c));
  return sorted;
}

}  // namespace mtmi

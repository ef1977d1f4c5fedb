// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mtmi/data_model.hpp"
#include "mtmi/matrix.hpp"

namespace mtmi {

enum class BackgroundSource { NegativeBagsOnly, AllInstances };

inline constexpr double kDefaultEigenvalueFloorRatio = 1e-8;

// Background mean and covariance eigensystem plus the affine whitening map
// x -> P (x - mean) with P = E^{-1/2} U^T, and its inverse U E^{1/2}.
struct BackgroundStats {
  std::vector<double> mean;
  std::vector<double> eigenvalues;  // descending, already clamped to the floor
  RowMatrix eigenvectors;           // D x D, column k is the k-th eigenvector
  RowMatrix whitener;               // P
  RowMatrix dewhitener;             // P^{-1}
  double eigenvalue_floor = 0.0;
  std::size_t num_clamped = 0;      // eigenvalues raised to the floor
  double max_clamp_shift = 0.0;     // largest (floor - raw eigenvalue) over clamped ones
  std::size_t sample_count = 0;
  bool rank_deficient = false;      // fewer than D+1 samples

  std::size_t dimensionality() const { return mean.size(); }
};

// Sample mean and (n-1)-denominator covariance of the chosen instances,
// eigenvalues clamped to floor_ratio * largest eigenvalue, eigenvector signs
// canonicalized so the largest-magnitude entry of each is positive.
BackgroundStats estimate_background(const BagCollection& collection, BackgroundSource source,
                                    double floor_ratio = kDefaultEigenvalueFloorRatio);

// Same estimator on an explicit sample set (one row per sample).
BackgroundStats estimate_background(const RowMatrix& samples,
                                    double floor_ratio = kDefaultEigenvalueFloorRatio);

// Builds stats directly from a mean and a symmetric covariance.
BackgroundStats stats_from_covariance(std::span<const double> mean, const RowMatrix& covariance,
                                      double floor_ratio = kDefaultEigenvalueFloorRatio);

// Assembles stats from an eigensystem that is already clamped and canonical.
BackgroundStats stats_from_eigensystem(std::vector<double> mean, std::vector<double> eigenvalues,
                                       RowMatrix eigenvectors, double eigenvalue_floor);

std::vector<double> whiten(std::span<const double> x, const BackgroundStats& stats);
void whiten_into(std::span<const double> x, const BackgroundStats& stats, std::span<double> out,
                 std::span<double> scratch);

// Unit-norm whitened vector; DegenerateInstanceError when x equals the mean.
std::vector<double> whiten_normalize(std::span<const double> x, const BackgroundStats& stats);

// P^{-1} s_hat normalized to unit length.
std::vector<double> dewhiten_signature(std::span<const double> s_hat, const BackgroundStats& stats);

// Whitens a target signature without mean subtraction (P s) and normalizes it.
std::vector<double> whiten_signature(std::span<const double> s, const BackgroundStats& stats);

// Stats CSV: header `row,b1,...,bD`; a `mean` row; an `eigenvalue` row; then
// rows `eigenvector_1` ... `eigenvector_D`, each holding one eigenvector.
void save_stats(const BackgroundStats& stats, const std::string& path);
BackgroundStats load_stats(const std::string& path);

double norm(std::span<const double> v);

}  // namespace mtmi

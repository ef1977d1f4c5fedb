// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mtmi/data_model.hpp"
#include "mtmi/detectors.hpp"
#include "mtmi/dictionary.hpp"
#include "mtmi/matrix.hpp"
#include "mtmi/whitening.hpp"

namespace mtmi {

struct LearnerConfig {
  std::size_t initial_targets = 1;     // K
  double uniqueness_weight = 0.0;      // alpha
  std::size_t kmeans_clusters = 0;     // C; 0 selects 10*K capped at the positive instance count
  std::size_t kmeans_max_iter = 100;
  std::size_t max_iter = 1000;
  DetectorKind detector = DetectorKind::Ace;
  std::uint64_t seed = 0;
  BackgroundSource background_source = BackgroundSource::NegativeBagsOnly;
  double eigenvalue_floor_ratio = kDefaultEigenvalueFloorRatio;

  // Throws ValidationError on K == 0, alpha < 0, C < K (when C is set), or a
  // zero iteration limit.
  void validate() const;
  std::size_t resolved_clusters(std::size_t num_positive_instances) const;
};

// Whitened training data. Positive-bag instances live in one matrix with bag
// j covering rows [bag_offsets[j], bag_offsets[j+1]). For ACE every row is
// unit-normalized.
struct WhitenedData {
  RowMatrix positives;
  std::vector<std::size_t> bag_offsets;
  std::vector<std::int64_t> positive_bag_ids;
  RowMatrix negatives;
  std::vector<std::size_t> negative_offsets;
  // (1/N-) sum_j (1/N_j-) sum_i x_i over negative bags, accumulated in file order.
  std::vector<double> negative_mean;

  std::size_t num_positive_bags() const { return bag_offsets.empty() ? 0 : bag_offsets.size() - 1; }
  std::size_t num_negative_bags() const { return negative_offsets.empty() ? 0 : negative_offsets.size() - 1; }
  std::size_t dimensionality() const { return positives.cols(); }
};

WhitenedData prepare_training_data(const BagCollection& collection, const BackgroundStats& stats,
                                   DetectorKind kind);

// Selected instance per (positive bag j, signature k): a row index into
// WhitenedData::positives and its statistic x*_{j,k} . s_k.
struct Representatives {
  std::size_t num_bags = 0;
  std::size_t num_targets = 0;
  std::vector<std::size_t> row;
  std::vector<double> score;

  std::size_t index(std::size_t j, std::size_t k) const { return j * num_targets + k; }
  std::size_t at(std::size_t j, std::size_t k) const { return row[index(j, k)]; }
  double score_at(std::size_t j, std::size_t k) const { return score[index(j, k)]; }
};

// Each positive bag is assigned to exactly one signature.
struct Indicators {
  std::size_t num_targets = 0;
  std::vector<std::size_t> assignment;  // per positive bag

  bool delta(std::size_t j, std::size_t k) const { return assignment[j] == k; }
  std::size_t count(std::size_t k) const;
};

struct ObjectiveTerms {
  double positive = 0.0;    // M+
  double negative = 0.0;    // M-
  double uniqueness = 0.0;  // M_u, zero when K == 1
  double total() const { return positive - negative - uniqueness; }
};

struct OptState {
  Representatives representatives;
  Indicators indicators;
  std::size_t iteration = 0;
  double objective_value = 0.0;
};

// K-Means with farthest-point seeding (first center drawn from `seed`), Lloyd
// iterations until assignments stop changing or max_iter, centers returned in
// lexicographic order.
RowMatrix kmeans(const RowMatrix& points, std::size_t clusters, std::uint64_t seed, std::size_t max_iter);

// Per-bag argmax of x . s_k; the lowest row wins ties.
Representatives select_representatives(const RowMatrix& signatures, const WhitenedData& data);

// delta_{j,k} = 1 for the signature whose representative statistic is
// largest; exact ties go to the lowest k.
Indicators compute_indicators(const Representatives& reps);

ObjectiveTerms objective_terms(const RowMatrix& signatures, const Representatives& reps,
                               const WhitenedData& data, double alpha);
// Objective with freshly selected representatives.
double objective(const RowMatrix& signatures, const WhitenedData& data, double alpha);

// Greedy selection of K unit-normalized cluster centers, each maximizing the
// objective given those already chosen. Ties resolve to the earlier center.
RowMatrix init_greedy(const RowMatrix& centers, const WhitenedData& data, std::size_t targets, double alpha);

struct SignatureUpdate {
  std::vector<double> signature;
  bool degenerate = false;  // t == 0 or no assigned bags; previous signature kept
};

// Closed-form maximizer of the per-signature Lagrangian:
//   t = mean of assigned representatives - negative_mean - alpha/(K-1) * sum_{l != k} s_l,
//   s_k = t / |t|.
SignatureUpdate update_signature(std::size_t k, const RowMatrix& signatures, const Representatives& reps,
                                 const Indicators& indicators, const WhitenedData& data, double alpha);

// The unnormalized t above, exposed for diagnostics and tests.
std::vector<double> update_direction(std::size_t k, const RowMatrix& signatures, const Representatives& reps,
                                     const Indicators& indicators, const WhitenedData& data, double alpha);

// Drops signatures with no assigned bag (never the last one). Returns the
// kept original indices; reps and indicators are remapped in place.
std::vector<std::size_t> prune(RowMatrix& signatures, Representatives& reps, Indicators& indicators);

struct TraceRow {
  std::size_t iteration = 0;
  double objective = 0.0;
  std::size_t num_targets = 0;
};

struct TrainingTrace {
  std::vector<TraceRow> rows;
  std::string stop_reason;  // "converged" | "max_iter"
  bool cycle_detected = false;
  std::size_t degenerate_updates = 0;
};

struct TrainResult {
  TargetDictionary dictionary;
  TrainingTrace trace;
  BackgroundStats stats;
  RowMatrix initial_signatures;  // whitened, after greedy initialization
  std::size_t clusters_used = 0;
};

TrainResult train(const BagCollection& collection, const LearnerConfig& config);

// Runs the alternating optimization from a given whitened initialization.
// Used by train(); exposed so equivalence tests can share an initialization.
TargetDictionary optimize(RowMatrix signatures, const WhitenedData& data, const BackgroundStats& stats,
                          const LearnerConfig& config, TrainingTrace& trace);

// Trace CSV: `iteration,objective,num_targets,stop_reason`, stop reason on the last row.
void save_trace(const TrainingTrace& trace, const std::string& path);

}  // namespace mtmi

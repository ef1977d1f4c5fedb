// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtmi/data_model.hpp"
#include "mtmi/dictionary.hpp"
#include "mtmi/whitening.hpp"

namespace mtmi {

enum class DetectorKind { Ace, Smf };

// How per-signature statistics combine into one score per instance.
enum class Fusion { Max, Mean };

std::string_view to_string(DetectorKind kind);
DetectorKind parse_detector(std::string_view text);  // "ace" | "smf"
std::string_view to_string(Fusion fusion);
Fusion parse_fusion(std::string_view text);  // "max" | "mean"

// ACE: cosine between P s and P (x - mean). SMF: (P s / |P s|) . P (x - mean).
double detect(std::span<const double> x, std::span<const double> s, const BackgroundStats& stats,
              DetectorKind kind);

// Signatures whitened once, for scoring many instances.
class PreparedDictionary {
 public:
  PreparedDictionary(const RowMatrix& signatures, const BackgroundStats& stats);

  std::size_t size() const { return whitened_.rows(); }
  // Per-signature statistics for x, written to `scores` (length size()).
  void score_all(std::span<const double> x, DetectorKind kind, std::span<double> scores) const;
  double score(std::span<const double> x, DetectorKind kind, Fusion fusion) const;

 private:
  const BackgroundStats* stats_;
  RowMatrix whitened_;
};

// Fused statistic over the dictionary's output signatures.
double detect_dictionary(std::span<const double> x, const TargetDictionary& dict,
                         const BackgroundStats& stats, DetectorKind kind, Fusion fusion = Fusion::Max);
double detect_dictionary(std::span<const double> x, const RowMatrix& signatures,
                         const BackgroundStats& stats, DetectorKind kind, Fusion fusion = Fusion::Max);

struct Detection {
  std::int64_t bag_id = 0;
  std::size_t instance_index = 0;
  double score = 0.0;
};

struct SignatureDetection {
  std::int64_t bag_id = 0;
  std::size_t instance_index = 0;
  std::size_t target_index = 0;  // 0-based
  double score = 0.0;
};

// One fused score per instance, in bag then instance order. Degenerate ACE
// inputs raise DegenerateInstanceError naming the bag and instance.
std::vector<Detection> detect_batch(const BagCollection& collection, const RowMatrix& signatures,
                                    const BackgroundStats& stats, DetectorKind kind,
                                    Fusion fusion = Fusion::Max);

// Every (instance, signature) statistic, instance-major.
std::vector<SignatureDetection> detect_batch_per_signature(const BagCollection& collection,
                                                           const RowMatrix& signatures,
                                                           const BackgroundStats& stats,
                                                           DetectorKind kind);

// Scores CSV: `bag_id,instance_index,score`.
void save_detections(const std::vector<Detection>& detections, const std::string& path);
std::vector<Detection> load_detections(const std::string& path);
// Long form: `bag_id,instance_index,target_index,score` (target_index 1-based).
void save_signature_detections(const std::vector<SignatureDetection>& detections, const std::string& path);
std::vector<SignatureDetection> load_signature_detections(const std::string& path);

}  // namespace mtmi

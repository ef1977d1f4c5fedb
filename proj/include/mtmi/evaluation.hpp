// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtmi/detectors.hpp"
#include "mtmi/simulator.hpp"

namespace mtmi {

struct ScoredInstance {
  double score = 0.0;
  bool truth = false;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

// Threshold sweep, one vertex per unique score (descending). The first vertex
// is (0, 0) at threshold +inf; the last is (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  std::vector<double> thresholds;
  std::size_t num_positive = 0;
  std::size_t num_negative = 0;
};

RocCurve roc_curve(std::span<const ScoredInstance> scored);

struct NaucResult {
  double value = 0.0;
  // The curve ended before the cutoff and its last tpr was carried forward.
  bool extrapolated = false;
};

// Trapezoidal area under the curve on fpr in [0, far_cutoff] divided by the cutoff.
NaucResult nauc_detail(const RocCurve& curve, double far_cutoff);
inline double nauc(const RocCurve& curve, double far_cutoff) { return nauc_detail(curve, far_cutoff).value; }

// Pairs each detection with its ground truth by (bag id, instance index).
// With `target` set, instances of that target are positives, background
// instances negatives, and instances of other targets are dropped. Without
// it, any target presence counts as positive.
std::vector<ScoredInstance> join_scores(const std::vector<Detection>& detections,
                                        const std::vector<TruthRow>& truth,
                                        const std::optional<std::string>& target = std::nullopt);

// ROC CSV: `threshold,fpr,tpr`.
void save_roc(const RocCurve& curve, const std::string& path);
// Plot data restricted to fpr <= cutoff, fpr expressed in units of 1e-3:
// `fpr_x1e-3,tpr`. The curve is interpolated at the cutoff.
void save_roc_plot_data(const RocCurve& curve, double far_cutoff, const std::string& path);

struct SummaryMetric {
  std::string metric;
  std::string value;
};
// Summary CSV: `metric,value`.
void save_summary(const std::vector<SummaryMetric>& metrics, const std::string& path);

}  // namespace mtmi

// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"

namespace mtmi {

RocCurve roc_curve(std::span<const ScoredInstance> scored) {
  RocCurve curve;
  for (const ScoredInstance& s : scored) {
    if (!std::isfinite(s.score)) throw ValidationError("ROC input contains a non-finite score");
    (s.truth ? curve.num_positive : curve.num_negative)++;
  }
  if (curve.num_positive == 0 || curve.num_negative == 0) {
    throw ValidationError("ROC needs at least one positive and one negative instance");
  }
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scored[a].score > scored[b].score; });

  const double p = static_cast<double>(curve.num_positive);
  const double n = static_cast<double>(curve.num_negative);
  curve.points.push_back({0.0, 0.0});
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scored[order[i]].score;
    for (; i < order.size() && scored[order[i]].score == threshold; ++i) {
      (scored[order[i]].truth ? tp : fp)++;
    }
    curve.points.push_back({static_cast<double>(fp) / n, static_cast<double>(tp) / p});
    curve.thresholds.push_back(threshold);
  }
  return curve;
}

NaucResult nauc_detail(const RocCurve& curve, double far_cutoff) {
  if (!(far_cutoff > 0.0) || far_cutoff > 1.0) throw ValidationError("FAR cutoff must lie in (0, 1]");
  if (curve.points.empty()) throw ValidationError("empty ROC curve");
  double area = 0.0;
  bool reached = false;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint a = curve.points[i - 1];
    const RocPoint b = curve.points[i];
    if (a.fpr >= far_cutoff) {
      reached = true;
      break;
    }
    if (b.fpr <= far_cutoff) {
      area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
      if (b.fpr == far_cutoff) {
        reached = true;
        break;
      }
    } else {
      const double tpr_cut = a.tpr + (b.tpr - a.tpr) * (far_cutoff - a.fpr) / (b.fpr - a.fpr);
      area += (far_cutoff - a.fpr) * (a.tpr + tpr_cut) / 2.0;
      reached = true;
      break;
    }
  }
  NaucResult result;
  if (!reached) {
    const RocPoint last = curve.points.back();
    area += (far_cutoff - last.fpr) * last.tpr;
    result.extrapolated = true;
  }
  result.value = area / far_cutoff;
  return result;
}

std::vector<ScoredInstance> join_scores(const std::vector<Detection>& detections,
                                        const std::vector<TruthRow>& truth,
                                        const std::optional<std::string>& target) {
  std::map<std::pair<std::int64_t, std::size_t>, const TruthRow*> index;
  for (const TruthRow& t : truth) index[{t.bag_id, t.instance_index}] = &t;
  std::vector<ScoredInstance> out;
  out.reserve(detections.size());
  for (const Detection& d : detections) {
    const auto it = index.find({d.bag_id, d.instance_index});
    if (it == index.end()) {
      throw ValidationError("no ground truth for bag " + std::to_string(d.bag_id) + ", instance " +
                            std::to_string(d.instance_index));
    }
    const TruthRow& t = *it->second;
    const bool present = t.proportion > 0.0 && !t.target_name.empty();
    if (target && present && t.target_name != *target) continue;
    out.push_back({d.score, present});
  }
  return out;
}

void save_roc(const RocCurve& curve, const std::string& path) {
  std::string text = "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    text += csv::format_double(curve.thresholds[i]) + ',' + csv::format_double(curve.points[i].fpr) + ',' +
            csv::format_double(curve.points[i].tpr) + '\n';
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void save_roc_plot_data(const RocCurve& curve, double far_cutoff, const std::string& path) {
  constexpr double kAxisUnit = 1e-3;
  std::string text = "fpr_x1e-3,tpr\n";
  auto emit = [&](double fpr, double tpr) {
    text += csv::format_double(fpr / kAxisUnit) + ',' + csv::format_double(tpr) + '\n';
  };
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const RocPoint pt = curve.points[i];
    if (pt.fpr <= far_cutoff) {
      emit(pt.fpr, pt.tpr);
      continue;
    }
    const RocPoint a = curve.points[i - 1];
    if (a.fpr < far_cutoff) emit(far_cutoff, a.tpr + (pt.tpr - a.tpr) * (far_cutoff - a.fpr) / (pt.fpr - a.fpr));
    break;
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void save_summary(const std::vector<SummaryMetric>& metrics, const std::string& path) {
  std::string text = "metric,value\n";
  for (const auto& m : metrics) text += csv::quote(m.metric) + ',' + csv::quote(m.value) + '\n';
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace mtmi

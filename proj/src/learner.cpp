// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"
#include "mtmi/kernels.hpp"

namespace mtmi {
namespace {

// Signatures must also stop moving before the run counts as converged; with
// alpha > 0 they can keep drifting while representatives stay fixed.
constexpr double kSignatureTolerance = 1e-12;

double MaxAbsDifference(const RowMatrix& a, const RowMatrix& b) {
  double m = 0.0;
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) m = std::max(m, std::abs(da[i] - db[i]));
  return m;
}

std::vector<std::size_t> StateKey(const Representatives& reps, const Indicators& ind) {
  std::vector<std::size_t> key;
  key.reserve(1 + reps.row.size() + ind.assignment.size());
  key.push_back(reps.num_targets);
  key.insert(key.end(), reps.row.begin(), reps.row.end());
  key.insert(key.end(), ind.assignment.begin(), ind.assignment.end());
  return key;
}

void AppendWhitened(const Instance& x, const BackgroundStats& stats, DetectorKind kind, std::int64_t bag_id,
                    std::size_t index, std::vector<double>& white, std::vector<double>& scratch, RowMatrix& dst) {
  whiten_into(x, stats, white, scratch);
  if (kind == DetectorKind::Ace) {
    const double n = norm(white);
    if (!(n > 0.0)) {
      throw DegenerateInstanceError("bag " + std::to_string(bag_id) + ", instance " + std::to_string(index) +
                                    ": instance equals the background mean; cannot normalize for ACE");
    }
    for (double& v : white) v /= n;
  }
  dst.append_row(white);
}

}  // namespace

void LearnerConfig::validate() const {
  if (initial_targets == 0) throw ValidationError("initial target count K must be at least 1");
  if (!(uniqueness_weight >= 0.0) || !std::isfinite(uniqueness_weight)) {
    throw ValidationError("uniqueness weight alpha must be a non-negative finite number");
  }
  if (kmeans_clusters != 0 && kmeans_clusters < initial_targets) {
    throw ValidationError("kmeans clusters C (" + std::to_string(kmeans_clusters) +
                          ") must be at least K (" + std::to_string(initial_targets) + ")");
  }
  if (kmeans_max_iter == 0) throw ValidationError("kmeans_max_iter must be at least 1");
  if (max_iter == 0) throw ValidationError("max_iter must be at least 1");
  if (!(eigenvalue_floor_ratio > 0.0)) throw ValidationError("eigenvalue floor ratio must be positive");
}

std::size_t LearnerConfig::resolved_clusters(std::size_t num_positive_instances) const {
  std::size_t c = kmeans_clusters != 0 ? kmeans_clusters : std::min(10 * initial_targets, num_positive_instances);
  if (c < initial_targets) {
    throw ValidationError("only " + std::to_string(num_positive_instances) + " positive instances for K = " +
                          std::to_string(initial_targets));
  }
  return c;
}

std::size_t Indicators::count(std::size_t k) const {
  return static_cast<std::size_t>(std::count(assignment.begin(), assignment.end(), k));
}

WhitenedData prepare_training_data(const BagCollection& collection, const BackgroundStats& stats,
                                   DetectorKind kind) {
  const std::size_t dim = collection.dimensionality();
  if (dim != stats.dimensionality()) {
    throw DimensionError("bag dimensionality " + std::to_string(dim) + " does not match background stats " +
                         std::to_string(stats.dimensionality()));
  }
  WhitenedData data;
  data.bag_offsets.push_back(0);
  data.negative_offsets.push_back(0);
  std::vector<double> white(dim), scratch(dim);
  for (const Bag& bag : collection.bags()) {
    RowMatrix& dst = bag.positive ? data.positives : data.negatives;
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      AppendWhitened(bag.instances[i], stats, kind, bag.id, i, white, scratch, dst);
    }
    if (bag.positive) {
      data.bag_offsets.push_back(data.positives.rows());
      data.positive_bag_ids.push_back(bag.id);
    } else {
      data.negative_offsets.push_back(data.negatives.rows());
    }
  }

  data.negative_mean.assign(dim, 0.0);
  std::vector<double> bag_sum(dim);
  const std::size_t nneg = data.num_negative_bags();
  for (std::size_t j = 0; j < nneg; ++j) {
    std::fill(bag_sum.begin(), bag_sum.end(), 0.0);
    const std::size_t begin = data.negative_offsets[j];
    const std::size_t end = data.negative_offsets[j + 1];
    for (std::size_t r = begin; r < end; ++r) kernels::axpy(1.0, data.negatives.row(r), bag_sum);
    kernels::axpy(1.0 / static_cast<double>(end - begin), bag_sum, data.negative_mean);
  }
  if (nneg > 0) {
    for (double& v : data.negative_mean) v /= static_cast<double>(nneg);
  }
  return data;
}

Representatives select_representatives(const RowMatrix& signatures, const WhitenedData& data) {
  Representatives reps;
  reps.num_bags = data.num_positive_bags();
  reps.num_targets = signatures.rows();
  reps.row.assign(reps.num_bags * reps.num_targets, 0);
  reps.score.assign(reps.num_bags * reps.num_targets, 0.0);
  std::vector<double> scores(data.positives.rows());
  for (std::size_t k = 0; k < reps.num_targets; ++k) {
    kernels::gemv(data.positives.data(), data.positives.rows(), data.positives.cols(), signatures.row(k), scores);
    for (std::size_t j = 0; j < reps.num_bags; ++j) {
      std::size_t best = data.bag_offsets[j];
      for (std::size_t r = best + 1; r < data.bag_offsets[j + 1]; ++r) {
        if (scores[r] > scores[best]) best = r;
      }
      reps.row[reps.index(j, k)] = best;
      reps.score[reps.index(j, k)] = scores[best];
    }
  }
  return reps;
}

Indicators compute_indicators(const Representatives& reps) {
  Indicators ind;
  ind.num_targets = reps.num_targets;
  ind.assignment.assign(reps.num_bags, 0);
  for (std::size_t j = 0; j < reps.num_bags; ++j) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < reps.num_targets; ++k) {
      if (reps.score_at(j, k) > reps.score_at(j, best)) best = k;
    }
    ind.assignment[j] = best;
  }
  return ind;
}

ObjectiveTerms objective_terms(const RowMatrix& signatures, const Representatives& reps,
                               const WhitenedData& data, double alpha) {
  ObjectiveTerms terms;
  const std::size_t k_count = signatures.rows();
  if (k_count == 0) throw ValidationError("objective needs a non-empty dictionary");
  if (reps.num_bags > 0) {
    double sum = 0.0;
    for (std::size_t j = 0; j < reps.num_bags; ++j) {
      double best = reps.score_at(j, 0);
      for (std::size_t k = 1; k < k_count; ++k) best = std::max(best, reps.score_at(j, k));
      sum += best;
    }
    terms.positive = sum / static_cast<double>(reps.num_bags);
  }
  if (data.num_negative_bags() > 0) {
    double sum = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) sum += kernels::dot(data.negative_mean, signatures.row(k));
    terms.negative = sum / static_cast<double>(k_count);
  }
  if (k_count > 1) {
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < k_count; ++k) {
      for (std::size_t l = k + 1; l < k_count; ++l) sum += kernels::dot(signatures.row(k), signatures.row(l));
    }
    const double pairs = static_cast<double>(k_count * (k_count - 1) / 2);
    terms.uniqueness = alpha * sum / pairs;
  }
  return terms;
}

double objective(const RowMatrix& signatures, const WhitenedData& data, double alpha) {
  return objective_terms(signatures, select_representatives(signatures, data), data, alpha).total();
}

RowMatrix init_greedy(const RowMatrix& centers, const WhitenedData& data, std::size_t targets, double alpha) {
  if (targets == 0) throw ValidationError("greedy initialization needs K >= 1");
  if (centers.rows() < targets) {
    throw ValidationError("greedy initialization: C = " + std::to_string(centers.rows()) + " < K = " +
                          std::to_string(targets));
  }
  RowMatrix candidates;
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const auto row = centers.row(c);
    const double n = norm(row);
    if (!(n > 0.0)) continue;
    std::vector<double> unit(row.begin(), row.end());
    for (double& v : unit) v /= n;
    candidates.append_row(unit);
  }
  const std::size_t num_candidates = candidates.rows();
  if (num_candidates < targets) throw ValidationError("too few non-zero cluster centers for K");

  // Per-candidate bag maxima, negative statistic and pairwise similarities.
  const Representatives cand_reps = select_representatives(candidates, data);
  const std::size_t nbags = cand_reps.num_bags;
  std::vector<double> neg(num_candidates, 0.0);
  if (data.num_negative_bags() > 0) {
    for (std::size_t c = 0; c < num_candidates; ++c) neg[c] = kernels::dot(data.negative_mean, candidates.row(c));
  }

  std::vector<std::size_t> chosen;
  std::vector<bool> used(num_candidates, false);
  std::vector<double> bag_best(nbags, -std::numeric_limits<double>::infinity());
  double neg_sum = 0.0;
  double pair_sum = 0.0;
  for (std::size_t t = 0; t < targets; ++t) {
    const std::size_t size = t + 1;
    std::size_t best_c = num_candidates;
    double best_value = -std::numeric_limits<double>::infinity();
    double best_pair_add = 0.0;
    for (std::size_t c = 0; c < num_candidates; ++c) {
      if (used[c]) continue;
      double pos = 0.0;
      for (std::size_t j = 0; j < nbags; ++j) pos += std::max(bag_best[j], cand_reps.score_at(j, c));
      if (nbags > 0) pos /= static_cast<double>(nbags);
      const double negative = (neg_sum + neg[c]) / static_cast<double>(size);
      double pair_add = 0.0;
      for (std::size_t l : chosen) pair_add += kernels::dot(candidates.row(c), candidates.row(l));
      const double uniqueness =
          size > 1 ? alpha * (pair_sum + pair_add) / static_cast<double>(size * (size - 1) / 2) : 0.0;
      const double value = pos - negative - uniqueness;
      if (value > best_value) {
        best_value = value;
        best_c = c;
        best_pair_add = pair_add;
      }
    }
    used[best_c] = true;
    chosen.push_back(best_c);
    neg_sum += neg[best_c];
    pair_sum += best_pair_add;
    for (std::size_t j = 0; j < nbags; ++j) bag_best[j] = std::max(bag_best[j], cand_reps.score_at(j, best_c));
  }

  RowMatrix dict;
  for (std::size_t c : chosen) dict.append_row(candidates.row(c));
  return dict;
}

std::vector<double> update_direction(std::size_t k, const RowMatrix& signatures, const Representatives& reps,
                                     const Indicators& indicators, const WhitenedData& data, double alpha) {
  const std::size_t dim = signatures.cols();
  const std::size_t k_count = signatures.rows();
  std::vector<double> t(dim, 0.0);
  const std::size_t assigned = indicators.count(k);
  if (assigned > 0) {
    for (std::size_t j = 0; j < reps.num_bags; ++j) {
      if (indicators.delta(j, k)) kernels::axpy(1.0, data.positives.row(reps.at(j, k)), t);
    }
    const double inv = 1.0 / static_cast<double>(assigned);
    for (double& v : t) v *= inv;
  }
  if (data.num_negative_bags() > 0) kernels::axpy(-1.0, data.negative_mean, t);
  if (k_count > 1 && alpha != 0.0) {
    const double w = -alpha / static_cast<double>(k_count - 1);
    for (std::size_t l = 0; l < k_count; ++l) {
      if (l != k) kernels::axpy(w, signatures.row(l), t);
    }
  }
  return t;
}

SignatureUpdate update_signature(std::size_t k, const RowMatrix& signatures, const Representatives& reps,
                                 const Indicators& indicators, const WhitenedData& data, double alpha) {
  const auto previous = signatures.row(k);
  SignatureUpdate out;
  if (indicators.count(k) == 0) {
    out.signature.assign(previous.begin(), previous.end());
    out.degenerate = true;
    return out;
  }
  out.signature = update_direction(k, signatures, reps, indicators, data, alpha);
  const double n = norm(out.signature);
  if (!(n > 0.0) || !std::isfinite(n)) {
    out.signature.assign(previous.begin(), previous.end());
    out.degenerate = true;
    return out;
  }
  for (double& v : out.signature) v /= n;
  return out;
}

std::vector<std::size_t> prune(RowMatrix& signatures, Representatives& reps, Indicators& indicators) {
  const std::size_t k_count = signatures.rows();
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (indicators.count(k) > 0) kept.push_back(k);
  }
  if (kept.empty()) kept.push_back(0);
  if (kept.size() == k_count) return kept;

  RowMatrix new_sigs;
  Representatives new_reps;
  new_reps.num_bags = reps.num_bags;
  new_reps.num_targets = kept.size();
  std::vector<std::size_t> remap(k_count, 0);
  for (std::size_t n = 0; n < kept.size(); ++n) {
    remap[kept[n]] = n;
    new_sigs.append_row(signatures.row(kept[n]));
  }
  for (std::size_t j = 0; j < reps.num_bags; ++j) {
    for (std::size_t k : kept) {
      new_reps.row.push_back(reps.at(j, k));
      new_reps.score.push_back(reps.score_at(j, k));
    }
  }
  for (std::size_t& a : indicators.assignment) a = remap[a];
  indicators.num_targets = kept.size();
  signatures = std::move(new_sigs);
  reps = std::move(new_reps);
  return kept;
}

TargetDictionary optimize(RowMatrix signatures, const WhitenedData& data, const BackgroundStats& stats,
                          const LearnerConfig& config, TrainingTrace& trace) {
  const double alpha = config.uniqueness_weight;
  trace = TrainingTrace{};
  trace.stop_reason = "max_iter";

  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> previous_key;
  double last_delta = std::numeric_limits<double>::infinity();

  for (std::size_t it = 1; it <= config.max_iter; ++it) {
    Representatives reps = select_representatives(signatures, data);
    Indicators ind = compute_indicators(reps);
    trace.rows.push_back({it, objective_terms(signatures, reps, data, alpha).total(), signatures.rows()});

    std::vector<std::size_t> key = StateKey(reps, ind);
    const bool unchanged = key == previous_key;
    if (unchanged && last_delta <= kSignatureTolerance) {
      trace.stop_reason = "converged";
      break;
    }
    if (!unchanged && !seen.insert(key).second) trace.cycle_detected = true;

    prune(signatures, reps, ind);
    RowMatrix next = signatures;
    for (std::size_t k = 0; k < signatures.rows(); ++k) {
      SignatureUpdate upd = update_signature(k, signatures, reps, ind, data, alpha);
      if (upd.degenerate) ++trace.degenerate_updates;
      std::copy(upd.signature.begin(), upd.signature.end(), next.row(k).begin());
    }
    last_delta = MaxAbsDifference(next, signatures);
    signatures = std::move(next);
    previous_key = StateKey(reps, ind);
  }

  TargetDictionary dict;
  dict.whitened = signatures;
  for (std::size_t k = 0; k < signatures.rows(); ++k) {
    dict.output.append_row(dewhiten_signature(signatures.row(k), stats));
  }
  return dict;
}

TrainResult train(const BagCollection& collection, const LearnerConfig& config) {
  config.validate();
  collection.require_trainable();

  TrainResult result;
  result.stats = estimate_background(collection, config.background_source, config.eigenvalue_floor_ratio);
  const WhitenedData data = prepare_training_data(collection, result.stats, config.detector);

  result.clusters_used = config.resolved_clusters(data.positives.rows());
  const RowMatrix centers = kmeans(data.positives, result.clusters_used, config.seed, config.kmeans_max_iter);
  result.initial_signatures = init_greedy(centers, data, config.initial_targets, config.uniqueness_weight);
  result.dictionary = optimize(result.initial_signatures, data, result.stats, config, result.trace);
  return result;
}

void save_trace(const TrainingTrace& trace, const std::string& path) {
  std::string text = "iteration,objective,num_targets,stop_reason\n";
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    text += std::to_string(row.iteration) + ',' + csv::format_double(row.objective) + ',' +
            std::to_string(row.num_targets) + ',';
    if (i + 1 == trace.rows.size()) text += trace.stop_reason;
    text += '\n';
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace mtmi

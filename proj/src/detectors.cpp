// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/detectors.hpp"

#include <algorithm>
#include <cmath>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"
#include "mtmi/kernels.hpp"

namespace mtmi {
namespace {

double AceFromSmf(double smf, double whitened_norm) {
  return std::clamp(smf / whitened_norm, -1.0, 1.0);
}

}  // namespace

std::string_view to_string(DetectorKind kind) { return kind == DetectorKind::Ace ? "ace" : "smf"; }

DetectorKind parse_detector(std::string_view text) {
  if (text == "ace" || text == "ACE") return DetectorKind::Ace;
  if (text == "smf" || text == "SMF") return DetectorKind::Smf;
  throw ValidationError("unknown detector '" + std::string(text) + "' (expected ace or smf)");
}

std::string_view to_string(Fusion fusion) { return fusion == Fusion::Max ? "max" : "mean"; }

Fusion parse_fusion(std::string_view text) {
  if (text == "max") return Fusion::Max;
  if (text == "mean") return Fusion::Mean;
  throw ValidationError("unknown fusion '" + std::string(text) + "' (expected max or mean)");
}

double detect(std::span<const double> x, std::span<const double> s, const BackgroundStats& stats,
              DetectorKind kind) {
  if (x.size() != stats.dimensionality() || s.size() != stats.dimensionality()) {
    throw DimensionError("detect: instance, signature and stats dimensionalities differ");
  }
  const std::vector<double> s_white = whiten_signature(s, stats);
  const std::vector<double> x_white = whiten(x, stats);
  const double smf = kernels::dot(s_white, x_white);
  if (kind == DetectorKind::Smf) return smf;
  const double n = norm(x_white);
  if (!(n > 0.0)) throw DegenerateInstanceError("ACE undefined: instance equals the background mean");
  return AceFromSmf(smf, n);
}

PreparedDictionary::PreparedDictionary(const RowMatrix& signatures, const BackgroundStats& stats)
    : stats_(&stats) {
  if (signatures.empty()) throw ValidationError("dictionary is empty");
  if (signatures.cols() != stats.dimensionality()) {
    throw DimensionError("dictionary dimensionality " + std::to_string(signatures.cols()) +
                         " does not match background stats dimensionality " +
                         std::to_string(stats.dimensionality()));
  }
  for (std::size_t k = 0; k < signatures.rows(); ++k) {
    whitened_.append_row(whiten_signature(signatures.row(k), stats));
  }
}

void PreparedDictionary::score_all(std::span<const double> x, DetectorKind kind,
                                   std::span<double> scores) const {
  const std::size_t dim = stats_->dimensionality();
  if (x.size() != dim) throw DimensionError("instance dimensionality does not match the dictionary");
  std::vector<double> scratch(dim), white(dim);
  whiten_into(x, *stats_, white, scratch);
  kernels::gemv(whitened_.data(), whitened_.rows(), dim, white, scores);
  if (kind == DetectorKind::Ace) {
    const double n = norm(white);
    if (!(n > 0.0)) throw DegenerateInstanceError("ACE undefined: instance equals the background mean");
    for (double& v : scores) v = AceFromSmf(v, n);
  }
}

double PreparedDictionary::score(std::span<const double> x, DetectorKind kind, Fusion fusion) const {
  std::vector<double> scores(size());
  score_all(x, kind, scores);
  if (fusion == Fusion::Max) return *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double v : scores) sum += v;
  return sum / static_cast<double>(scores.size());
}

double detect_dictionary(std::span<const double> x, const RowMatrix& signatures,
                         const BackgroundStats& stats, DetectorKind kind, Fusion fusion) {
  return PreparedDictionary(signatures, stats).score(x, kind, fusion);
}

double detect_dictionary(std::span<const double> x, const TargetDictionary& dict,
                         const BackgroundStats& stats, DetectorKind kind, Fusion fusion) {
  return detect_dictionary(x, dict.output, stats, kind, fusion);
}

std::vector<Detection> detect_batch(const BagCollection& collection, const RowMatrix& signatures,
                                    const BackgroundStats& stats, DetectorKind kind, Fusion fusion) {
  const PreparedDictionary prepared(signatures, stats);
  std::vector<Detection> out;
  out.reserve(collection.num_instances());
  for (const Bag& bag : collection.bags()) {
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      try {
        out.push_back({bag.id, i, prepared.score(bag.instances[i], kind, fusion)});
      } catch (const DegenerateInstanceError& e) {
        throw DegenerateInstanceError("bag " + std::to_string(bag.id) + ", instance " + std::to_string(i) +
                                      ": " + e.what());
      }
    }
  }
  return out;
}

std::vector<SignatureDetection> detect_batch_per_signature(const BagCollection& collection,
                                                           const RowMatrix& signatures,
                                                           const BackgroundStats& stats,
                                                           DetectorKind kind) {
  const PreparedDictionary prepared(signatures, stats);
  std::vector<SignatureDetection> out;
  out.reserve(collection.num_instances() * prepared.size());
  std::vector<double> scores(prepared.size());
  for (const Bag& bag : collection.bags()) {
    for (std::size_t i = 0; i < bag.instances.size(); ++i) {
      try {
        prepared.score_all(bag.instances[i], kind, scores);
      } catch (const DegenerateInstanceError& e) {
        throw DegenerateInstanceError("bag " + std::to_string(bag.id) + ", instance " + std::to_string(i) +
                                      ": " + e.what());
      }
      for (std::size_t k = 0; k < scores.size(); ++k) out.push_back({bag.id, i, k, scores[k]});
    }
  }
  return out;
}

void save_detections(const std::vector<Detection>& detections, const std::string& path) {
  std::string text = "bag_id,instance_index,score\n";
  for (const Detection& d : detections) {
    text += std::to_string(d.bag_id) + ',' + std::to_string(d.instance_index) + ',' +
            csv::format_double(d.score) + '\n';
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<Detection> load_detections(const std::string& path) {
  csv::LineReader reader(path);
  std::string line;
  if (!reader.next(line) || line != "bag_id,instance_index,score") {
    throw ParseError("bad header: expected 'bag_id,instance_index,score' at line 1", 1);
  }
  std::vector<Detection> out;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    const auto malformed = [ln] { return ParseError("malformed score row at line " + std::to_string(ln), ln); };
    if (f.size() != 3) throw malformed();
    const auto id = csv::parse_int(f[0]);
    const auto idx = csv::parse_int(f[1]);
    const auto score = csv::parse_double(f[2]);
    if (!id || !idx || *idx < 0 || !score || !std::isfinite(*score)) throw malformed();
    out.push_back({*id, static_cast<std::size_t>(*idx), *score});
  }
  return out;
}

void save_signature_detections(const std::vector<SignatureDetection>& detections, const std::string& path) {
  std::string text = "bag_id,instance_index,target_index,score\n";
  for (const SignatureDetection& d : detections) {
    text += std::to_string(d.bag_id) + ',' + std::to_string(d.instance_index) + ',' +
            std::to_string(d.target_index + 1) + ',' + csv::format_double(d.score) + '\n';
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<SignatureDetection> load_signature_detections(const std::string& path) {
  csv::LineReader reader(path);
  std::string line;
  if (!reader.next(line) || line != "bag_id,instance_index,target_index,score") {
    throw ParseError("bad header: expected 'bag_id,instance_index,target_index,score' at line 1", 1);
  }
  std::vector<SignatureDetection> out;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (line.empty()) continue;
    const auto f = csv::split_line(line);
    const auto malformed = [ln] { return ParseError("malformed score row at line " + std::to_string(ln), ln); };
    if (f.size() != 4) throw malformed();
    const auto id = csv::parse_int(f[0]);
    const auto idx = csv::parse_int(f[1]);
    const auto k = csv::parse_int(f[2]);
    const auto score = csv::parse_double(f[3]);
    if (!id || !idx || *idx < 0 || !k || *k < 1 || !score || !std::isfinite(*score)) throw malformed();
    out.push_back({*id, static_cast<std::size_t>(*idx), static_cast<std::size_t>(*k - 1), *score});
  }
  return out;
}

}  // namespace mtmi

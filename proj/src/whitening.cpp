// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include "mtmi/whitening.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtmi/csv.hpp"
#include "mtmi/errors.hpp"
#include "mtmi/kernels.hpp"

namespace mtmi {
namespace {

void CheckDim(std::size_t got, const BackgroundStats& stats, const char* what) {
  if (got != stats.dimensionality()) {
    throw DimensionError(std::string(what) + " has length " + std::to_string(got) +
                         " but background stats have dimensionality " +
                         std::to_string(stats.dimensionality()));
  }
}

BackgroundStats FromEigenCovariance(std::vector<double> mean, const Eigen::MatrixXd& cov,
                                    double floor_ratio, std::size_t sample_count) {
  const auto dim = static_cast<Eigen::Index>(mean.size());
  if (!cov.allFinite()) throw Error("background covariance has non-finite entries");
  if (!(floor_ratio > 0.0)) throw ValidationError("eigenvalue floor ratio must be positive");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("background covariance eigendecomposition failed");

  // Eigen returns ascending order. Sort descending, keeping exact ties in
  // Eigen's order so a scaled identity whitens to a scaled identity.
  const Eigen::VectorXd& raw = solver.eigenvalues();
  const Eigen::MatrixXd& vecs = solver.eigenvectors();
  const double largest = raw.maxCoeff();
  if (!(largest > 0.0)) throw Error("background covariance is zero; cannot whiten");
  const double floor = floor_ratio * largest;

  std::vector<Eigen::Index> order(mean.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return raw(a) > raw(b); });

  std::vector<double> eigenvalues(mean.size());
  RowMatrix u(mean.size(), mean.size());
  std::size_t clamped = 0;
  double max_shift = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    double lambda = raw(src);
    if (lambda < floor) {
      ++clamped;
      max_shift = std::max(max_shift, floor - lambda);
      lambda = floor;
    }
    eigenvalues[k] = lambda;

    // Largest-magnitude entry positive; first index wins ties.
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < dim; ++i) {
      if (std::abs(vecs(i, src)) > std::abs(vecs(pivot, src))) pivot = i;
    }
    const double sign = vecs(pivot, src) < 0.0 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < dim; ++i) u(i, k) = sign * vecs(i, src);
  }

  BackgroundStats stats = stats_from_eigensystem(std::move(mean), std::move(eigenvalues), std::move(u), floor);
  stats.num_clamped = clamped;
  stats.max_clamp_shift = max_shift;
  stats.sample_count = sample_count;
  stats.rank_deficient = sample_count != 0 && sample_count < stats.dimensionality() + 1;
  return stats;
}

}  // namespace

double norm(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

BackgroundStats stats_from_eigensystem(std::vector<double> mean, std::vector<double> eigenvalues,
                                       RowMatrix eigenvectors, double eigenvalue_floor) {
  const std::size_t dim = mean.size();
  if (eigenvalues.size() != dim || eigenvectors.rows() != dim || eigenvectors.cols() != dim) {
    throw DimensionError("eigensystem size does not match the mean");
  }
  BackgroundStats stats;
  stats.whitener = RowMatrix(dim, dim);
  stats.dewhitener = RowMatrix(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(eigenvalues[k] > 0.0)) throw ValidationError("eigenvalues must be positive");
    const double inv_sqrt = 1.0 / std::sqrt(eigenvalues[k]);
    const double sqrt_l = std::sqrt(eigenvalues[k]);
    for (std::size_t i = 0; i < dim; ++i) {
      stats.whitener(k, i) = eigenvectors(i, k) * inv_sqrt;
      stats.dewhitener(i, k) = eigenvectors(i, k) * sqrt_l;
    }
  }
  stats.mean = std::move(mean);
  stats.eigenvalues = std::move(eigenvalues);
  stats.eigenvectors = std::move(eigenvectors);
  stats.eigenvalue_floor = eigenvalue_floor;
  return stats;
}

BackgroundStats estimate_background(const RowMatrix& samples, double floor_ratio) {
  const std::size_t n = samples.rows();
  const std::size_t dim = samples.cols();
  if (n < 2) throw ValidationError("background estimation needs at least 2 instances");

  std::vector<double> mean(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r) kernels::axpy(1.0, samples.row(r), mean);
  for (double& m : mean) m /= static_cast<double>(n);

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = samples.row(r);
    for (std::size_t c = 0; c < dim; ++c) centered(r, c) = row[c] - mean[c];
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(centered.cols(), centered.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n - 1);
  return FromEigenCovariance(std::move(mean), cov, floor_ratio, n);
}

BackgroundStats estimate_background(const BagCollection& collection, BackgroundSource source,
                                    double floor_ratio) {
  RowMatrix samples;
  for (const Bag& bag : collection.bags()) {
    if (source == BackgroundSource::NegativeBagsOnly && bag.positive) continue;
    for (const Instance& x : bag.instances) samples.append_row(x);
  }
  if (samples.rows() < 2) {
    throw ValidationError("background estimation needs at least 2 source instances, found " +
                          std::to_string(samples.rows()));
  }
  return estimate_background(samples, floor_ratio);
}

BackgroundStats stats_from_covariance(std::span<const double> mean, const RowMatrix& covariance,
                                      double floor_ratio) {
  const std::size_t dim = mean.size();
  if (covariance.rows() != dim || covariance.cols() != dim) {
    throw DimensionError("covariance size does not match the mean");
  }
  Eigen::MatrixXd cov(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) cov(i, j) = covariance(i, j);
  }
  return FromEigenCovariance(std::vector<double>(mean.begin(), mean.end()), cov, floor_ratio, 0);
}

void whiten_into(std::span<const double> x, const BackgroundStats& stats, std::span<double> out,
                 std::span<double> scratch) {
  const std::size_t dim = stats.dimensionality();
  for (std::size_t i = 0; i < dim; ++i) scratch[i] = x[i] - stats.mean[i];
  kernels::gemv(stats.whitener.data(), dim, dim, scratch.first(dim), out.first(dim));
}

std::vector<double> whiten(std::span<const double> x, const BackgroundStats& stats) {
  CheckDim(x.size(), stats, "instance");
  std::vector<double> out(x.size()), scratch(x.size());
  whiten_into(x, stats, out, scratch);
  return out;
}

std::vector<double> whiten_normalize(std::span<const double> x, const BackgroundStats& stats) {
  std::vector<double> w = whiten(x, stats);
  const double n = norm(w);
  if (!(n > 0.0)) throw DegenerateInstanceError("instance equals the background mean; whitened norm is zero");
  for (double& v : w) v /= n;
  return w;
}

std::vector<double> whiten_signature(std::span<const double> s, const BackgroundStats& stats) {
  CheckDim(s.size(), stats, "signature");
  const std::size_t dim = s.size();
  std::vector<double> w(dim);
  kernels::gemv(stats.whitener.data(), dim, dim, s, w);
  const double n = norm(w);
  if (!(n > 0.0)) throw DegenerateInstanceError("target signature has zero whitened norm");
  for (double& v : w) v /= n;
  return w;
}

std::vector<double> dewhiten_signature(std::span<const double> s_hat, const BackgroundStats& stats) {
  CheckDim(s_hat.size(), stats, "whitened signature");
  if (!(norm(s_hat) > 0.0)) throw DegenerateInstanceError("cannot de-whiten a zero signature");
  const std::size_t dim = s_hat.size();
  std::vector<double> t(dim);
  kernels::gemv(stats.dewhitener.data(), dim, dim, s_hat, t);
  const double n = norm(t);
  for (double& v : t) v /= n;
  return t;
}

void save_stats(const BackgroundStats& stats, const std::string& path) {
  const std::size_t dim = stats.dimensionality();
  std::string text = "row";
  for (std::size_t b = 1; b <= dim; ++b) text += ",b" + std::to_string(b);
  text += '\n';
  auto emit = [&](const std::string& name, auto&& value_at) {
    text += name;
    for (std::size_t i = 0; i < dim; ++i) text += ',' + csv::format_double(value_at(i));
    text += '\n';
  };
  emit("mean", [&](std::size_t i) { return stats.mean[i]; });
  emit("eigenvalue", [&](std::size_t i) { return stats.eigenvalues[i]; });
  for (std::size_t k = 0; k < dim; ++k) {
    emit("eigenvector_" + std::to_string(k + 1), [&](std::size_t i) { return stats.eigenvectors(i, k); });
  }
  auto out = csv::open_for_write(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

BackgroundStats load_stats(const std::string& path) {
  csv::LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty stats file '" + path + "'", 1);
  const auto header = csv::split_line(line);
  if (header.size() < 3 || header[0] != "row") throw ParseError("bad stats header at line 1", 1);
  const std::size_t dim = header.size() - 1;

  std::vector<std::vector<double>> rows;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (line.empty()) continue;
    const auto fields = csv::split_line(line);
    if (fields.size() != dim + 1) {
      throw ParseError("inconsistent dimensionality at line " + std::to_string(ln), ln);
    }
    const std::size_t idx = rows.size();
    const std::string expected = idx == 0 ? "mean" : idx == 1 ? "eigenvalue" : "eigenvector_" + std::to_string(idx - 1);
    if (fields[0] != expected) {
      throw ParseError("expected row '" + expected + "' at line " + std::to_string(ln), ln);
    }
    std::vector<double> values(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto v = csv::parse_double(fields[i + 1]);
      if (!v || !std::isfinite(*v)) throw ParseError("malformed value at line " + std::to_string(ln), ln);
      values[i] = *v;
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() != dim + 2) {
    throw ParseError("stats file '" + path + "' must hold " + std::to_string(dim + 2) + " rows", reader.line_number());
  }
  RowMatrix u(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < dim; ++i) u(i, k) = rows[k + 2][i];
  }
  const double floor = *std::min_element(rows[1].begin(), rows[1].end());
  return stats_from_eigensystem(std::move(rows[0]), std::move(rows[1]), std::move(u), floor);
}

}  // namespace mtmi

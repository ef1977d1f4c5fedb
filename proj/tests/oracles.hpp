// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used as test oracles. Everything here
// is written with plain loops and never calls into the library's kernels, so a
// bug in the optimized code cannot hide behind the same bug in its oracle.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mtmi/data_model.hpp"
#include "mtmi/evaluation.hpp"
#include "mtmi/matrix.hpp"
#include "mtmi/whitening.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Bags = std::vector<std::vector<Vec>>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec normalized(Vec v) {
  const double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

inline Vec row(const mtmi::RowMatrix& m, std::size_t r) {
  const auto s = m.row(r);
  return {s.begin(), s.end()};
}

// P (x - mu) with P taken straight from the stats.
inline Vec whiten(const Vec& x, const mtmi::BackgroundStats& st) {
  const std::size_t d = x.size();
  Vec out(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) out[r] += st.whitener(r, c) * (x[c] - st.mean[c]);
  }
  return out;
}

// Objective written term by term:
//   M+ = 1/N+ sum_j max_k max_{x in B_j+} x.s_k
//   M- = 1/K sum_k 1/N- sum_j 1/N_j- sum_{x in B_j-} x.s_k
//   Mu = alpha / C(K,2) sum_{k<l} s_k.s_l      (0 when K = 1)
// objective = M+ - M- - Mu
struct Terms {
  double positive = 0.0, negative = 0.0, uniqueness = 0.0;
  double total() const { return positive - negative - uniqueness; }
};

inline Terms objective(const std::vector<Vec>& sigs, const Bags& pos, const Bags& neg, double alpha) {
  Terms t;
  const std::size_t k_count = sigs.size();
  for (const auto& bag : pos) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : sigs) {
      for (const auto& x : bag) best = std::max(best, dot(x, s));
    }
    t.positive += best;
  }
  if (!pos.empty()) t.positive /= static_cast<double>(pos.size());
  for (const auto& s : sigs) {
    double per_sig = 0.0;
    for (const auto& bag : neg) {
      double per_bag = 0.0;
      for (const auto& x : bag) per_bag += dot(x, s);
      per_sig += per_bag / static_cast<double>(bag.size());
    }
    if (!neg.empty()) t.negative += per_sig / static_cast<double>(neg.size());
  }
  t.negative /= static_cast<double>(k_count);
  if (k_count > 1) {
    double pairs = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t l = k + 1; l < k_count; ++l) {
        sum += dot(sigs[k], sigs[l]);
        pairs += 1.0;
      }
    }
    t.uniqueness = alpha * sum / pairs;
  }
  return t;
}

// Single-signature multiple instance loop: pick each positive bag's best
// instance, move the signature to (mean of picks - mean of negatives), repeat
// until the picks stop changing.
inline Vec mi_loop(Vec s, const Bags& pos, const Bags& neg, std::size_t max_iter) {
  const std::size_t d = s.size();
  Vec neg_mean(d, 0.0);
  for (const auto& bag : neg) {
    Vec m(d, 0.0);
    for (const auto& x : bag) {
      for (std::size_t i = 0; i < d; ++i) m[i] += x[i];
    }
    for (std::size_t i = 0; i < d; ++i) neg_mean[i] += m[i] / static_cast<double>(bag.size());
  }
  for (double& v : neg_mean) v /= static_cast<double>(neg.size());

  std::vector<std::size_t> picks, last;
  for (std::size_t it = 0; it < max_iter; ++it) {
    picks.clear();
    for (const auto& bag : pos) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < bag.size(); ++i) {
        if (dot(bag[i], s) > dot(bag[best], s)) best = i;
      }
      picks.push_back(best);
    }
    if (picks == last) break;
    last = picks;
    Vec t(d, 0.0);
    for (std::size_t j = 0; j < pos.size(); ++j) {
      for (std::size_t i = 0; i < d; ++i) t[i] += pos[j][picks[j]][i];
    }
    for (std::size_t i = 0; i < d; ++i) t[i] = t[i] / static_cast<double>(pos.size()) - neg_mean[i];
    s = normalized(t);
  }
  return s;
}

// Probability that a random positive outscores a random negative, ties
// counted as one half.
inline double mann_whitney(const std::vector<mtmi::ScoredInstance>& v) {
  double wins = 0.0, pos = 0.0, neg = 0.0;
  for (const auto& a : v) (a.truth ? pos : neg) += 1.0;
  for (const auto& a : v) {
    if (!a.truth) continue;
    for (const auto& b : v) {
      if (b.truth) continue;
      if (a.score > b.score) wins += 1.0;
      else if (a.score == b.score) wins += 0.5;
    }
  }
  return wins / (pos * neg);
}

// ROC vertices from every distinct threshold, including +inf, by direct counting.
inline std::vector<mtmi::RocPoint> exhaustive_roc(const std::vector<mtmi::ScoredInstance>& v) {
  std::vector<double> thresholds{std::numeric_limits<double>::infinity()};
  for (const auto& a : v) thresholds.push_back(a.score);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double pos = 0.0, neg = 0.0;
  for (const auto& a : v) (a.truth ? pos : neg) += 1.0;
  std::vector<mtmi::RocPoint> out;
  for (double t : thresholds) {
    double tp = 0.0, fp = 0.0;
    for (const auto& a : v) {
      if (a.score >= t) (a.truth ? tp : fp) += 1.0;
    }
    out.push_back({fp / neg, tp / pos});
  }
  return out;
}

inline double trapezoid(const std::vector<mtmi::RocPoint>& pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  }
  return area;
}

inline Vec random_vec(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vec v(d);
  for (double& x : v) x = n(rng);
  return v;
}

inline Vec random_unit(std::size_t d, std::mt19937_64& rng) { return normalized(random_vec(d, rng)); }

// Gaussian bags around `center` with unit spread.
inline mtmi::BagCollection random_collection(std::size_t npos, std::size_t nneg, std::size_t per_bag_max,
                                             std::size_t d, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> sz(1, per_bag_max);
  std::vector<mtmi::Bag> bags;
  std::int64_t id = 1;
  for (std::size_t b = 0; b < npos + nneg; ++b) {
    mtmi::Bag bag;
    bag.id = id++;
    bag.positive = b < npos;
    const std::size_t n = sz(rng);
    for (std::size_t i = 0; i < n; ++i) bag.instances.push_back(random_vec(d, rng));
    bags.push_back(std::move(bag));
  }
  return mtmi::BagCollection(std::move(bags));
}

}  // namespace oracle

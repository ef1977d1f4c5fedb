// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mtmi/cli.hpp"
#include "mtmi/detectors.hpp"
#include "mtmi/evaluation.hpp"
#include "mtmi/learner.hpp"
#include "mtmi/simulator.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mtmi;
using oracle::Bags;
using oracle::Vec;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// 1 and 2: the two-target simulated scene.

SimConfig SceneConfig(std::uint64_t seed) {
  SimConfig c;
  c.targets = {"basalt", "verde_antique"};
  c.backgrounds = {"pyroxenite", "phyllite", "slate"};
  c.num_pos_bags = 10;
  c.num_neg_bags = 20;
  c.points_per_bag = 500;
  c.targets_per_pos_bag = 250;
  c.mean_target_proportion = 0.3;
  c.snr_db = 20.0;
  c.seed = seed;
  return c;
}

struct SceneRun {
  std::size_t multi_targets = 0;
  double multi_seconds = 0.0;
  std::map<std::string, double> multi_nauc, single_nauc;
};

std::map<std::string, double> PerTargetNauc(const TrainResult& r, const SimulatedDataset& test) {
  const auto det = detect_batch(test.bags, r.dictionary.output, r.stats, DetectorKind::Ace, Fusion::Max);
  std::map<std::string, double> out;
  for (const std::string name : {"basalt", "verde_antique"}) {
    out[name] = nauc(roc_curve(join_scores(det, test.truth, name)), 1e-3);
  }
  return out;
}

// Same seed derivation as the simulate command: the first two draws seed the
// training and test scenes.
SceneRun RunScene(const SpectralLibrary& lib, std::uint64_t seed) {
  std::mt19937_64 seeder(seed);
  const std::uint64_t train_seed = seeder(), test_seed = seeder();
  const auto train_set = generate_dataset(lib, SceneConfig(train_seed));
  const auto test_set = generate_dataset(lib, SceneConfig(test_seed));

  SceneRun run;
  LearnerConfig multi;
  multi.initial_targets = 4;
  multi.uniqueness_weight = 1.0;
  multi.seed = seed;
  const auto t0 = Clock::now();
  const TrainResult m = train(train_set.bags, multi);
  run.multi_seconds = Seconds(t0);
  run.multi_targets = m.dictionary.size();
  run.multi_nauc = PerTargetNauc(m, test_set);

  LearnerConfig single;
  single.seed = seed;
  run.single_nauc = PerTargetNauc(train(train_set.bags, single), test_set);
  return run;
}

// ---------------------------------------------------------------------------
// 3: single-target special case against an independent loop.

Outcome SpecialCase() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  int mismatched_shapes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 2 + trial % 7;
    const std::size_t npos = 1 + trial % 3, nneg = 1 + (trial / 3) % 2;  // 2 to 5 bags
    std::vector<Bag> bags;
    std::int64_t id = 1;
    std::uniform_int_distribution<std::size_t> size(2, 8);
    for (std::size_t j = 0; j < npos; ++j) {
      Bag b{id++, true, {}};
      const std::size_t n = size(rng);
      for (std::size_t i = 0; i < n; ++i) b.instances.push_back(oracle::random_vec(dim, rng));
      bags.push_back(b);
    }
    for (std::size_t j = 0; j < nneg; ++j) {
      Bag b{id++, false, {}};
      for (std::size_t i = 0; i < 2 * dim + 4; ++i) b.instances.push_back(oracle::random_vec(dim, rng));
      bags.push_back(b);
    }
    const BagCollection c(std::move(bags));
    for (DetectorKind kind : {DetectorKind::Ace, DetectorKind::Smf}) {
      LearnerConfig cfg;
      cfg.detector = kind;
      cfg.seed = static_cast<std::uint64_t>(trial);
      const TrainResult r = train(c, cfg);

      // Whiten (and for ACE normalize) with plain loops.
      Bags pos, neg;
      for (const Bag& b : c.bags()) {
        std::vector<Vec> xs;
        for (const auto& x : b.instances) {
          Vec w = oracle::whiten(x, r.stats);
          if (kind == DetectorKind::Ace) w = oracle::normalized(w);
          xs.push_back(w);
        }
        (b.positive ? pos : neg).push_back(xs);
      }
      const Vec expected = oracle::mi_loop(oracle::row(r.initial_signatures, 0), pos, neg, cfg.max_iter);
      if (r.dictionary.size() != 1) {
        ++mismatched_shapes;
        continue;
      }
      for (std::size_t i = 0; i < dim; ++i) worst = std::max(worst, std::abs(r.dictionary.whitened(0, i) - expected[i]));
    }
  }
  return {mismatched_shapes == 0 && worst <= 1e-10,
          Fmt("40 runs (20 instances x ACE/SMF), max component difference %.3g (tol 1e-10)", worst)};
}

// ---------------------------------------------------------------------------
// 4: closed-form update against the Lagrangian.

WhitenedData FromVectors(const Bags& pos, const Bags& neg) {
  WhitenedData d;
  d.bag_offsets.push_back(0);
  d.negative_offsets.push_back(0);
  std::int64_t id = 1;
  for (const auto& bag : pos) {
    for (const auto& x : bag) d.positives.append_row(x);
    d.bag_offsets.push_back(d.positives.rows());
    d.positive_bag_ids.push_back(id++);
  }
  const std::size_t dim = pos.front().front().size();
  d.negative_mean.assign(dim, 0.0);
  for (const auto& bag : neg) {
    Vec m(dim, 0.0);
    for (const auto& x : bag) {
      d.negatives.append_row(x);
      for (std::size_t i = 0; i < dim; ++i) m[i] += x[i];
    }
    d.negative_offsets.push_back(d.negatives.rows());
    for (std::size_t i = 0; i < dim; ++i) d.negative_mean[i] += m[i] / static_cast<double>(bag.size());
  }
  for (double& v : d.negative_mean) v /= static_cast<double>(neg.size());
  return d;
}

Bags RandomUnitBags(std::size_t n, std::size_t max_size, std::size_t dim, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> sz(1, max_size);
  Bags bags(n);
  for (auto& bag : bags) {
    const std::size_t m = sz(rng);
    for (std::size_t i = 0; i < m; ++i) bag.push_back(oracle::random_unit(dim, rng));
  }
  return bags;
}

RowMatrix Rows(const std::vector<Vec>& rows) {
  RowMatrix m;
  for (const auto& r : rows) m.append_row(r);
  return m;
}

Outcome UpdateEquation() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> alpha_dist(0.0, 2.0);
  double worst_grad = 0.0, worst_norm = 0.0;
  int states = 0, checked = 0;
  while (states < 100) {
    const std::size_t dim = 2 + states % 7, k_count = 1 + states % 4;
    const Bags pos = RandomUnitBags(2 + states % 4, 6, dim, rng), neg = RandomUnitBags(1 + states % 3, 6, dim, rng);
    std::vector<Vec> sigs;
    for (std::size_t k = 0; k < k_count; ++k) sigs.push_back(oracle::random_unit(dim, rng));
    const double alpha = alpha_dist(rng);
    const auto data = FromVectors(pos, neg);
    const RowMatrix S = Rows(sigs);
    const auto reps = select_representatives(S, data);
    const auto ind = compute_indicators(reps);
    ++states;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (ind.count(k) == 0) continue;
      // Terms of the Lagrangian that depend on s_k, representatives held fixed:
      //   L(s) = g . s - lambda (s . s - 1)
      Vec g(dim, 0.0);
      for (std::size_t j = 0; j < pos.size(); ++j) {
        if (ind.assignment[j] != k) continue;
        const auto x = data.positives.row(reps.at(j, k));
        for (std::size_t i = 0; i < dim; ++i) g[i] += x[i] / static_cast<double>(ind.count(k));
      }
      for (const auto& bag : neg) {
        for (const auto& x : bag) {
          for (std::size_t i = 0; i < dim; ++i) g[i] -= x[i] / static_cast<double>(bag.size() * neg.size());
        }
      }
      for (std::size_t l = 0; k_count > 1 && l < k_count; ++l) {
        if (l == k) continue;
        for (std::size_t i = 0; i < dim; ++i) g[i] -= alpha / static_cast<double>(k_count - 1) * sigs[l][i];
      }
      const auto upd = update_signature(k, S, reps, ind, data, alpha);
      const Vec& s = upd.signature;
      worst_norm = std::max(worst_norm, std::abs(oracle::norm(s) - 1.0));
      const double lambda = oracle::norm(g) / 2.0;
      auto lagrangian = [&](const Vec& v) { return oracle::dot(g, v) - lambda * (oracle::dot(v, v) - 1.0); };
      const double h = 1e-6;
      Vec grad(dim);
      for (std::size_t i = 0; i < dim; ++i) {
        Vec up = s, down = s;
        up[i] += h;
        down[i] -= h;
        grad[i] = (lagrangian(up) - lagrangian(down)) / (2.0 * h);
      }
      const double along = oracle::dot(grad, s);
      for (std::size_t i = 0; i < dim; ++i) worst_grad = std::max(worst_grad, std::abs(grad[i] - along * s[i]));
      ++checked;
    }
  }
  return {worst_grad <= 1e-5 && worst_norm <= 1e-10,
          Fmt("%.0f signature updates over 100 states, max projected gradient %.3g (tol 1e-5), max | |s|-1 | %.3g",
              checked, worst_grad, worst_norm)};
}

// ---------------------------------------------------------------------------
// 5: objective against the term-by-term oracle.

Outcome ObjectiveOracle() {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 2 + trial % 6, k = 1 + trial % 4;
    const Bags pos = RandomUnitBags(1 + trial % 4, 6, dim, rng), neg = RandomUnitBags(1 + trial % 3, 6, dim, rng);
    std::vector<Vec> sigs;
    for (std::size_t i = 0; i < k; ++i) sigs.push_back(oracle::random_unit(dim, rng));
    const double alpha = 0.25 * (trial % 5);
    const double got = objective(Rows(sigs), FromVectors(pos, neg), alpha);
    worst = std::max(worst, std::abs(got - oracle::objective(sigs, pos, neg, alpha).total()));
  }
  return {worst <= 1e-12, Fmt("50 instances, max difference %.3g (tol 1e-12)", worst)};
}

// ---------------------------------------------------------------------------
// 6: detector identities.

Outcome DetectorIdentities() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
  double max_abs = 0.0, worst_scale = 0.0, worst_link = 0.0;
  const int kInputs = 100000;
  int done = 0;
  while (done < kInputs) {
    const std::size_t dim = 2 + done / 1000 % 9;
    RowMatrix samples;
    // Correlated background: random mixing of white noise.
    std::vector<Vec> mix;
    for (std::size_t i = 0; i < dim; ++i) mix.push_back(oracle::random_vec(dim, rng));
    for (std::size_t n = 0; n < 5 * dim + 10; ++n) {
      const Vec z = oracle::random_vec(dim, rng);
      Vec x(dim, 0.0);
      for (std::size_t r = 0; r < dim; ++r) x[r] = oracle::dot(mix[r], z) + 0.5;
      samples.append_row(x);
    }
    const BackgroundStats stats = estimate_background(samples);
    for (int i = 0; i < 1000; ++i, ++done) {
      const Vec x = oracle::random_vec(dim, rng, 3.0);
      const Vec s = oracle::random_vec(dim, rng);
      const double ace = detect(x, s, stats, DetectorKind::Ace);
      max_abs = std::max(max_abs, std::abs(ace));
      Vec scaled = s;
      const double c = std::pow(10.0, log_scale(rng));
      for (double& v : scaled) v *= c;
      worst_scale = std::max(worst_scale, std::abs(detect(x, scaled, stats, DetectorKind::Ace) - ace));
      const double smf = detect(x, s, stats, DetectorKind::Smf);
      worst_link = std::max(worst_link, std::abs(ace - smf / oracle::norm(oracle::whiten(x, stats))));
    }
  }
  const bool pass = max_abs <= 1.0 && worst_scale <= 1e-10 && worst_link <= 1e-10;
  return {pass, Fmt("1e5 inputs, max |ACE| = %.17g, scale drift %.3g, ACE vs SMF/|P(x-mu)| %.3g (tol 1e-10)",
                    max_abs, worst_scale, worst_link)};
}

// ---------------------------------------------------------------------------
// 7: NAUC against Mann-Whitney and exhaustive enumeration.

Outcome NaucOracle() {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::bernoulli_distribution coin(0.3 + 0.004 * trial);
    std::vector<ScoredInstance> v;
    const int n = 10 + trial * 3;
    for (int i = 0; i < n; ++i) {
      double s = g(rng);
      if (trial % 2 == 0) s = std::round(s * 3.0) / 3.0;  // heavy ties
      v.push_back({s, coin(rng)});
    }
    v[0].truth = true;
    v[1].truth = false;
    worst = std::max(worst, std::abs(nauc(roc_curve(v), 1.0) - oracle::mann_whitney(v)));
  }
  const std::vector<ScoredInstance> six{{0.9, true}, {0.8, true}, {0.7, false}, {0.6, true}, {0.5, false}, {0.4, false}};
  const RocCurve c = roc_curve(six);
  const auto expected = oracle::exhaustive_roc(six);
  bool exact = c.points.size() == expected.size();
  for (std::size_t i = 0; exact && i < expected.size(); ++i) {
    exact = c.points[i].fpr == expected[i].fpr && c.points[i].tpr == expected[i].tpr;
  }
  return {worst <= 1e-12 && exact,
          Fmt("100 score sets, max |nauc(1) - Mann-Whitney| %.3g (tol 1e-12); six-instance ROC ", worst) +
              (exact ? "exact" : "MISMATCH")};
}

// ---------------------------------------------------------------------------
// 8: pipeline determinism.

std::map<std::string, std::string> Snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = testutil::read_file(e.path().string());
  }
  return files;
}

Outcome PipelineDeterminism(const SpectralLibrary& lib) {
  testutil::TempDir dir;
  save_library(lib, dir.file("rocks.csv"));
  std::ostringstream sink;
  int failures = 0;
  for (const char* out : {"run_a", "run_b"}) {
    failures += cli::run({"pipeline", "--preset", "sim-a", "--library", dir.file("rocks.csv"), "--seed", "17",
                          "--per-signature", "true", "--out-dir", dir.file(out)},
                         sink, sink) != cli::kExitOk;
  }
  if (failures) return {false, "pipeline exited with an error: " + sink.str()};
  const auto a = Snapshot(dir.path() / "run_a"), b = Snapshot(dir.path() / "run_b");
  std::size_t differing = 0;
  for (const auto& [name, text] : a) differing += !b.count(name) || b.at(name) != text;
  const bool pass = a.size() == b.size() && differing == 0 && !a.empty();
  return {pass, Fmt("%.0f output files compared, %.0f differ", static_cast<double>(a.size()),
                    static_cast<double>(differing + (a.size() != b.size())))};
}

// ---------------------------------------------------------------------------
// 9: planted direction recovery.

Outcome PlantedRecovery() {
  int recovered = 0;
  double worst_cos = 1.0, slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(900 + seed);
    const std::size_t dim = 8;
    const Vec plant = oracle::random_unit(dim, rng);
    std::vector<Bag> bags;
    std::int64_t id = 1;
    for (int j = 0; j < 12; ++j) {
      Bag pos{id++, true, {}}, neg{id++, false, {}};
      for (int i = 0; i < 30; ++i) {
        auto x = oracle::random_vec(dim, rng);
        if (i < 3) {
          for (std::size_t k = 0; k < dim; ++k) x[k] += 15.0 * plant[k];
        }
        pos.instances.push_back(x);
        neg.instances.push_back(oracle::random_vec(dim, rng));
      }
      bags.push_back(pos);
      bags.push_back(neg);
    }
    const BagCollection c(std::move(bags));
    LearnerConfig cfg;
    cfg.seed = seed;
    const auto t0 = Clock::now();
    const TrainResult r = train(c, cfg);
    const double secs = Seconds(t0);
    slowest = std::max(slowest, secs);
    const double cos = std::abs(oracle::dot(oracle::row(r.dictionary.whitened, 0), whiten_signature(plant, r.stats)));
    worst_cos = std::min(worst_cos, cos);
    recovered += cos >= 0.99 && secs < 10.0;
  }
  return {recovered == 10, Fmt("%.0f/10 seeds with |cos| >= 0.99 in < 10 s (min |cos| %.4f, slowest %.3f s)",
                               recovered, worst_cos, slowest)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };

  const SpectralLibrary lib = synthetic_rock_library();
  std::vector<SceneRun> runs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) runs.push_back(RunScene(lib, seed));

  {
    int two = 0;
    double slowest = 0.0;
    std::string counts;
    for (const auto& r : runs) {
      two += r.multi_targets == 2 && r.multi_seconds < 120.0;
      slowest = std::max(slowest, r.multi_seconds);
      counts += (counts.empty() ? "" : ",") + std::to_string(r.multi_targets);
    }
    report(1, "target-count recovery", {two >= 8, Fmt("%.0f/10 seeds returned 2 signatures (need 8), slowest %.2f s; K per seed: ",
                                                    two, slowest) + counts});
  }
  {
    int better = 0;
    std::string detail;
    for (const auto& r : runs) {
      // The harder target is the one the single-signature run detects worse.
      const std::string harder =
          r.single_nauc.at("basalt") <= r.single_nauc.at("verde_antique") ? "basalt" : "verde_antique";
      const double m = r.multi_nauc.at(harder), s = r.single_nauc.at(harder);
      better += m >= s;
      detail += " " + harder.substr(0, 1) + Fmt(":%.3f/%.3f", m, s);
    }
    report(2, "multi-target advantage on the harder target",
           {better >= 8, Fmt("%.0f/10 seeds with multi >= single NAUC@1e-3 (need 8); multi/single:", better) + detail});
  }
  report(3, "single-target special case", SpecialCase());
  report(4, "closed-form update", UpdateEquation());
  report(5, "objective oracle", ObjectiveOracle());
  report(6, "detector identities", DetectorIdentities());
  report(7, "NAUC oracle", NaucOracle());
  report(8, "pipeline determinism", PipelineDeterminism(lib));
  report(9, "planted recovery", PlantedRecovery());

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}

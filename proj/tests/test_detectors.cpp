// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mtmi/detectors.hpp"
#include "mtmi/errors.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace mtmi;
using doctest::Approx;

namespace {

BackgroundStats Identity(std::size_t d) {
  RowMatrix cov(d, d);
  for (std::size_t i = 0; i < d; ++i) cov(i, i) = 1.0;
  return stats_from_covariance(std::vector<double>(d, 0.0), cov);
}

BackgroundStats RandomStats(std::size_t d, std::mt19937_64& rng) {
  RowMatrix s;
  for (int r = 0; r < 60; ++r) {
    auto x = oracle::random_vec(d, rng);
    for (std::size_t i = 0; i < d; ++i) x[i] = x[i] * (1.0 + i) + 0.5;
    s.append_row(x);
  }
  return estimate_background(s);
}

}  // namespace

TEST_CASE("hand case with identity statistics") {
  const auto st = Identity(2);
  const std::vector<double> s{1, 0}, x{1, 1};
  CHECK(detect(x, s, st, DetectorKind::Ace) == Approx(0.70710678).epsilon(1e-8));
  CHECK(detect(x, s, st, DetectorKind::Smf) == Approx(1.0));
}

TEST_CASE("aligned instance gives ACE one; the mean gives SMF zero") {
  std::mt19937_64 rng(1);
  const auto st = RandomStats(5, rng);
  const auto s = oracle::random_vec(5, rng);
  // x - mu parallel to s in whitened space: x = mu + c * s.
  std::vector<double> x(5);
  for (std::size_t i = 0; i < 5; ++i) x[i] = st.mean[i] + 2.5 * s[i];
  CHECK(std::abs(detect(x, s, st, DetectorKind::Ace) - 1.0) <= 1e-10);
  CHECK(detect(st.mean, s, st, DetectorKind::Smf) == 0.0);
  CHECK_THROWS_AS(detect(st.mean, s, st, DetectorKind::Ace), DegenerateInstanceError);
  CHECK_THROWS_AS(detect(x, std::vector<double>(5, 0.0), st, DetectorKind::Ace), DegenerateInstanceError);
  CHECK_THROWS_AS(detect(std::vector<double>(4, 1.0), s, st, DetectorKind::Ace), DimensionError);
}

TEST_CASE("ACE range, scale invariance and the link to SMF") {
  std::mt19937_64 rng(2);
  const auto st = RandomStats(6, rng);
  std::uniform_real_distribution<double> c(1e-3, 1e3);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto x = oracle::random_vec(6, rng, 3.0), s = oracle::random_vec(6, rng);
    const double ace = detect(x, s, st, DetectorKind::Ace);
    CHECK(ace >= -1.0);
    CHECK(ace <= 1.0);
    auto scaled = s;
    const double k = c(rng);
    for (double& v : scaled) v *= k;
    CHECK(std::abs(detect(x, scaled, st, DetectorKind::Ace) - ace) <= 1e-10);
    const double smf = detect(x, s, st, DetectorKind::Smf);
    CHECK(std::abs(ace - smf / oracle::norm(whiten(x, st))) <= 1e-10);
  }
}

TEST_CASE("SMF depends on x only through x - mu") {
  std::mt19937_64 rng(3);
  const auto centered = RandomStats(4, rng);
  auto shifted = centered;
  const auto mu = oracle::random_vec(4, rng);
  shifted.mean = mu;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = oracle::random_vec(4, rng), s = oracle::random_vec(4, rng);
    std::vector<double> x_shift(4), x_center(4);
    for (std::size_t i = 0; i < 4; ++i) {
      x_shift[i] = x[i] + mu[i];
      x_center[i] = x[i] + centered.mean[i];
    }
    CHECK(detect(x_shift, s, shifted, DetectorKind::Smf) ==
          Approx(detect(x_center, s, centered, DetectorKind::Smf)).epsilon(1e-12));
  }
}

TEST_CASE("dictionary detection fuses per-signature statistics") {
  const auto st = Identity(2);
  RowMatrix one;
  one.append_row(std::vector<double>{1, 2});
  const std::vector<double> x{0.5, -1.0};
  CHECK(detect_dictionary(x, one, st, DetectorKind::Ace) == detect(x, one.row(0), st, DetectorKind::Ace));

  RowMatrix two;
  two.append_row(std::vector<double>{1, 0});
  two.append_row(std::vector<double>{0, 1});
  const std::vector<double> y{3, 1};
  const double a = 3.0 / std::sqrt(10.0), b = 1.0 / std::sqrt(10.0);
  CHECK(detect_dictionary(y, two, st, DetectorKind::Ace) == Approx(std::max(a, b)));
  CHECK(detect_dictionary(y, two, st, DetectorKind::Ace, Fusion::Mean) == Approx((a + b) / 2));
  CHECK(detect_dictionary(y, two, st, DetectorKind::Smf) == Approx(3.0));

  // An aligned signature dominates the max.
  RowMatrix three = two;
  three.append_row(y);
  CHECK(detect_dictionary(y, three, st, DetectorKind::Ace) == Approx(1.0).epsilon(1e-12));

  TargetDictionary dict;
  dict.output = two;
  CHECK(detect_dictionary(y, dict, st, DetectorKind::Ace) == Approx(std::max(a, b)));
  CHECK_THROWS_AS(detect_dictionary(y, RowMatrix{}, st, DetectorKind::Ace), Error);
}

TEST_CASE("batch detection") {
  std::mt19937_64 rng(4);
  const auto st = RandomStats(3, rng);
  RowMatrix sigs;
  sigs.append_row(oracle::random_vec(3, rng));
  sigs.append_row(oracle::random_vec(3, rng));
  const BagCollection c({Bag{5, true, {oracle::random_vec(3, rng), oracle::random_vec(3, rng)}},
                         Bag{9, false, {oracle::random_vec(3, rng)}}});
  const auto dets = detect_batch(c, sigs, st, DetectorKind::Ace);
  REQUIRE(dets.size() == 3);
  CHECK(dets[0].bag_id == 5);
  CHECK(dets[1].instance_index == 1);
  CHECK(dets[2].bag_id == 9);
  std::size_t n = 0;
  for (const auto& bag : c.bags()) {
    for (const auto& x : bag.instances) CHECK(dets[n++].score == detect_dictionary(x, sigs, st, DetectorKind::Ace));
  }

  // Reordering bags reorders scores identically.
  const BagCollection swapped({c.bags()[1], c.bags()[0]});
  const auto dets2 = detect_batch(swapped, sigs, st, DetectorKind::Ace);
  CHECK(dets2[0].score == dets[2].score);
  CHECK(dets2[1].score == dets[0].score);
  CHECK(dets2[2].score == dets[1].score);

  const auto per = detect_batch_per_signature(c, sigs, st, DetectorKind::Smf);
  REQUIRE(per.size() == 6);
  CHECK(per[3].target_index == 1);
  CHECK(per[3].instance_index == 1);
  CHECK(per[3].score == detect(c.bags()[0].instances[1], sigs.row(1), st, DetectorKind::Smf));

  // Degenerate instances are reported with their location.
  const BagCollection bad({Bag{77, false, {oracle::random_vec(3, rng), st.mean}}});
  try {
    detect_batch(bad, sigs, st, DetectorKind::Ace);
    FAIL("expected an error");
  } catch (const DegenerateInstanceError& e) {
    CHECK(std::string(e.what()).find("bag 77, instance 1") != std::string::npos);
  }
}

TEST_CASE("score files round-trip") {
  testutil::TempDir dir;
  const std::vector<Detection> dets = {{1, 0, 0.125}, {-4, 7, -1.0 / 3.0}};
  save_detections(dets, dir.file("s.csv"));
  const auto back = load_detections(dir.file("s.csv"));
  REQUIRE(back.size() == 2);
  CHECK(back[1].bag_id == -4);
  CHECK(back[1].instance_index == 7);
  CHECK(back[1].score == dets[1].score);
  const std::vector<SignatureDetection> per = {{1, 0, 0, 0.5}, {1, 0, 1, 0.25}};
  save_signature_detections(per, dir.file("p.csv"));
  CHECK(testutil::read_file(dir.file("p.csv")) == "bag_id,instance_index,target_index,score\n1,0,1,0.5\n1,0,2,0.25\n");
  const auto per_back = load_signature_detections(dir.file("p.csv"));
  CHECK(per_back[1].target_index == 1);
  testutil::write_file(dir.file("bad.csv"), "bag_id,instance_index,score\n1,0\n");
  CHECK_THROWS_AS(load_detections(dir.file("bad.csv")), ParseError);
  CHECK(parse_detector("smf") == DetectorKind::Smf);
  CHECK(parse_fusion("mean") == Fusion::Mean);
  CHECK_THROWS_AS(parse_detector("rx"), Error);
}

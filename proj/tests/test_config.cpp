// Copyright 2026 The mtmi Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "mtmi/config.hpp"
#include "mtmi/errors.hpp"
#include "test_util.hpp"

using namespace mtmi;

TEST_CASE("parsing") {
  const auto c = parse_config("# comment\n\n  k = 4 \nalpha=0.5\r\ntargets=a,b\nempty=\n");
  CHECK(c.get("k") == "4");
  CHECK(c.get("alpha") == "0.5");
  CHECK(c.get("targets") == "a,b");
  CHECK(c.get("empty") == "");
  CHECK_FALSE(c.get("missing").has_value());
  CHECK(c.entries().size() == 4);
  CHECK(parse_config("").entries().empty());
  CHECK(parse_config("a=b=c").get("a") == "b=c");
}

TEST_CASE("parse errors name the line") {
  auto message = [](std::string_view text) {
    try {
      parse_config(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("a=1\nnovalue\n") == "expected key=value at line 2");
  CHECK(message("=3") == "empty key at line 1");
  CHECK(message("a=1\n# x\na=2") == "duplicate key 'a' at line 3");
}

TEST_CASE("format and file round trip") {
  KeyValueConfig c;
  c.set("zeta", "1");
  c.set("alpha", "0.1");
  c.set("detector", "smf");
  CHECK(format_config(c) == "alpha=0.1\ndetector=smf\nzeta=1\n");
  CHECK(parse_config(format_config(c)) == c);

  testutil::TempDir dir;
  save_config(c, dir.file("c.txt"));
  CHECK(load_config(dir.file("c.txt")) == c);
  CHECK_THROWS_AS(load_config(dir.file("absent.txt")), IoError);
  testutil::write_file(dir.file("bad.txt"), "x\n");
  try {
    load_config(dir.file("bad.txt"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.txt") != std::string::npos);
    CHECK(e.line() == 1);
  }
}

TEST_CASE("merge lets later layers win") {
  KeyValueConfig base = parse_config("k=1\nalpha=0\n");
  base.merge(parse_config("k=3\nseed=7\n"));
  CHECK(base.get("k") == "3");
  CHECK(base.get("alpha") == "0");
  CHECK(base.get("seed") == "7");
  base.erase("seed");
  CHECK_FALSE(base.contains("seed"));
}

TEST_CASE("presets") {
  const auto sim = preset("sim-a");
  CHECK(sim.get("k") == "4");
  CHECK(sim.get("alpha") == "1");
  CHECK(sim.get("pos-bags") == "10");
  CHECK(sim.get("neg-bags") == "20");
  CHECK(sim.get("points") == "500");
  CHECK(sim.get("targets-per-bag") == "250");
  CHECK(sim.get("proportion") == "0.3");
  CHECK(sim.get("snr") == "20");
  const auto muufl = preset("muufl");
  CHECK(muufl.get("k") == "2");
  CHECK(muufl.get("alpha") == "0.1");
  const auto aviris = preset("aviris");
  CHECK(aviris.get("k") == "10");
  CHECK(aviris.get("alpha") == "0.05");
  CHECK(aviris.get("background") == "all");
  CHECK(aviris.get("far") == "0.01");
  for (const auto& name : preset_names()) CHECK_NOTHROW(preset(name));
  CHECK_THROWS_AS(preset("hydice"), ValidationError);
}

#include "doctest.h"

#include "ergcount/harness.hpp"

#include <filesystem>
#include <set>

using namespace ergcount;

namespace {

RunConfig config(json j) { return RunConfig::from_json(j); }

std::set<std::string> failing_anchors(const VerificationReport& r) {
  std::set<std::string> out;
  for (auto& c : r.claims()) {
    if (!c.pass) out.insert(c.anchor);
  }
  return out;
}

size_t count_char(const std::string& s, char c) { return static_cast<size_t>(std::count(s.begin(), s.end(), c)); }

const json kSmallSampling = {{"random_points", 10}, {"endpoint_cap", 8}, {"window_samples", 2}};

}  // namespace

TEST_CASE("document envelope") {
  json d = wrap_document("thing", {{"a", 1}});
  CHECK(open_document(d, "thing")["a"] == 1);
  CHECK_THROWS_AS(open_document(d, "other"), SchemaError);
  d["schema_version"] = kSchemaVersion + 1;
  CHECK_THROWS_WITH_AS(open_document(d, "thing"), doctest::Contains("schema version"), SchemaError);
  CHECK_THROWS_AS(open_document(json::array(), "thing"), SchemaError);
}

TEST_CASE("base system save and load") {
  BaseSystem s = build_base(BaseParams{});
  json doc = json::parse(save_base(s).dump());
  BaseSystem t = load_base(doc);
  CHECK(t.J == s.J);
  CHECK(t.h == s.h);
  CHECK(t.N == s.N);
  for (size_t l = 0; l < s.B.size(); ++l) {
    CHECK(t.B[l].edge() == s.B[l].edge());
    CHECK(t.Gamma[l].edge() == s.Gamma[l].edge());
  }
  CHECK(t.f.map() == s.f.map());
  CHECK(base_to_json(t) == base_to_json(s));

  SUBCASE("overlapping families") {
    doc["payload"]["B"][1] = doc["payload"]["B"][0];
    CHECK_THROWS_WITH_AS(load_base(doc), doctest::Contains("overlap"), SchemaError);
  }
  SUBCASE("Gamma outside B") {
    doc["payload"]["Gamma"][0] = doc["payload"]["B"][2];
    CHECK_THROWS_AS(load_base(doc), SchemaError);
  }
  SUBCASE("f with a negative value") {
    doc["payload"]["f"]["values"][1] = "-1/1";
    CHECK_THROWS_AS(load_base(doc), SchemaError);
  }
  SUBCASE("parameters that do not match the sets") {
    doc["payload"]["params"]["S"] = "1";
    CHECK_THROWS_AS(load_base(doc), SchemaError);
  }
  SUBCASE("other version") {
    doc["schema_version"] = 0;
    CHECK_THROWS_AS(load_base(doc), SchemaError);
  }
  SUBCASE("truncated") {
    doc["payload"].erase("Gamma");
    CHECK_THROWS_AS(load_base(doc), SchemaError);
  }
}

TEST_CASE("level system save and load") {
  LevelParams p;
  p.k = 2;
  LevelSystem s = build_level_k(p);
  json doc = json::parse(save_level(s).dump());
  LevelSystem t = load_level(doc);
  CHECK(level_to_json(t) == level_to_json(s));
  CHECK(t.integral() == s.integral());
  doc["payload"]["Ke"] = "1";
  CHECK_THROWS_AS(load_level(doc), SchemaError);
}

TEST_CASE("atomic writes") {
  auto dir = std::filesystem::temp_directory_path() / "ergcount_test_io";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "x.json").string();
  write_atomic(path, "one");
  write_atomic(path, "two");
  CHECK(read_file(path) == "two");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("layout rendering") {
  BaseSystem s = build_base(BaseParams{});
  std::string txt = render_layout(s, {RenderFormat::Text, 64});
  // rows B_4 .. B_1 with widths 64 * (1/2, 1/4, 1/8, 1/8)
  CHECK(txt.find("B_4  |" + std::string(32, '-') + std::string(32, ' ') + "| 1/2") != std::string::npos);
  CHECK(txt.find("B_3  |" + std::string(16, '.') + std::string(48, ' ') + "| 1/4") != std::string::npos);
  CHECK(txt.find("B_2  |" + std::string(8, '=') + std::string(56, ' ') + "| 1/8") != std::string::npos);
  CHECK(txt.find("B_1  |" + std::string(8, '_')) != std::string::npos);
  CHECK(txt.find("B_5") == std::string::npos);
  // blow-up of one component of B_1: eight blocks, one f cell each
  CHECK(txt.find("4194304 blocks") != std::string::npos);
  CHECK(count_char(txt.substr(txt.find("I' =")), '|') == 8 + 1);

  std::string svg = render_layout(s, {RenderFormat::Svg, 64});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("stroke-dasharray=\"8,4\"") != std::string::npos);
  CHECK(svg.find("stroke-dasharray=\"2,3\"") != std::string::npos);
  CHECK(svg.find("x2=\"188\"") != std::string::npos);  // B_4: 60 + 4 * 32

  BaseSystem empty;
  CHECK(render_layout(empty).empty());
  CHECK(render_layout(empty, {RenderFormat::Svg, 64}).find("width=\"0\"") != std::string::npos);
  CHECK_THROWS_AS(render_layout(s, {RenderFormat::Text, 2}), std::invalid_argument);

  BaseParams p5;
  p5.M = 5;
  p5.N1 = 11;
  std::string t5 = render_layout(build_base(p5), {RenderFormat::Text, 64});
  CHECK(t5.find("B_5  |" + std::string(32, '-')) != std::string::npos);
  CHECK(t5.find("B_2  |" + std::string(4, '=')) != std::string::npos);
}

TEST_CASE("small oracle suite") {
  OraclePolicy o;
  o.instances = 150;
  o.max_work = 20000;
  VerificationReport r = oracle_suite(o);
  CHECK(r.claims().size() == 150);
  CHECK(r.all_pass());
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config({{"command", "nope"}}), ConfigError);
  CHECK_THROWS_AS(config({{"seed", 1}}), ConfigError);
  CHECK_THROWS_AS(config({{"command", "base"}, {"colour", "red"}}), ConfigError);
  CHECK_THROWS_AS(config({{"command", "base"}, {"seed", -4}}), ConfigError);
  CHECK_THROWS_AS(config({{"command", "base"}, {"seed", "12x"}}), ConfigError);
  CHECK_THROWS_AS(config({{"command", "analog"}, {"negative_control", "halve_f"}}), ConfigError);
  CHECK_THROWS_AS(config({{"command", "base"}, {"negative_control", "flip"}}), ConfigError);
  CHECK_THROWS_AS(config({{"command", "base"}, {"sampling", {{"points", 3}}}}), ConfigError);
  CHECK(config({{"command", "base"}, {"seed", "18446744073709551615"}}).seed == UINT64_MAX);
  CHECK_THROWS_AS(run(config({{"command", "base"}, {"params", {{"M", 3}}}})), ConfigError);
  CHECK_THROWS_AS(run(config({{"command", "levelk"}, {"params", {{"k", 2}, {"bogus", 1}}}})), ConfigError);
  RunConfig c = config({{"command", "pblock"}, {"seed", 9}, {"params", {{"p", 2}}}});
  CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("budgets and estimates") {
  CHECK_THROWS_AS(run(config({{"command", "base"}, {"budgets", {{"max_J_bits", 50}}}})), BudgetError);
  RunResult e = run(config({{"command", "base"}, {"estimate_only", true}}));
  CHECK(e.estimate["J0"] == 100);
  CHECK(e.report.claims().empty());
  CHECK_THROWS_AS(
      run(config({{"command", "levelk"}, {"budgets", {{"max_shapes", 3}}}, {"params", {{"k", 3}, {"M", 4}}}})),
      BudgetError);
  RunResult lk = run(config({{"command", "levelk"}, {"estimate_only", true}, {"params", {{"k", 8}, {"M", 5}}}}));
  CHECK(lk.estimate["shapes"] == "97656");
  RunResult pb = run(config({{"command", "pblock"}, {"estimate_only", true}, {"params", {{"p", 3}}}}));
  CHECK(pb.estimate["honest"]["M_p"] == 5);
  CHECK(pb.estimate["relaxed"]["shapes"] == "97656");
  CHECK_THROWS_WITH_AS(run(config({{"command", "pblock"}, {"params", {{"p", 3}, {"relaxed", false}}}})),
                       doctest::Contains("J_bits"), BudgetError);
}

TEST_CASE("base runs and negative controls") {
  json base = {{"command", "base"}, {"sampling", kSmallSampling}};
  RunResult good = run(config(base));
  CHECK(good.report.all_pass());
  CHECK(good.report.claims().size() > 100);

  base["negative_control"] = "shift_support";
  RunResult shifted = run(config(base));
  CHECK(failing_anchors(shifted.report) == std::set<std::string>{"base.f.congruence"});

  base["negative_control"] = "halve_f";
  RunResult halved = run(config(base));
  std::set<std::string> bad = failing_anchors(halved.report);
  CHECK(bad.count("base.ratio"));
  CHECK(bad.count("base.f.integral"));
  CHECK(halved.report.meta()["negative_control"] == "halve_f");
}

TEST_CASE("render through run") {
  RunResult r = run(config({{"command", "render"}, {"params", {{"format", "svg"}, {"width", 32}}}}));
  REQUIRE(r.artifact);
  CHECK(r.artifact->find("<svg") == 0);
  CHECK(r.report.all_pass());
  CHECK_THROWS_AS(run(config({{"command", "render"}, {"params", {{"format", "png"}}}})), ConfigError);
}

TEST_CASE("same config, same report") {
  std::vector<json> cfgs{
      {{"command", "base"}, {"seed", 5}, {"sampling", kSmallSampling}},
      {{"command", "levelk"}, {"seed", 6}, {"params", {{"k", 2}}}, {"sampling", kSmallSampling}},
      {{"command", "blowup"}, {"seed", 7}, {"params", {{"p", 2}, {"witnesses", 2}}}},
      {{"command", "analog"}, {"seed", 8}, {"params", {{"sets", 5}, {"points", 5}, {"sequences", 20}, {"grid_bits", 6}, {"weak_sets", 1}}}},
      {{"command", "oracle-suite"}, {"seed", 9}, {"params", {{"instances", 30}, {"max_work", 5000}}}},
  };
  for (const json& j : cfgs) {
    CAPTURE(j.dump());
    RunConfig c = config(j);
    std::string a = report_document(c, run(c).report).dump();
    std::string b = report_document(c, run(config(j)).report).dump();
    CHECK(a == b);
  }
  // and the seed matters where there is sampling
  RunConfig c1 = config(cfgs[4]);
  RunConfig c2 = c1;
  c2.seed = 10;
  CHECK(run(c1).report.to_json() != run(c2).report.to_json());
}

TEST_CASE("every verifier cites its anchors") {
  const std::set<std::string> required{
      "base.schedule", "base.J0", "base.cascade", "base.cascade.measure", "base.gamma", "base.gamma.measure",
      "base.gamma.grid", "base.f.integral", "base.f.values", "base.f.support", "base.f.congruence", "base.f.count",
      "base.J-independence", "base.equidistribution", "base.window", "base.ratio",
      "levelk.life_tower", "levelk.integral", "levelk.support", "levelk.superdistributed", "levelk.distribution",
      "levelk.independence", "levelk.witness", "levelk.additivity", "levelk.ratio",
      "pblock.integral", "pblock.exit", "pblock.stats", "pblock.chebyshev", "pblock.independence", "pblock.lambda",
      "pblock.wrap", "pblock.smallness",
      "blowup.lambda", "blowup.witness", "blowup.chain",
      "analog.indicator", "analog.A", "analog.H", "analog.seq", "analog.weak",
      "counting.oracle"};
  std::vector<json> cfgs{
      {{"command", "base"}, {"sampling", kSmallSampling}},
      {{"command", "levelk"}, {"params", {{"k", 2}}}, {"sampling", kSmallSampling}},
      {{"command", "pblock"}, {"params", {{"p", 2}, {"stats_max_k", 4}}}},
      {{"command", "blowup"}, {"params", {{"p", 2}, {"witnesses", 2}}}},
      {{"command", "analog"}, {"params", {{"sets", 5}, {"points", 5}, {"sequences", 20}, {"grid_bits", 6}, {"weak_sets", 1}}}},
      {{"command", "oracle-suite"}, {"params", {{"instances", 10}}}},
  };
  std::set<std::string> seen;
  for (const json& j : cfgs) {
    VerificationReport r = run(config(j)).report;
    CHECK(r.all_pass());
    for (auto& c : r.claims()) {
      CHECK_FALSE(c.anchor.empty());
      seen.insert(c.anchor);
    }
  }
  for (const std::string& a : required) {
    CAPTURE(a);
    CHECK(seen.count(a));
  }
}

// One line per acceptance criterion; exit status 0 iff all of them pass.

#include "ergcount/harness.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace ergcount;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

size_t with_anchor(const VerificationReport& r, const std::string& anchor, bool failing = false) {
  size_t n = 0;
  for (auto& c : r.claims()) n += c.anchor == anchor && (!failing || !c.pass);
  return n;
}

bool exact_all_pass(const VerificationReport& r) {
  for (auto& c : r.claims()) {
    if (c.kind == ClaimKind::Exact && !c.pass) return false;
  }
  return true;
}

std::string first_failure(const VerificationReport& r) {
  for (auto& c : r.claims()) {
    if (!c.pass) return " first failure " + c.id;
  }
  return "";
}

// shared between criteria 1, 2 and 9
const BaseSystem& base_system() {
  static BaseSystem s = [] {
    BaseParams p;  // M = 4, nu(N) = N + 1, N_1 = 11, S = 0, I = [0,1), J = J_0
    return build_base(p);
  }();
  return s;
}

const VerificationReport& base_report() {
  static VerificationReport r = verify_base(base_system(), SamplingPolicy{});
  return r;
}

Outcome c1() {
  const BaseSystem& s = base_system();
  const int M = s.params.M;
  bool ok = s.J == 100 && s.J0 == 100;
  ok = ok && s.B_at(M).measure() == Scaled(Rat(1, 2));
  for (int l = 0; l <= M - 2; ++l) ok = ok && s.B_at(M - l).measure() == Scaled::pow2(-(l + 1));
  ok = ok && s.B_at(1).measure() == Scaled::pow2(-(M - 1));
  ok = ok && s.f.integral() == Scaled::pow2(-M + 1);
  for (int l = 1; l <= M; ++l) ok = ok && s.Gamma_at(l).measure() > Scaled(Rat(99, 100)).times2exp(-M + l - 1);
  const VerificationReport& r = base_report();
  ok = ok && exact_all_pass(r);
  std::ostringstream d;
  d << r.count(ClaimKind::Exact) << " exact claims, J = " << s.J << ", integral of f = " << scaled_str(s.f.integral())
    << first_failure(r);
  return {ok, d.str()};
}

Outcome c2() {
  const VerificationReport& r = base_report();
  const int M = base_system().params.M;
  // ids are ratio.<l>.<point>.<n index>
  std::vector<std::set<std::string>> points(static_cast<size_t>(M) + 1);
  std::vector<std::set<std::string>> ns(static_cast<size_t>(M) + 1);
  bool ok = true;
  size_t total = 0;
  for (auto& c : r.claims()) {
    if (c.anchor != "base.ratio") continue;
    ++total;
    ok = ok && c.pass && c.kind == ClaimKind::Sampled;
    size_t a = c.id.find('.'), b = c.id.find('.', a + 1), e = c.id.rfind('.');
    int l = std::stoi(c.id.substr(a + 1, b - a - 1));
    points.at(static_cast<size_t>(l)).insert(c.id.substr(b + 1, e - b - 1));
    ns.at(static_cast<size_t>(l)).insert(c.id.substr(e + 1));
  }
  std::ostringstream d;
  d << total << " ratio claims;";
  for (int l = 1; l <= M; ++l) {
    ok = ok && points[static_cast<size_t>(l)].size() >= 100 && ns[static_cast<size_t>(l)].size() == 3;
    d << " l=" << l << ": " << points[static_cast<size_t>(l)].size() << " points";
  }
  d << first_failure(r);
  return {ok, d.str()};
}

Outcome c3() {
  VerificationReport r = oracle_suite(OraclePolicy{});
  bool ok = r.claims().size() >= 1000 && r.all_pass();
  return {ok, std::to_string(r.claims().size()) + " instances, " + std::to_string(r.failures()) + " mismatches, " +
                  r.meta()["brute_force_steps"].get<std::string>() + " brute force steps"};
}

Outcome c4() {
  LevelParams p;
  p.M = 4;
  p.k = 2;
  p.Ks = 11;
  LevelSystem s = build_level_k(p);
  SamplingPolicy pol;
  pol.random_points = 100;
  VerificationReport r = verify_level_k(s, pol);
  size_t pairs = 0;
  for (auto& c : r.claims()) pairs += c.anchor == "levelk.independence" && c.id.find("recursive") == std::string::npos;
  size_t points = 0;
  for (auto& c : r.claims()) points += c.anchor == "levelk.witness" && c.id.size() > 6 && c.id.ends_with(".range");
  bool ok = r.all_pass() && s.integral() == Scaled(2).times2exp(-p.M + 1) && pairs == 25 && points >= 100 &&
            with_anchor(r, "levelk.distribution") >= 2 * static_cast<size_t>(p.M) && with_anchor(r, "levelk.ratio") >= 300;
  std::ostringstream d;
  d << "integral " << scaled_str(s.integral()) << ", " << pairs << " independence pairs, " << points << " sampled points, "
    << r.claims().size() << " claims" << first_failure(r);
  return {ok, d.str()};
}

Outcome c5() {
  VerificationReport r = life_tower_suite({4, 5, 6}, 6, 11, 30);
  bool ok = r.all_pass() && r.claims().size() >= 3 * 6 * 20;
  return {ok, std::to_string(r.claims().size()) + " exact claims" + first_failure(r)};
}

// the p = 3 block is shared by criteria 6 and 7
const PBlock& block3() {
  static PBlock b = [] {
    PBlockParams pp;
    pp.p = 3;
    pp.witnesses = 8;
    return build_pblock(pp);
  }();
  return b;
}

VerificationReport& report3() {
  static VerificationReport r = verify_pblock(block3());
  return r;
}

Outcome c6() {
  PBlockParams pp;
  pp.p = 2;
  VerificationReport r2 = verify_pblock(build_pblock(pp));
  const VerificationReport& r3 = report3();
  VerificationReport st = statistics_suite({2, 3}, 16);
  bool ok = r2.all_pass() && r3.all_pass() && st.all_pass() && with_anchor(r2, "pblock.stats") > 0 &&
            with_anchor(r3, "pblock.stats") > 0 && with_anchor(st, "pblock.chebyshev") >= 2 * 16 * 10;
  std::ostringstream d;
  d << "p=2: " << r2.claims().size() << " claims, p=3: " << r3.claims().size() << " claims, statistics: "
    << st.claims().size() << " claims (" << with_anchor(st, "pblock.chebyshev") << " Chebyshev)" << first_failure(r2)
    << first_failure(r3) << first_failure(st);
  return {ok, d.str()};
}

Outcome c7() {
  VerificationReport r = report3();
  Certificate c = blowup_certificate(block3(), r);
  bool ok = r.all_pass() && c.lambda_lo >= Rat(3, 32) && c.verified == c.sampled && c.sampled > 0 &&
            with_anchor(r, "blowup.chain") > 0 && with_anchor(r, "pblock.smallness") > 0;
  std::ostringstream d;
  d << "lambda_3 >= " << c.lambda_lo.get_str() << " (p/32 = 3/32), " << c.verified << "/" << c.sampled
    << " witnesses, mu(Lambda_3) = " << scaled_brief(c.measure) << first_failure(r);
  return {ok, d.str()};
}

Outcome c8() {
  VerificationReport r = analog_suite(AnalogPolicy{});
  std::ostringstream d;
  d << r.claims().size() << " claims, weak-type constant " << r.meta().value("weak_max_constant", json("?")).dump()
    << first_failure(r);
  return {r.all_pass() && with_anchor(r, "analog.indicator") > 0 && with_anchor(r, "analog.seq") > 0, d.str()};
}

Outcome c9() {
  const json small = {{"random_points", 10}, {"endpoint_cap", 8}, {"window_samples", 2}};
  std::vector<json> cfgs{
      {{"command", "base"}, {"seed", 11}, {"sampling", small}},
      {{"command", "base"}, {"seed", 11}, {"sampling", small}, {"negative_control", "halve_f"}},
      {{"command", "levelk"}, {"seed", 12}, {"params", {{"k", 2}}}, {"sampling", small}},
      {{"command", "pblock"}, {"seed", 13}, {"params", {{"p", 2}, {"stats_max_k", 4}}}},
      {{"command", "blowup"}, {"seed", 14}, {"params", {{"p", 2}, {"witnesses", 3}}}},
      {{"command", "analog"}, {"seed", 15}, {"params", {{"sets", 10}, {"points", 10}, {"sequences", 50}, {"grid_bits", 7}, {"weak_sets", 2}}}},
      {{"command", "oracle-suite"}, {"seed", 16}, {"params", {{"instances", 50}, {"max_work", 20000}}}},
      {{"command", "render"}, {"seed", 17}, {"params", {{"format", "svg"}}}},
  };
  bool ok = true;
  for (const json& j : cfgs) {
    RunConfig c = RunConfig::from_json(j);
    RunResult a = run(c), b = run(RunConfig::from_json(j));
    ok = ok && report_document(c, a.report).dump() == report_document(c, b.report).dump() && a.artifact == b.artifact;
  }
  // round trips
  const BaseSystem& s = base_system();
  BaseSystem t = load_base(json::parse(save_base(s).dump()));
  bool rt = base_to_json(t) == base_to_json(s) && t.f.map() == s.f.map();
  for (size_t l = 0; l < s.B.size(); ++l) rt = rt && t.B[l].edge() == s.B[l].edge() && t.Gamma[l].edge() == s.Gamma[l].edge();
  LevelParams lp;
  lp.k = 2;
  LevelSystem ls = build_level_k(lp);
  rt = rt && level_to_json(load_level(json::parse(save_level(ls).dump()))) == level_to_json(ls);
  bool version = false;
  try {
    json d = save_base(s);
    d["schema_version"] = kSchemaVersion + 1;
    load_base(d);
  } catch (const SchemaError&) {
    version = true;
  }
  return {ok && rt && version, std::to_string(cfgs.size()) + " configs run twice, base and level round trips, version check"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"base system exact suite", c1},  {"base counting ratios at sampled points", c2},
      {"closed-form counting against brute force", c3},  {"level-2 suite", c4},
      {"life tower closed form", c5},    {"statistics suite", c6},
      {"blow-up certificate at p = 3", c7}, {"continuous and sequence analogs", c8},
      {"determinism and round trips", c9}};
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("criterion %zu %s: %s (%s) [%.1fs]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

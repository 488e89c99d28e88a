#include "doctest.h"

#include "ergcount/base_system.hpp"
#include "ergcount/serialize.hpp"

using namespace ergcount;

namespace {

BaseParams small_params() {
  BaseParams p;
  p.M = 4;
  p.N1 = 11;
  return p;
}

}  // namespace

TEST_CASE("schedule and J_0") {
  CHECK(schedule(LifeFunction::successor(), 11, 4) == std::vector<Int>{11, 32, 53, 74});
  CHECK(schedule(LifeFunction::successor(), 11, 2) == std::vector<Int>{11, 32});
  CHECK(schedule(LifeFunction::affine(85), 11, 3) == std::vector<Int>{11, 116, 221});
  CHECK(min_J0(0, 4, LifeFunction::successor(), 74) == 100);
  CHECK(min_J0(3, 4, LifeFunction::successor(), 74) == 103);
  LifeFunction t = LifeFunction::tabulated({{Int(11), Int(15)}});
  CHECK_THROWS_AS(schedule(t, 11, 3), std::out_of_range);
  CHECK_THROWS(LifeFunction::tabulated({{Int(5), Int(5)}}));
}

TEST_CASE("hypotheses are enforced") {
  BaseParams p = small_params();
  p.S = 16;
  CHECK_THROWS_AS(build_base(p), std::invalid_argument);
  p = small_params();
  p.N1 = 10;
  CHECK_THROWS_AS(build_base(p), std::invalid_argument);
  p = small_params();
  p.M = 3;
  CHECK_THROWS_AS(build_base(p), std::invalid_argument);
  p = small_params();
  p.J = 99;
  CHECK_THROWS_AS(build_base(p), std::invalid_argument);
}

TEST_CASE("exact measures of the default system") {
  BaseSystem s = build_base(small_params());
  CHECK(s.J0 == 100);
  CHECK(s.h == Scaled::pow2(14));
  CHECK(s.B_at(4).measure() == Scaled(Rat(1, 2)));
  CHECK(s.B_at(3).measure() == Scaled(Rat(1, 4)));
  CHECK(s.B_at(2).measure() == Scaled(Rat(1, 8)));
  CHECK(s.B_at(1).measure() == Scaled(Rat(1, 8)));
  CHECK(s.f.integral() == Scaled(Rat(1, 8)));
  for (int l = 1; l <= 4; ++l) {
    CHECK(s.Gamma_at(l).measure() > Scaled(Rat(99, 100)) * Scaled::pow2(-4 + l - 1));
    CHECK(s.Gamma_at(l).subset_of(s.B_at(l)));
  }
  // erosion per I' cell: 1 - 2^-10 below the top level, 1 - 2^-11 at the top
  CHECK(s.Gamma_at(4).measure() == Scaled(Rat(1, 2)) * (Scaled(1) - Scaled::pow2(-11)));
  CHECK(s.Gamma_at(1).measure() == Scaled(Rat(1, 8)) * (Scaled(1) - Scaled::pow2(-10)));
}

TEST_CASE("f hits: one per block at the smallest admissible cell") {
  BaseSystem s = build_base(small_params());
  // first component of B_1 and its first block
  auto comps = first_components(s.B_at(1).edge(), 1);
  REQUIRE(comps.size() == 1);
  Scaled a = comps[0].a;
  Scaled cell = Scaled::pow2(-100);
  CHECK(s.f.eval(a) == s.h);
  CHECK(s.f.eval(a + cell).is_zero());
  CHECK(s.f.eval(a + cell * s.h) == s.h);
  BaseParams p = small_params();
  p.S = 5;
  BaseSystem t = build_base(p);
  CHECK(t.f.eval(a).is_zero());
  CHECK(t.f.eval(a + cell * Scaled(5)) == t.h);
}

TEST_CASE("ratio on Gamma against a direct count") {
  // the closed-form ratio at a small n agrees with a literal loop
  BaseSystem s = build_base(small_params());
  auto comps = first_components(s.Gamma_at(1).edge(), 3);
  for (auto& iv : comps) {
    Scaled small(37);
    CHECK(count_N(s.f, s.orbit(), iv.a, small) == brute_force_N(s.f, s.orbit(), iv.a, small, Int(1) << 20));
    Scaled n = Scaled::pow2(11);
    CHECK(Scaled(count_N(s.f, s.orbit(), iv.a, n)) / n > Scaled(Rat(99, 100)));
  }
}

TEST_CASE("verify_base passes on the default system") {
  BaseSystem s = build_base(small_params());
  SamplingPolicy pol;
  pol.endpoint_cap = 8;
  pol.random_points = 12;
  VerificationReport r = verify_base(s, pol);
  for (auto& c : r.claims()) {
    INFO(c.id);
    CHECK(c.pass);
  }
  CHECK(r.count(ClaimKind::Exact) > 20);
}

TEST_CASE("shifted interval and larger J") {
  BaseParams p = small_params();
  p.I = GridInterval{5, 3};
  p.J = 105;
  p.S = 9;
  BaseSystem s = build_base(p);
  CHECK(s.J0 == 103);
  CHECK(s.f.integral() == Scaled(Rat(1, 64)));
  SamplingPolicy pol;
  pol.endpoint_cap = 4;
  pol.random_points = 4;
  VerificationReport r = verify_base(s, pol);
  CHECK(r.failures() == 0);
}

TEST_CASE("negative controls") {
  BaseSystem s = build_base(small_params());
  // a support on the wrong residue breaks the congruence claim
  BaseParams shifted = small_params();
  shifted.S = 1;
  BaseSystem bad = s;
  bad.f = build_base(shifted).f;
  SamplingPolicy pol;
  pol.endpoint_cap = 4;
  pol.random_points = 4;
  VerificationReport r = verify_base(bad, pol);
  bool congruence_failed = false;
  for (auto& c : r.claims()) congruence_failed |= (c.id == "f.congruence" && !c.pass);
  CHECK(congruence_failed);
  // half the mass breaks the ratio bound
  BaseSystem thin = s;
  thin.f = s.f.scaled(Scaled(Rat(1, 2)));
  RatioSample rs = check_ratio(thin.f, thin.orbit(), first_components(s.Gamma_at(1).edge(), 1)[0].a,
                               Scaled::pow2(11), Scaled(Rat(99, 100)));
  CHECK(!rs.pass);
}

TEST_CASE("patterns round-trip through json") {
  BaseSystem s = build_base(small_params());
  for (int l = 1; l <= 4; ++l) {
    Edge e = s.Gamma_at(l).edge();
    json j = edge_to_json(e);
    CHECK(edge_from_json(json::parse(j.dump())) == e);
  }
  Edge m = s.partition_rel;
  CHECK(edge_from_json(edge_to_json(m)) == m);
  CHECK(measure_of(m, 4) == Scaled(Rat(1, 2)));
}

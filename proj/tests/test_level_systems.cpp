#include "doctest.h"

#include "ergcount/level_systems.hpp"

using namespace ergcount;

namespace {

Scaled target(int M, int l) { return Scaled(Rat(99, 100)).times2exp(-M + l - 1); }

}  // namespace

TEST_CASE("life tower closed form") {
  LifeTower t5(5, 5);
  std::vector<long> want{1, 85, 505, 2605, 13105};
  for (int k = 1; k <= 5; ++k) CHECK(t5.c(k) == want[k - 1]);
  LifeTower t4(4, 3);
  CHECK(t4.c(2) == 64);
  CHECK(t4.c(3) == 316);
  CHECK(t4.nu(3)(Int(11)) == 327);
}

TEST_CASE("life tower matches the recursive definition") {
  for (int M : {4, 5, 6}) {
    LifeTower t(M, 6);
    for (int k = 1; k <= 6; ++k) {
      for (long N = 11; N <= 30; ++N) {
        CAPTURE(M);
        CAPTURE(k);
        CHECK(nu_compositional(M, k, Int(N)) == N + t.c(k));
      }
    }
  }
}

TEST_CASE("level 1 distribution") {
  LevelSystem s = build_level1(GridInterval{0, 0}, 11, 4);
  REQUIRE(s.X.size() == 1);
  for (int l = 1; l <= 4; ++l) {
    CHECK(s.root->marginal[0][l] == target(4, l));
    CHECK(s.X[0].level(x_value(4, l)).measure() == target(4, l));
  }
  CHECK(s.integral() == Scaled::pow2(-3));
  CHECK(x_value(4, 1) == Scaled(Rat(99, 100)));
  CHECK(x_value(4, 0).is_zero());
}

TEST_CASE("level 2 verifies") {
  LevelParams p;
  p.M = 4;
  p.k = 2;
  SamplingPolicy pol;
  pol.random_points = 20;
  LevelSystem s = build_level_k(p);
  CHECK(s.f.has_value());
  CHECK(s.X.size() == 2);
  CHECK(s.integral() == Scaled::pow2(-2));
  VerificationReport r = verify_level_k(s, pol);
  CHECK(r.claims().size() > 100);
  for (auto& c : r.claims()) {
    CAPTURE(c.id);
    CHECK(c.pass);
  }
}

TEST_CASE("level 2 on a shifted interval") {
  LevelParams p;
  p.M = 4;
  p.k = 2;
  p.I0 = GridInterval{3, 2};
  SamplingPolicy pol;
  pol.random_points = 10;
  LevelSystem s = build_level_k(p);
  CHECK(s.integral() == Scaled::pow2(-4));
  CHECK(verify_level_k(s, pol).all_pass());
}

TEST_CASE("composite level 4 verifies without flattening") {
  LevelParams p;
  p.M = 4;
  p.k = 4;
  SamplingPolicy pol;
  pol.random_points = 4;
  LevelSystem s = build_level_k(p);
  CHECK_FALSE(s.f.has_value());
  CHECK(s.shape_count == 85);
  VerificationReport r = verify_level_k(s, pol);
  CHECK(r.all_pass());
  // recursive product rule on a couple of tuples
  CHECK(joint_probability(*s.root, {1, 2, 3, 4}) == target(4, 1) * target(4, 2) * target(4, 3) * target(4, 4));
}

TEST_CASE("point info stays in the window") {
  LevelParams p;
  p.M = 4;
  p.k = 3;
  LevelSystem s = build_level_k(p);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    Scaled x(Rat(random_bits(rng, s.J)), -static_cast<int64_t>(s.J));
    PointInfo info = point_info(s, x);
    CHECK(info.level.size() == 3);
    CHECK(s.Ks <= info.wa);
    CHECK(info.wb <= s.Ke);
    if (!s.X.empty()) {
      for (int h = 0; h < 3; ++h) CHECK(s.X[h].eval(x) == x_value(4, info.level[h]));
    }
  }
}

TEST_CASE("dependent levels fail independence") {
  LevelParams p;
  p.M = 4;
  p.k = 2;
  LevelSystem s = build_level_k(p);
  // X_2 := X_1
  s.joint = relabel(s.joint, [](Label c) { return static_cast<Label>(c % 5 + 5 * (c % 5)); });
  s.X[1] = StepFunction(relabel(s.joint, [](Label c) { return static_cast<Label>(c % 5); }), s.X[0].values());
  SamplingPolicy pol;
  pol.random_points = 0;
  VerificationReport r = verify_level_k(s, pol);
  bool indep_failed = false;
  for (auto& c : r.claims()) {
    if (c.id.rfind("independence.", 0) == 0 && !c.pass) indep_failed = true;
  }
  CHECK(indep_failed);
}

TEST_CASE("budget and hypotheses") {
  LevelParams p;
  p.M = 5;
  p.k = 8;
  p.max_shapes = 1000;
  CHECK_THROWS_AS(build_level_k(p), BudgetError);
  SizeEstimate e = estimate_level(p);
  CHECK(e.shapes == 97656);
  p.M = 3;
  CHECK_THROWS_AS(build_level_k(p), std::invalid_argument);
  p.M = 4;
  p.k = 17;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.k = 2;
  p.Ks = 10;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("level params json") {
  LevelParams p;
  p.M = 5;
  p.k = 3;
  p.Ks = 20;
  p.I0 = GridInterval{1, 1};
  p.J = 123456;
  LevelParams q = LevelParams::from_json(p.to_json());
  CHECK(q.to_json() == p.to_json());
}

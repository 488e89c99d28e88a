#include "doctest.h"

#include "ergcount/counting.hpp"

#include <random>

using namespace ergcount;

namespace {

IntervalSet random_cells(std::mt19937_64& rng, int res, int pieces) {
  std::vector<std::pair<Scaled, Scaled>> ivs;
  for (int i = 0; i < pieces; ++i) {
    long a = static_cast<long>(rng() % (1u << res));
    long len = 1 + static_cast<long>(rng() % 8);
    ivs.emplace_back(Scaled(Rat(a), -res), Scaled(Rat(a + len), -res));
  }
  return IntervalSet::of(ivs);
}

StepFunction random_step(std::mt19937_64& rng, int res) {
  int levels = 1 + static_cast<int>(rng() % 3);
  std::vector<std::pair<Scaled, IntervalSet>> lv;
  IntervalSet used;
  for (int i = 0; i < levels; ++i) {
    IntervalSet s = random_cells(rng, res, 1 + static_cast<int>(rng() % 6)) - used;
    used = used | s;
    Scaled v = (rng() % 2) ? Scaled(static_cast<long>(1 + rng() % 16)) : Scaled(Rat(static_cast<long>(1 + rng() % 30), 7));
    if (!s.is_empty()) lv.emplace_back(v, s);
  }
  return StepFunction::from_levels(lv);
}

}  // namespace

TEST_CASE("zero function counts nothing") {
  StepFunction z;
  CHECK(count_N(z, OrbitSpec{4, true}, Scaled(Rat(1, 3)), Scaled(100)) == 0);
  CHECK(ratio(z, OrbitSpec{4, true}, Scaled(), Scaled(7)).is_zero());
  auto s = sup_ratio(z, OrbitSpec{4, true}, Scaled(), {Scaled(3), Scaled(9)});
  CHECK(s.n_star == Scaled(3));
  CHECK(s.ratio.is_zero());
  CHECK(brute_force_N(z, OrbitSpec{4, true}, Scaled(), Scaled(50), Int(1000)) == 0);
}

TEST_CASE("full support gives n - 1") {
  StepFunction one = StepFunction::from_levels({{Scaled(1), IntervalSet::unit()}});
  for (long n : {1L, 2L, 17L, 1000L}) {
    CHECK(count_N(one, OrbitSpec{6, true}, Scaled(Rat(5, 11)), Scaled(n)) == n - 1);
    CHECK(ratio(one, OrbitSpec{6, true}, Scaled(), Scaled(n)) == Scaled(Rat(n - 1, n)));
  }
}

TEST_CASE("single cell on the grid") {
  for (uint64_t J = 1; J <= 10; ++J) {
    IntervalSet cell = IntervalSet::of({{Scaled(), Scaled::pow2(-static_cast<int64_t>(J))}});
    for (long h : {1L, 3L, 8L}) {
      StepFunction f = StepFunction::from_levels({{Scaled(h), cell}});
      for (long n : {1L, 5L, 100L, 1000L}) {
        Int expect = 0;
        for (long k = 1; k < n * h; ++k) expect += (k % (1L << J)) == 0;
        CHECK(count_N(f, OrbitSpec{J, true}, Scaled(), Scaled(n)) == expect);
      }
    }
  }
}

TEST_CASE("count_N against brute force") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    int res = 3 + static_cast<int>(rng() % 8);
    StepFunction f = random_step(rng, res);
    uint64_t J = 1 + rng() % 14;
    bool wrap = rng() % 2;
    Scaled x(Rat(static_cast<long>(rng() % 997), 997));
    Scaled n = (rng() % 4) ? Scaled(static_cast<long>(1 + rng() % 300)) : Scaled(Rat(static_cast<long>(1 + rng() % 900), 7));
    CHECK(count_N(f, OrbitSpec{J, wrap}, x, n) == brute_force_N(f, OrbitSpec{J, wrap}, x, n, Int(100000)));
  }
}

TEST_CASE("brute force refuses large ranges") {
  StepFunction one = StepFunction::from_levels({{Scaled(1), IntervalSet::unit()}});
  CHECK_THROWS_AS(brute_force_N(one, OrbitSpec{3, true}, Scaled(), Scaled(1000), Int(10)), CapExceeded);
}

TEST_CASE("monotone, additive, scaling") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    StepFunction f = random_step(rng, 8);
    OrbitSpec o{1 + rng() % 12, static_cast<bool>(rng() % 2)};
    Scaled x(Rat(static_cast<long>(rng() % 256), 256));
    long n = 1 + static_cast<long>(rng() % 500);
    Int a = count_N(f, o, x, Scaled(n)), b = count_N(f, o, x, Scaled(n + 1));
    CHECK(a <= b);
    long gamma = 1 + static_cast<long>(rng() % 5);
    CHECK(count_N(f.scaled(Scaled(gamma)), o, x, Scaled(n)) == count_N(f, o, x, Scaled(n * gamma)));
    // split the support in two and add up
    IntervalSet half = f.support() & IntervalSet::parity_cells(3, 0);
    std::vector<std::pair<Scaled, IntervalSet>> l1, l2;
    for (const Scaled& v : f.distinct_values()) {
      IntervalSet lv = f.level(v);
      if (!(lv & half).is_empty()) l1.emplace_back(v, lv & half);
      if (!(lv - half).is_empty()) l2.emplace_back(v, lv - half);
    }
    StepFunction g1 = StepFunction::from_levels(l1), g2 = StepFunction::from_levels(l2);
    CHECK(count_N(g1, o, x, Scaled(n)) + count_N(g2, o, x, Scaled(n)) == a);
  }
}

TEST_CASE("full periods on the grid") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    uint64_t J = 2 + rng() % 8;
    IntervalSet s = random_cells(rng, static_cast<int>(J), 3);
    Scaled x(Rat(static_cast<long>(rng() % (1u << J))), -static_cast<int64_t>(J));
    Int per = pow2_int(J);
    Int k0 = static_cast<long>(rng() % 1000);
    long m = 1 + static_cast<long>(rng() % 5);
    Int one_period = count_orbit_hits(s, OrbitSpec{J, true}, x, k0, k0 + per);
    CHECK(count_orbit_hits(s, OrbitSpec{J, true}, x, k0, k0 + per * m) == one_period * m);
  }
}

#include "doctest.h"

#include "ergcount/interval_set.hpp"

#include <random>

using namespace ergcount;

namespace {

Scaled dy(long m, int64_t e) { return Scaled(Rat(m), -e); }

// union of [a + jP, b + jP) over all j, P = 2^-p, built two ways
IntervalSet periodic_structural(long a, long b, int res, int p) {
  // a, b in units of 2^-res inside one period [0, 2^-p)
  Scaled pa = dy(a, res).times2exp(p), pb = dy(b, res).times2exp(p);
  Edge cell = from_intervals({{pa, pb}});
  return IntervalSet(Edge{cell.node, store().is_term(cell) ? 0u : static_cast<uint64_t>(p) + cell.skip});
}

IntervalSet periodic_enumerated(long a, long b, int res, int p) {
  std::vector<std::pair<Scaled, Scaled>> ivs;
  for (long j = 0; j < (1L << p); ++j) ivs.emplace_back(dy(a, res) + dy(j, p), dy(b, res) + dy(j, p));
  return IntervalSet::of(ivs);
}

struct Fam {
  long a, b;
  int p;
};

std::vector<Fam> random_families(std::mt19937_64& rng, int n, int res) {
  std::vector<Fam> out;
  for (int i = 0; i < n; ++i) {
    int p = static_cast<int>(rng() % 8);
    long span = 1L << (res - p);
    long a = static_cast<long>(rng() % span);
    long b = a + 1 + static_cast<long>(rng() % (span - a));
    out.push_back({a, b, p});
  }
  return out;
}

std::vector<bool> bitmap(const std::vector<Fam>& fams, int res) {
  std::vector<bool> bits(1u << res, false);
  for (auto& f : fams) {
    long per = 1L << (res - f.p);
    for (long j = 0; j < (1L << f.p); ++j) {
      for (long c = f.a; c < f.b; ++c) bits[j * per + c] = true;
    }
  }
  return bits;
}

IntervalSet build(const std::vector<Fam>& fams, int res) {
  IntervalSet s;
  for (auto& f : fams) s = s | periodic_structural(f.a, f.b, res, f.p);
  return s;
}

}  // namespace

TEST_CASE("scaled arithmetic") {
  Scaled a(Rat(3, 8));
  CHECK(a.mant() == 3);
  CHECK(a.exp2() == -3);
  CHECK((a + Scaled(Rat(1, 8))) == Scaled(Rat(1, 2)));
  CHECK(Scaled(Rat(7, 3)).frac() == Scaled(Rat(1, 3)));
  CHECK(Scaled(Rat(-1, 3)).frac() == Scaled(Rat(2, 3)));
  CHECK(Scaled::pow2(100).times2exp(-100) == Scaled(1));
  CHECK(Scaled(Rat(5, 3)).times2exp(64).frac() == Scaled(Rat((Int(5) * pow2_int(64)) % 3, 3)));
  CHECK(Scaled(Rat(5, 2)).ceil() == 3);
  CHECK(Scaled(Rat(-5, 2)).floor() == -3);
  CHECK(Scaled::pow2(-200) < Scaled::pow2(-199));
  CHECK(Scaled(Rat(99, 100)) < Scaled(1));
}

TEST_CASE("trivial set identities") {
  IntervalSet e, u = IntervalSet::unit();
  CHECK((e | u).equals(u));
  CHECK(e.measure().is_zero());
  IntervalSet even = IntervalSet::parity_cells(4, 0), odd = IntervalSet::parity_cells(4, 1);
  CHECK((even | odd).equals(u));
  CHECK((even | odd).measure() == Scaled(1));
  CHECK(even.measure() == Scaled(Rat(1, 2)));
  CHECK(even.disjoint_from(odd));
  CHECK(IntervalSet::of({{Scaled(), Scaled(Rat(1, 2))}}).equals(IntervalSet::parity_cells(1, 0)));
}

TEST_CASE("structural periodic family matches enumeration") {
  std::mt19937_64 rng(7);
  for (auto& f : random_families(rng, 50, 12)) {
    IntervalSet s = periodic_structural(f.a, f.b, 12, f.p);
    IntervalSet t = periodic_enumerated(f.a, f.b, 12, f.p);
    CHECK(s.equals(t));
    CHECK(s.measure() == t.measure());
  }
}

TEST_CASE("set algebra against bitmap oracle") {
  const int res = 16;
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto fa = random_families(rng, 8, res), fb = random_families(rng, 8, res);
    IntervalSet a = build(fa, res), b = build(fb, res);
    auto ba = bitmap(fa, res), bb = bitmap(fb, res);
    long cu = 0, ci = 0, cd = 0, ca = 0, cb = 0;
    for (size_t i = 0; i < ba.size(); ++i) {
      cu += ba[i] || bb[i];
      ci += ba[i] && bb[i];
      cd += ba[i] && !bb[i];
      ca += ba[i];
      cb += bb[i];
    }
    Scaled cell = Scaled::pow2(-res);
    CHECK((a | b).measure() == Scaled(cu) * cell);
    CHECK((a & b).measure() == Scaled(ci) * cell);
    CHECK((a - b).measure() == Scaled(cd) * cell);
    CHECK(a.measure() == Scaled(ca) * cell);
    CHECK((a | b).measure() + (a & b).measure() == a.measure() + b.measure());
    CHECK(complement_in(IntervalSet::unit(), a).measure() == Scaled(1) - a.measure());
    for (int k = 0; k < 200; ++k) {
      long i = static_cast<long>(rng() % (1u << res));
      Scaled x = dy(2 * i + 1, res + 1);
      CHECK((a | b).contains(x) == (ba[i] || bb[i]));
      CHECK((a & b).contains(x) == (ba[i] && bb[i]));
    }
  }
}

TEST_CASE("rational cut points") {
  IntervalSet s = IntervalSet::of({{Scaled(Rat(1, 3)), Scaled(Rat(2, 3))}});
  CHECK(s.measure() == Scaled(Rat(1, 3)));
  IntervalSet t = IntervalSet::of({{Scaled(Rat(1, 5)), Scaled(Rat(1, 2))}});
  CHECK((s & t).measure() == Scaled(Rat(1, 2) - Rat(1, 3)));
  CHECK((s | t).measure() == Scaled(Rat(2, 3) - Rat(1, 5)));
  CHECK(s.contains(Scaled(Rat(1, 3))));
  CHECK(!s.contains(Scaled(Rat(2, 3))));
}

TEST_CASE("scale_components") {
  IntervalSet h = IntervalSet::parity_cells(1, 0);
  IntervalSet t = scale_components(h, Scaled(Rat(99, 100)));
  CHECK(t.measure() == Scaled(Rat(99, 200)));
  CHECK(t.equals(IntervalSet::of({{Scaled(), Scaled(Rat(99, 200))}})));
  CHECK(scale_components(h, Scaled(1)).equals(h));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    IntervalSet a = build(random_families(rng, 5, 14), 14);
    Scaled rho(Rat(static_cast<long>(rng() % 97) + 1, 97));
    IntervalSet r = scale_components(a, rho);
    CHECK(r.measure() == rho * a.measure());
    CHECK(r.subset_of(a));
  }
}

TEST_CASE("translate") {
  IntervalSet s = IntervalSet::of({{Scaled(Rat(3, 4)), Scaled(1)}});
  IntervalSet w = s.translate(Scaled(Rat(1, 8)), true);
  CHECK(w.equals(IntervalSet::of({{Scaled(Rat(7, 8)), Scaled(1)}, {Scaled(), Scaled(Rat(1, 8))}})));
  CHECK(s.translate(Scaled(Rat(1, 8)), false).measure() == Scaled(Rat(1, 8)));
}

TEST_CASE("orbit counting trivial cases") {
  OrbitSpec o{5, true};
  CHECK(count_orbit_hits(IntervalSet::unit(), o, Scaled(Rat(1, 3)), 0, 1000) == 1000);
  OrbitSpec o2{10, true};
  CHECK(count_orbit_hits(IntervalSet::parity_cells(10, 0), o2, Scaled(), 0, Int(1) << 10) == 512);
}

TEST_CASE("orbit counting against direct loop") {
  std::mt19937_64 rng(2024);
  int cases = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int res = 4 + static_cast<int>(rng() % 10);
    IntervalSet s = build(random_families(rng, 1 + rng() % 4, res), res);
    if (trial % 5 == 0) s = s | IntervalSet::of({{Scaled(Rat(1, 7)), Scaled(Rat(2, 7))}});
    uint64_t J = 1 + rng() % 20;
    bool wrap = rng() % 2;
    Scaled x = Scaled(Rat(static_cast<long>(rng() % 1000), 1 + static_cast<long>(rng() % 999)));
    if (trial % 3 == 0) x = dy(static_cast<long>(rng() % (1u << J)), static_cast<int64_t>(J));
    if (!wrap) x = x.frac();
    x = x.frac();
    Int klo = static_cast<long>(rng() % 50);
    Int khi = klo + static_cast<long>(rng() % 3000);
    Int fast = count_orbit_hits(s, OrbitSpec{J, wrap}, x, klo, khi);
    Int slow = brute_orbit_hits(s.edge(), [](Label l) { return l != 0; }, OrbitSpec{J, wrap}, x, klo, khi);
    CHECK(fast == slow);
    ++cases;
  }
  CHECK(cases == 1000);
}

TEST_CASE("orbit counting is additive and monotone") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    IntervalSet a = build(random_families(rng, 3, 12), 12);
    IntervalSet b = build(random_families(rng, 3, 12), 12) - a;
    OrbitSpec o{12, true};
    Scaled x(Rat(static_cast<long>(rng() % 4096), 4096));
    Int n = static_cast<long>(rng() % 100000);
    Int ca = count_orbit_hits(a, o, x, 0, n), cb = count_orbit_hits(b, o, x, 0, n);
    CHECK(count_orbit_hits(a | b, o, x, 0, n) == ca + cb);
    CHECK(count_orbit_hits(a & b, o, x, 0, n) <= ca);
  }
}

TEST_CASE("huge counting windows stay closed form") {
  // even cells at depth 30 under a 2^-100 rotation: exactly half of each period
  IntervalSet s = IntervalSet::parity_cells(30, 0);
  OrbitSpec o{100, true};
  Int big = pow2_int(180);
  CHECK(count_orbit_hits(s, o, Scaled(), 0, big) == big / 2);
}

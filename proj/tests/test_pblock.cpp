#include "doctest.h"

#include "ergcount/pblock.hpp"

using namespace ergcount;

TEST_CASE("M_p with exact and bracketed logs") {
  CHECK(m_p(4) == 8);
  CHECK(m_p(3) == 5);
  CHECK(m_p(8) == 14);
  CHECK(m_p(2) == 3);
  CHECK_THROWS_AS(m_p(1), std::invalid_argument);
}

TEST_CASE("log2 brackets") {
  Bracket b = log2_bracket(Rat(3), 20);
  CHECK_FALSE(b.exact);
  CHECK(b.lo > Rat(15849, 10000));
  CHECK(b.hi < Rat(15850, 10000));
  CHECK(b.hi - b.lo == Rat(1, 1 << 20));
  Bracket e = log2_bracket(Rat(1, 8));
  CHECK(e.exact);
  CHECK(e.lo == -3);
  Bracket s = log2sq_bracket(16);
  CHECK(s.exact);
  CHECK(s.lo == 16);
  CHECK(log2_bracket(Rat(3, 4), 10).hi < 0);
}

TEST_CASE("exact statistics") {
  Stats one = exact_stats(1);
  CHECK(one.u == Rat(9801, 20000));
  for (int M = 1; M <= 12; ++M) {
    Stats s = exact_stats(M);
    CHECK(s.u == Rat(9801, 10000) * M / (Rat(1) * (1 << M)));
    CHECK(s.v == s.v0 - s.u * s.u);
    CHECK(s.v > 0);
  }
  CHECK(chebyshev_bound(1, 1, 1) == 1);
  CHECK(chebyshev_bound(4, Rat(1, 2), Rat(1, 4)) == 2);
}

TEST_CASE("iid sum law") {
  auto d = iid_sum_distribution(4, 3);
  Rat total, mean;
  for (auto& [u, w] : d) {
    total += w;
    mean += Rat(static_cast<unsigned long>(u)) * w;
  }
  CHECK(total == 1);
  // mean in units of 0.99 * 2^{1-M}
  CHECK(mean * Rat(99, 100) / 8 == 3 * exact_stats(4).u);
}

TEST_CASE("statistics suite") {
  VerificationReport r = statistics_suite({2, 3}, 16);
  CHECK(r.claims().size() > 300);
  CHECK(r.all_pass());
}

TEST_CASE("smallness threshold") {
  CHECK(least_small_p() == Int(1) << 22);
  json h = honest_estimate(3);
  CHECK(h["M_p"] == 5);
  CHECK(h["shapes"] == "97656");
  CHECK(h["small"] == false);
}

TEST_CASE("relaxed p = 2 block and certificate") {
  PBlockParams pp;
  pp.p = 2;
  pp.witnesses = 6;
  PBlock b = build_pblock(pp);
  CHECK(b.params.M == 4);
  CHECK(b.params.k == 4);
  CHECK(b.integral == Scaled::pow2(-1));
  VerificationReport r = verify_pblock(b);
  Certificate c = blowup_certificate(b, r);
  for (auto& cl : r.claims()) {
    CAPTURE(cl.id);
    CHECK(cl.pass);
  }
  CHECK(c.verified == 6);
  CHECK(c.lambda_lo >= Rat(1, 16));
  CHECK(c.measure > Scaled());
}

TEST_CASE("honest mode and degenerate blocks") {
  PBlockParams pp;
  pp.p = 3;
  pp.relaxed = false;
  CHECK_THROWS_AS(build_pblock(pp), BudgetError);
  pp.p = 4;
  pp.relaxed = true;
  pp.max_shapes = 1000;
  CHECK_THROWS_AS(build_pblock(pp), BudgetError);
  PBlock zero;
  VerificationReport r;
  CHECK_THROWS_AS(blowup_certificate(zero, r), std::invalid_argument);
}

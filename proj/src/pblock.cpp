#include "ergcount/pblock.hpp"

#include "ergcount/counting.hpp"
#include "ergcount/serialize.hpp"

#include <random>
#include <stdexcept>

namespace ergcount {

namespace {

Rat pow2q(long e) {
  Rat r(1);
  if (e >= 0) {
    mpz_mul_2exp(r.get_num_mpz_t(), r.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpz_mul_2exp(r.get_den_mpz_t(), r.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  }
  return r;
}

Rat floor_rat(const Rat& q) {
  Int f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rat(f);
}

bool is_pow2(const Int& v) { return v > 0 && mpz_popcount(v.get_mpz_t()) == 1; }

// floor(log2(a / b)) for positive integers
long floor_log2(const Int& a, const Int& b) {
  long t = static_cast<long>(mpz_sizeinbase(a.get_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(b.get_mpz_t(), 2));
  Int lhs = a, rhs = b;
  if (t >= 0) {
    rhs <<= static_cast<mp_bitcnt_t>(t);
  } else {
    lhs <<= static_cast<mp_bitcnt_t>(-t);
  }
  return lhs < rhs ? t - 1 : t;
}

const Rat kC(99, 100);

uint64_t to_u64_checked(const Int& v) {
  if (v < 0 || !v.fits_ulong_p()) throw std::invalid_argument("exponent out of range");
  return v.get_ui();
}

Scaled unit_value(int M) { return Scaled(kC).times2exp(1 - M); }

}  // namespace

std::optional<Int> Bracket::floor() const {
  Rat f = floor_rat(lo);
  if (exact) return Int(f.get_num());
  if (hi <= f + 1) return Int(f.get_num());
  return std::nullopt;
}

Bracket Bracket::operator+(const Bracket& o) const { return Bracket{lo + o.lo, hi + o.hi, exact && o.exact}; }

Bracket Bracket::operator*(const Bracket& o) const { return Bracket{lo * o.lo, hi * o.hi, exact && o.exact}; }

json Bracket::to_json() const { return {{"lo", lo.get_str()}, {"hi", hi.get_str()}, {"exact", exact}}; }

Bracket log2_bracket(const Rat& q, unsigned bits) {
  if (sgn(q) <= 0) throw std::invalid_argument("log2 of a nonpositive number");
  Int n(q.get_num()), d(q.get_den());
  if (is_pow2(n) && is_pow2(d)) {
    long e = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(d.get_mpz_t(), 2));
    return Bracket::point(Rat(e));
  }
  // floor(2^bits log2 q) = floor(log2 q^(2^bits))
  Int nn, dd;
  unsigned long E = 1UL << bits;
  mpz_pow_ui(nn.get_mpz_t(), n.get_mpz_t(), E);
  mpz_pow_ui(dd.get_mpz_t(), d.get_mpz_t(), E);
  long a = floor_log2(nn, dd);
  Rat scale = pow2q(-static_cast<long>(bits));
  return Bracket{Rat(a) * scale, Rat(a + 1) * scale, false};
}

Bracket log2sq_bracket(const Int& p, unsigned bits) {
  Bracket L = log2_bracket(Rat(p), bits);
  if (sgn(L.lo) < 0) throw std::invalid_argument("log2^2 bracket needs p >= 1");
  return L * L;
}

int m_p(const Int& p) {
  if (p < 2) throw std::invalid_argument("M_p needs p >= 2");
  for (unsigned bits : {8u, 12u, 16u, 20u}) {
    Bracket L = log2_bracket(Rat(p), bits);
    // log2(L^2) = 2 log2 L, monotone in L
    Bracket lo2 = log2_bracket(L.lo, bits), hi2 = log2_bracket(L.hi, bits);
    Bracket LL{2 * lo2.lo, 2 * hi2.hi, L.exact && lo2.exact && hi2.exact};
    Bracket total = Bracket::point(Rat(p)) + L + LL;
    if (auto f = total.floor()) return static_cast<int>(f->get_si());
  }
  throw std::runtime_error("M_p undecided at the available precision");
}

Stats exact_stats(int M) {
  if (M < 1) throw std::invalid_argument("exact_stats needs M >= 1");
  Stats s;
  for (int l = 1; l <= M; ++l) {
    s.u += kC * pow2q(-l + 1) * kC * pow2q(-M + l - 1);
    s.v0 += kC * kC * kC * pow2q(-M - l + 1);
  }
  s.v = s.v0 - s.u * s.u;
  return s;
}

Rat chebyshev_bound(const Int& q, const Rat& v, const Rat& eps) {
  if (q < 1 || sgn(eps) <= 0) throw std::invalid_argument("chebyshev_bound needs q >= 1 and eps > 0");
  Rat qe = Rat(q) * eps;
  return Rat(q) * v / (qe * qe);
}

std::map<uint64_t, Rat> iid_sum_distribution(int M, int k) {
  std::map<uint64_t, Rat> one;
  Rat rest(1);
  for (int l = 1; l <= M; ++l) {
    Rat pr = kC * pow2q(-M + l - 1);
    one[uint64_t(1) << (M - l)] = pr;
    rest -= pr;
  }
  one[0] = rest;
  std::map<uint64_t, Rat> acc{{0, Rat(1)}};
  for (int h = 0; h < k; ++h) {
    std::map<uint64_t, Rat> next;
    for (auto& [a, pa] : acc) {
      for (auto& [b, pb] : one) next[a + b] += pa * pb;
    }
    acc = std::move(next);
  }
  return acc;
}

Int least_small_p() {
  // p = 2^t makes log2 p = t exact
  for (unsigned long t = 1;; ++t) {
    Int p = pow2_int(t);
    if (Int(6400) * Int(t) * Int(t) < p) return p;
  }
}

void PBlockParams::resolve() {
  if (p < 2) throw std::invalid_argument("p-block needs p >= 2");
  if (p > 20) throw std::invalid_argument("p-block level 2^p is out of range");
  M = m_p(p);
  // the construction needs a gain constant above 3 (only p = 2 is affected)
  if (relaxed && M <= 3) M = 4;
  k = 1 << p;
  // startup times must exceed max(10, M)
  Ks = Int(k);
  if (relaxed && Ks <= std::max(10, M)) Ks = std::max(10, M) + 1;
}

json PBlockParams::to_json() const {
  return {{"p", p},
          {"relaxed", relaxed},
          {"M", M},
          {"k", k},
          {"Ks", Ks.get_str()},
          {"seed", seed},
          {"witnesses", witnesses},
          {"max_shapes", max_shapes}};
}

PBlockParams PBlockParams::from_json(const json& j) {
  PBlockParams p;
  p.p = j.value("p", 3);
  p.relaxed = j.value("relaxed", true);
  p.seed = j.value("seed", uint64_t(1));
  p.witnesses = j.value("witnesses", size_t(8));
  p.max_shapes = j.value("max_shapes", size_t(200000));
  return p;
}

json honest_estimate(int p) {
  if (p < 2) throw std::invalid_argument("p-block needs p >= 2");
  int M = m_p(p);
  Bracket L2 = log2sq_bracket(p);
  Bracket lM = log2_bracket(Rat(M), 16);
  json j = {{"p", p}, {"M_p", M}, {"k", "2^" + std::to_string(p)}, {"K_S", "2^" + std::to_string(p)}};
  // c_k = 21 M^{k-1} - 20, and J_p exceeds c_k
  j["log2_c_k_lower"] = "(2^" + std::to_string(p) + " - 1) * " + lM.lo.get_str() + " + 4";
  j["log2_shapes_lower"] = "(2^" + std::to_string(p) + " - 1) * " + lM.lo.get_str();
  if (p <= 6 && M > 3) {
    LevelParams lp;
    lp.M = M;
    lp.k = 1 << p;
    lp.Ks = std::max<long>(1L << p, std::max(10, M) + 1);
    LifeTower t(M, lp.k);
    j["c_k"] = t.c(lp.k).get_str().size() < 400 ? t.c(lp.k).get_str() : "(" + std::to_string(t.c(lp.k).get_str().size()) + " digits)";
    if (p <= 4) {
      SizeEstimate e = estimate_level(lp);
      j["shapes"] = e.shapes.get_str();
      j["J_bits"] = e.J_bits.get_str();
    }
  }
  // smallness: 64 log2^2 p / p < 1/100, with the unfavourable end of the bracket
  j["small"] = Rat(6400) * L2.hi < Rat(p);
  j["least_small_p"] = least_small_p().get_str();
  return j;
}

PBlock build_pblock(const PBlockParams& params) {
  PBlock b;
  b.params = params;
  b.params.resolve();
  const PBlockParams& pp = b.params;
  if (!pp.relaxed) throw BudgetError("honest p-block is not materialised: " + honest_estimate(pp.p).dump());
  LevelParams lp;
  lp.M = pp.M;
  lp.k = pp.k;
  lp.Ks = pp.Ks;
  lp.max_shapes = pp.max_shapes;
  try {
    b.sys = build_level_k(lp);
  } catch (const BudgetError& e) {
    throw BudgetError(std::string(e.what()) + "; estimate " + honest_estimate(pp.p).dump());
  }
  b.integral = b.sys.integral();
  b.E_p = b.sys.Ke;
  b.stats = exact_stats(pp.M);
  b.log2sq = log2sq_bracket(pp.p);
  b.threshold = Rat(1) / (4 * b.log2sq.lo);
  const Scaled unit = unit_value(pp.M), thr(b.threshold);
  for (auto& [u, w] : b.sys.root->sum_dist) {
    if (Scaled(static_cast<long>(u)) * unit > thr) b.lambda_measure = b.lambda_measure + w;
  }
  return b;
}

VerificationReport verify_pblock(const PBlock& b) {
  const PBlockParams& pp = b.params;
  const auto E = ClaimKind::Exact;
  const auto Smp = ClaimKind::Sampled;
  const int M = pp.M, k = pp.k, p = pp.p;
  VerificationReport rep("pblock");
  rep.meta() = {{"params", pp.to_json()},
                {"J_p", b.sys.J},
                {"E_p", b.E_p.get_str()},
                {"shapes", b.sys.shape_count},
                {"log2sq_p", b.log2sq.to_json()},
                {"threshold", b.threshold.get_str()},
                {"lambda_measure", scaled_str(b.lambda_measure)},
                {"u", b.stats.u.get_str()},
                {"v0", b.stats.v0.get_str()},
                {"v", b.stats.v.get_str()}};
  const Scaled want = Scaled::pow2(p - M + 1);
  rep.check("integral", "pblock.integral", E, b.integral, "==", want);
  rep.check("integral.lower", "pblock.integral", E, b.integral, ">=", Scaled(Rat(1) / (p * b.log2sq.lo)));
  rep.check("integral.upper", "pblock.integral", E, b.integral, "<=", Scaled(Rat(4) / (p * b.log2sq.hi)));
  rep.check("E_p", "pblock.exit", E, Scaled(b.E_p), "==", Scaled(b.sys.tower.nu(k)(schedule(b.sys.tower.nu(k), pp.Ks, M).back())));

  // u and v
  for (int h = 1; h <= k; ++h) {
    Scaled integ;
    for (int l = 1; l <= M; ++l) integ = integ + x_value(M, l) * b.sys.root->marginal[h - 1][l];
    rep.check("stats.u.X" + std::to_string(h), "pblock.stats", E, integ, "==", Scaled(b.stats.u));
  }
  rep.check("stats.v", "pblock.stats", E, Scaled(b.stats.v), "==", Scaled(b.stats.v0 - b.stats.u * b.stats.u));
  rep.check("stats.v.positive", "pblock.stats", E, Scaled(b.stats.v), ">", Scaled());
  rep.check("stats.u.lower", "pblock.stats", E, Scaled(b.stats.u), ">",
            Scaled(Rat(1) / (Rat(pow2_int(static_cast<uint64_t>(p + 1))) * b.log2sq.lo)));
  rep.check("stats.v.upper", "pblock.stats", E, Scaled(b.stats.v), "<=",
            Scaled(Rat(4) / (Rat(pow2_int(static_cast<uint64_t>(p))) * p * b.log2sq.hi)));

  // the sum of the constructed X_h has the law of k independent copies
  auto iid = iid_sum_distribution(M, k);
  bool same = iid.size() == b.sys.root->sum_dist.size();
  for (auto& [u, w] : b.sys.root->sum_dist) {
    auto it = iid.find(u);
    same = same && it != iid.end() && w == Scaled(it->second);
  }
  rep.check_true("sum.law", "pblock.independence", E, same, {{"values", iid.size()}});
  Rat tail;
  const Scaled unit = unit_value(M);
  for (auto& [u, w] : iid) {
    if (Scaled(static_cast<long>(u)) * unit > Scaled(b.threshold)) tail += w;
  }
  rep.check("lambda.measure", "pblock.lambda", E, b.lambda_measure, "==", Scaled(tail));
  if (!pp.relaxed) rep.check("lambda.measure.honest", "pblock.lambda", E, b.lambda_measure, ">", Scaled(Rat(99, 100)));

  // running on the circle only adds hits
  std::mt19937_64 rng(pp.seed);
  const BaseSystem& root = *b.sys.root->base;
  for (int i = 0; i < 4; ++i) {
    Scaled x(Rat(random_bits(rng, b.sys.J)), -static_cast<int64_t>(b.sys.J));
    Scaled n = Scaled::pow2(to_u64_checked(root.N[0]));
    Int top = (n * root.h).ceil();
    Int wrap = count_orbit_hits(root.support_rel, OrbitSpec{b.sys.J, true}, x, 1, top);
    Int line = count_orbit_hits(root.support_rel, OrbitSpec{b.sys.J, false}, x, 1, top);
    rep.check("wrap." + std::to_string(i), "pblock.wrap", Smp, Scaled(wrap), ">=", Scaled(line),
              {{"x", scaled_brief(x)}, {"n", "2^" + root.N[0].get_str()}});
  }

  Int small = least_small_p();
  Int t = Int(mpz_sizeinbase(small.get_mpz_t(), 2) - 1);
  rep.check_true("smallness.least_p", "pblock.smallness", E,
                 Int(6400) * t * t < small && !(Int(6400) * (t - 1) * (t - 1) < small / 2),
                 {{"p", small.get_str()}});
  return rep;
}

Certificate blowup_certificate(const PBlock& b, VerificationReport& rep) {
  const PBlockParams& pp = b.params;
  const auto E = ClaimKind::Exact;
  const auto Smp = ClaimKind::Sampled;
  Certificate c;
  if (b.integral.is_zero()) throw std::invalid_argument("cannot normalise f = 0");
  const Rat integral = b.integral.to_rat();
  c.lambda_lo = Rat(1) / (8 * b.log2sq.hi * integral);
  c.lambda_hi = Rat(1) / (8 * b.log2sq.lo * integral);
  c.measure = b.lambda_measure;
  rep.check("lambda", "blowup.lambda", E, Scaled(c.lambda_lo), ">=", Scaled(Rat(pp.p, 32)),
            {{"lambda", {{"lo", c.lambda_lo.get_str()}, {"hi", c.lambda_hi.get_str()}}}});

  std::mt19937_64 rng(pp.seed + 1);
  const Scaled thr(b.threshold), lam(c.lambda_lo);
  size_t attempts = 0;
  while (c.verified < pp.witnesses && attempts < 64 * pp.witnesses) {
    ++attempts;
    Scaled x(Rat(random_bits(rng, b.sys.J)), -static_cast<int64_t>(b.sys.J));
    PointInfo info = point_info(b.sys, x);
    if (!(info.sum > thr)) continue;
    ++c.sampled;
    json w = {{"x", scaled_brief(x)}, {"attempt", attempts}, {"levels", info.level}, {"sum", scaled_str(info.sum)}};
    // a witness n' = 2^a from the stored range with count ratio at least the sum
    std::optional<Int> exp;
    Int C1;
    Int mid = (info.wa + info.wb) / 2;
    for (const Int& a : {info.wa, mid, info.wb}) {
      Int cnt = path_count(info, Scaled::pow2(to_u64_checked(a)));
      if (Scaled(cnt).times2exp(-static_cast<int64_t>(to_u64_checked(a))) >= info.sum) {
        exp = a;
        C1 = cnt;
        break;
      }
    }
    std::string id = "witness." + std::to_string(c.sampled);
    if (!exp) {
      rep.check_true(id + ".found", "blowup.witness", Smp, false, w);
      continue;
    }
    Scaled n1 = Scaled::pow2(to_u64_checked(*exp));
    Int n = (n1 * b.integral).floor() + 1;
    // N_n(f / integral) = N_{n / integral}(f), and the path bound is a lower bound for both
    Int C2 = path_count(info, Scaled(n) / b.integral);
    Scaled r1 = Scaled(C1) / n1, r2 = Scaled(C2) / Scaled(n);
    w["n_prime"] = "2^" + exp->get_str();
    w["n"] = scaled_brief(Scaled(n));
    w["count_f"] = scaled_brief(Scaled(C1));
    w["count_phi"] = scaled_brief(Scaled(C2));
    bool ok = rep.check(id + ".ratio", "blowup.witness", Smp, r1, ">", thr, w);
    ok = rep.check(id + ".chain", "blowup.chain", Smp, r1, "<=", r2 * (b.integral + Scaled(1) / n1), w) && ok;
    ok = rep.check(id + ".lambda", "blowup.lambda", Smp, r2, ">", lam, w) && ok;
    if (ok) ++c.verified;
    c.witnesses.push_back(w);
  }
  rep.check_true("witnesses", "blowup.witness", Smp, c.verified == pp.witnesses && c.sampled == c.verified,
                 {{"verified", c.verified}, {"sampled", c.sampled}, {"attempts", attempts}});
  rep.meta()["certificate"] = {{"lambda_lo", c.lambda_lo.get_str()},
                               {"lambda_hi", c.lambda_hi.get_str()},
                               {"measure", scaled_str(c.measure)},
                               {"verified", c.verified},
                               {"sampled", c.sampled}};
  return c;
}

VerificationReport statistics_suite(const std::vector<int>& ps, unsigned max_k) {
  const auto E = ClaimKind::Exact;
  VerificationReport rep("statistics");
  for (int p : ps) {
    PBlockParams pp;
    pp.p = p;
    pp.resolve();
    Stats s = exact_stats(pp.M);
    Bracket L2 = log2sq_bracket(p);
    std::string P = "p" + std::to_string(p);
    rep.check(P + ".u.lower", "pblock.stats", E, Scaled(s.u), ">",
              Scaled(Rat(1) / (Rat(pow2_int(static_cast<uint64_t>(p + 1))) * L2.lo)), {{"M", pp.M}});
    rep.check(P + ".v.upper", "pblock.stats", E, Scaled(s.v), "<=",
              Scaled(Rat(4) / (Rat(pow2_int(static_cast<uint64_t>(p))) * p * L2.hi)), {{"M", pp.M}});
    rep.check(P + ".v0.upper", "pblock.stats", E, Scaled(s.v0), "<=",
              Scaled(Rat(4) / (Rat(pow2_int(static_cast<uint64_t>(p))) * p * L2.hi)), {{"M", pp.M}});
  }
  // Chebyshev against the exact law of the sum
  for (int M : {4, 5}) {
    Stats s = exact_stats(M);
    const Rat unit = kC * pow2q(1 - M);
    for (unsigned k = 1; k <= max_k; ++k) {
      auto dist = iid_sum_distribution(M, static_cast<int>(k));
      for (int i = 1; i <= 10; ++i) {
        Rat eps = s.u * i / 4;
        Rat tail;
        for (auto& [u, w] : dist) {
          Rat dev = Rat(static_cast<unsigned long>(u)) * unit - Rat(k) * s.u;
          if (abs(dev) >= Rat(k) * eps) tail += w;
        }
        std::string id = "chebyshev.M" + std::to_string(M) + ".k" + std::to_string(k) + ".e" + std::to_string(i);
        rep.check(id, "pblock.chebyshev", E, Scaled(tail), "<=", Scaled(chebyshev_bound(Int(k), s.v, eps)),
                  {{"eps", eps.get_str()}});
      }
    }
  }
  return rep;
}

}  // namespace ergcount

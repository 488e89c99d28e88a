#include "ergcount/orbit.hpp"

namespace ergcount {

namespace {

// sign of P - 2^k for P >= 0
int cmp_pow2(const Int& P, uint64_t k) {
  uint64_t bl = bit_length(P);
  if (bl < k + 1) return -1;
  if (bl > k + 1) return 1;
  return mpz_scan1(P.get_mpz_t(), 0) == k ? 0 : 1;
}

Int to_int(const Scaled& s) {
  if (!s.is_integer()) throw std::logic_error("orbit count is not an integer");
  return s.floor();
}

}  // namespace

OrbitCounter::OrbitCounter(Edge root, std::function<bool(Label)> target, uint64_t J, const Scaled& theta)
    : root_(root), target_(std::move(target)), J_(J), theta_(theta) {}

Scaled OrbitCounter::prefix(const Int& P) { return prefix(root_, J_, P); }
Scaled OrbitCounter::total() { return full(root_, J_); }

const Scaled& OrbitCounter::target_measure(NodeId id) {
  auto it = tmeasure_.find(id);
  if (it != tmeasure_.end()) return it->second;
  Scaled s;
  for (auto& p : store().measures(id)) {
    if (target_(p.first)) s += p.second;
  }
  return tmeasure_.emplace(id, s).first->second;
}

bool OrbitCounter::hit_at(NodeId id, const Scaled& y) { return target_(eval(Edge{id, 0}, y)); }

Scaled OrbitCounter::leaf_count(NodeId id, uint64_t r, const Int& P) {
  const std::vector<Seg>& s = store().segs(id);
  Scaled count;
  Int zero(0);
  for (size_t i = 0; i < s.size(); ++i) {
    if (!target_(s[i].label)) continue;
    Scaled a = s[i].start;
    Scaled b = i + 1 < s.size() ? s[i + 1].start : Scaled(1);
    Int lo = (a.times2exp(static_cast<int64_t>(r)) - theta_).ceil();
    Int hi = (b.times2exp(static_cast<int64_t>(r)) - theta_).ceil();
    if (lo < zero) lo = zero;
    if (hi > P) hi = P;
    if (hi > lo) count += Scaled(Int(hi - lo));
  }
  return count;
}

Scaled OrbitCounter::full(const Edge& e, uint64_t r) {
  Store& st = store();
  const Node& n = st.node(e.node);
  if (n.kind == Kind::Term) return target_(n.label) ? Scaled::pow2(static_cast<int64_t>(r)) : Scaled();
  uint64_t dd = n.dydepth == kNotDyadic ? kNotDyadic : n.dydepth + e.skip;
  if (dd != kNotDyadic && dd <= r) return target_measure(e.node).times2exp(static_cast<int64_t>(r));
  if (e.skip > 0) {
    if (e.skip <= r) return full(Edge{e.node, 0}, r - e.skip).times2exp(static_cast<int64_t>(e.skip));
    Scaled y = theta_.times2exp(static_cast<int64_t>(e.skip - r)).frac();
    return hit_at(e.node, y) ? Scaled::pow2(static_cast<int64_t>(r)) : Scaled();
  }
  Key k{e.node, r};
  auto it = full_memo_.find(k);
  if (it != full_memo_.end()) return it->second;
  Scaled out;
  if (n.kind == Kind::Split) {
    Edge lo = n.lo, hi = n.hi;
    if (r == 0) {
      out = hit_at(e.node, theta_) ? Scaled(1) : Scaled();
    } else {
      out = full(lo, r - 1) + full(hi, r - 1);
    }
  } else {
    out = leaf_count(e.node, r, pow2_int(r));
  }
  full_memo_.emplace(k, out);
  return out;
}

Scaled OrbitCounter::prefix(const Edge& e, uint64_t r, const Int& P) {
  if (sgn(P) == 0) return Scaled();
  int c = cmp_pow2(P, r);
  if (c == 0) return full(e, r);
  if (c > 0) throw std::logic_error("prefix beyond cell");
  Store& st = store();
  const Node& n = st.node(e.node);
  if (n.kind == Kind::Term) return target_(n.label) ? Scaled(P) : Scaled();
  if (e.skip > 0) {
    if (e.skip <= r) {
      uint64_t rr = r - e.skip;
      Int q, rem;
      mpz_fdiv_q_2exp(q.get_mpz_t(), P.get_mpz_t(), rr);
      mpz_fdiv_r_2exp(rem.get_mpz_t(), P.get_mpz_t(), rr);
      Edge inner{e.node, 0};
      Scaled out = prefix(inner, rr, rem);
      if (sgn(q) != 0) out += Scaled(q) * full(inner, rr);
      return out;
    }
    Scaled y = theta_.times2exp(static_cast<int64_t>(e.skip - r)).frac();
    return hit_at(e.node, y) ? Scaled(P) : Scaled();
  }
  if (n.kind == Kind::Split) {
    // r >= 1 here since 0 < P < 2^r
    Edge lo = n.lo, hi = n.hi;
    int h = cmp_pow2(P, r - 1);
    if (h <= 0) return prefix(lo, r - 1, P);
    Int rest = P;
    mpz_clrbit(rest.get_mpz_t(), r - 1);
    return full(lo, r - 1) + prefix(hi, r - 1, rest);
  }
  return leaf_count(e.node, r, P);
}

Int count_orbit_hits(Edge e, const std::function<bool(Label)>& target, const OrbitSpec& orbit, const Scaled& x,
                     const Int& k_lo, const Int& k_hi) {
  if (k_hi <= k_lo) return Int(0);
  Scaled xs = x.times2exp(static_cast<int64_t>(orbit.J));
  Int i0 = xs.floor();
  Scaled theta = xs - Scaled(i0);
  OrbitCounter oc(e, target, orbit.J, theta);
  Int per = pow2_int(orbit.J);
  Int A = i0 + k_lo;
  Int B = i0 + k_hi;
  if (!orbit.wrap) {
    auto clamp = [&per](Int v) {
      if (sgn(v) < 0) return Int(0);
      if (v > per) return per;
      return v;
    };
    A = clamp(A);
    B = clamp(B);
    if (B <= A) return Int(0);
    return to_int(oc.prefix(B) - oc.prefix(A));
  }
  Scaled T = oc.total();
  auto F = [&](const Int& X) {
    Int q, rem;
    mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), X.get_mpz_t(), per.get_mpz_t());
    Scaled out = oc.prefix(rem);
    if (sgn(q) != 0) out += Scaled(q) * T;
    return out;
  };
  return to_int(F(B) - F(A));
}

Int brute_orbit_hits(Edge e, const std::function<bool(Label)>& target, const OrbitSpec& orbit, const Scaled& x,
                     const Int& k_lo, const Int& k_hi) {
  Int count(0);
  Scaled step = Scaled::pow2(-static_cast<int64_t>(orbit.J));
  Scaled one(1);
  for (Int k = k_lo; k < k_hi; ++k) {
    Scaled y = x + Scaled(k) * step;
    if (orbit.wrap) {
      y = y.frac();
    } else if (y.sign() < 0 || y >= one) {
      continue;
    }
    if (target(eval(e, y))) ++count;
  }
  return count;
}

}  // namespace ergcount

#include "ergcount/base_system.hpp"

#include "ergcount/serialize.hpp"

#include <stdexcept>

namespace ergcount {

namespace {

uint64_t to_u64(const Int& v, const char* what) {
  if (v < 0 || !v.fits_ulong_p()) throw std::invalid_argument(std::string(what) + " out of range");
  return v.get_ui();
}

std::string istr(const Int& v) { return v.get_str(); }

// [0, 1 - 2^-t) as a chain of t splits
Edge prefix_chain(uint64_t t) {
  Edge e = empty_edge();
  for (uint64_t i = 0; i < t; ++i) e = store().split(full_edge(), e);
  return e;
}

Edge repeat_at(Edge pattern, uint64_t depth) {
  if (store().is_term(pattern)) return Edge{pattern.node, 0};
  return Edge{pattern.node, pattern.skip + depth};
}

uint64_t grid_depth(Edge e) {
  uint64_t d = store().node(e.node).dydepth;
  if (d == kNotDyadic || store().is_term(e)) return d;
  return d + e.skip;
}

std::vector<IntervalSet> cascade_rel(const BaseDepths& d, int M) {
  std::vector<IntervalSet> B(static_cast<size_t>(M));
  const auto& c = d.cell;
  B[M - 1] = IntervalSet::parity_cells(c[M - 1], 0);
  IntervalSet rem = IntervalSet::parity_cells(c[M - 1], 1);
  for (int L = M - 1; L >= 2; --L) {
    B[L - 1] = rem & IntervalSet::parity_cells(c[L - 1], 0);
    rem = rem & IntervalSet::parity_cells(c[L - 1], 1);
  }
  B[0] = rem;
  return B;
}

std::vector<IntervalSet> gammas_rel(const std::vector<IntervalSet>& B, const BaseDepths& d, int M) {
  std::vector<IntervalSet> G(static_cast<size_t>(M));
  for (int L = 1; L <= M; ++L) {
    uint64_t host = L == M ? 0 : d.cell[L];
    G[L - 1] = B[L - 1] & IntervalSet(repeat_at(prefix_chain(d.erode[L - 1]), host));
  }
  return G;
}

IntervalSet support_rel(const IntervalSet& B1, const BaseDepths& d, const BaseParams& p, uint64_t J, uint64_t J0) {
  uint64_t e = J - J0 + static_cast<uint64_t>(p.M) + 10;
  Scaled a(Rat(p.S), -static_cast<int64_t>(e));
  Scaled b(Rat(p.S + 1), -static_cast<int64_t>(e));
  Edge cell = from_intervals({{a, b}});
  return B1 & IntervalSet(repeat_at(cell, d.block));
}

std::vector<IntervalSet> placed(const std::vector<IntervalSet>& v, const GridInterval& I) {
  std::vector<IntervalSet> out;
  for (auto& s : v) out.emplace_back(place(s.edge(), I));
  return out;
}

}  // namespace

LifeFunction LifeFunction::affine(const Int& c) {
  if (c <= 0) throw std::invalid_argument("life function offset must be positive");
  LifeFunction f;
  f.kind_ = Kind::Affine;
  f.c_ = c;
  return f;
}

LifeFunction LifeFunction::tabulated(std::map<Int, Int> table) {
  for (auto& [n, v] : table) {
    if (v <= n) throw std::invalid_argument("life function must satisfy nu(N) > N");
  }
  LifeFunction f;
  f.kind_ = Kind::Tabulated;
  f.table_ = std::move(table);
  return f;
}

Int LifeFunction::operator()(const Int& N) const {
  if (kind_ == Kind::Affine) return N + c_;
  auto it = table_.find(N);
  if (it == table_.end()) throw std::out_of_range("life function has no value at " + istr(N));
  return it->second;
}

json LifeFunction::to_json() const {
  if (kind_ == Kind::Affine) return {{"kind", "affine"}, {"c", istr(c_)}};
  json pairs = json::array();
  for (auto& [n, v] : table_) pairs.push_back({istr(n), istr(v)});
  return {{"kind", "tabulated"}, {"pairs", pairs}};
}

LifeFunction LifeFunction::from_json(const json& j) {
  std::string kind = j.value("kind", "affine");
  if (kind == "affine") return affine(int_from_json(j.at("c")));
  if (kind != "tabulated") throw std::invalid_argument("unknown life function kind " + kind);
  std::map<Int, Int> t;
  for (auto& p : j.at("pairs")) t[int_from_json(p.at(0))] = int_from_json(p.at(1));
  return tabulated(std::move(t));
}

void BaseParams::validate() const {
  if (M <= 3) throw std::invalid_argument("gain constant M must exceed 3");
  if (N1 <= std::max(10, M)) throw std::invalid_argument("startup time must exceed max(10, M)");
  if (S < 0 || S >= pow2_int(static_cast<uint64_t>(M))) throw std::invalid_argument("support constant must lie in [0, 2^M)");
  if (!I.inside_unit()) throw std::invalid_argument("base interval must lie in [0,1)");
}

json BaseParams::to_json() const {
  json j = {{"M", M}, {"nu", nu.to_json()}, {"N1", istr(N1)}, {"S", istr(S)},
            {"I", {{"j", istr(I.j)}, {"R", I.R}}}, {"ratio_constant", scaled_str(ratio_constant)}};
  if (J) j["J"] = *J;
  return j;
}

BaseParams BaseParams::from_json(const json& j) {
  BaseParams p;
  p.M = j.value("M", 4);
  if (j.contains("nu")) p.nu = LifeFunction::from_json(j["nu"]);
  if (j.contains("N1")) p.N1 = int_from_json(j["N1"]);
  if (j.contains("S")) p.S = int_from_json(j["S"]);
  if (j.contains("I")) {
    p.I.j = int_from_json(j["I"].at("j"));
    p.I.R = j["I"].at("R").get<uint64_t>();
  }
  if (j.contains("J") && !j["J"].is_null()) p.J = j["J"].get<uint64_t>();
  if (j.contains("ratio_constant")) p.ratio_constant = parse_scaled(j["ratio_constant"].get<std::string>());
  return p;
}

std::vector<Int> schedule(const LifeFunction& nu, const Int& N1, int M) {
  if (M < 1) throw std::invalid_argument("schedule needs M >= 1");
  std::vector<Int> N{N1};
  for (int l = 2; l <= M; ++l) N.push_back(20 + nu(N.back()));
  return N;
}

uint64_t min_J0(uint64_t R, int M, const LifeFunction& nu, const Int& NM) {
  return to_u64(nu(NM) + M + 21 + R, "J_0");
}

BaseDepths base_depths(const BaseParams& p, const std::vector<Int>& N, uint64_t J0) {
  const int M = p.M;
  BaseDepths d;
  if (J0 < p.I.R) throw std::invalid_argument("J_0 below the resolution of I");
  d.D = J0 - p.I.R;
  auto depth = [&](const Int& v, const char* what) {
    Int r = Int(static_cast<unsigned long>(d.D)) - v;
    if (r < 0) throw std::invalid_argument(std::string(what) + ": grid coarser than I");
    return to_u64(r, what);
  };
  for (int l = 1; l <= M; ++l) {
    d.cell.push_back(depth(N[l - 1] + M, "cascade grid"));
    if (d.cell.back() == 0) throw std::invalid_argument("cascade grid coarser than I");
  }
  for (int l = 1; l <= M; ++l) {
    uint64_t w = depth(p.nu(N[l - 1]) + M + 10, "window");
    uint64_t host = l == M ? 0 : d.cell[l];
    if (w <= host) throw std::invalid_argument("window longer than its host cell");
    d.erode.push_back(w - host);
  }
  d.block = depth(Int(M + 10), "block");
  return d;
}

std::vector<IntervalSet> build_B_cascade(const BaseParams& p, uint64_t J0) {
  p.validate();
  auto N = schedule(p.nu, p.N1, p.M);
  return placed(cascade_rel(base_depths(p, N, J0), p.M), p.I);
}

std::vector<IntervalSet> build_gammas(const std::vector<IntervalSet>& B, const BaseParams& p, uint64_t J0) {
  auto N = schedule(p.nu, p.N1, p.M);
  BaseDepths d = base_depths(p, N, J0);
  // recover the relative cascade; B must be the placed cascade for these params
  auto rel = cascade_rel(d, p.M);
  for (size_t i = 0; i < B.size(); ++i) {
    if (!IntervalSet(place(rel[i].edge(), p.I)).equals(B[i])) throw std::invalid_argument("cascade does not match params");
  }
  return placed(gammas_rel(rel, d, p.M), p.I);
}

StepFunction build_f(const BaseParams& p, const IntervalSet& B1, uint64_t J) {
  auto N = schedule(p.nu, p.N1, p.M);
  uint64_t J0 = min_J0(p.I.R, p.M, p.nu, N.back());
  if (J < J0) throw std::invalid_argument("J must be at least J_0");
  BaseDepths d = base_depths(p, N, J0);
  IntervalSet rel = support_rel(cascade_rel(d, p.M)[0], d, p, J, J0);
  IntervalSet supp(place(rel.edge(), p.I));
  if (!supp.subset_of(B1)) throw std::invalid_argument("B_1 does not match params");
  Scaled h = Scaled::pow2(static_cast<int64_t>(p.M + 10 + (J - J0)));
  return StepFunction(supp.edge(), {Scaled(), h});
}

BaseSystem build_base(const BaseParams& p) {
  p.validate();
  BaseSystem s;
  s.params = p;
  s.N = schedule(p.nu, p.N1, p.M);
  for (auto& n : s.N) s.nuN.push_back(p.nu(n));
  s.J0 = min_J0(p.I.R, p.M, p.nu, s.N.back());
  s.J = p.J.value_or(s.J0);
  if (s.J < s.J0) throw std::invalid_argument("J must be at least J_0");
  s.h0 = Scaled::pow2(p.M + 10);
  s.h = s.h0.times2exp(static_cast<int64_t>(s.J - s.J0));

  BaseDepths d = base_depths(p, s.N, s.J0);
  s.B_rel = cascade_rel(d, p.M);
  s.Gamma_rel = gammas_rel(s.B_rel, d, p.M);
  s.support_rel = support_rel(s.B_rel[0], d, p, s.J, s.J0);
  static const MapOp overlay{new_op_id(), [](Label a, Label b) { return a ? a : b; }, 0, 0, -1, -1};
  Edge part = empty_edge();
  for (int l = 1; l <= p.M; ++l) {
    Label lab = static_cast<Label>(l);
    part = apply(overlay, part, relabel(s.B_rel[l - 1].edge(), [lab](Label x) { return x ? lab : Label(0); }));
  }
  s.partition_rel = part;

  s.B = placed(s.B_rel, p.I);
  s.Gamma = placed(s.Gamma_rel, p.I);
  s.f = StepFunction(place(s.support_rel.edge(), p.I), {Scaled(), s.h});
  return s;
}

bool support_on_residue(const BaseSystem& sys) {
  const BaseParams& p = sys.params;
  uint64_t e = sys.J - sys.J0 + static_cast<uint64_t>(p.M) + 10;
  if (e < static_cast<uint64_t>(p.M)) return false;
  Scaled a(Rat(p.S), -static_cast<int64_t>(e)), b(Rat(p.S + 1), -static_cast<int64_t>(e));
  IntervalSet cells(repeat_at(from_intervals({{a, b}}), sys.J - e));
  return sys.f.support().subset_of(cells);
}

Scaled f_integral_blocks(const BaseSystem& sys) {
  int64_t e = static_cast<int64_t>(sys.J - sys.J0) + sys.params.M + 10;
  return sys.h.times2exp(-e) * sys.B_rel[0].measure() * sys.params.I.length();
}

IntervalSet component_cover(const BaseSystem& sys, int l) {
  IntervalSet u;
  for (int i = 1; i <= l; ++i) u = u | sys.B_at(i);
  return u;
}

RatioSample check_ratio(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n,
                        const Scaled& bound) {
  RatioSample r;
  r.x = x;
  r.n = n;
  r.bound = bound;
  r.ratio = Scaled(count_N(f, orbit, x, n)) / n;
  r.pass = r.ratio > bound;
  return r;
}

namespace {

std::vector<Scaled> sample_points(const IntervalSet& s, uint64_t grid, size_t cap, size_t randoms, std::mt19937_64& rng) {
  std::vector<Scaled> pts;
  for (auto& iv : first_components(s.edge(), cap)) pts.push_back(iv.a);
  size_t got = 0, tries = 0;
  while (got < randoms && tries < randoms * 20) {
    ++tries;
    auto x = sample_grid_point(s, grid, rng);
    if (x && s.contains(*x)) {
      pts.push_back(*x);
      ++got;
    }
  }
  return pts;
}

json xn(const Scaled& x, const Scaled& n) { return {{"x", scaled_str(x)}, {"n", scaled_str(n)}}; }

}  // namespace

VerificationReport verify_base(const BaseSystem& sys, const SamplingPolicy& policy) {
  const BaseParams& p = sys.params;
  const int M = p.M;
  const auto E = ClaimKind::Exact;
  const auto Smp = ClaimKind::Sampled;
  VerificationReport rep("base");
  rep.meta() = {{"params", p.to_json()}, {"J0", sys.J0}, {"J", sys.J}, {"h", scaled_str(sys.h)}};

  for (int l = 2; l <= M; ++l) {
    rep.check("schedule.N" + std::to_string(l), "base.schedule", E, Scaled(sys.N[l - 1]), "==",
              Scaled(Int(20 + p.nu(sys.N[l - 2]))));
  }
  const int64_t R = static_cast<int64_t>(p.I.R);
  auto lhs_j0 = [&](uint64_t j0) {
    return sys.h0.times2exp(10 - static_cast<int64_t>(j0)) * Scaled(pow2_int(to_u64(sys.nuN.back(), "nu")));
  };
  rep.check("J0.sufficient", "base.J0", E, lhs_j0(sys.J0), "<", Scaled::pow2(-R));
  rep.check("J0.least", "base.J0", E, lhs_j0(sys.J0 - 1), ">=", Scaled::pow2(-R));

  const Scaled mI = p.I.length();
  IntervalSet Iset = IntervalSet::grid(p.I);
  IntervalSet all;
  bool disjoint = true;
  for (int l = 1; l <= M; ++l) {
    disjoint = disjoint && all.disjoint_from(sys.B_at(l));
    all = all | sys.B_at(l);
  }
  rep.check_true("B.disjoint", "base.cascade", E, disjoint);
  rep.check_true("B.cover", "base.cascade", E, all.equals(Iset));
  for (int l = 0; l <= M - 2; ++l) {
    rep.check("B.measure.M-" + std::to_string(l), "base.cascade.measure", E, sys.B_at(M - l).measure(), "==",
              mI.times2exp(-(l + 1)));
  }
  rep.check("B.measure.1", "base.cascade.measure", E, sys.B_at(1).measure(), "==", mI.times2exp(-(M - 1)));

  const Scaled c99(Rat(99, 100));
  for (int l = 1; l <= M; ++l) {
    const IntervalSet& G = sys.Gamma_at(l);
    std::string L = std::to_string(l);
    rep.check_true("Gamma.subset." + L, "base.gamma", E, G.subset_of(sys.B_at(l)));
    rep.check("Gamma.measure." + L, "base.gamma.measure", E, G.measure(), ">", c99 * mI.times2exp(-M + l - 1));
    rep.check("Gamma.relative." + L, "base.gamma.measure", E, G.measure(), ">", c99 * sys.B_at(l).measure());
    uint64_t gd = grid_depth(G.edge());
    rep.check_true("Gamma.grid." + L, "base.gamma.grid", E, gd != kNotDyadic && gd <= sys.J0,
                   {{"depth", gd == kNotDyadic ? json("non-dyadic") : json(gd)}});
  }

  IntervalSet supp = sys.f.support();
  rep.check("f.integral", "base.f.integral", E, sys.f.integral(), "==", mI.times2exp(-M + 1));
  rep.check("f.integral.blocks", "base.f.integral", E, f_integral_blocks(sys), "==", sys.f.integral());
  auto vals = sys.f.distinct_values();
  rep.check_true("f.values", "base.f.values", E, vals.size() == 1 && vals[0] == sys.h);
  rep.check_true("f.inside", "base.f.support", E, supp.subset_of(Iset));
  rep.check_true("f.off.B2+", "base.f.support", E, supp.disjoint_from(all - sys.B_at(1)));
  {
    Scaled a(Rat(p.S), -M), b(Rat(p.S + 1), -M);
    Edge cell = from_intervals({{a, b}});
    IntervalSet residue(repeat_at(cell, sys.J - static_cast<uint64_t>(M)));
    rep.check_true("f.congruence", "base.f.congruence", E, supp.subset_of(residue), {{"S", istr(p.S)}});
  }
  {
    Scaled cellJ = Scaled::pow2(-static_cast<int64_t>(sys.J));
    Int per = pow2_int(to_u64(sys.N[1], "N_2") - 10);
    size_t i = 0;
    for (auto& iv : first_components(sys.B_at(1).edge(), 4)) {
      Scaled hits = (supp & IntervalSet::of({{iv.a, iv.b}})).measure() / cellJ;
      rep.check("f.per_component." + std::to_string(i++), "base.f.count", Smp, hits, "==", Scaled(per),
                {{"component", {scaled_str(iv.a), scaled_str(iv.b)}}});
    }
  }

  // only J_0 enters the sets
  {
    BaseParams q = p;
    q.J = sys.J + 3;
    BaseSystem other = build_base(q);
    bool same = true;
    for (int l = 1; l <= M; ++l) {
      same = same && other.B_at(l).edge() == sys.B_at(l).edge() && other.Gamma_at(l).edge() == sys.Gamma_at(l).edge();
    }
    rep.check_true("J.independence", "base.J-independence", E, same, {{"J", sys.J}, {"J_other", sys.J + 3}});
  }

  // equidistribution inside each I'_l
  for (int L = 2; L <= M; ++L) {
    IntervalSet cover = component_cover(sys, L), lower = component_cover(sys, L - 1);
    std::string Ls = std::to_string(L);
    rep.check("equidistribution." + Ls, "base.equidistribution", E, sys.B_at(L).measure(), "==",
              cover.measure().times2exp(-1));
    size_t i = 0;
    for (auto& iv : first_components(cover.edge(), 3)) {
      IntervalSet c = IntervalSet::of({{iv.a, iv.b}});
      std::string id = "equidistribution." + Ls + "." + std::to_string(i++);
      rep.check(id + ".upper", "base.equidistribution", Smp, (sys.B_at(L) & c).measure(), "==", (iv.b - iv.a).times2exp(-1));
      rep.check(id + ".lower", "base.equidistribution", Smp, (lower & c).measure(), "==", (iv.b - iv.a).times2exp(-1));
    }
  }

  std::mt19937_64 rng(policy.seed);
  auto n_values = [&](int l) {
    Int a = sys.N[l - 1], b = sys.nuN[l - 1];
    return std::vector<Scaled>{Scaled::pow2(to_u64(a, "N")), Scaled::pow2(to_u64((a + b) / 2, "N")),
                               Scaled::pow2(to_u64(b, "nu"))};
  };
  const Scaled hJ = sys.h.times2exp(-static_cast<int64_t>(sys.J));

  // window density of B_1
  for (int L = 2; L <= M; ++L) {
    IntervalSet cover = component_cover(sys, L);
    auto pts = sample_points(sys.Gamma_at(L), sys.J0, policy.window_samples / 2, policy.window_samples / 2, rng);
    size_t i = 0;
    for (const Scaled& x : pts) {
      for (const Scaled& n : n_values(L)) {
        Scaled len = n * hJ;
        IntervalSet W = IntervalSet::of({{x, x + len}});
        std::string id = "window." + std::to_string(L) + "." + std::to_string(i++);
        json wit = xn(x, n);
        rep.check_true(id + ".inside", "base.window", Smp, W.subset_of(cover), wit);
        rep.check(id, "base.window", Smp, (sys.B_at(1) & W).measure(), ">",
                  Scaled(Rat(199, 200)) * len.times2exp(-(L - 1)), wit);
      }
    }
  }

  // counting ratio on Gamma_l
  for (int l = 1; l <= M; ++l) {
    auto pts = sample_points(sys.Gamma_at(l), sys.J0, policy.endpoint_cap, policy.random_points, rng);
    Scaled bound = p.ratio_constant.times2exp(-l + 1);
    size_t i = 0;
    for (const Scaled& x : pts) {
      size_t j = 0;
      for (const Scaled& n : n_values(l)) {
        RatioSample r = check_ratio(sys.f, sys.orbit(), x, n, bound);
        rep.check("ratio." + std::to_string(l) + "." + std::to_string(i) + "." + std::to_string(j++), "base.ratio", Smp,
                  r.ratio, ">", bound, xn(x, n));
      }
      ++i;
    }
  }
  return rep;
}

json base_to_json(const BaseSystem& sys) {
  json j;
  j["params"] = sys.params.to_json();
  json N = json::array(), nu = json::array(), B = json::array(), G = json::array();
  for (auto& v : sys.N) N.push_back(istr(v));
  for (auto& v : sys.nuN) nu.push_back(istr(v));
  for (auto& s : sys.B) B.push_back(edge_to_json(s.edge()));
  for (auto& s : sys.Gamma) G.push_back(edge_to_json(s.edge()));
  j["schedule"] = N;
  j["nu_schedule"] = nu;
  j["J0"] = sys.J0;
  j["J"] = sys.J;
  j["h0"] = scaled_str(sys.h0);
  j["h"] = scaled_str(sys.h);
  j["B"] = B;
  j["Gamma"] = G;
  json vals = json::array();
  for (auto& v : sys.f.values()) vals.push_back(scaled_str(v));
  j["f"] = {{"map", edge_to_json(sys.f.map())}, {"values", vals}};
  return j;
}

}  // namespace ergcount

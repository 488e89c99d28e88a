#include "ergcount/level_systems.hpp"

#include "ergcount/serialize.hpp"

#include <functional>
#include <stdexcept>
#include <tuple>

namespace ergcount {

namespace {

uint64_t to_u64(const Int& v, const char* what) {
  if (v < 0 || !v.fits_ulong_p()) throw std::invalid_argument(std::string(what) + " out of range");
  return v.get_ui();
}

const MapOp& overlay_op() {
  static const MapOp op{new_op_id(), [](Label a, Label b) { return a ? a : b; }, 0, 0, -1, -1};
  return op;
}

Edge overlay(Edge top, Edge bottom) { return apply(overlay_op(), top, bottom); }

Edge relabel_set(const IntervalSet& s, Label l) {
  return relabel(s.edge(), [l](Label x) { return x ? l : Label(0); });
}

uint64_t ipow(uint64_t b, int e) {
  uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

Scaled target_measure(int M, int l) { return Scaled(Rat(99, 100)).times2exp(-M + l - 1); }

std::map<uint64_t, Scaled> mix_dist(const std::map<uint64_t, Scaled>& d, const Scaled& w, uint64_t shift) {
  std::map<uint64_t, Scaled> out;
  if (w.is_zero()) return out;
  for (auto& [k, v] : d) out[k + shift] = v * w;
  return out;
}

void add_dist(std::map<uint64_t, Scaled>& acc, const std::map<uint64_t, Scaled>& d) {
  for (auto& [k, v] : d) {
    auto it = acc.find(k);
    if (it == acc.end()) {
      acc.emplace(k, v);
    } else {
      it->second = it->second + v;
    }
  }
}

Int shape_bound(int M, int k) {
  Int total = 0, p = 1;
  for (int i = 0; i < k; ++i) {
    total += p;
    p *= M;
  }
  return total;
}

class Builder {
 public:
  Builder(const LevelParams& p, const LifeTower& t, bool flat_f) : p_(p), tower_(t), flat_f_(flat_f) {}

  ShapePtr build(int k, const Int& s, uint64_t J) {
    auto key = std::make_tuple(k, s.get_str(), J);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    if (cache_.size() >= p_.max_shapes) {
      throw BudgetError("level system needs more than " + std::to_string(p_.max_shapes) + " shapes");
    }
    ShapePtr out = k == 1 ? level1(s, J) : levelk(k, s, J);
    cache_.emplace(key, out);
    return out;
  }

  size_t shapes() const { return cache_.size(); }

 private:
  std::shared_ptr<BaseSystem> base(int k, const Int& s, uint64_t J) {
    BaseParams bp;
    bp.M = p_.M;
    bp.nu = tower_.nu(k);
    bp.N1 = s;
    bp.S = k - 1;
    bp.J = J;
    bp.ratio_constant = p_.ratio_constant;
    return std::make_shared<BaseSystem>(build_base(bp));
  }

  Edge f_labels(const BaseSystem& b) {
    uint64_t e = static_cast<uint64_t>(b.h.exp2());
    return relabel_set(b.support_rel, static_cast<Label>(e + 1));
  }

  ShapePtr level1(const Int& s, uint64_t J) {
    const int M = p_.M;
    auto sh = std::make_shared<Shape>();
    sh->k = 1;
    sh->M = M;
    sh->base = base(1, s, J);
    const BaseSystem& b = *sh->base;
    sh->Ks = s;
    sh->Ke = b.nuN.back();
    sh->J = J;
    sh->D0 = b.J0;
    sh->rho.assign(static_cast<size_t>(M + 1), Scaled());
    Edge joint = empty_edge();
    for (int l = 1; l <= M; ++l) {
      sh->rho[l] = target_measure(M, l) / b.Gamma_rel[l - 1].measure();
      IntervalSet hat = scale_components(b.Gamma_rel[l - 1], sh->rho[l]);
      joint = overlay(joint, relabel_set(hat, static_cast<Label>(l)));
    }
    sh->joint_l1 = joint;
    std::vector<Scaled> marg(static_cast<size_t>(M + 1));
    Scaled rest(1);
    for (int l = 1; l <= M; ++l) {
      marg[l] = measure_of(joint, static_cast<Label>(l));
      rest = rest - marg[l];
    }
    marg[0] = rest;
    sh->marginal = {marg};
    sh->sum_dist[0] = marg[0];
    for (int l = 1; l <= M; ++l) sh->sum_dist[uint64_t(1) << (M - l)] = marg[l];
    sh->f_integral = f_integral_blocks(b);
    if (flat_f_) {
      sh->f_flat = f_labels(b);
      sh->has_f_flat = true;
    }
    sh->joint_flat = joint;
    sh->has_joint_flat = true;
    return sh;
  }

  ShapePtr levelk(int k, const Int& s, uint64_t J) {
    const int M = p_.M;
    auto sh = std::make_shared<Shape>();
    sh->k = k;
    sh->M = M;
    sh->base = base(k, s, J);
    const BaseSystem& b = *sh->base;
    sh->Ks = s;
    sh->Ke = b.nuN.back();
    sh->J = J;
    sh->D0 = b.J0;
    if (J < sh->D0) throw std::invalid_argument("level system J below the mother's J_0");

    Edge cls = empty_edge();
    for (int l = 1; l <= M; ++l) cls = overlay(cls, relabel_set(b.Gamma_rel[l - 1], static_cast<Label>(l + 1)));
    cls = overlay(cls, store().term(1));
    sh->class_map = cls;

    sh->class_measure.resize(static_cast<size_t>(M + 1));
    sh->rho.assign(static_cast<size_t>(M + 1), Scaled());
    sh->child.resize(static_cast<size_t>(M + 1));
    for (int c = 0; c <= M; ++c) {
      sh->class_measure[c] = measure_of(cls, static_cast<Label>(c + 1));
      Int startup = c == 0 ? s : b.N[c - 1];
      sh->child[c] = build(k - 1, startup, J - sh->D0);
      if (c >= 1) sh->rho[c] = target_measure(M, c) / sh->class_measure[c];
    }

    sh->f_integral = f_integral_blocks(b);
    for (int c = 0; c <= M; ++c) sh->f_integral = sh->f_integral + sh->class_measure[c] * sh->child[c]->f_integral;

    sh->marginal.assign(static_cast<size_t>(k), std::vector<Scaled>(static_cast<size_t>(M + 1)));
    for (int h = 1; h < k; ++h) {
      for (int l = 0; l <= M; ++l) {
        Scaled acc;
        for (int c = 0; c <= M; ++c) acc = acc + sh->class_measure[c] * sh->child[c]->marginal[h - 1][l];
        sh->marginal[h - 1][l] = acc;
      }
    }
    Scaled rest(1);
    for (int l = 1; l <= M; ++l) {
      sh->marginal[k - 1][l] = sh->class_measure[l] * sh->rho[l];
      rest = rest - sh->marginal[k - 1][l];
    }
    sh->marginal[k - 1][0] = rest;

    for (int c = 0; c <= M; ++c) {
      const auto& d = sh->child[c]->sum_dist;
      const Scaled& w = sh->class_measure[c];
      if (c == 0) {
        add_dist(sh->sum_dist, mix_dist(d, w, 0));
      } else {
        add_dist(sh->sum_dist, mix_dist(d, w * sh->rho[c], uint64_t(1) << (M - c)));
        add_dist(sh->sum_dist, mix_dist(d, w * (Scaled(1) - sh->rho[c]), 0));
      }
    }

    bool kids_flat = true;
    for (auto& ch : sh->child) kids_flat = kids_flat && ch->has_f_flat;
    if (flat_f_ && kids_flat) {
      std::unordered_map<Label, Edge> kids;
      for (int c = 0; c <= M; ++c) kids[static_cast<Label>(c + 1)] = sh->child[c]->f_flat;
      sh->f_flat = overlay(f_labels(b), substitute(cls, sh->D0, kids));
      sh->has_f_flat = true;
    }
    // the joint map is flattened only one level up from the base, where the
    // trimming below sees exactly the blocks the point descent uses
    if (k == 2 && flat_f_) {
      const uint64_t place_value = ipow(static_cast<uint64_t>(M + 1), k - 1);
      std::unordered_map<Label, Edge> kids;
      for (int c = 0; c <= M; ++c) {
        Edge cj = sh->child[c]->joint_flat;
        if (c == 0) {
          kids[1] = cj;
          continue;
        }
        std::unordered_map<Label, TrimRule> rules;
        std::vector<Label> labs = labels_of(cj);
        labs.push_back(0);
        for (Label t : labs) {
          rules[t] = TrimRule{sh->rho[c], static_cast<Label>(t + c * place_value), t};
        }
        kids[static_cast<Label>(c + 1)] = trim(cj, rules);
      }
      sh->joint_flat = substitute(cls, sh->D0, kids);
      sh->has_joint_flat = true;
    }
    return sh;
  }

  const LevelParams& p_;
  const LifeTower& tower_;
  bool flat_f_;
  std::map<std::tuple<int, std::string, uint64_t>, ShapePtr> cache_;
};

}  // namespace

LifeTower::LifeTower(int M, int k_max) : M_(M) {
  if (M <= 3) throw std::invalid_argument("gain constant M must exceed 3");
  if (k_max < 1) throw std::invalid_argument("tower needs k_max >= 1");
  c_.push_back(1);
  for (int k = 1; k < k_max; ++k) c_.push_back(M * c_.back() + 20 * (M - 1));
}

LifeTower life_tower(int M, int k_max) { return LifeTower(M, k_max); }

Int nu_compositional(int M, int k, const Int& N) {
  if (k == 1) return N + 1;
  Int cur = N;
  for (int l = 2; l <= M; ++l) cur = 20 + nu_compositional(M, k - 1, cur);
  return nu_compositional(M, k - 1, cur);
}

namespace {
long Ks_long(const Int& v) { return v.fits_slong_p() ? v.get_si() : 11; }
}  // namespace

VerificationReport life_tower_suite(const std::vector<int>& Ms, int k_max, long N_lo, long N_hi) {
  VerificationReport rep("life_tower");
  const auto E = ClaimKind::Exact;
  for (int M : Ms) {
    LifeTower t(M, k_max);
    const std::string m = std::to_string(M);
    for (int k = 1; k <= k_max; ++k) {
      const std::string id = "life_tower." + m + "." + std::to_string(k);
      Int Mk;
      mpz_ui_pow_ui(Mk.get_mpz_t(), static_cast<unsigned long>(M), static_cast<unsigned long>(k - 1));
      Int closed = 21 * Mk - 20;
      rep.check(id + ".closed", "levelk.life_tower", E, Scaled(t.c(k)), "==", Scaled(closed));
      if (k > 1) {
        rep.check(id + ".affine", "levelk.life_tower", E, Scaled(t.c(k)), "==", Scaled(Int(M * t.c(k - 1) + 20 * (M - 1))));
      }
      for (long N = N_lo; N <= N_hi; ++N) {
        rep.check(id + ".N" + std::to_string(N), "levelk.life_tower", E, Scaled(nu_compositional(M, k, Int(N))), "==",
                  Scaled(Int(N + t.c(k))));
      }
    }
  }
  return rep;
}

Scaled x_value(int M, int l) {
  (void)M;
  if (l <= 0) return Scaled();
  return Scaled(Rat(99, 100)).times2exp(-l + 1);
}

void LevelParams::validate() const {
  if (M <= 3) throw std::invalid_argument("gain constant M must exceed 3");
  if (k < 1) throw std::invalid_argument("level must be at least 1");
  // the mother of a level-k system uses support constant k-1 < 2^M
  if (Int(k) > pow2_int(static_cast<uint64_t>(M))) throw std::invalid_argument("level k must satisfy k <= 2^M");
  if (Ks <= std::max(10, M)) throw std::invalid_argument("startup time must exceed max(10, M)");
  if (!I0.inside_unit()) throw std::invalid_argument("I_0 must lie in [0,1)");
}

json LevelParams::to_json() const {
  json j = {{"M", M}, {"k", k}, {"Ks", Ks.get_str()}, {"I0", {{"j", I0.j.get_str()}, {"R", I0.R}}},
            {"flatten_shapes", flatten_shapes}, {"max_shapes", max_shapes}};
  if (J) j["J"] = *J;
  return j;
}

LevelParams LevelParams::from_json(const json& j) {
  LevelParams p;
  p.M = j.value("M", 4);
  p.k = j.value("k", 1);
  if (j.contains("Ks")) p.Ks = int_from_json(j["Ks"]);
  if (j.contains("I0")) {
    p.I0.j = int_from_json(j["I0"].at("j"));
    p.I0.R = j["I0"].at("R").get<uint64_t>();
  }
  if (j.contains("J") && !j["J"].is_null()) p.J = j["J"].get<uint64_t>();
  p.flatten_shapes = j.value("flatten_shapes", size_t(64));
  p.max_shapes = j.value("max_shapes", size_t(200000));
  return p;
}

Scaled LevelSystem::integral() const { return root->f_integral * params.I0.length(); }

Int level_J_need(const LifeTower& tower, int k, const Int& s) {
  static std::map<std::tuple<int, int, std::string, std::string>, Int> memo;
  auto key = std::make_tuple(tower.M(), k, tower.c(k).get_str(), s.get_str());
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  const int M = tower.M();
  auto N = schedule(tower.nu(k), s, M);
  Int D0 = tower.nu(k)(N.back()) + M + 21;
  Int need = k == 1 ? D0 : D0 + level_J_need(tower, k - 1, N.back());
  memo.emplace(key, need);
  return need;
}

SizeEstimate estimate_level(const LevelParams& p) {
  LifeTower t(p.M, p.k);
  SizeEstimate e;
  e.shapes = shape_bound(p.M, p.k);
  e.J_bits = level_J_need(t, p.k, p.Ks) + p.I0.R;
  auto N = schedule(t.nu(p.k), p.Ks, p.M);
  e.K_e = t.nu(p.k)(N.back());
  return e;
}

LevelSystem build_level_k(const LevelParams& p) {
  p.validate();
  LevelSystem sys;
  sys.params = p;
  sys.tower = LifeTower(p.M, p.k);
  SizeEstimate est = estimate_level(p);
  if (est.shapes > Int(static_cast<unsigned long>(p.max_shapes))) {
    throw BudgetError("level system needs about " + est.shapes.get_str() + " shapes and J of " + est.J_bits.get_str() +
                      " bits; raise max_shapes to try");
  }
  uint64_t J_rel = to_u64(level_J_need(sys.tower, p.k, p.Ks), "J");
  if (p.J) {
    if (*p.J < J_rel + p.I0.R) throw std::invalid_argument("J below the level system's J_0");
    J_rel = *p.J - p.I0.R;
  }
  bool flat = est.shapes <= Int(static_cast<unsigned long>(p.flatten_shapes));
  Builder b(p, sys.tower, flat);
  sys.root = b.build(p.k, p.Ks, J_rel);
  sys.shape_count = b.shapes();
  sys.J = J_rel + p.I0.R;
  sys.Ks = sys.root->Ks;
  sys.Ke = sys.root->Ke;

  if (sys.root->has_f_flat) {
    Edge m = place(sys.root->f_flat, p.I0);
    std::vector<Scaled> values{Scaled()};
    for (Label l : labels_of(m)) {
      if (l == 0) continue;
      if (values.size() <= l) values.resize(l + 1);
      values[l] = Scaled::pow2(static_cast<int64_t>(l) - 1);
    }
    sys.f = StepFunction(m, values);
  }
  if (sys.root->has_joint_flat) {
    sys.joint = place(sys.root->joint_flat, p.I0);
    const uint64_t base = static_cast<uint64_t>(p.M + 1);
    for (int h = 1; h <= p.k; ++h) {
      uint64_t div = ipow(base, h - 1);
      Edge xh = relabel(sys.joint, [=](Label c) { return static_cast<Label>((c / div) % base); });
      std::vector<Scaled> vals;
      for (int l = 0; l <= p.M; ++l) vals.push_back(x_value(p.M, l));
      sys.X.emplace_back(xh, vals);
    }
  }
  return sys;
}

LevelSystem build_level1(const GridInterval& I0, const Int& Ks, int M, std::optional<uint64_t> J) {
  LevelParams p;
  p.M = M;
  p.k = 1;
  p.Ks = Ks;
  p.I0 = I0;
  p.J = J;
  return build_level_k(p);
}

PointInfo point_info(const LevelSystem& sys, const Scaled& x) {
  PointInfo info;
  const int k = sys.params.k;
  info.level.assign(static_cast<size_t>(k), 0);
  info.wa = sys.Ks;
  info.wb = sys.Ke;
  Scaled xr = (x - sys.params.I0.left()).times2exp(static_cast<int64_t>(sys.params.I0.R));
  if (xr.sign() < 0 || !(xr < Scaled(1))) return info;

  // returns the position of the point inside its block of the joint labelling
  std::function<Scaled(const Shape&, const Scaled&)> go = [&](const Shape& s, const Scaled& y) -> Scaled {
    info.path.push_back(PathTerm{s.base.get(), y, s.J});
    if (s.k == 1) {
      Located loc = locate(s.joint_l1, y);
      int l = static_cast<int>(loc.label);
      info.level[0] = l;
      if (l >= 1) {
        info.wa = s.base->N[l - 1];
        info.wb = s.base->nuN[l - 1];
      } else {
        info.wa = s.Ks;
        info.wb = s.Ke;
      }
      return loc.pos;
    }
    int c = static_cast<int>(eval(s.class_map, y)) - 1;
    Scaled yc = y.times2exp(static_cast<int64_t>(s.D0)).frac();
    Scaled pos = go(*s.child[c], yc);
    if (c == 0) return pos;
    const Scaled& rho = s.rho[c];
    if (pos < rho) {
      info.level[s.k - 1] = c;
      return pos / rho;
    }
    return (pos - rho) / (Scaled(1) - rho);
  };
  go(*sys.root, xr);
  for (int h = 0; h < k; ++h) info.sum = info.sum + x_value(sys.params.M, info.level[h]);
  return info;
}

Int path_count(const PointInfo& info, const Scaled& n) {
  Int total = 0;
  for (const PathTerm& t : info.path) {
    Int top = (n * Scaled(t.base->h)).ceil();
    if (top <= 1) continue;
    total += count_orbit_hits(t.base->support_rel, OrbitSpec{t.J_rel, false}, t.x_rel, 1, top);
  }
  return total;
}

namespace {

// shapes are shared, so each one is evaluated once per tuple
Scaled joint_rec(const Shape& s, const std::vector<int>& levels, std::unordered_map<const Shape*, Scaled>& memo) {
  auto it = memo.find(&s);
  if (it != memo.end()) return it->second;
  const int top = levels[static_cast<size_t>(s.k - 1)];
  Scaled acc;
  if (s.k == 1) {
    acc = s.marginal[0].at(static_cast<size_t>(top));
  } else {
    for (int c = 0; c <= s.M; ++c) {
      Scaled q;
      if (c == 0) {
        q = top == 0 ? Scaled(1) : Scaled();
      } else if (top == c) {
        q = s.rho[c];
      } else if (top == 0) {
        q = Scaled(1) - s.rho[c];
      }
      if (q.is_zero()) continue;
      acc = acc + s.class_measure[c] * q * joint_rec(*s.child[c], levels, memo);
    }
  }
  memo.emplace(&s, acc);
  return acc;
}

}  // namespace

Scaled joint_probability(const Shape& s, const std::vector<int>& levels) {
  if (levels.size() != static_cast<size_t>(s.k)) throw std::invalid_argument("tuple length must equal the level");
  std::unordered_map<const Shape*, Scaled> memo;
  return joint_rec(s, levels, memo);
}

namespace {

// order holds the shapes in first-visit order, which unlike addresses is the
// same on every build
void collect_shapes(const ShapePtr& s, std::map<const Shape*, ShapePtr>& seen, std::vector<ShapePtr>* order = nullptr) {
  if (seen.count(s.get())) return;
  seen.emplace(s.get(), s);
  if (order) order->push_back(s);
  for (auto& c : s->child) collect_shapes(c, seen, order);
}

std::string tuple_str(const std::vector<int>& t) {
  std::string s;
  for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s;
}

}  // namespace

VerificationReport verify_level_k(const LevelSystem& sys, const SamplingPolicy& policy) {
  const LevelParams& p = sys.params;
  const int M = p.M, k = p.k;
  const auto E = ClaimKind::Exact;
  const auto Smp = ClaimKind::Sampled;
  VerificationReport rep("levelk");
  rep.meta() = {{"params", p.to_json()}, {"J", sys.J}, {"Ks", sys.Ks.get_str()}, {"Ke", sys.Ke.get_str()},
                {"shapes", sys.shape_count}, {"flat_f", sys.f.has_value()}, {"flat_joint", !sys.X.empty()}};
  rep.merge(life_tower_suite({M}, std::min(k, 8), Ks_long(p.Ks), Ks_long(p.Ks) + 4));
  const Scaled mI = p.I0.length();
  const Scaled want_int = Scaled(static_cast<long>(k)).times2exp(-M + 1) * mI;

  rep.check("integral.recursive", "levelk.integral", E, sys.integral(), "==", want_int);
  if (sys.f) {
    rep.check("integral.flat", "levelk.integral", E, sys.f->integral(), "==", want_int);
  }
  // the direct mod 2^M pattern is only intersected at modest J
  if (sys.f && sys.J <= 4096) {
    Edge cell = from_intervals({{Scaled(), Scaled(static_cast<long>(k)).times2exp(-M)}});
    IntervalSet residues(Edge{cell.node, cell.skip + sys.J - static_cast<uint64_t>(M)});
    rep.check_true("support.residues", "levelk.support", E, sys.f->support().subset_of(residues));
  }

  // every shape: the mother sits on residue k-1, classes are superdistributed,
  // the joint sum distribution is a probability
  std::map<const Shape*, ShapePtr> shapes;
  collect_shapes(sys.root, shapes);
  bool residues_ok = true, super_ok = true, dist_ok = true, ranges_ok = true;
  for (auto& [ptr, s] : shapes) {
    const BaseSystem& b = *s->base;
    residues_ok = residues_ok && b.params.S == s->k - 1 && support_on_residue(b);
    if (s->k > 1) {
      for (int l = 1; l <= M; ++l) super_ok = super_ok && s->class_measure[l] >= target_measure(M, l);
      // child windows lie inside the mother's
      for (int c = 0; c <= M; ++c) {
        const Shape& ch = *s->child[c];
        Int lo = c == 0 ? b.N[0] : b.N[c - 1];
        ranges_ok = ranges_ok && ch.Ks == lo && ch.Ke == b.params.nu(lo);
      }
    }
    Scaled tot;
    for (auto& [u, v] : s->sum_dist) tot = tot + v;
    dist_ok = dist_ok && tot == Scaled(1);
  }
  rep.check_true("shapes.residues", "levelk.support", E, residues_ok, {{"shapes", shapes.size()}});
  rep.check_true("shapes.superdistributed", "levelk.superdistributed", E, super_ok);
  rep.check_true("shapes.sum_distribution", "levelk.distribution", E, dist_ok);
  rep.check_true("shapes.windows", "levelk.witness", E, ranges_ok);

  for (int h = 1; h <= k; ++h) {
    for (int l = 1; l <= M; ++l) {
      std::string id = "distribution.X" + std::to_string(h) + ".l" + std::to_string(l);
      rep.check(id, "levelk.distribution", E, sys.root->marginal[h - 1][l] * mI, "==", target_measure(M, l) * mI);
      if (!sys.X.empty()) {
        rep.check(id + ".flat", "levelk.distribution", E, sys.X[h - 1].level(x_value(M, l)).measure(), "==",
                  target_measure(M, l) * mI);
      }
    }
  }

  // independence: product rule on every value tuple when the joint map is flat
  std::mt19937_64 rng(policy.seed);
  if (!sys.X.empty()) {
    const uint64_t base = static_cast<uint64_t>(M + 1);
    uint64_t tuples = ipow(base, k);
    std::vector<std::vector<Scaled>> marg(static_cast<size_t>(k), std::vector<Scaled>(static_cast<size_t>(M + 1)));
    for (int h = 0; h < k; ++h) {
      uint64_t div = ipow(base, h);
      for (int l = 0; l <= M; ++l) {
        marg[h][l] = measure_where(sys.joint, [=](Label c) { return (c / div) % base == static_cast<uint64_t>(l); });
      }
    }
    // inside I_0 only; label 0 also covers the outside
    for (int h = 0; h < k; ++h) marg[h][0] = marg[h][0] - (Scaled(1) - mI);
    std::vector<uint64_t> which;
    if (tuples <= 4096) {
      for (uint64_t t = 0; t < tuples; ++t) which.push_back(t);
    } else {
      for (int i = 0; i < 200; ++i) which.push_back(rng() % tuples);
    }
    for (uint64_t code : which) {
      Scaled joint = measure_of(sys.joint, static_cast<Label>(code));
      if (code == 0) joint = joint - (Scaled(1) - mI);
      Scaled prod = mI;
      std::vector<int> t;
      for (int h = 0; h < k; ++h) {
        int l = static_cast<int>((code / ipow(base, h)) % base);
        t.push_back(l);
        prod = prod * (marg[h][l] / mI);
      }
      rep.check("independence." + tuple_str(t), "levelk.independence", E, joint, "==", prod);
    }
  } else {
    for (int i = 0; i < 64; ++i) {
      std::vector<int> t;
      Scaled prod(1);
      for (int h = 0; h < k; ++h) {
        int l = static_cast<int>(rng() % static_cast<uint64_t>(M + 1));
        t.push_back(l);
        prod = prod * sys.root->marginal[h][l];
      }
      rep.check("independence.recursive." + tuple_str(t), "levelk.independence", E, joint_probability(*sys.root, t),
                "==", prod);
    }
  }

  // counting inequality at sampled points with the stored witness range
  const uint64_t Jrel = sys.J - p.I0.R;
  for (size_t i = 0; i < policy.random_points; ++i) {
    Scaled x = p.I0.left() + Scaled(Rat(random_bits(rng, Jrel)), -static_cast<int64_t>(sys.J));
    PointInfo info = point_info(sys, x);
    json wit = {{"x", scaled_brief(x)}, {"sample", i}, {"seed", policy.seed}, {"levels", info.level}, {"range", {info.wa.get_str(), info.wb.get_str()}}};
    std::string id = "ratio." + std::to_string(i);
    rep.check_true(id + ".range", "levelk.witness", Smp, sys.Ks <= info.wa && info.wa <= info.wb && info.wb <= sys.Ke,
                   wit);
    if (!sys.X.empty()) {
      bool agree = true;
      for (int h = 0; h < k; ++h) agree = agree && sys.X[h].eval(x) == x_value(M, info.level[h]);
      rep.check_true(id + ".levels", "levelk.witness", Smp, agree, wit);
    }
    Int mid = (info.wa + info.wb) / 2;
    int j = 0;
    for (const Int& a : {info.wa, mid, info.wb}) {
      Scaled n = Scaled::pow2(to_u64(a, "witness"));
      Int lower = path_count(info, n);
      Int count = lower;
      json w = wit;
      w["n"] = "2^" + a.get_str();
      if (sys.f) {
        count = count_N(*sys.f, sys.orbit(), x, n);
        rep.check_true(id + ".n" + std::to_string(j) + ".path_bound", "levelk.additivity", Smp, lower <= count, w);
      }
      w["count"] = count.get_str();
      w["counted"] = sys.f ? "full" : "path lower bound";
      rep.check(id + ".n" + std::to_string(j), "levelk.ratio", Smp, Scaled(count) / n, ">=", info.sum, w);
      ++j;
    }
  }
  return rep;
}

json level_to_json(const LevelSystem& sys) {
  std::map<const Shape*, ShapePtr> shapes;
  std::vector<ShapePtr> order;
  collect_shapes(sys.root, shapes, &order);
  std::map<const Shape*, size_t> id;
  for (auto& s : order) id.emplace(s.get(), id.size());
  json arr = json::array();
  for (auto& s : order) {
    json j = {{"k", s->k}, {"Ks", s->Ks.get_str()}, {"Ke", s->Ke.get_str()}, {"J", s->J}, {"D0", s->D0},
              {"base", s->base->params.to_json()}, {"f_integral", scaled_str(s->f_integral)}};
    json cm = json::array(), rho = json::array(), kids = json::array();
    for (auto& v : s->class_measure) cm.push_back(scaled_str(v));
    for (auto& v : s->rho) rho.push_back(scaled_str(v));
    for (auto& c : s->child) kids.push_back(id.at(c.get()));
    j["class_measure"] = cm;
    j["rho"] = rho;
    j["children"] = kids;
    arr.push_back(std::move(j));
  }
  json out = {{"params", sys.params.to_json()}, {"J", sys.J},      {"Ks", sys.Ks.get_str()},
              {"Ke", sys.Ke.get_str()},        {"root", id.at(sys.root.get())}, {"shapes", arr}};
  if (sys.f) out["f"] = edge_to_json(sys.f->map());
  if (!sys.X.empty()) out["joint"] = edge_to_json(sys.joint);
  return out;
}

}  // namespace ergcount

#include "ergcount/dyset.hpp"

#include <algorithm>
#include <unordered_set>

namespace ergcount {

namespace {

inline size_t mix(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

uint64_t sat_add(uint64_t a, uint64_t b) {
  if (a == kNotDyadic || b == kNotDyadic) return kNotDyadic;
  uint64_t r = a + b;
  return r < a ? kNotDyadic : r;
}

const Scaled& half() {
  static const Scaled h = Scaled::pow2(-1);
  return h;
}

const Scaled& one() {
  static const Scaled o(1);
  return o;
}

Edge add_skip(Edge e, uint64_t m) {
  if (store().is_term(e)) return Edge{e.node, 0};
  return Edge{e.node, e.skip + m};
}

Edge norm(Edge e) { return store().is_term(e) ? Edge{e.node, 0} : e; }

std::vector<Seg> segs_of(const Edge& e) {
  const Node& n = store().node(e.node);
  if (n.kind == Kind::Term) return {Seg{Scaled(), n.label}};
  return store().segs(e.node);
}

}  // namespace

size_t Store::ApplyHash::operator()(const ApplyKey& k) const {
  size_t h = k.op;
  h = mix(h, k.a);
  h = mix(h, k.b);
  h = mix(h, k.sa);
  h = mix(h, k.sb);
  return h;
}

size_t Store::SplitHash::operator()(const SplitKey& k) const {
  size_t h = k.lo;
  h = mix(h, k.hi);
  h = mix(h, k.slo);
  h = mix(h, k.shi);
  return h;
}

Store& Store::get() {
  static Store s;
  return s;
}

Store::Store() {
  term(0);
  term(1);
}

NodeId Store::push(Node n) {
  if (nodes_.size() >= budget_) {
    throw BudgetError("pattern store exceeded node budget of " + std::to_string(budget_));
  }
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Store::clear_caches() {
  apply_memo_.clear();
  measures_.clear();
  measure_bytes_ = 0;
}

Edge Store::term(Label l) {
  auto it = terms_.find(l);
  if (it != terms_.end()) return Edge{it->second, 0};
  Node n;
  n.kind = Kind::Term;
  n.label = l;
  NodeId id = push(n);
  terms_.emplace(l, id);
  return Edge{id, 0};
}

namespace {

uint64_t leaf_dydepth(const std::vector<Seg>& segs) {
  uint64_t d = 0;
  for (const Seg& s : segs) {
    if (!s.start.is_dyadic()) return kNotDyadic;
    d = std::max<uint64_t>(d, static_cast<uint64_t>(s.start.dyadic_depth()));
  }
  return d;
}

size_t segs_hash(const std::vector<Seg>& segs) {
  size_t h = segs.size();
  for (const Seg& s : segs) {
    h = mix(h, s.start.hash());
    h = mix(h, s.label);
  }
  return h;
}

bool segs_equal(const std::vector<Seg>& a, const std::vector<Seg>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].label != b[i].label || a[i].start != b[i].start) return false;
  }
  return true;
}

}  // namespace

Edge Store::split(Edge lo, Edge hi) {
  lo = norm(lo);
  hi = norm(hi);
  if (lo == hi) return add_skip(lo, 1);
  const Node& nl = nodes_[lo.node];
  const Node& nh = nodes_[hi.node];
  if (lo.skip == 0 && hi.skip == 0 && nl.kind != Kind::Split && nh.kind != Kind::Split) {
    std::vector<Seg> a = segs_of(lo);
    std::vector<Seg> b = segs_of(hi);
    if (a.back().label == b.front().label) {
      std::vector<Seg> merged;
      merged.reserve(a.size() + b.size() - 1);
      for (const Seg& s : a) merged.push_back(Seg{s.start.times2exp(-1), s.label});
      for (size_t i = 1; i < b.size(); ++i) merged.push_back(Seg{half() + b[i].start.times2exp(-1), b[i].label});
      size_t h = segs_hash(merged);
      auto& bucket = leaf_index_[h];
      for (NodeId id : bucket) {
        if (segs_equal(leaves_[nodes_[id].leaf], merged)) return Edge{id, 0};
      }
      Node n;
      n.kind = Kind::Leaf;
      n.leaf = static_cast<uint32_t>(leaves_.size());
      n.dydepth = leaf_dydepth(merged);
      NodeId id = push(n);
      leaves_.push_back(std::move(merged));
      leaf_index_[h].push_back(id);
      return Edge{id, 0};
    }
  }
  SplitKey key{lo.node, hi.node, lo.skip, hi.skip};
  auto it = splits_.find(key);
  if (it != splits_.end()) return Edge{it->second, 0};
  Node n;
  n.kind = Kind::Split;
  n.lo = lo;
  n.hi = hi;
  n.dydepth = sat_add(1, std::max(sat_add(lo.skip, nodes_[lo.node].dydepth), sat_add(hi.skip, nodes_[hi.node].dydepth)));
  NodeId id = push(n);
  splits_.emplace(key, id);
  return Edge{id, 0};
}

Edge Store::leaf(std::vector<Seg> segs) {
  if (segs.empty()) return term(0);
  if (!segs.front().start.is_zero()) throw std::invalid_argument("leaf must start at 0");
  std::vector<Seg> m;
  m.reserve(segs.size());
  for (Seg& s : segs) {
    if (s.start.sign() < 0 || s.start >= one()) throw std::invalid_argument("leaf cut outside [0,1)");
    if (!m.empty()) {
      if (s.start <= m.back().start) throw std::invalid_argument("leaf cuts not increasing");
      if (s.label == m.back().label) continue;
    }
    m.push_back(std::move(s));
  }
  if (m.size() == 1) return term(m.front().label);
  auto mid = std::lower_bound(m.begin(), m.end(), half(), [](const Seg& s, const Scaled& v) { return s.start < v; });
  if (mid != m.end() && mid->start == half()) {
    std::vector<Seg> lo, hi;
    for (auto it = m.begin(); it != mid; ++it) lo.push_back(Seg{it->start.times2exp(1), it->label});
    for (auto it = mid; it != m.end(); ++it) hi.push_back(Seg{it->start.times2exp(1) - one(), it->label});
    return split(leaf(std::move(lo)), leaf(std::move(hi)));
  }
  size_t h = segs_hash(m);
  auto& bucket = leaf_index_[h];
  for (NodeId id : bucket) {
    if (segs_equal(leaves_[nodes_[id].leaf], m)) return Edge{id, 0};
  }
  Node n;
  n.kind = Kind::Leaf;
  n.leaf = static_cast<uint32_t>(leaves_.size());
  n.dydepth = leaf_dydepth(m);
  NodeId id = push(n);
  leaves_.push_back(std::move(m));
  leaf_index_[h].push_back(id);
  return Edge{id, 0};
}

std::pair<Edge, Edge> Store::halves(const Edge& e) {
  const Node& n = nodes_[e.node];
  if (n.kind == Kind::Term) return {Edge{e.node, 0}, Edge{e.node, 0}};
  if (e.skip > 0) return {Edge{e.node, e.skip - 1}, Edge{e.node, e.skip - 1}};
  if (n.kind == Kind::Split) return {n.lo, n.hi};
  auto it = leaf_halves_.find(e.node);
  if (it != leaf_halves_.end()) return it->second;
  std::vector<Seg> s = leaves_[n.leaf];
  std::vector<Seg> lo, hi;
  Label at_half = s.front().label;
  for (const Seg& g : s) {
    if (g.start < half()) {
      lo.push_back(Seg{g.start.times2exp(1), g.label});
      at_half = g.label;
    }
  }
  hi.push_back(Seg{Scaled(), at_half});
  for (const Seg& g : s) {
    if (g.start > half()) hi.push_back(Seg{g.start.times2exp(1) - one(), g.label});
  }
  Edge elo = leaf(std::move(lo));
  Edge ehi = leaf(std::move(hi));
  leaf_halves_[e.node] = {elo, ehi};
  return {elo, ehi};
}

namespace {

void add_into(LabelMeasure& acc, Label l, const Scaled& v) {
  for (auto& p : acc) {
    if (p.first == l) {
      p.second += v;
      return;
    }
  }
  acc.emplace_back(l, v);
}

}  // namespace

const LabelMeasure& Store::measures(NodeId id) {
  // exact measures of sets mixing far-apart scales have huge numerators
  constexpr size_t kMeasureCap = size_t(256) << 20;
  if (measure_bytes_ > kMeasureCap && !measures_.count(id)) {
    measures_.clear();
    measure_bytes_ = 0;
  }
  return measures_rec(id);
}

const LabelMeasure& Store::measures_rec(NodeId id) {
  auto it = measures_.find(id);
  if (it != measures_.end()) return it->second;
  const Node n = nodes_[id];
  LabelMeasure out;
  if (n.kind == Kind::Term) {
    out.emplace_back(n.label, Scaled(1));
  } else if (n.kind == Kind::Split) {
    LabelMeasure a = measures_rec(n.lo.node);
    const LabelMeasure& b = measures_rec(n.hi.node);
    for (auto& p : a) add_into(out, p.first, p.second.times2exp(-1));
    for (auto& p : b) add_into(out, p.first, p.second.times2exp(-1));
  } else {
    const std::vector<Seg>& s = leaves_[n.leaf];
    for (size_t i = 0; i < s.size(); ++i) {
      Scaled end = i + 1 < s.size() ? s[i + 1].start : one();
      add_into(out, s[i].label, end - s[i].start);
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& p : out) measure_bytes_ += 32 + p.second.limb_bytes();
  return measures_.emplace(id, std::move(out)).first->second;
}

uint32_t new_op_id() {
  static uint32_t next = 16;
  return next++;
}

const MapOp& set_op(SetOp op) {
  static const MapOp uni{1, [](Label a, Label b) { return static_cast<Label>((a || b) ? 1 : 0); }, 0, 0, 1, 1};
  static const MapOp inter{2, [](Label a, Label b) { return static_cast<Label>((a && b) ? 1 : 0); }, 1, 1, 0, 0};
  static const MapOp diff{3, [](Label a, Label b) { return static_cast<Label>((a && !b) ? 1 : 0); }, -1, 0, 0, -1};
  static const MapOp xr{4, [](Label a, Label b) { return static_cast<Label>(((a != 0) != (b != 0)) ? 1 : 0); }, 0, 0, -1, -1};
  switch (op) {
    case SetOp::Union: return uni;
    case SetOp::Intersect: return inter;
    case SetOp::Diff: return diff;
    case SetOp::Xor: return xr;
  }
  return uni;
}

namespace {

Edge merge_leaves(const MapOp& op, const Edge& a, const Edge& b) {
  std::vector<Seg> sa = segs_of(a), sb = segs_of(b);
  std::vector<Seg> out;
  size_t i = 0, j = 0;
  Label la = sa[0].label, lb = sb[0].label;
  out.push_back(Seg{Scaled(), op.f(la, lb)});
  i = 1;
  j = 1;
  while (i < sa.size() || j < sb.size()) {
    Scaled p;
    if (j >= sb.size() || (i < sa.size() && sa[i].start < sb[j].start)) {
      p = sa[i].start;
      la = sa[i].label;
      ++i;
    } else if (i >= sa.size() || sb[j].start < sa[i].start) {
      p = sb[j].start;
      lb = sb[j].label;
      ++j;
    } else {
      p = sa[i].start;
      la = sa[i].label;
      lb = sb[j].label;
      ++i;
      ++j;
    }
    out.push_back(Seg{p, op.f(la, lb)});
  }
  return store().leaf(std::move(out));
}

}  // namespace

Edge apply(const MapOp& op, Edge a, Edge b) {
  Store& st = store();
  a = norm(a);
  b = norm(b);
  bool ta = st.is_term(a), tb = st.is_term(b);
  if (ta && tb) return st.term(op.f(st.node(a.node).label, st.node(b.node).label));
  if (ta) {
    long la = st.node(a.node).label;
    if (op.left_identity == la) return b;
    if (op.left_absorb == la) return st.term(op.f(static_cast<Label>(la), 0));
  }
  if (tb) {
    long lb = st.node(b.node).label;
    if (op.right_identity == lb) return a;
    if (op.right_absorb == lb) return st.term(op.f(0, static_cast<Label>(lb)));
  }
  if (a == b && op.id >= 1 && op.id <= 4) {
    if (op.id <= 2) return a;
    return empty_edge();
  }
  uint64_t m;
  if (ta) m = b.skip;
  else if (tb) m = a.skip;
  else m = std::min(a.skip, b.skip);
  if (m > 0) {
    Edge a2 = ta ? a : Edge{a.node, a.skip - m};
    Edge b2 = tb ? b : Edge{b.node, b.skip - m};
    return add_skip(apply(op, a2, b2), m);
  }
  Store::ApplyKey key{op.id, a.node, b.node, a.skip, b.skip};
  auto& memo = st.apply_memo();
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  Edge r;
  bool flat_a = a.skip == 0 && st.node(a.node).kind != Kind::Split;
  bool flat_b = b.skip == 0 && st.node(b.node).kind != Kind::Split;
  if (flat_a && flat_b) {
    r = merge_leaves(op, a, b);
  } else {
    auto ha = st.halves(a);
    auto hb = st.halves(b);
    Edge lo = apply(op, ha.first, hb.first);
    Edge hi = apply(op, ha.second, hb.second);
    r = st.split(lo, hi);
  }
  memo.emplace(key, r);
  return r;
}

Edge relabel(Edge e, const std::function<Label(Label)>& f) {
  Store& st = store();
  std::unordered_map<NodeId, Edge> memo;
  std::function<Edge(NodeId)> go = [&](NodeId id) -> Edge {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    const Node n = st.node(id);
    Edge r;
    if (n.kind == Kind::Term) {
      r = st.term(f(n.label));
    } else if (n.kind == Kind::Split) {
      Edge lo = add_skip(go(n.lo.node), n.lo.skip);
      Edge hi = add_skip(go(n.hi.node), n.hi.skip);
      r = st.split(lo, hi);
    } else {
      std::vector<Seg> s = st.segs(id);
      for (Seg& g : s) g.label = f(g.label);
      r = st.leaf(std::move(s));
    }
    memo.emplace(id, r);
    return r;
  };
  return add_skip(go(e.node), e.skip);
}

Edge trim(Edge e, const std::unordered_map<Label, TrimRule>& rules) {
  Store& st = store();
  std::unordered_map<NodeId, Edge> memo;
  std::function<Edge(NodeId)> go = [&](NodeId id) -> Edge {
    auto it = memo.find(id);
    if (it != memo.end()) return it->second;
    const Node n = st.node(id);
    Edge r;
    if (n.kind == Kind::Split) {
      Edge lo = add_skip(go(n.lo.node), n.lo.skip);
      Edge hi = add_skip(go(n.hi.node), n.hi.skip);
      r = st.split(lo, hi);
    } else {
      std::vector<Seg> s = n.kind == Kind::Term ? std::vector<Seg>{Seg{Scaled(), n.label}} : st.segs(id);
      std::vector<Seg> out;
      for (size_t i = 0; i < s.size(); ++i) {
        auto rule = rules.find(s[i].label);
        if (rule == rules.end()) {
          out.push_back(s[i]);
          continue;
        }
        const Scaled& rho = rule->second.rho;
        Scaled end = i + 1 < s.size() ? s[i + 1].start : one();
        if (rho.sign() > 0) out.push_back(Seg{s[i].start, rule->second.inside});
        if (rho < one()) {
          Scaled cut = s[i].start + rho * (end - s[i].start);
          out.push_back(Seg{cut, rule->second.outside});
        }
      }
      r = st.leaf(std::move(out));
    }
    memo.emplace(id, r);
    return r;
  };
  return add_skip(go(e.node), e.skip);
}

Edge substitute(Edge pattern, uint64_t r, const std::unordered_map<Label, Edge>& children) {
  Store& st = store();
  struct Key {
    NodeId n;
    uint64_t r;
    bool operator==(const Key& o) const { return n == o.n && r == o.r; }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const { return mix(k.n, k.r); }
  };
  std::unordered_map<Key, Edge, KeyHash> memo;
  auto child = [&](Label l) {
    auto it = children.find(l);
    return it == children.end() ? empty_edge() : it->second;
  };
  std::function<Edge(Edge, uint64_t)> go = [&](Edge e, uint64_t rem) -> Edge {
    const Node& n = st.node(e.node);
    if (n.kind == Kind::Term) return add_skip(child(n.label), rem);
    if (e.skip > rem) throw std::invalid_argument("substitute: pattern is finer than the atoms");
    uint64_t rr = rem - e.skip;
    Key k{e.node, rr};
    auto it = memo.find(k);
    Edge inner;
    if (it != memo.end()) {
      inner = it->second;
    } else {
      const Node nn = st.node(e.node);
      if (nn.kind == Kind::Leaf || rr == 0) throw std::invalid_argument("substitute: pattern not constant on atoms");
      inner = st.split(go(nn.lo, rr - 1), go(nn.hi, rr - 1));
      memo.emplace(k, inner);
    }
    return add_skip(inner, e.skip);
  };
  return go(pattern, r);
}

Edge place(Edge e, const GridInterval& I) {
  if (!I.inside_unit()) throw std::invalid_argument("grid interval must lie in [0,1)");
  Store& st = store();
  Edge cur = e;
  for (uint64_t i = 0; i < I.R; ++i) {
    bool bit = mpz_tstbit(I.j.get_mpz_t(), i);
    cur = bit ? st.split(empty_edge(), cur) : st.split(cur, empty_edge());
  }
  return cur;
}

Edge from_intervals(std::vector<std::pair<Scaled, Scaled>> ivs, Label label) {
  const Scaled zero;
  std::vector<std::pair<Scaled, Scaled>> c;
  for (auto& iv : ivs) {
    Scaled a = iv.first < zero ? zero : iv.first;
    Scaled b = iv.second > one() ? one() : iv.second;
    if (a < b) c.emplace_back(a, b);
  }
  std::sort(c.begin(), c.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::pair<Scaled, Scaled>> merged;
  for (auto& iv : c) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      if (iv.second > merged.back().second) merged.back().second = iv.second;
    } else {
      merged.push_back(iv);
    }
  }
  std::vector<Seg> segs;
  Scaled cur;
  for (auto& iv : merged) {
    if (cur < iv.first || segs.empty()) {
      if (cur < iv.first) segs.push_back(Seg{cur, 0});
    }
    segs.push_back(Seg{iv.first, label});
    cur = iv.second;
  }
  if (cur < one()) segs.push_back(Seg{cur, 0});
  if (segs.empty()) return empty_edge();
  return store().leaf(std::move(segs));
}

Edge from_segments(std::vector<Seg> segs) { return store().leaf(std::move(segs)); }

Located locate(Edge e, const Scaled& y0) {
  Store& st = store();
  Scaled y = y0;
  if (y.sign() < 0 || y >= one()) throw std::invalid_argument("locate: point outside [0,1)");
  while (true) {
    const Node& n = st.node(e.node);
    if (n.kind == Kind::Term) return Located{n.label, y};
    if (e.skip > 0) y = y.times2exp(static_cast<int64_t>(e.skip)).frac();
    if (n.kind == Kind::Split) {
      if (y < half()) {
        y = y.times2exp(1);
        e = n.lo;
      } else {
        y = y.times2exp(1) - one();
        e = n.hi;
      }
      continue;
    }
    const std::vector<Seg>& s = st.segs(e.node);
    auto it = std::upper_bound(s.begin(), s.end(), y, [](const Scaled& v, const Seg& g) { return v < g.start; });
    --it;
    Scaled a = it->start;
    Scaled b = (it + 1) == s.end() ? one() : (it + 1)->start;
    return Located{it->label, (y - a) / (b - a)};
  }
}

Label eval(Edge e, const Scaled& y) { return locate(e, y).label; }

LabelMeasure measures(Edge e) { return store().measures(e.node); }

Scaled measure_of(Edge e, Label l) {
  for (auto& p : store().measures(e.node)) {
    if (p.first == l) return p.second;
  }
  return Scaled();
}

Scaled measure_where(Edge e, const std::function<bool(Label)>& pred) {
  Scaled s;
  for (auto& p : store().measures(e.node)) {
    if (pred(p.first)) s += p.second;
  }
  return s;
}

std::vector<Label> labels_of(Edge e) {
  std::vector<Label> out;
  for (auto& p : store().measures(e.node)) out.push_back(p.first);
  return out;
}

namespace {

// truncate: stop quietly after cap pieces instead of failing
std::vector<Interval> collect_components(Edge e, size_t cap, bool truncate) {
  Store& st = store();
  std::vector<Interval> raw;
  bool done = false;
  auto push = [&](Interval iv) {
    if (raw.size() >= cap) {
      if (!truncate) throw BudgetError("components: more than " + std::to_string(cap) + " pieces");
      done = true;
      return;
    }
    raw.push_back(std::move(iv));
  };
  std::function<void(Edge, const Scaled&, int64_t)> go = [&](Edge ed, const Scaled& off, int64_t depth) {
    if (done) return;
    const Node& n = st.node(ed.node);
    if (n.kind == Kind::Term) {
      if (n.label != 0) push(Interval{off, off + Scaled::pow2(-depth), n.label});
      return;
    }
    if (ed.skip > 0) {
      bool small = ed.skip <= 40 && (uint64_t(1) << ed.skip) <= cap;
      if (!small && !truncate) throw BudgetError("components: periodic part too long to enumerate");
      int64_t d = depth + static_cast<int64_t>(ed.skip);
      // each copy holds at least one piece, so truncation bounds the loop
      for (uint64_t i = 0; !done && (!small || i < (uint64_t(1) << ed.skip)); ++i) {
        go(Edge{ed.node, 0}, off + Scaled(Rat(Int(static_cast<unsigned long>(i))), -d), d);
      }
      return;
    }
    if (n.kind == Kind::Split) {
      go(n.lo, off, depth + 1);
      go(n.hi, off + Scaled::pow2(-depth - 1), depth + 1);
      return;
    }
    const std::vector<Seg>& s = st.segs(ed.node);
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i].label == 0) continue;
      Scaled a = s[i].start;
      Scaled b = i + 1 < s.size() ? s[i + 1].start : one();
      push(Interval{off + a.times2exp(-depth), off + b.times2exp(-depth), s[i].label});
    }
  };
  go(e, Scaled(), 0);
  std::vector<Interval> out;
  for (auto& iv : raw) {
    if (!out.empty() && out.back().b == iv.a && out.back().label == iv.label) {
      out.back().b = iv.b;
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

}  // namespace

std::vector<Interval> components(Edge e, size_t cap) { return collect_components(e, cap, false); }

std::vector<Interval> first_components(Edge e, size_t n) { return collect_components(e, n, true); }

size_t dag_size(Edge e) {
  Store& st = store();
  std::unordered_set<NodeId> seen;
  std::vector<NodeId> stack{e.node};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    if (!seen.insert(id).second) continue;
    const Node& n = st.node(id);
    if (n.kind == Kind::Split) {
      stack.push_back(n.lo.node);
      stack.push_back(n.hi.node);
    }
  }
  return seen.size();
}

bool same_labelling(Edge a, Edge b) {
  static const MapOp neq{new_op_id(), [](Label x, Label y) { return static_cast<Label>(x != y ? 1 : 0); }};
  Edge d = apply(neq, a, b);
  return measure_of(d, 1).is_zero();
}

}  // namespace ergcount

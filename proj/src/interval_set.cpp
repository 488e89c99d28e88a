#include "ergcount/interval_set.hpp"

#include <cmath>

#include <algorithm>
#include <map>

namespace ergcount {

IntervalSet IntervalSet::grid(const GridInterval& I) { return IntervalSet(place(full_edge(), I)); }

IntervalSet IntervalSet::parity_cells(uint64_t d, int parity) {
  if (d == 0) throw std::invalid_argument("parity_cells needs depth >= 1");
  Store& st = store();
  Edge pair = parity == 0 ? st.split(full_edge(), empty_edge()) : st.split(empty_edge(), full_edge());
  return IntervalSet(Edge{pair.node, d - 1});
}

bool IntervalSet::contains(const Scaled& x) const {
  if (x.sign() < 0 || x >= Scaled(1)) return false;
  return ergcount::eval(e_, x) != 0;
}

IntervalSet IntervalSet::translate(const Scaled& t, bool wrap, size_t cap) const {
  std::vector<std::pair<Scaled, Scaled>> out;
  Scaled one(1);
  for (const Interval& iv : components(cap)) {
    Scaled a = iv.a + t, b = iv.b + t;
    if (!wrap) {
      out.emplace_back(a, b);
      continue;
    }
    Int shift = a.floor();
    a -= Scaled(shift);
    b -= Scaled(shift);
    if (b <= one) {
      out.emplace_back(a, b);
    } else {
      out.emplace_back(a, one);
      out.emplace_back(Scaled(), b - one);
    }
  }
  return IntervalSet::of(std::move(out));
}

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b) { return a | b; }
IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b) { return a & b; }
IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b) { return a - b; }
IntervalSet complement_in(const IntervalSet& ambient, const IntervalSet& s) { return ambient - s; }
Scaled measure(const IntervalSet& s) { return s.measure(); }

IntervalSet scale_components(const IntervalSet& s, const Scaled& rho) {
  if (rho.sign() <= 0 || rho > Scaled(1)) throw std::invalid_argument("scale factor must lie in (0,1]");
  return IntervalSet(trim(s.edge(), {{1, TrimRule{rho, 1, 0}}}));
}

Int count_orbit_hits(const IntervalSet& s, const OrbitSpec& orbit, const Scaled& x, const Int& k_lo, const Int& k_hi) {
  return count_orbit_hits(s.edge(), orbit, x, k_lo, k_hi);
}

StepFunction::StepFunction(Edge map, std::vector<Scaled> values) : map_(map), values_(std::move(values)) {
  if (values_.empty()) values_.push_back(Scaled());
  if (!values_[0].is_zero()) throw std::invalid_argument("label 0 must carry value 0");
}

StepFunction StepFunction::from_levels(const std::vector<std::pair<Scaled, IntervalSet>>& levels) {
  auto less = [](const Scaled& a, const Scaled& b) { return a < b; };
  std::vector<std::pair<Scaled, IntervalSet>> sorted;
  for (auto& lv : levels) {
    if (lv.first.sign() <= 0) throw std::invalid_argument("step function levels must be positive");
    auto it = std::find_if(sorted.begin(), sorted.end(), [&](const auto& p) { return p.first == lv.first; });
    if (it == sorted.end()) sorted.push_back(lv);
    else it->second = it->second | lv.second;
  }
  std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) { return less(a.first, b.first); });
  std::vector<Scaled> values{Scaled()};
  Edge map = empty_edge();
  Scaled total;
  static const MapOp overlay{new_op_id(), [](Label a, Label b) { return b != 0 ? b : a; }, 0, 0, -1, -1};
  for (size_t i = 0; i < sorted.size(); ++i) {
    Label l = static_cast<Label>(i + 1);
    values.push_back(sorted[i].first);
    Edge lv = relabel(sorted[i].second.edge(), [l](Label x) { return x ? l : 0; });
    map = apply(overlay, map, lv);
    total += sorted[i].second.measure();
  }
  StepFunction f(map, values);
  if (f.support().measure() != total) throw std::invalid_argument("step function supports overlap");
  return f;
}

Scaled StepFunction::integral() const {
  Scaled s;
  for (auto& p : measures(map_)) s += value_of(p.first) * p.second;
  return s;
}

IntervalSet StepFunction::support() const {
  return IntervalSet(relabel(map_, [](Label x) { return x ? 1u : 0u; }));
}

IntervalSet StepFunction::level(const Scaled& v) const {
  std::vector<Label> hit;
  for (Label l = 1; l < values_.size(); ++l) {
    if (values_[l] == v) hit.push_back(l);
  }
  return IntervalSet(relabel(map_, [&hit](Label x) {
    return std::find(hit.begin(), hit.end(), x) != hit.end() ? 1u : 0u;
  }));
}

std::vector<Scaled> StepFunction::distinct_values() const {
  std::vector<Scaled> out;
  for (Label l : labels_of(map_)) {
    if (l == 0) continue;
    Scaled v = value_of(l);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

StepFunction StepFunction::scaled(const Scaled& c) const {
  if (c.sign() <= 0) throw std::invalid_argument("scale must be positive");
  std::vector<Scaled> v = values_;
  for (auto& x : v) x = x * c;
  return StepFunction(map_, v);
}

Int random_bits(std::mt19937_64& rng, uint64_t bits) {
  // most significant word first; the last word keeps only the leftover bits
  std::vector<uint64_t> words((bits + 63) / 64);
  for (auto& w : words) w = rng();
  Int out = 0;
  if (words.empty()) return out;
  uint64_t tail = bits - 64 * (words.size() - 1);
  if (tail < 64) words.back() &= (uint64_t(1) << tail) - 1;
  uint64_t last = words.back();
  words.pop_back();
  if (!words.empty()) mpz_import(out.get_mpz_t(), words.size(), 1, sizeof(uint64_t), 0, 0, words.data());
  out <<= static_cast<mp_bitcnt_t>(tail);
  out += Int(static_cast<unsigned long>(last));
  return out;
}

namespace {

double to_unit_double(const Scaled& s) {
  return std::ldexp(s.mant().get_d(), static_cast<int>(std::max<int64_t>(s.exp2(), -2000)));
}

}  // namespace

std::optional<Scaled> sample_grid_point(const IntervalSet& set, uint64_t grid, std::mt19937_64& rng) {
  Store& st = store();
  Edge e = set.edge();
  Scaled off;
  int64_t depth = 0;
  const int64_t g = static_cast<int64_t>(grid);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (true) {
    if (measure_of(e, 1).is_zero()) return std::nullopt;
    const Node& n = st.node(e.node);
    if (n.kind == Kind::Term) {
      int64_t rem = g - depth;
      if (rem >= 0) return off + Scaled(Rat(random_bits(rng, static_cast<uint64_t>(rem))), -g);
      if (off.is_zero() || off.dyadic_depth() <= g) return off;
      return std::nullopt;
    }
    if (e.skip > 0) {
      depth += static_cast<int64_t>(e.skip);
      off = off + Scaled(Rat(random_bits(rng, e.skip)), -depth);
      e = Edge{e.node, 0};
      continue;
    }
    if (n.kind == Kind::Split) {
      Scaled wl = measure_of(n.lo, 1), wh = measure_of(n.hi, 1);
      double p = to_unit_double(wl / (wl + wh));
      ++depth;
      if (u(rng) < p) {
        e = n.lo;
      } else {
        off = off + Scaled::pow2(-depth);
        e = n.hi;
      }
      continue;
    }
    // leaf: pick a labelled segment by length, then a lattice point inside it
    const auto& segs = st.segs(e.node);
    std::vector<std::pair<Scaled, Scaled>> pieces;
    std::vector<double> w;
    for (size_t i = 0; i < segs.size(); ++i) {
      if (segs[i].label == 0) continue;
      Scaled b = i + 1 < segs.size() ? segs[i + 1].start : Scaled(1);
      pieces.emplace_back(segs[i].start, b);
      w.push_back(to_unit_double(b - segs[i].start));
    }
    std::discrete_distribution<size_t> pick(w.begin(), w.end());
    auto [a, b] = pieces[pick(rng)];
    int64_t rem = g - depth;
    if (rem < 0) return std::nullopt;
    Int lo = a.times2exp(rem).ceil(), hi = b.times2exp(rem).ceil();
    if (hi <= lo) return std::nullopt;
    Int k = lo + random_bits(rng, bit_length(hi - lo) + 8) % (hi - lo);
    return off + Scaled(Rat(k), -g);
  }
}

}  // namespace ergcount

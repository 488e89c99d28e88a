#pragma once

#include "ergcount/dyset.hpp"
#include "ergcount/orbit.hpp"

#include <optional>
#include <random>
#include <vector>

namespace ergcount {

// Subset of [0,1) backed by the dyadic pattern store.  Values are immutable
// handles; copying is free.
class IntervalSet {
 public:
  IntervalSet() = default;
  explicit IntervalSet(Edge e) : e_(e) {}

  static IntervalSet empty() { return IntervalSet(); }
  static IntervalSet unit() { return IntervalSet(full_edge()); }
  static IntervalSet of(std::vector<std::pair<Scaled, Scaled>> ivs) { return IntervalSet(from_intervals(std::move(ivs))); }
  static IntervalSet grid(const GridInterval& I);
  // cells [i 2^-d, (i+1) 2^-d) of [0,1) with i even (parity 0) or odd (parity 1)
  static IntervalSet parity_cells(uint64_t d, int parity);

  Edge edge() const { return e_; }
  Scaled measure() const { return measure_of(e_, 1); }
  bool contains(const Scaled& x) const;
  bool is_empty() const { return measure().is_zero(); }

  IntervalSet operator|(const IntervalSet& o) const { return IntervalSet(apply(SetOp::Union, e_, o.e_)); }
  IntervalSet operator&(const IntervalSet& o) const { return IntervalSet(apply(SetOp::Intersect, e_, o.e_)); }
  IntervalSet operator-(const IntervalSet& o) const { return IntervalSet(apply(SetOp::Diff, e_, o.e_)); }
  IntervalSet operator^(const IntervalSet& o) const { return IntervalSet(apply(SetOp::Xor, e_, o.e_)); }

  // equality of sets up to measure zero, which for these sets is equality
  bool equals(const IntervalSet& o) const { return (*this ^ o).is_empty(); }
  bool subset_of(const IntervalSet& o) const { return (*this - o).is_empty(); }
  bool disjoint_from(const IntervalSet& o) const { return (*this & o).is_empty(); }

  std::vector<Interval> components(size_t cap = 1 << 20) const { return ergcount::components(e_, cap); }
  // shifts by t (mod 1 when wrap); goes through explicit components
  IntervalSet translate(const Scaled& t, bool wrap, size_t cap = 1 << 16) const;

 private:
  Edge e_ = empty_edge();
};

IntervalSet set_union(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_intersection(const IntervalSet& a, const IntervalSet& b);
IntervalSet set_difference(const IntervalSet& a, const IntervalSet& b);
IntervalSet complement_in(const IntervalSet& ambient, const IntervalSet& s);
Scaled measure(const IntervalSet& s);
// left rho-fraction of every maximal block; measure scales by exactly rho
IntervalSet scale_components(const IntervalSet& s, const Scaled& rho);
// random point of the 2^-grid lattice inside s, roughly uniform by measure;
// nullopt when the descent lands on a piece holding no lattice point
std::optional<Scaled> sample_grid_point(const IntervalSet& s, uint64_t grid, std::mt19937_64& rng);

Int random_bits(std::mt19937_64& rng, uint64_t bits);

Int count_orbit_hits(const IntervalSet& s, const OrbitSpec& orbit, const Scaled& x, const Int& k_lo, const Int& k_hi);

// Finite-valued step function on [0,1).  Label i > 0 carries values()[i].
class StepFunction {
 public:
  StepFunction() : values_{Scaled()} {}
  StepFunction(Edge map, std::vector<Scaled> values);

  // supports must be pairwise disjoint; values > 0
  static StepFunction from_levels(const std::vector<std::pair<Scaled, IntervalSet>>& levels);

  Edge map() const { return map_; }
  const std::vector<Scaled>& values() const { return values_; }
  Scaled value_of(Label l) const { return l < values_.size() ? values_[l] : Scaled(); }

  Scaled eval(const Scaled& x) const { return value_of(ergcount::eval(map_, x)); }
  Scaled integral() const;
  IntervalSet support() const;
  IntervalSet level(const Scaled& v) const;
  std::vector<Scaled> distinct_values() const;
  StepFunction scaled(const Scaled& c) const;

 private:
  Edge map_ = empty_edge();
  std::vector<Scaled> values_;
};

}  // namespace ergcount

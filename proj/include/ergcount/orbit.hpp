#pragma once

#include "ergcount/dyset.hpp"

#include <functional>

namespace ergcount {

// T(x) = x + 2^-J, on the line or mod 1
struct OrbitSpec {
  uint64_t J = 1;
  bool wrap = false;
};

// Closed-form orbit hit counting.  Orbit points x + k 2^-J fall into 2^-J
// cells at a common offset theta, so counting reduces to prefix counts over
// cell indices, answered by descending the pattern once.
class OrbitCounter {
 public:
  OrbitCounter(Edge root, std::function<bool(Label)> target, uint64_t J, const Scaled& theta);

  // hits among cells [0, P), 0 <= P <= 2^J
  Scaled prefix(const Int& P);
  // hits among all 2^J cells
  Scaled total();

 private:
  Scaled prefix(const Edge& e, uint64_t r, const Int& P);
  Scaled full(const Edge& e, uint64_t r);
  Scaled leaf_count(NodeId id, uint64_t r, const Int& P);
  bool hit_at(NodeId id, const Scaled& y);
  const Scaled& target_measure(NodeId id);

  Edge root_;
  std::function<bool(Label)> target_;
  uint64_t J_;
  Scaled theta_;
  struct Key {
    NodeId n;
    uint64_t r;
    bool operator==(const Key& o) const { return n == o.n && r == o.r; }
  };
  struct KeyHash {
    size_t operator()(const Key& k) const { return std::hash<uint64_t>()(k.r * 0x9e3779b97f4a7c15ULL ^ k.n); }
  };
  std::unordered_map<Key, Scaled, KeyHash> full_memo_;
  std::unordered_map<NodeId, Scaled> tmeasure_;
};

// #{k in [k_lo, k_hi) : label at x + k 2^-J (mod 1 when wrap) satisfies target}
Int count_orbit_hits(Edge e, const std::function<bool(Label)>& target, const OrbitSpec& orbit, const Scaled& x,
                     const Int& k_lo, const Int& k_hi);

inline Int count_orbit_hits(Edge set, const OrbitSpec& orbit, const Scaled& x, const Int& k_lo, const Int& k_hi) {
  return count_orbit_hits(set, [](Label l) { return l != 0; }, orbit, x, k_lo, k_hi);
}

// direct loop, for tests
Int brute_orbit_hits(Edge e, const std::function<bool(Label)>& target, const OrbitSpec& orbit, const Scaled& x,
                     const Int& k_lo, const Int& k_hi);

}  // namespace ergcount

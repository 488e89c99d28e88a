#pragma once

// Labelled subsets of [0,1) stored as a hash-consed dyadic decision diagram.
//
// A node describes a labelling of one cell (rescaled to [0,1)).  An Edge
// (node, skip) describes a cell split into 2^skip equal copies of that node,
// which is how periodic families are carried without enumeration.  Splits
// halve the cell; leaves hold finitely many rational cut points, which is
// where non-dyadic endpoints (the 99/100 trims) live.  Label 0 means
// "outside"; plain sets use labels {0,1}.
//
// Not thread safe: one global store per process.

#include "ergcount/scaled.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ergcount {

using NodeId = uint32_t;
using Label = uint32_t;

constexpr NodeId kEmptyNode = 0;
constexpr NodeId kFullNode = 1;
constexpr uint64_t kNotDyadic = UINT64_MAX;

struct Edge {
  NodeId node = kEmptyNode;
  uint64_t skip = 0;
  friend bool operator==(const Edge& a, const Edge& b) { return a.node == b.node && a.skip == b.skip; }
  friend bool operator!=(const Edge& a, const Edge& b) { return !(a == b); }
};

inline Edge empty_edge() { return Edge{kEmptyNode, 0}; }
inline Edge full_edge() { return Edge{kFullNode, 0}; }

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Kind : uint8_t { Term, Split, Leaf };

// leaf segment [start, next start) carries label
struct Seg {
  Scaled start;
  Label label = 0;
};

using LabelMeasure = std::vector<std::pair<Label, Scaled>>;

struct Node {
  Kind kind = Kind::Term;
  Label label = 0;
  Edge lo, hi;
  uint32_t leaf = 0;
  uint64_t dydepth = 0;
};

class Store {
 public:
  static Store& get();

  Edge term(Label l);
  Edge split(Edge lo, Edge hi);
  Edge leaf(std::vector<Seg> segs);

  const Node& node(NodeId id) const { return nodes_[id]; }
  const std::vector<Seg>& segs(NodeId id) const { return leaves_[nodes_[id].leaf]; }
  bool is_term(const Edge& e) const { return nodes_[e.node].kind == Kind::Term; }

  std::pair<Edge, Edge> halves(const Edge& e);
  // valid until the next call; the memo is dropped when it grows past a byte cap
  const LabelMeasure& measures(NodeId id);

  size_t size() const { return nodes_.size(); }
  void set_node_budget(size_t n) { budget_ = n; }
  size_t node_budget() const { return budget_; }
  // drops operation memo tables; nodes stay valid
  void clear_caches();

  // apply memo is owned here so repeated set algebra shares work
  struct ApplyKey {
    uint32_t op;
    NodeId a, b;
    uint64_t sa, sb;
    friend bool operator==(const ApplyKey& x, const ApplyKey& y) {
      return x.op == y.op && x.a == y.a && x.b == y.b && x.sa == y.sa && x.sb == y.sb;
    }
  };
  struct ApplyHash {
    size_t operator()(const ApplyKey& k) const;
  };
  std::unordered_map<ApplyKey, Edge, ApplyHash>& apply_memo() { return apply_memo_; }

 private:
  Store();
  NodeId push(Node n);

  struct SplitKey {
    NodeId lo, hi;
    uint64_t slo, shi;
    friend bool operator==(const SplitKey& x, const SplitKey& y) {
      return x.lo == y.lo && x.hi == y.hi && x.slo == y.slo && x.shi == y.shi;
    }
  };
  struct SplitHash {
    size_t operator()(const SplitKey& k) const;
  };

  std::vector<Node> nodes_;
  std::vector<std::vector<Seg>> leaves_;
  std::unordered_map<Label, NodeId> terms_;
  std::unordered_map<SplitKey, NodeId, SplitHash> splits_;
  std::unordered_map<size_t, std::vector<NodeId>> leaf_index_;
  const LabelMeasure& measures_rec(NodeId id);
  std::unordered_map<NodeId, LabelMeasure> measures_;
  size_t measure_bytes_ = 0;
  std::unordered_map<NodeId, std::pair<Edge, Edge>> leaf_halves_;
  std::unordered_map<ApplyKey, Edge, ApplyHash> apply_memo_;
  size_t budget_ = 60'000'000;
};

inline Store& store() { return Store::get(); }

// Binary label combination.  Identity labels let apply skip whole subtrees.
struct MapOp {
  uint32_t id = 0;
  std::function<Label(Label, Label)> f;
  long left_identity = -1;   // f(x, l) == l for all l
  long right_identity = -1;  // f(l, x) == l for all l
  long left_absorb = -1;     // f(x, l) == f(x, 0) for all l
  long right_absorb = -1;
};

// fresh operation id for memoisation; ids 1..15 are reserved for set ops
uint32_t new_op_id();

enum class SetOp { Union, Intersect, Diff, Xor };
const MapOp& set_op(SetOp op);

Edge apply(const MapOp& op, Edge a, Edge b);
inline Edge apply(SetOp op, Edge a, Edge b) { return apply(set_op(op), a, b); }

Edge relabel(Edge e, const std::function<Label(Label)>& f);

// Rule for trim: the left rho-fraction of every maximal block with label
// `from` becomes label `inside`, the rest becomes `outside`.
struct TrimRule {
  Scaled rho;
  Label inside = 1;
  Label outside = 0;
};
Edge trim(Edge e, const std::unordered_map<Label, TrimRule>& rules);

// Replaces every cell at relative depth r (an "atom") by the child attached to
// the atom's label.  The pattern must be constant on atoms.
Edge substitute(Edge pattern, uint64_t r, const std::unordered_map<Label, Edge>& children);

// Embeds a labelling of [0,1) into grid interval I; outside is label 0.
Edge place(Edge e, const GridInterval& I);

Edge from_intervals(std::vector<std::pair<Scaled, Scaled>> ivs, Label label = 1);
Edge from_segments(std::vector<Seg> segs);

Label eval(Edge e, const Scaled& y);

// label at y plus y's relative position inside the maximal block (term cell or
// leaf segment) that holds it
struct Located {
  Label label = 0;
  Scaled pos;
};
Located locate(Edge e, const Scaled& y);

Scaled measure_of(Edge e, Label l);
Scaled measure_where(Edge e, const std::function<bool(Label)>& pred);
LabelMeasure measures(Edge e);
std::vector<Label> labels_of(Edge e);

struct Interval {
  Scaled a, b;
  Label label = 0;
};
// maximal intervals with nonzero label, merged; throws BudgetError past cap
std::vector<Interval> components(Edge e, size_t cap);
// leftmost pieces only, at most n of them (the last may be cut short of a merge)
std::vector<Interval> first_components(Edge e, size_t n);

// number of distinct nodes reachable from e
size_t dag_size(Edge e);

bool same_labelling(Edge a, Edge b);

}  // namespace ergcount

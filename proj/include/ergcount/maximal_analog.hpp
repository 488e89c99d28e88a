#pragma once
// The continuous operator A, the one-sided Hardy-Littlewood maximal function H
// and the discrete sequence operator, all evaluated exactly.  Functions live on
// [0,1) and are taken as 0 elsewhere on the line.

#include "ergcount/interval_set.hpp"
#include "ergcount/report.hpp"

#include <map>
#include <random>
#include <vector>

namespace ergcount {

struct Piece {
  Rat a, b;  // [a, b)
  Rat v;     // |f| there, > 0
};
// sorted, disjoint pieces
using Pieces = std::vector<Piece>;

Pieces pieces_of(const StepFunction& f, size_t cap = 1 << 16);
Pieces indicator_pieces(const IntervalSet& B, size_t cap = 1 << 16);

struct BreakpointProfile {
  std::vector<std::pair<Rat, Rat>> breakpoints;  // (lambda, m(lambda))
  Rat value;
  Rat argmax;  // lambda attaining the value; 0 when the value is 0
};

enum class Direction {
  Lag,     // m{0<y<x : f(x-y)/y > lambda}
  Mirror,  // m{0<y<x : f(y)/(x-y) > lambda}
};

// m{0<y<x : |f(x-y)|/y > lambda}
Rat A_measure(const Pieces& f, const Rat& x, const Rat& lambda, Direction d = Direction::Lag);
BreakpointProfile A_op(const Pieces& f, const Rat& x, Direction d = Direction::Lag);
Rat H_one_sided(const Pieces& f, const Rat& x);

// a_i, finitely supported, nonnegative
using Sequence = std::map<long, Rat>;
Rat seq_counting_sup(const Sequence& a, long i, long K);
Rat seq_counting_sup_brute(const Sequence& a, long i, long K);

VerificationReport verify_indicator_equality(const IntervalSet& B, const std::vector<Rat>& xs);

struct AnalogPolicy {
  uint64_t seed = 1;
  int sets = 100;
  int points = 100;
  int sequences = 500;
  int grid_bits = 12;  // weak-type grid has 2^grid_bits points
  int weak_sets = 8;
};

// random union of grid intervals at depth <= max_depth
IntervalSet random_dyadic_set(std::mt19937_64& rng, int max_depth = 6, int pieces = 4);

// the whole suite: indicator identity, sequence oracle, weak-type grid, reflection
VerificationReport analog_suite(const AnalogPolicy& policy = {});

}  // namespace ergcount

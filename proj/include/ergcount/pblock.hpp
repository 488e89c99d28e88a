#pragma once
// p-blocks: level-2^p systems with gain M_p, their statistics and the
// blow-up certificate.  Every quantity involving log2 is carried as a
// rational bracket and inequalities use whichever end is conservative.

#include "ergcount/level_systems.hpp"

#include <map>

namespace ergcount {

// lo <= x <= hi; when !exact the upper end is strict
struct Bracket {
  Rat lo, hi;
  bool exact = false;

  static Bracket point(const Rat& v) { return Bracket{v, v, true}; }
  // floor(x) when the bracket decides it
  std::optional<Int> floor() const;
  Bracket operator+(const Bracket& o) const;
  Bracket operator*(const Bracket& o) const;  // both nonnegative
  json to_json() const;
};

// log2(q), q > 0, to 2^-bits
Bracket log2_bracket(const Rat& q, unsigned bits = 24);
Bracket log2sq_bracket(const Int& p, unsigned bits = 24);

// floor(p + log2 p + log2(log2^2 p)), refining the brackets until decided
int m_p(const Int& p);

struct Stats {
  Rat u, v0, v;
};
Stats exact_stats(int M);

// q v / (q eps)^2
Rat chebyshev_bound(const Int& q, const Rat& v, const Rat& eps);

// distribution of X_1 + ... + X_k for independent (M-0.99)-distributed X_h,
// in units of 0.99 * 2^{1-M}
std::map<uint64_t, Rat> iid_sum_distribution(int M, int k);

// least power of two p with 64 log2^2(p) / p < 1/100
Int least_small_p();

struct PBlockParams {
  int p = 3;
  bool relaxed = true;
  // filled by resolve(): M_p (raised to 4 when the construction needs it), k = 2^p, K_S
  int M = 0;
  int k = 0;
  Int Ks;
  uint64_t seed = 1;
  size_t witnesses = 8;
  size_t max_shapes = 200000;

  void resolve();
  json to_json() const;
  static PBlockParams from_json(const json& j);
};

struct PBlock {
  PBlockParams params;
  LevelSystem sys;
  Scaled integral;       // of f_p
  Int E_p;               // K_e of the level system
  Stats stats;
  Bracket log2sq;
  Rat threshold;         // stored upper bracket of 1/(4 log2^2 p)
  Scaled lambda_measure;  // measure of {sum_h X_h > threshold}
};

// size of the honest construction, without building anything
json honest_estimate(int p);

PBlock build_pblock(const PBlockParams& params);
VerificationReport verify_pblock(const PBlock& b);

struct Certificate {
  Rat lambda_lo;  // 1 / (8 hi(log2^2 p) integral)
  Rat lambda_hi;
  Scaled measure;  // of Lambda_p
  size_t sampled = 0, verified = 0;
  json witnesses = json::array();
};
Certificate blowup_certificate(const PBlock& b, VerificationReport& rep);

VerificationReport statistics_suite(const std::vector<int>& ps, unsigned max_k = 16);

}  // namespace ergcount

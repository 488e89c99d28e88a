#pragma once
// The base construction: a partition B_1..B_M of a grid interval I, the good
// sets Gamma_l, and a one-valued step function f whose counting ratio sits
// near 2^{1-l} on Gamma_l for n between 2^{N_l} and 2^{nu(N_l)}.
//
// Everything is first built on I rescaled to [0,1) and then placed, so the
// relative patterns can be reused by the level construction.

#include "ergcount/counting.hpp"
#include "ergcount/report.hpp"

#include <map>
#include <optional>
#include <vector>

namespace ergcount {

class LifeFunction {
 public:
  enum class Kind { Affine, Tabulated };

  static LifeFunction affine(const Int& c);
  static LifeFunction tabulated(std::map<Int, Int> table);
  static LifeFunction successor() { return affine(1); }

  Kind kind() const { return kind_; }
  const Int& offset() const { return c_; }
  const std::map<Int, Int>& table() const { return table_; }

  // throws std::out_of_range for an N missing from a table
  Int operator()(const Int& N) const;

  json to_json() const;
  static LifeFunction from_json(const json& j);

 private:
  Kind kind_ = Kind::Affine;
  Int c_ = 1;
  std::map<Int, Int> table_;
};

struct BaseParams {
  int M = 4;
  LifeFunction nu = LifeFunction::successor();
  Int N1 = 11;
  Int S = 0;
  GridInterval I{0, 0};
  std::optional<uint64_t> J;  // defaults to J_0
  Scaled ratio_constant = Scaled(Rat(99, 100));

  // throws std::invalid_argument on a violated hypothesis
  void validate() const;
  json to_json() const;
  static BaseParams from_json(const json& j);
};

std::vector<Int> schedule(const LifeFunction& nu, const Int& N1, int M);
uint64_t min_J0(uint64_t R, int M, const LifeFunction& nu, const Int& NM);

struct BaseSystem {
  BaseParams params;
  std::vector<Int> N;    // N_1..N_M at index 0..M-1
  std::vector<Int> nuN;  // nu(N_l)
  uint64_t J0 = 0;
  uint64_t J = 0;
  Scaled h0, h;  // powers of two
  std::vector<IntervalSet> B;      // B_1..B_M at index 0..M-1
  std::vector<IntervalSet> Gamma;  // Gamma_1..Gamma_M
  StepFunction f;

  // the same objects on I rescaled to [0,1)
  std::vector<IntervalSet> B_rel, Gamma_rel;
  IntervalSet support_rel;
  // label l on B_l
  Edge partition_rel = empty_edge();

  OrbitSpec orbit() const { return OrbitSpec{J, true}; }
  const IntervalSet& B_at(int l) const { return B.at(static_cast<size_t>(l - 1)); }
  const IntervalSet& Gamma_at(int l) const { return Gamma.at(static_cast<size_t>(l - 1)); }
};

// Depth bookkeeping of the relative construction, all in bits below I.
struct BaseDepths {
  uint64_t D = 0;              // J_0 - R
  std::vector<uint64_t> cell;  // depth of the l-th cascade grid, l = 1..M at 0..M-1
  std::vector<uint64_t> erode; // prefix length t_l: keep [0, 1 - 2^-t) of each I'_l cell
  uint64_t block = 0;          // depth of one h-block
};

BaseDepths base_depths(const BaseParams& p, const std::vector<Int>& N, uint64_t J0);

std::vector<IntervalSet> build_B_cascade(const BaseParams& p, uint64_t J0);
std::vector<IntervalSet> build_gammas(const std::vector<IntervalSet>& B, const BaseParams& p, uint64_t J0);
StepFunction build_f(const BaseParams& p, const IntervalSet& B1, uint64_t J);

BaseSystem build_base(const BaseParams& p);

// Support lies in the cells with index = S mod 2^e, e = M + 10 + J - J_0 >= M.
// Those are residue-S cells mod 2^M, and the check stays shallow however large
// J - J_0 is, unlike intersecting with the mod 2^M pattern directly.
bool support_on_residue(const BaseSystem& sys);

// integral of f from the block structure: B_1 is a union of blocks and each
// block carries one support cell, so no measure mixes 2^-J with coarse cells
Scaled f_integral_blocks(const BaseSystem& sys);

// I'_l: the maximal cells of B_1 u ... u B_l
IntervalSet component_cover(const BaseSystem& sys, int l);

struct SamplingPolicy {
  size_t endpoint_cap = 64;
  size_t random_points = 100;
  uint64_t seed = 1;
  size_t window_samples = 8;
};

VerificationReport verify_base(const BaseSystem& sys, const SamplingPolicy& policy = {});

// N_n(f)(x)/n > bound at one point
struct RatioSample {
  Scaled x, n, ratio, bound;
  bool pass = false;
};
RatioSample check_ratio(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n,
                        const Scaled& bound);

json base_to_json(const BaseSystem& sys);

}  // namespace ergcount

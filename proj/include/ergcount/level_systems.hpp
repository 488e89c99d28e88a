#pragma once
// Level-k systems.  A level-k system on an interval is a "mother" base system
// whose atoms (cells of its J_0 grid) each carry a level-(k-1) child.  Children
// only depend on (level, startup, relative J), so they are built once per
// shape and shared; the whole system is a DAG of shapes.
//
// The variables X_1..X_k are encoded jointly: digit h of a code in base M+1
// is the level index l of X_h (0 meaning X_h = 0, l meaning 0.99 * 2^{1-l}).

#include "ergcount/base_system.hpp"

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace ergcount {

class LifeTower {
 public:
  LifeTower() = default;
  LifeTower(int M, int k_max);
  int M() const { return M_; }
  int k_max() const { return static_cast<int>(c_.size()); }
  // nu_k(N) = N + c_k
  const Int& c(int k) const { return c_.at(static_cast<size_t>(k - 1)); }
  LifeFunction nu(int k) const { return LifeFunction::affine(c(k)); }

 private:
  int M_ = 4;
  std::vector<Int> c_;
};

LifeTower life_tower(int M, int k_max);
// direct recursive definition, for cross-checking the closed form
Int nu_compositional(int M, int k, const Int& N);
// closed form, affine recurrence and recursive definition agree on a grid
VerificationReport life_tower_suite(const std::vector<int>& Ms, int k_max, long N_lo, long N_hi);

struct Shape;
using ShapePtr = std::shared_ptr<const Shape>;

struct Shape {
  int k = 1;
  int M = 4;
  Int Ks, Ke;
  uint64_t J = 0;   // grid exponent relative to the shape's own interval
  std::shared_ptr<const BaseSystem> base;  // level 1: the base; above: the mother
  uint64_t D0 = 0;  // atom depth (the mother's J_0)
  Edge class_map = empty_edge();  // label c+1 on atoms inside Gamma_{c,0}, 1 elsewhere
  std::vector<ShapePtr> child;    // by class c = 0..M
  std::vector<Scaled> class_measure;  // by class
  std::vector<Scaled> rho;  // trimming fraction by class (index 0 unused)
  Edge joint_l1 = empty_edge();  // level 1: label l on the trimmed Gamma_l

  Scaled f_integral;
  // marginal[h-1][l] = measure of {X_h = value of level l}
  std::vector<std::vector<Scaled>> marginal;
  // distribution of sum_h X_h in units of 0.99 * 2^{1-M}
  std::map<uint64_t, Scaled> sum_dist;

  // flattened forms, present only when requested and small
  Edge f_flat = empty_edge();    // label e+1 carries value 2^e
  Edge joint_flat = empty_edge();
  bool has_f_flat = false, has_joint_flat = false;
};

struct LevelParams {
  int M = 4;
  int k = 1;
  Int Ks = 11;
  GridInterval I0{0, 0};
  std::optional<uint64_t> J;
  // flatten f when the system has at most this many shapes; joint map only for k <= 2
  size_t flatten_shapes = 64;
  size_t max_shapes = 200000;
  Scaled ratio_constant = Scaled(Rat(99, 100));

  void validate() const;
  json to_json() const;
  static LevelParams from_json(const json& j);
};

struct LevelSystem {
  LevelParams params;
  LifeTower tower;
  ShapePtr root;
  uint64_t J = 0;  // absolute
  Int Ks, Ke;
  size_t shape_count = 0;
  size_t base_count = 0;
  // absolute flattened objects (when available)
  std::optional<StepFunction> f;
  std::vector<StepFunction> X;  // X_1..X_k when the joint map is flat
  Edge joint = empty_edge();

  OrbitSpec orbit() const { return OrbitSpec{J, true}; }
  Scaled integral() const;  // exact, from the shape recursion
};

struct SizeEstimate {
  Int shapes;
  Int J_bits;
  Int K_e;
};
SizeEstimate estimate_level(const LevelParams& p);
// J needed by a level-k shape with startup s, relative to its interval
Int level_J_need(const LifeTower& tower, int k, const Int& s);

LevelSystem build_level1(const GridInterval& I0, const Int& Ks, int M, std::optional<uint64_t> J = std::nullopt);
LevelSystem build_level_k(const LevelParams& p);

// what the construction says about one point
struct PathTerm {
  const BaseSystem* base = nullptr;
  Scaled x_rel;     // point relative to the base's interval
  uint64_t J_rel = 0;
};
struct PointInfo {
  std::vector<int> level;  // l index of X_1..X_k
  Scaled sum;              // sum_h X_h(x)
  Int wa, wb;              // witness range [2^wa, 2^wb]
  std::vector<PathTerm> path;  // the base systems containing x, outermost first
};
PointInfo point_info(const LevelSystem& sys, const Scaled& x);

// value of X for level index l
Scaled x_value(int M, int l);

// N_n restricted to the base systems on x's path; a lower bound for N_n(f)(x)
Int path_count(const PointInfo& info, const Scaled& n);

// exact measure of {X_h = l_h for all h}, by the shape recursion
Scaled joint_probability(const Shape& s, const std::vector<int>& levels);

VerificationReport verify_level_k(const LevelSystem& sys, const SamplingPolicy& policy = {});

json level_to_json(const LevelSystem& sys);

}  // namespace ergcount

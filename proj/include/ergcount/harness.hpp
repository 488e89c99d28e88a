#pragma once
// Runs, persistence and pictures: everything the command line tool needs, kept
// in the library so tests and the Python module can drive it too.

#include "ergcount/base_system.hpp"
#include "ergcount/level_systems.hpp"
#include "ergcount/maximal_analog.hpp"
#include "ergcount/pblock.hpp"
#include "ergcount/serialize.hpp"

#include <optional>
#include <string>

namespace ergcount {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---- persistence --------------------------------------------------------

json save_base(const BaseSystem& sys);
// checks the stored families (disjoint B, Gamma_l inside B_l, f positive and
// carried by B_1) and that they are what the stored parameters build
BaseSystem load_base(const json& doc);

json save_level(const LevelSystem& sys);
LevelSystem load_level(const json& doc);

// ---- rendering ----------------------------------------------------------

enum class RenderFormat { Text, Svg };

struct RenderOptions {
  RenderFormat format = RenderFormat::Text;
  int width = 64;  // columns (text) or pixels / 4 (svg)
};

// rows B_M .. B_1 over I (B_M dashed, B_{M-1} dotted, the rest solid) and a
// blow-up of the first cell of B_1 with the support of f marked
std::string render_layout(const BaseSystem& sys, const RenderOptions& opt = {});

// ---- oracle -------------------------------------------------------------

struct OraclePolicy {
  uint64_t seed = 1;
  int instances = 1000;
  int max_J = 20;
  long max_work = 1000000;  // n * max f, the brute force range
};

VerificationReport oracle_suite(const OraclePolicy& policy = {});

// ---- runs ---------------------------------------------------------------

struct Budgets {
  size_t max_shapes = 200000;
  uint64_t max_J_bits = 1u << 20;
  long oracle_cap = 1000000;
};

struct RunConfig {
  std::string command;  // base levelk pblock blowup analog oracle-suite render
  uint64_t seed = 1;
  bool estimate_only = false;
  std::string negative_control;  // "", "shift_support" or "halve_f" (base only)
  Budgets budgets;
  SamplingPolicy sampling;
  json params = json::object();  // module parameters, see README

  static RunConfig from_json(const json& j);
  json to_json() const;
};

struct RunResult {
  VerificationReport report;
  // the picture for render, the size estimate for --estimate-only
  std::optional<std::string> artifact;
  json estimate;
};

// deterministic in the config
RunResult run(const RunConfig& cfg);

// the report as a versioned document; no timestamps, so equal configs give equal bytes
json report_document(const RunConfig& cfg, const VerificationReport& rep);

}  // namespace ergcount

#pragma once

#include "ergcount/scaled.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace ergcount {

using json = nlohmann::json;

// "num/den", or "num/den*2^e" once the power of two would make the plain
// string unreasonably long
std::string scaled_str(const Scaled& s);
// for witnesses: exact when short, else the leading hex digits and the bit length
std::string scaled_brief(const Scaled& s);
Scaled parse_scaled(const std::string& s);

enum class ClaimKind { Exact, Sampled };

struct Claim {
  std::string id;
  std::string anchor;
  ClaimKind kind = ClaimKind::Exact;
  bool pass = false;
  std::string relation;
  Scaled lhs, rhs;
  json witnesses = json::object();
};

class VerificationReport {
 public:
  explicit VerificationReport(std::string subject = {}) : subject_(std::move(subject)) {}

  // evaluates lhs <relation> rhs exactly and records it
  bool check(const std::string& id, const std::string& anchor, ClaimKind kind, const Scaled& lhs,
             const std::string& relation, const Scaled& rhs, json witnesses = json::object());
  bool check_true(const std::string& id, const std::string& anchor, ClaimKind kind, bool ok,
                  json witnesses = json::object());

  void merge(const VerificationReport& other, const std::string& prefix = {});

  const std::vector<Claim>& claims() const { return claims_; }
  json& meta() { return meta_; }
  const json& meta() const { return meta_; }
  const std::string& subject() const { return subject_; }
  bool all_pass() const;
  size_t failures() const;
  size_t count(ClaimKind k) const;

  json to_json() const;

 private:
  std::string subject_;
  std::vector<Claim> claims_;
  json meta_ = json::object();
};

bool compare(const Scaled& a, const std::string& relation, const Scaled& b);

}  // namespace ergcount

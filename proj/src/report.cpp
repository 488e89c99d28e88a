#include "ergcount/report.hpp"

#include <stdexcept>

namespace ergcount {

std::string scaled_str(const Scaled& s) {
  if (s.exp2() > -4096 && s.exp2() < 4096) return rat_str(s.to_rat());
  return rat_str(s.mant()) + "*2^" + std::to_string(s.exp2());
}

std::string scaled_brief(const Scaled& s) {
  const Rat& m = s.mant();
  size_t bits = mpz_sizeinbase(m.get_num_mpz_t(), 2) + mpz_sizeinbase(m.get_den_mpz_t(), 2);
  if (bits <= 4096) return scaled_str(s);
  std::string hex = Int(m.get_num()).get_str(16);
  return "0x" + hex.substr(0, 32) + "..(" + std::to_string(mpz_sizeinbase(m.get_num_mpz_t(), 2)) + " bits)/" +
         Int(m.get_den()).get_str() + "*2^" + std::to_string(s.exp2());
}

Scaled parse_scaled(const std::string& s) {
  auto star = s.find("*2^");
  if (star == std::string::npos) return Scaled(parse_rat(s));
  return Scaled(parse_rat(s.substr(0, star)), std::stoll(s.substr(star + 3)));
}

bool compare(const Scaled& a, const std::string& rel, const Scaled& b) {
  int c = cmp(a, b);
  if (rel == "==") return c == 0;
  if (rel == "<") return c < 0;
  if (rel == "<=") return c <= 0;
  if (rel == ">") return c > 0;
  if (rel == ">=") return c >= 0;
  if (rel == "!=") return c != 0;
  throw std::invalid_argument("unknown relation " + rel);
}

bool VerificationReport::check(const std::string& id, const std::string& anchor, ClaimKind kind, const Scaled& lhs,
                               const std::string& relation, const Scaled& rhs, json witnesses) {
  Claim c;
  c.id = id;
  c.anchor = anchor;
  c.kind = kind;
  c.relation = relation;
  c.lhs = lhs;
  c.rhs = rhs;
  c.pass = compare(lhs, relation, rhs);
  c.witnesses = std::move(witnesses);
  claims_.push_back(std::move(c));
  return claims_.back().pass;
}

bool VerificationReport::check_true(const std::string& id, const std::string& anchor, ClaimKind kind, bool ok,
                                    json witnesses) {
  return check(id, anchor, kind, Scaled(ok ? 1 : 0), "==", Scaled(1), std::move(witnesses));
}

void VerificationReport::merge(const VerificationReport& other, const std::string& prefix) {
  for (Claim c : other.claims_) {
    c.id = prefix + c.id;
    claims_.push_back(std::move(c));
  }
}

bool VerificationReport::all_pass() const { return failures() == 0; }

size_t VerificationReport::failures() const {
  size_t n = 0;
  for (auto& c : claims_) n += !c.pass;
  return n;
}

size_t VerificationReport::count(ClaimKind k) const {
  size_t n = 0;
  for (auto& c : claims_) n += c.kind == k;
  return n;
}

json VerificationReport::to_json() const {
  json out;
  out["subject"] = subject_;
  out["meta"] = meta_;
  json arr = json::array();
  for (auto& c : claims_) {
    json j;
    j["claim_id"] = c.id;
    j["anchor"] = c.anchor;
    j["kind"] = c.kind == ClaimKind::Exact ? "exact" : "sampled";
    j["status"] = c.pass ? "pass" : "fail";
    j["relation"] = c.relation;
    j["lhs"] = scaled_str(c.lhs);
    j["rhs"] = scaled_str(c.rhs);
    if (!c.witnesses.empty()) j["witnesses"] = c.witnesses;
    arr.push_back(std::move(j));
  }
  out["claims"] = std::move(arr);
  out["summary"] = {{"claims", claims_.size()},
                    {"failures", failures()},
                    {"exact", count(ClaimKind::Exact)},
                    {"sampled", count(ClaimKind::Sampled)}};
  return out;
}

}  // namespace ergcount

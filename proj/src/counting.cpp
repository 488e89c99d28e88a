#include "ergcount/counting.hpp"

namespace ergcount {

Int count_N(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n) {
  if (n.sign() <= 0) throw std::invalid_argument("n must be positive");
  Int total(0);
  const auto& vals = f.values();
  for (Label l = 1; l < vals.size(); ++l) {
    if (vals[l].sign() <= 0) continue;
    // k < n v  <=>  k < ceil(n v)
    Int k_hi = (n * vals[l]).ceil();
    if (k_hi <= 1) continue;
    total += count_orbit_hits(f.map(), [l](Label y) { return y == l; }, orbit, x, Int(1), k_hi);
  }
  return total;
}

Scaled ratio(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n) {
  return Scaled(count_N(f, orbit, x, n)) / n;
}

SupResult sup_ratio(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const std::vector<Scaled>& ns) {
  if (ns.empty()) throw std::invalid_argument("sup_ratio needs at least one n");
  SupResult best{ns.front(), ratio(f, orbit, x, ns.front())};
  for (size_t i = 1; i < ns.size(); ++i) {
    Scaled r = ratio(f, orbit, x, ns[i]);
    if (r > best.ratio) best = {ns[i], r};
  }
  return best;
}

Int brute_force_N(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n, const Int& k_cap) {
  Scaled vmax;
  for (const Scaled& v : f.values()) {
    if (v > vmax) vmax = v;
  }
  Int k_end = (n * vmax).ceil();
  if (k_end > k_cap) throw CapExceeded("brute force range " + k_end.get_str() + " exceeds cap " + k_cap.get_str());
  Scaled step = Scaled::pow2(-static_cast<int64_t>(orbit.J));
  Scaled one(1);
  Int count(0);
  for (Int k = 1; k < k_end; ++k) {
    Scaled y = x + Scaled(k) * step;
    if (orbit.wrap) {
      y = y.frac();
    } else if (y.sign() < 0 || y >= one) {
      continue;
    }
    if (n * f.eval(y) > Scaled(k)) ++count;
  }
  return count;
}

}  // namespace ergcount

#pragma once

#include "ergcount/interval_set.hpp"

#include <stdexcept>

namespace ergcount {

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// N_n(f)(x) = #{k >= 1 : f(T^k x) / k > 1/n}.  n may be any positive
// rational, which gives the continuous-parameter variant.
Int count_N(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n);

Scaled ratio(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n);

struct SupResult {
  Scaled n_star;
  Scaled ratio;
};
// maximum over the sample only; a lower bound for the true supremum
SupResult sup_ratio(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const std::vector<Scaled>& ns);

// direct loop over k; refuses when n * max(f) exceeds k_cap
Int brute_force_N(const StepFunction& f, const OrbitSpec& orbit, const Scaled& x, const Scaled& n, const Int& k_cap);

}  // namespace ergcount

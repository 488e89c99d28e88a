#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace ergcount {

using Int = mpz_class;
using Rat = mpq_class;

// Exact rational stored as q * 2^e with q's numerator and denominator odd.
// Multiplying by a power of two only touches e, which keeps quantities like
// 2^-J with J in the millions cheap to carry around.
class Scaled {
 public:
  Scaled() = default;
  Scaled(long v) : q_(v) { normalize(); }
  Scaled(const Int& v) : q_(v) { normalize(); }
  Scaled(const Rat& v) : q_(v) { normalize(); }
  Scaled(const Rat& q, int64_t e) : q_(q), e_(e) { normalize(); }

  static Scaled pow2(int64_t e) { return Scaled(Rat(1), e); }

  const Rat& mant() const { return q_; }
  int64_t exp2() const { return e_; }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sgn(q_) == 0; }
  size_t limb_bytes() const { return 8 * (mpz_size(q_.get_num_mpz_t()) + mpz_size(q_.get_den_mpz_t())); }
  bool is_integer() const;
  // dyadic: denominator of the full value is a power of two
  bool is_dyadic() const { return q_.get_den() == 1; }
  // for dyadic values m*2^-d with m odd, returns d (0 for integers)
  int64_t dyadic_depth() const { return e_ < 0 ? -e_ : 0; }

  Scaled& mul2exp(int64_t k) {
    if (sgn(q_) != 0) e_ += k;
    return *this;
  }
  Scaled times2exp(int64_t k) const {
    Scaled r = *this;
    r.mul2exp(k);
    return r;
  }

  Rat to_rat() const;
  Int floor() const;
  Int ceil() const;
  // fractional part in [0,1)
  Scaled frac() const;
  // approximate log2 of |value|; exact to within 1
  int64_t log2_approx() const;

  std::string str() const { return to_rat().get_str(); }

  friend Scaled operator+(const Scaled& a, const Scaled& b);
  friend Scaled operator-(const Scaled& a, const Scaled& b);
  friend Scaled operator*(const Scaled& a, const Scaled& b);
  friend Scaled operator/(const Scaled& a, const Scaled& b);
  Scaled operator-() const {
    Scaled r = *this;
    r.q_ = -r.q_;
    return r;
  }
  Scaled& operator+=(const Scaled& o) { return *this = *this + o; }
  Scaled& operator-=(const Scaled& o) { return *this = *this - o; }
  Scaled& operator*=(const Scaled& o) { return *this = *this * o; }

  friend int cmp(const Scaled& a, const Scaled& b);
  friend bool operator==(const Scaled& a, const Scaled& b) { return a.e_ == b.e_ && a.q_ == b.q_; }
  friend bool operator!=(const Scaled& a, const Scaled& b) { return !(a == b); }
  friend bool operator<(const Scaled& a, const Scaled& b) { return cmp(a, b) < 0; }
  friend bool operator<=(const Scaled& a, const Scaled& b) { return cmp(a, b) <= 0; }
  friend bool operator>(const Scaled& a, const Scaled& b) { return cmp(a, b) > 0; }
  friend bool operator>=(const Scaled& a, const Scaled& b) { return cmp(a, b) >= 0; }

  size_t hash() const;

 private:
  void normalize();
  Rat q_{0};
  int64_t e_ = 0;
};

// 2^e as a big integer, e >= 0
Int pow2_int(uint64_t e);
// number of bits of |v| (0 for v == 0)
uint64_t bit_length(const Int& v);
Int ceil_div(const Int& a, const Int& b);
Int floor_div(const Int& a, const Int& b);
Int rat_floor(const Rat& r);
Int rat_ceil(const Rat& r);

Rat parse_rat(const std::string& s);
std::string rat_str(const Rat& r);

// m * 2^-e with m odd or e == 0
struct Dyadic {
  Int m;
  uint64_t e = 0;
  static Dyadic from(const Scaled& s);  // s must be dyadic
  Rat to_rat() const;
  Scaled to_scaled() const { return Scaled(Rat(m), -static_cast<int64_t>(e)); }
};

// [j 2^-R, (j+1) 2^-R)
struct GridInterval {
  Int j;
  uint64_t R = 0;
  Scaled left() const { return Scaled(Rat(j), -static_cast<int64_t>(R)); }
  Scaled length() const { return Scaled::pow2(-static_cast<int64_t>(R)); }
  bool inside_unit() const;
};

}  // namespace ergcount

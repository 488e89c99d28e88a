#include "ergcount/scaled.hpp"

#include <functional>
#include <stdexcept>

namespace ergcount {

void Scaled::normalize() {
  if (sgn(q_) == 0) {
    e_ = 0;
    return;
  }
  q_.canonicalize();
  mpz_ptr num = mpq_numref(q_.get_mpq_t());
  mpz_ptr den = mpq_denref(q_.get_mpq_t());
  mp_bitcnt_t tn = mpz_scan1(num, 0);
  if (tn > 0) {
    mpz_fdiv_q_2exp(num, num, tn);
    e_ += static_cast<int64_t>(tn);
  }
  mp_bitcnt_t td = mpz_scan1(den, 0);
  if (td > 0) {
    mpz_fdiv_q_2exp(den, den, td);
    e_ -= static_cast<int64_t>(td);
  }
}

bool Scaled::is_integer() const {
  if (sgn(q_) == 0) return true;
  return q_.get_den() == 1 && e_ >= 0;
}

Rat Scaled::to_rat() const {
  Rat r = q_;
  if (e_ > 0) {
    mpz_mul_2exp(mpq_numref(r.get_mpq_t()), mpq_numref(r.get_mpq_t()), e_);
  } else if (e_ < 0) {
    mpz_mul_2exp(mpq_denref(r.get_mpq_t()), mpq_denref(r.get_mpq_t()), -e_);
  }
  return r;
}

Int Scaled::floor() const {
  if (sgn(q_) == 0) return Int(0);
  Int num = q_.get_num();
  Int den = q_.get_den();
  if (e_ >= 0) {
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), e_);
  } else {
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), -e_);
  }
  Int r;
  mpz_fdiv_q(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return r;
}

Int Scaled::ceil() const {
  if (sgn(q_) == 0) return Int(0);
  Int num = q_.get_num();
  Int den = q_.get_den();
  if (e_ >= 0) {
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), e_);
  } else {
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), -e_);
  }
  Int r;
  mpz_cdiv_q(r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return r;
}

Scaled Scaled::frac() const {
  if (sgn(q_) == 0) return Scaled();
  const Int& den = q_.get_den();
  if (e_ >= 0) {
    // (num * 2^e mod den) / den, without building 2^e
    Int p, r;
    Int two(2);
    if (den == 1) return Scaled();
    mpz_powm_ui(p.get_mpz_t(), two.get_mpz_t(), static_cast<unsigned long>(e_), den.get_mpz_t());
    r = q_.get_num() * p;
    mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), den.get_mpz_t());
    return Scaled(Rat(r, den));
  }
  Int full_den = den;
  mpz_mul_2exp(full_den.get_mpz_t(), full_den.get_mpz_t(), -e_);
  Int r;
  mpz_fdiv_r(r.get_mpz_t(), q_.get_num().get_mpz_t(), full_den.get_mpz_t());
  return Scaled(Rat(r, den), e_);
}

int64_t Scaled::log2_approx() const {
  if (sgn(q_) == 0) return INT64_MIN / 4;
  int64_t bn = static_cast<int64_t>(mpz_sizeinbase(q_.get_num_mpz_t(), 2));
  int64_t bd = static_cast<int64_t>(mpz_sizeinbase(q_.get_den_mpz_t(), 2));
  return e_ + bn - bd;
}

static Rat shifted(const Rat& q, uint64_t k) {
  Rat r = q;
  mpz_mul_2exp(mpq_numref(r.get_mpq_t()), mpq_numref(r.get_mpq_t()), k);
  return r;
}

Scaled operator+(const Scaled& a, const Scaled& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.e_ == b.e_) return Scaled(a.q_ + b.q_, a.e_);
  if (a.e_ < b.e_) return Scaled(a.q_ + shifted(b.q_, b.e_ - a.e_), a.e_);
  return Scaled(shifted(a.q_, a.e_ - b.e_) + b.q_, b.e_);
}

Scaled operator-(const Scaled& a, const Scaled& b) { return a + (-b); }

Scaled operator*(const Scaled& a, const Scaled& b) {
  if (a.is_zero() || b.is_zero()) return Scaled();
  return Scaled(a.q_ * b.q_, a.e_ + b.e_);
}

Scaled operator/(const Scaled& a, const Scaled& b) {
  if (b.is_zero()) throw std::domain_error("division by zero");
  if (a.is_zero()) return Scaled();
  return Scaled(a.q_ / b.q_, a.e_ - b.e_);
}

int cmp(const Scaled& a, const Scaled& b) {
  int sa = a.sign(), sb = b.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  int64_t la = a.log2_approx(), lb = b.log2_approx();
  if (la > lb + 2) return sa;
  if (lb > la + 2) return -sa;
  int c;
  if (a.e_ >= b.e_) {
    c = ::cmp(shifted(a.q_, a.e_ - b.e_), b.q_);
  } else {
    c = ::cmp(a.q_, shifted(b.q_, b.e_ - a.e_));
  }
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

size_t Scaled::hash() const {
  size_t h = std::hash<int64_t>()(e_);
  auto mix = [&h](mpz_srcptr z) {
    size_t n = mpz_size(z);
    h ^= std::hash<size_t>()(n) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    for (size_t i = 0; i < n && i < 8; ++i) {
      h ^= std::hash<mp_limb_t>()(mpz_getlimbn(z, i)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    h ^= static_cast<size_t>(mpz_sgn(z) + 1);
  };
  mix(q_.get_num_mpz_t());
  mix(q_.get_den_mpz_t());
  return h;
}

Int pow2_int(uint64_t e) {
  Int r(1);
  mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), e);
  return r;
}

uint64_t bit_length(const Int& v) {
  if (sgn(v) == 0) return 0;
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

Int ceil_div(const Int& a, const Int& b) {
  Int r;
  mpz_cdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

Int floor_div(const Int& a, const Int& b) {
  Int r;
  mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

Int rat_floor(const Rat& r) { return floor_div(r.get_num(), r.get_den()); }
Int rat_ceil(const Rat& r) { return ceil_div(r.get_num(), r.get_den()); }

Rat parse_rat(const std::string& s) {
  Rat r;
  if (r.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: " + s);
  if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  r.canonicalize();
  return r;
}

std::string rat_str(const Rat& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

Dyadic Dyadic::from(const Scaled& s) {
  if (!s.is_dyadic()) throw std::invalid_argument("value is not dyadic");
  Dyadic d;
  if (s.is_zero()) return d;
  d.m = s.mant().get_num();
  if (s.exp2() >= 0) {
    mpz_mul_2exp(d.m.get_mpz_t(), d.m.get_mpz_t(), s.exp2());
    d.e = 0;
  } else {
    d.e = static_cast<uint64_t>(-s.exp2());
  }
  return d;
}

Rat Dyadic::to_rat() const { return Scaled(Rat(m), -static_cast<int64_t>(e)).to_rat(); }

bool GridInterval::inside_unit() const {
  return sgn(j) >= 0 && j < pow2_int(R);
}

}  // namespace ergcount

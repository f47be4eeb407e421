#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace loopleaf {

/// Exact rational numbers. Exponents of Puiseux series and Newton slopes
/// grow denominators like q^(15i+12)(q^3-1), so machine integers are not enough.
using Rational = mpq_class;
using Integer = mpz_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational make_rational(const Integer& num, const Integer& den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// "a/b", or "a" when the denominator is one.
inline std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(Integer(text));
    return make_rational(Integer(text.substr(0, slash)), Integer(text.substr(slash + 1)));
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("malformed rational '" + text + "'");
  }
}

inline Integer ipow(const Integer& base, unsigned long exp) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

inline Integer ipow(unsigned long base, unsigned long exp) { return ipow(Integer(base), exp); }

/// q^k as a rational; k may be negative.
inline Rational rpow(unsigned long q, long k) {
  if (k >= 0) return Rational(ipow(q, static_cast<unsigned long>(k)));
  return make_rational(Integer(1), ipow(q, static_cast<unsigned long>(-k)));
}

inline Integer floor(const Rational& r) {
  Integer out;
  mpz_fdiv_q(out.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return out;
}

inline Integer ceil(const Rational& r) {
  Integer out;
  mpz_cdiv_q(out.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return out;
}

/// A precision bound that may be infinite (an exactly known value).
/// Stored exponents are always strictly below the bound.
class Bound {
 public:
  Bound() = default;  // infinite
  Bound(Rational value) : value_(std::move(value)) {}  // NOLINT(google-explicit-constructor)

  static Bound infinite() { return Bound(); }

  bool is_infinite() const { return !value_.has_value(); }
  const Rational& value() const {
    if (!value_) throw std::logic_error("infinite bound has no finite value");
    return *value_;
  }

  friend bool operator<(const Bound& a, const Bound& b) {
    if (a.is_infinite()) return false;
    if (b.is_infinite()) return true;
    return *a.value_ < *b.value_;
  }
  friend bool operator==(const Bound& a, const Bound& b) {
    if (a.is_infinite() || b.is_infinite()) return a.is_infinite() == b.is_infinite();
    return *a.value_ == *b.value_;
  }
  friend bool operator<=(const Bound& a, const Bound& b) { return !(b < a); }
  friend bool operator>(const Bound& a, const Bound& b) { return b < a; }
  friend bool operator>=(const Bound& a, const Bound& b) { return !(a < b); }

  friend Bound operator+(const Bound& a, const Rational& shift) {
    if (a.is_infinite()) return a;
    return Bound(*a.value_ + shift);
  }
  friend Bound operator+(const Bound& a, const Bound& b) {
    if (a.is_infinite() || b.is_infinite()) return Bound();
    return Bound(*a.value_ + *b.value_);
  }
  friend Bound operator*(const Bound& a, const Rational& scale) {
    if (a.is_infinite()) return a;
    return Bound(*a.value_ * scale);
  }

  /// Strict comparison against a finite exponent: is `exponent` below the bound?
  bool above(const Rational& exponent) const { return is_infinite() || exponent < *value_; }

  std::string str() const { return is_infinite() ? std::string("inf") : to_string(*value_); }

 private:
  std::optional<Rational> value_;
};

inline Bound min(const Bound& a, const Bound& b) { return b < a ? b : a; }

}  // namespace loopleaf

#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopleaf/finite_field.hpp"
#include "loopleaf/rational.hpp"

namespace loopleaf {

/// Truncated Puiseux series sum c_r pi^r over F_{q^M}, with exact rational
/// exponents. Terms with exponent >= precision() are unknown; an infinite
/// precision means the value is known exactly (a finite sum).
class PuiseuxSeries {
 public:
  using TermMap = std::map<Rational, FieldElem>;

  PuiseuxSeries() = default;
  explicit PuiseuxSeries(FieldCtxPtr ctx, Bound precision = Bound::infinite())
      : ctx_(std::move(ctx)), precision_(std::move(precision)) {}

  static PuiseuxSeries zero(const FieldCtxPtr& ctx) { return PuiseuxSeries(ctx); }
  static PuiseuxSeries one(const FieldCtxPtr& ctx) { return constant(ctx->one()); }
  static PuiseuxSeries constant(const FieldElem& c) { return monomial(c, Rational(0)); }
  static PuiseuxSeries pi(const FieldCtxPtr& ctx) { return monomial(ctx->one(), Rational(1)); }
  static PuiseuxSeries monomial(const FieldElem& c, const Rational& exponent) {
    PuiseuxSeries s(c.ctx());
    if (!c.is_zero()) s.terms_.emplace(exponent, c);
    return s;
  }
  /// Zero known only below `precision`: O(pi^precision).
  static PuiseuxSeries big_o(const FieldCtxPtr& ctx, const Rational& precision) {
    return PuiseuxSeries(ctx, Bound(precision));
  }

  const FieldCtxPtr& ctx() const { return ctx_; }
  const TermMap& terms() const { return terms_; }
  const Bound& precision() const { return precision_; }
  std::size_t size() const { return terms_.size(); }

  bool is_exact() const { return precision_.is_infinite(); }
  /// No known nonzero term (the value may still be nonzero above precision).
  bool is_known_zero() const { return terms_.empty(); }
  bool is_exact_zero() const { return terms_.empty() && is_exact(); }

  /// Minimal exponent with nonzero coefficient; nullopt when the series is
  /// indistinguishable from 0 at its precision.
  std::optional<Rational> val() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.begin()->first;
  }
  /// Certified lower bound for the valuation.
  Bound val_bound() const {
    if (terms_.empty()) return precision_;
    return Bound(terms_.begin()->first);
  }
  const FieldElem& leading_coeff() const {
    if (terms_.empty()) throw std::domain_error("leading coefficient of a series indistinguishable from 0");
    return terms_.begin()->second;
  }
  /// Coefficient of pi^r, or nullopt when r is at or above the precision.
  std::optional<FieldElem> coeff(const Rational& r) const {
    if (!precision_.above(r)) return std::nullopt;
    auto it = terms_.find(r);
    if (it == terms_.end()) return ctx_->zero();
    return it->second;
  }
  /// Does every known term have positive (resp. non-negative) exponent, and
  /// is the precision high enough to see that?
  bool certified_val_above(const Rational& bound) const {
    if (!terms_.empty()) return terms_.begin()->first > bound;
    return precision_ > Bound(bound);
  }
  bool certified_val_at_least(const Rational& bound) const {
    if (!terms_.empty()) return terms_.begin()->first >= bound;
    return precision_ >= Bound(bound);
  }

  void add_term(const Rational& r, const FieldElem& c) {
    if (!precision_.above(r) || c.is_zero()) return;
    auto [it, inserted] = terms_.emplace(r, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  PuiseuxSeries truncated(const Bound& bound) const {
    if (precision_ <= bound) return *this;
    PuiseuxSeries out(ctx_, bound);
    for (const auto& [r, c] : terms_) {
      if (!bound.above(r)) break;
      out.terms_.emplace_hint(out.terms_.end(), r, c);
    }
    return out;
  }

  friend PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    Bound t = min(a.precision_, b.precision_);
    PuiseuxSeries out = a.truncated(t);
    for (const auto& [r, c] : b.terms_) {
      if (!t.above(r)) break;
      out.add_term(r, c);
    }
    return out;
  }
  friend PuiseuxSeries operator-(const PuiseuxSeries& a) {
    PuiseuxSeries out(a.ctx_, a.precision_);
    for (const auto& [r, c] : a.terms_) out.terms_.emplace_hint(out.terms_.end(), r, -c);
    return out;
  }
  friend PuiseuxSeries operator-(const PuiseuxSeries& a, const PuiseuxSeries& b) { return a + (-b); }

  friend PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    if (a.is_exact_zero() || b.is_exact_zero()) return PuiseuxSeries(a.ctx_ ? a.ctx_ : b.ctx_);
    Bound t = min(a.precision_ + b.val_bound(), b.precision_ + a.val_bound());
    PuiseuxSeries out(a.ctx_, t);
    for (const auto& [ra, ca] : a.terms_) {
      for (const auto& [rb, cb] : b.terms_) {
        Rational r = ra + rb;
        if (!t.above(r)) break;
        out.add_term(r, ca * cb);
      }
    }
    return out;
  }
  PuiseuxSeries& operator+=(const PuiseuxSeries& o) { return *this = *this + o; }
  PuiseuxSeries& operator-=(const PuiseuxSeries& o) { return *this = *this - o; }
  PuiseuxSeries& operator*=(const PuiseuxSeries& o) { return *this = *this * o; }

  PuiseuxSeries scaled(const FieldElem& c) const {
    if (c.is_zero()) return PuiseuxSeries(ctx_);
    PuiseuxSeries out(ctx_, precision_);
    for (const auto& [r, v] : terms_) out.terms_.emplace_hint(out.terms_.end(), r, v * c);
    return out;
  }
  /// Multiplication by pi^shift.
  PuiseuxSeries shifted(const Rational& shift) const {
    PuiseuxSeries out(ctx_, precision_ + shift);
    for (const auto& [r, v] : terms_) out.terms_.emplace_hint(out.terms_.end(), r + shift, v);
    return out;
  }

  /// Multiplicative inverse. The relative precision of the result is the
  /// input's, capped at `relative_cap` (needed for exact multi-term inputs
  /// whose inverse is an infinite series).
  PuiseuxSeries inverse(const Rational& relative_cap = Rational(2)) const {
    if (terms_.empty()) throw std::domain_error("inversion of a series indistinguishable from 0");
    const Rational v = terms_.begin()->first;
    const FieldElem c_inv = terms_.begin()->second.inverse();
    Bound rel = min(precision_ + Rational(-v), Bound(relative_cap));
    if (terms_.size() == 1) {
      PuiseuxSeries out = monomial(c_inv, -v);
      out.precision_ = is_exact() ? Bound::infinite() : precision_ + Rational(-2 * v);
      return out;
    }
    // x = c pi^v (1 + u), 1/x = c^-1 pi^-v sum (-u)^k.
    PuiseuxSeries minus_u(ctx_, rel);
    for (auto it = std::next(terms_.begin()); it != terms_.end(); ++it) {
      minus_u.add_term(it->first - v, -(it->second * c_inv));
    }
    PuiseuxSeries sum = one(ctx_).truncated(rel);
    PuiseuxSeries power = sum;
    while (!power.is_known_zero()) {
      power = (power * minus_u).truncated(rel);
      sum += power;
    }
    return sum.scaled(c_inv).shifted(-v);
  }

  /// Absolute Frobenius: coefficients to the q^k, exponents times q^k
  /// (so sigma(pi) = pi^q). Negative k uses perfectness of the coefficients.
  PuiseuxSeries sigma(long k) const {
    if (k == 0) return *this;
    const Rational scale = rpow(static_cast<unsigned long>(ctx_->q()), k);
    PuiseuxSeries out(ctx_, precision_ * scale);
    for (const auto& [r, c] : terms_) out.terms_.emplace_hint(out.terms_.end(), r * scale, c.frobenius(k));
    return out;
  }

  /// Same known terms and same precision.
  friend bool operator==(const PuiseuxSeries& a, const PuiseuxSeries& b) {
    return a.precision_ == b.precision_ && a.terms_ == b.terms_;
  }
  friend bool operator!=(const PuiseuxSeries& a, const PuiseuxSeries& b) { return !(a == b); }

  /// Agreement on every exponent below both precisions.
  bool agrees_with(const PuiseuxSeries& other) const {
    Bound t = min(precision_, other.precision_);
    return (truncated(t) - other.truncated(t)).is_known_zero();
  }

  /// Exponent-0 coefficient; requires the series to be certified pi-integral.
  FieldElem constant_term() const {
    if (!certified_val_at_least(Rational(0))) throw std::domain_error("series is not certified pi-integral");
    if (!precision_.above(Rational(0))) throw std::domain_error("constant term lies above the precision");
    auto it = terms_.find(Rational(0));
    return it == terms_.end() ? ctx_->zero() : it->second;
  }

  std::string str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [r, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "[" << c.to_hex() << "]pi^" << to_string(r);
    }
    if (first) os << "0";
    if (!is_exact()) os << " + O(pi^" << precision_.str() << ")";
    return os.str();
  }

 private:
  FieldCtxPtr ctx_;
  TermMap terms_;
  Bound precision_;
};

}  // namespace loopleaf

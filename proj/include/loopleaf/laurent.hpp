#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "loopleaf/finite_field.hpp"
#include "loopleaf/puiseux.hpp"

namespace loopleaf {

/// A value is not known to enough epsilon- or pi-precision for the requested
/// certification. `required_order` is a sufficient epsilon-truncation order
/// when one can be estimated, else 0.
class PrecisionInsufficient : public std::runtime_error {
 public:
  PrecisionInsufficient(const std::string& what, long required_order = 0)
      : std::runtime_error(what), required_order_(required_order) {}
  long required_order() const { return required_order_; }

 private:
  long required_order_;
};

template <class C>
struct CoeffOps;

template <>
struct CoeffOps<FieldElem> {
  static FieldElem zero(const FieldCtxPtr& ctx) { return ctx->zero(); }
  static FieldElem one(const FieldCtxPtr& ctx) { return ctx->one(); }
  static FieldCtxPtr ctx(const FieldElem& x) { return x.ctx(); }
  static bool exact_zero(const FieldElem& x) { return x.is_zero(); }
  static bool certainly_nonzero(const FieldElem& x) { return !x.is_zero(); }
  /// Pivot preference among nonzero candidates (smaller is better).
  static Rational magnitude(const FieldElem&) { return Rational(0); }
  static FieldElem sigma(const FieldElem& x, long k) { return x.frobenius(k); }
  static FieldElem inverse(const FieldElem& x) { return x.inverse(); }
  static std::string str(const FieldElem& x) { return x.to_hex(); }
};

template <>
struct CoeffOps<PuiseuxSeries> {
  static PuiseuxSeries zero(const FieldCtxPtr& ctx) { return PuiseuxSeries::zero(ctx); }
  static PuiseuxSeries one(const FieldCtxPtr& ctx) { return PuiseuxSeries::one(ctx); }
  static FieldCtxPtr ctx(const PuiseuxSeries& x) { return x.ctx(); }
  static bool exact_zero(const PuiseuxSeries& x) { return x.is_exact_zero(); }
  static bool certainly_nonzero(const PuiseuxSeries& x) { return !x.is_known_zero(); }
  static Rational magnitude(const PuiseuxSeries& x) { return *x.val(); }
  static PuiseuxSeries sigma(const PuiseuxSeries& x, long k) { return x.sigma(k); }
  static PuiseuxSeries inverse(const PuiseuxSeries& x) { return x.inverse(); }
  static std::string str(const PuiseuxSeries& x) { return x.str(); }
};

/// Truncated Laurent series sum a_k eps^k with coefficients in C. Terms with
/// exponent >= order() are unknown; no order means the series is exact.
template <class C>
class Laurent {
 public:
  using Ops = CoeffOps<C>;
  using TermMap = std::map<long, C>;

  Laurent() = default;
  explicit Laurent(FieldCtxPtr ctx, std::optional<long> order = std::nullopt)
      : ctx_(std::move(ctx)), order_(order) {}

  static Laurent zero(const FieldCtxPtr& ctx) { return Laurent(ctx); }
  static Laurent one(const FieldCtxPtr& ctx) { return monomial(Ops::one(ctx), 0); }
  static Laurent constant(const C& c) { return monomial(c, 0); }
  static Laurent monomial(const C& c, long k) {
    Laurent out(Ops::ctx(c));
    out.add_term(k, c);
    return out;
  }

  const FieldCtxPtr& ctx() const { return ctx_; }
  const TermMap& terms() const { return terms_; }
  const std::optional<long>& order() const { return order_; }
  bool is_exact() const { return !order_.has_value(); }
  bool is_exact_zero() const { return terms_.empty() && is_exact(); }
  bool is_known_zero() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return !Ops::certainly_nonzero(t.second); });
  }

  /// Lower bound for the epsilon-valuation (LONG_MAX for exact zero).
  long val_bound() const {
    if (!terms_.empty()) return terms_.begin()->first;
    return order_ ? *order_ : LONG_MAX;
  }
  /// Exponent of the lowest term if its coefficient is certainly nonzero.
  std::optional<long> certified_val() const {
    if (terms_.empty() || !Ops::certainly_nonzero(terms_.begin()->second)) return std::nullopt;
    return terms_.begin()->first;
  }

  bool known(long k) const { return !order_ || k < *order_; }
  C coeff(long k) const {
    if (!known(k)) throw PrecisionInsufficient("epsilon^" + std::to_string(k) + " coefficient above truncation order");
    auto it = terms_.find(k);
    return it == terms_.end() ? Ops::zero(ctx_) : it->second;
  }

  void add_term(long k, const C& c) {
    if (!known(k) || Ops::exact_zero(c)) return;
    auto [it, inserted] = terms_.emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (Ops::exact_zero(it->second)) terms_.erase(it);
    }
  }
  void set_term(long k, const C& c) {
    if (!known(k)) return;
    terms_.erase(k);
    if (!Ops::exact_zero(c)) terms_.emplace(k, c);
  }

  Laurent truncated(std::optional<long> order) const {
    if (!order || (order_ && *order_ <= *order)) return *this;
    Laurent out(ctx_, order);
    for (const auto& [k, c] : terms_) {
      if (k >= *order) break;
      out.terms_.emplace_hint(out.terms_.end(), k, c);
    }
    return out;
  }

  template <class F>
  Laurent map_coeffs(F&& f) const {
    Laurent out(ctx_, order_);
    for (const auto& [k, c] : terms_) {
      C v = f(c);
      if (!Ops::exact_zero(v)) out.terms_.emplace_hint(out.terms_.end(), k, std::move(v));
    }
    return out;
  }

  friend Laurent operator+(const Laurent& a, const Laurent& b) {
    Laurent out = a.truncated(min_order(a.order_, b.order_));
    for (const auto& [k, c] : b.terms_) out.add_term(k, c);
    return out;
  }
  friend Laurent operator-(const Laurent& a) {
    return a.map_coeffs([](const C& c) { return -c; });
  }
  friend Laurent operator-(const Laurent& a, const Laurent& b) { return a + (-b); }
  friend Laurent operator*(const Laurent& a, const Laurent& b) {
    const FieldCtxPtr& ctx = a.ctx_ ? a.ctx_ : b.ctx_;
    if (a.is_exact_zero() || b.is_exact_zero()) return Laurent(ctx);
    std::optional<long> order;
    if (a.order_) order = *a.order_ + b.val_bound();
    if (b.order_) order = min_order(order, *b.order_ + a.val_bound());
    Laurent out(ctx, order);
    for (const auto& [ka, ca] : a.terms_) {
      for (const auto& [kb, cb] : b.terms_) {
        if (order && ka + kb >= *order) break;
        out.add_term(ka + kb, ca * cb);
      }
    }
    return out;
  }
  Laurent& operator+=(const Laurent& o) { return *this = *this + o; }
  Laurent& operator-=(const Laurent& o) { return *this = *this - o; }
  Laurent& operator*=(const Laurent& o) { return *this = *this * o; }

  Laurent scaled(const C& c) const {
    return map_coeffs([&](const C& v) { return v * c; });
  }
  Laurent shifted(long k) const {
    Laurent out(ctx_, order_ ? std::optional<long>(*order_ + k) : std::nullopt);
    for (const auto& [e, c] : terms_) out.terms_.emplace_hint(out.terms_.end(), e + k, c);
    return out;
  }
  Laurent sigma(long k) const {
    return map_coeffs([&](const C& c) { return Ops::sigma(c, k); });
  }

  /// Multiplicative inverse; an exact multi-term input yields a result known
  /// to relative order `relative_cap`.
  Laurent inverse(long relative_cap = 8) const {
    auto v = certified_val();
    if (!v) throw PrecisionInsufficient("inverse of a Laurent series without certified leading term");
    const C lead_inv = Ops::inverse(terms_.begin()->second);
    if (terms_.size() == 1 && is_exact()) return monomial(lead_inv, -*v);
    long rel = relative_cap;
    if (order_) rel = std::min(rel, *order_ - *v);
    // x = a eps^v (1 + u)
    Laurent minus_u(ctx_, rel);
    for (auto it = std::next(terms_.begin()); it != terms_.end(); ++it) {
      minus_u.add_term(it->first - *v, -(it->second * lead_inv));
    }
    Laurent sum = one(ctx_).truncated(rel);
    Laurent power = sum;
    for (long step = 0; step < rel && !power.terms_.empty(); ++step) {
      power = (power * minus_u).truncated(rel);
      sum += power;
    }
    return sum.scaled(lead_inv).shifted(-*v);
  }

  /// Same known terms, same order.
  friend bool operator==(const Laurent& a, const Laurent& b) { return a.order_ == b.order_ && a.terms_ == b.terms_; }
  friend bool operator!=(const Laurent& a, const Laurent& b) { return !(a == b); }

  std::string str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << "(" << Ops::str(c) << ")e^" << k;
    }
    if (first) os << "0";
    if (order_) os << " + O(e^" << *order_ << ")";
    return os.str();
  }

  static std::optional<long> min_order(const std::optional<long>& a, const std::optional<long>& b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
  }

 private:
  FieldCtxPtr ctx_;
  TermMap terms_;
  std::optional<long> order_;
};

}  // namespace loopleaf

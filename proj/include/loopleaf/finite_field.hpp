#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "loopleaf/fp_linalg.hpp"
#include "loopleaf/rational.hpp"

namespace loopleaf {

/// Thrown when a computation needs a root or solution that does not exist in
/// the configured F_{q^M}. Carries the smallest ambient degree M' that would
/// contain one (0 when the search bound was hit first).
class ExtensionRequired : public std::runtime_error {
 public:
  ExtensionRequired(const std::string& what, std::uint32_t needed_degree)
      : std::runtime_error(what), needed_degree_(needed_degree) {}
  std::uint32_t needed_degree() const { return needed_degree_; }

 private:
  std::uint32_t needed_degree_;
};

namespace poly {

using Poly = std::vector<std::uint32_t>;  // coefficients, constant term first

inline void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

inline Poly mul_mod(const Poly& a, const Poly& b, const Poly& m, std::uint32_t p) {
  if (a.empty() || b.empty()) return {};
  std::vector<std::uint64_t> prod(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) prod[i + j] = (prod[i + j] + std::uint64_t{a[i]} * b[j]) % p;
  }
  const std::size_t d = m.size() - 1;  // m monic
  for (std::size_t k = prod.size(); k-- > d;) {
    const std::uint64_t c = prod[k];
    if (c == 0) continue;
    for (std::size_t j = 0; j <= d; ++j) prod[k - d + j] = (prod[k - d + j] + (p - c) * m[j]) % p;
  }
  Poly out(std::min(prod.size(), d));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint32_t>(prod[i]);
  trim(out);
  return out;
}

inline Poly pow_mod(Poly base, Integer e, const Poly& m, std::uint32_t p) {
  Poly result{1};
  while (e > 0) {
    if (mpz_odd_p(e.get_mpz_t())) result = mul_mod(result, base, m, p);
    base = mul_mod(base, base, m, p);
    e >>= 1;
  }
  return result;
}

inline Poly rem(Poly a, const Poly& b, std::uint32_t p) {
  trim(a);
  const std::uint32_t lead_inv = detail::inv_mod(b.back(), p);
  while (a.size() >= b.size()) {
    const std::uint64_t c = std::uint64_t{a.back()} * lead_inv % p;
    const std::size_t shift = a.size() - b.size();
    for (std::size_t j = 0; j < b.size(); ++j) a[shift + j] = static_cast<std::uint32_t>((a[shift + j] + (p - c) * b[j] % p) % p);
    trim(a);
  }
  return a;
}

inline Poly gcd(Poly a, Poly b, std::uint32_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = rem(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0) n /= d;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

/// Ben-Or/Rabin test for a monic polynomial of degree d over F_p.
inline bool is_irreducible(const Poly& f, std::uint32_t p) {
  const std::size_t d = f.size() - 1;
  if (d == 0) return false;
  if (d == 1) return true;
  const Poly x{0, 1};
  auto frob_power = [&](std::uint64_t k) -> std::vector<std::uint32_t> { return pow_mod(x, ipow(p, k), f, p); };
  Poly xq = frob_power(d);
  Poly diff = xq;
  diff.resize(std::max<std::size_t>(diff.size(), 2), 0);
  diff[1] = (diff[1] + p - 1) % p;
  trim(diff);
  if (!diff.empty()) return false;
  for (std::uint64_t r : prime_factors(d)) {
    Poly h = frob_power(d / r);
    h.resize(std::max<std::size_t>(h.size(), 2), 0);
    h[1] = (h[1] + p - 1) % p;
    trim(h);
    Poly g = gcd(f, h, p);
    if (g.size() != 1) return false;
  }
  return true;
}

/// Smallest monic irreducible of degree d, ordering the lower coefficients by
/// their integer encoding sum c_i p^i.
inline Poly find_modulus(std::uint32_t p, std::uint32_t d) {
  Poly f(d + 1, 0);
  f[d] = 1;
  while (true) {
    if (f[0] != 0 && is_irreducible(f, p)) return f;
    std::size_t i = 0;
    while (i < d) {
      if (++f[i] < p) break;
      f[i] = 0;
      ++i;
    }
    if (i == d) throw std::logic_error("no irreducible polynomial found");
  }
}

}  // namespace poly

class FieldElem;

/// The field F_{q^M} with q = p^e, realised as F_p[x]/(modulus) with
/// deg(modulus) = e*M. Immutable after construction.
class FieldCtx : public std::enable_shared_from_this<FieldCtx> {
 public:
  static std::shared_ptr<const FieldCtx> make(std::uint32_t p, std::uint32_t e, std::uint32_t M) {
    validate(p, e, M);
    return std::shared_ptr<const FieldCtx>(new FieldCtx(p, e, M, poly::find_modulus(p, e * M)));
  }

  static std::shared_ptr<const FieldCtx> make_with_modulus(std::uint32_t p, std::uint32_t e, std::uint32_t M,
                                                           poly::Poly modulus) {
    validate(p, e, M);
    if (modulus.size() != e * M + 1 || modulus.back() != 1) {
      throw std::invalid_argument("modulus must be monic of degree e*M");
    }
    for (auto c : modulus) {
      if (c >= p) throw std::invalid_argument("modulus coefficient out of range");
    }
    if (!poly::is_irreducible(modulus, p)) throw std::invalid_argument("modulus is reducible");
    return std::shared_ptr<const FieldCtx>(new FieldCtx(p, e, M, std::move(modulus)));
  }

  std::uint32_t p() const { return p_; }
  std::uint32_t e() const { return e_; }
  std::uint32_t M() const { return m_; }
  std::uint32_t degree() const { return e_ * m_; }
  std::uint64_t q() const { return q_; }
  const poly::Poly& modulus() const { return modulus_; }
  /// Number of elements p^(eM).
  const Integer& order() const { return order_; }

  bool same_field(const FieldCtx& other) const {
    return p_ == other.p_ && e_ == other.e_ && m_ == other.m_ && modulus_ == other.modulus_;
  }

  FieldElem zero() const;
  FieldElem one() const;
  FieldElem from_int(std::int64_t n) const;
  FieldElem from_coeffs(std::vector<std::uint32_t> coeffs) const;
  FieldElem from_encoding(const Integer& code) const;
  FieldElem from_hex(const std::string& hex) const;
  /// Generator of F_p[x]/(modulus), the class of x.
  FieldElem gen() const;
  FieldElem random(std::mt19937_64& rng) const;
  /// Random element of the subfield F_{q^sub_m}; sub_m must divide M.
  FieldElem random_in_subfield(std::mt19937_64& rng, std::uint32_t sub_m) const;

  /// Images of the basis x^i under sigma^k (x -> x^(q^k)), k in [0, M).
  const std::vector<std::vector<std::uint32_t>>& frobenius_images(std::uint32_t k) const { return frob_[k % m_]; }

  struct CyclicData {
    std::vector<std::uint32_t> generator;
    std::vector<std::uint64_t> factors;  // prime factors of q^M - 1
  };
  /// Primitive element and factorisation of the unit group order, computed on
  /// first use. Only available for fields with at most 2^40 elements.
  const CyclicData& cyclic() const;

  std::string describe() const {
    std::ostringstream os;
    os << "F_" << p_ << "^" << degree() << " (q=" << q_ << ", M=" << m_ << ")";
    return os.str();
  }

 private:
  FieldCtx(std::uint32_t p, std::uint32_t e, std::uint32_t M, poly::Poly modulus)
      : p_(p), e_(e), m_(M), modulus_(std::move(modulus)) {
    q_ = ipow(p, e).get_ui();
    order_ = ipow(p, e * M);
    build_frobenius();
  }

  static void validate(std::uint32_t p, std::uint32_t e, std::uint32_t M) {
    if (p < 2 || poly::prime_factors(p).size() != 1 || poly::prime_factors(p)[0] != p) {
      throw std::invalid_argument("field characteristic must be prime");
    }
    if (e == 0 || M == 0) throw std::invalid_argument("field degrees must be positive");
    if (ipow(p, e) > Integer(std::uint64_t{1} << 31)) throw std::invalid_argument("q too large");
    if (e * M > 64) throw std::invalid_argument("field degree e*M above 64 is unsupported");
  }

  void build_frobenius();

  std::uint32_t p_;
  std::uint32_t e_;
  std::uint32_t m_;
  std::uint64_t q_ = 0;
  poly::Poly modulus_;
  Integer order_;
  std::vector<std::vector<std::vector<std::uint32_t>>> frob_;
  mutable std::once_flag cyclic_once_;
  mutable std::optional<CyclicData> cyclic_;
};

using FieldCtxPtr = std::shared_ptr<const FieldCtx>;

/// Element of F_{q^M}: coefficient vector of length e*M over F_p in the
/// polynomial basis, always reduced.
class FieldElem {
 public:
  FieldElem() = default;
  FieldElem(FieldCtxPtr ctx, std::vector<std::uint32_t> coeffs) : ctx_(std::move(ctx)), c_(std::move(coeffs)) {}

  const FieldCtxPtr& ctx() const { return ctx_; }
  const std::vector<std::uint32_t>& coeffs() const { return c_; }
  bool valid() const { return ctx_ != nullptr; }

  bool is_zero() const {
    return std::all_of(c_.begin(), c_.end(), [](std::uint32_t v) { return v == 0; });
  }
  bool is_one() const {
    if (c_.empty() || c_[0] != 1) return false;
    return std::all_of(c_.begin() + 1, c_.end(), [](std::uint32_t v) { return v == 0; });
  }

  friend bool operator==(const FieldElem& a, const FieldElem& b) { return a.c_ == b.c_; }
  friend bool operator!=(const FieldElem& a, const FieldElem& b) { return !(a == b); }

  /// Integer encoding sum c_i p^i; the order used for deterministic choices.
  Integer encoding() const {
    Integer out = 0;
    for (std::size_t i = c_.size(); i-- > 0;) out = out * ctx_->p() + c_[i];
    return out;
  }
  static bool encoding_less(const FieldElem& a, const FieldElem& b) {
    for (std::size_t i = a.c_.size(); i-- > 0;) {
      if (a.c_[i] != b.c_[i]) return a.c_[i] < b.c_[i];
    }
    return false;
  }

  /// Lower-case hex of the integer encoding.
  std::string to_hex() const { return encoding().get_str(16); }

  friend FieldElem operator+(const FieldElem& a, const FieldElem& b) {
    check_same(a, b);
    const std::uint32_t p = a.ctx_->p();
    std::vector<std::uint32_t> out(a.c_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (a.c_[i] + b.c_[i]) % p;
    return {a.ctx_, std::move(out)};
  }
  friend FieldElem operator-(const FieldElem& a) {
    const std::uint32_t p = a.ctx_->p();
    std::vector<std::uint32_t> out(a.c_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (p - a.c_[i]) % p;
    return {a.ctx_, std::move(out)};
  }
  friend FieldElem operator-(const FieldElem& a, const FieldElem& b) { return a + (-b); }
  friend FieldElem operator*(const FieldElem& a, const FieldElem& b) {
    check_same(a, b);
    const std::uint32_t p = a.ctx_->p();
    if (p == 2 && a.c_.size() == 1) return {a.ctx_, {a.c_[0] & b.c_[0]}};
    poly::Poly prod = poly::mul_mod(a.c_, b.c_, a.ctx_->modulus(), p);
    prod.resize(a.c_.size(), 0);
    return {a.ctx_, std::move(prod)};
  }
  FieldElem& operator+=(const FieldElem& o) { return *this = *this + o; }
  FieldElem& operator-=(const FieldElem& o) { return *this = *this - o; }
  FieldElem& operator*=(const FieldElem& o) { return *this = *this * o; }

  FieldElem pow(Integer e) const {
    if (e < 0) return inverse().pow(-e);
    FieldElem result = ctx_->one();
    FieldElem base = *this;
    while (e > 0) {
      if (mpz_odd_p(e.get_mpz_t())) result *= base;
      base *= base;
      e >>= 1;
    }
    return result;
  }

  FieldElem inverse() const {
    if (is_zero()) throw std::domain_error("inverse of zero in " + ctx_->describe());
    return pow(ctx_->order() - 2);
  }

  /// x^(q^k); negative k gives the unique q^|k|-th root.
  FieldElem frobenius(long k) const {
    const long m = static_cast<long>(ctx_->M());
    const auto kk = static_cast<std::uint32_t>(((k % m) + m) % m);
    if (kk == 0) return *this;
    const auto& images = ctx_->frobenius_images(kk);
    const std::uint32_t p = ctx_->p();
    std::vector<std::uint64_t> acc(c_.size(), 0);
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i] == 0) continue;
      for (std::size_t j = 0; j < c_.size(); ++j) acc[j] = (acc[j] + std::uint64_t{c_[i]} * images[i][j]) % p;
    }
    std::vector<std::uint32_t> out(acc.begin(), acc.end());
    return {ctx_, std::move(out)};
  }

 private:
  static void check_same(const FieldElem& a, const FieldElem& b) {
    if (a.ctx_ != b.ctx_ && !(a.ctx_ && b.ctx_ && a.ctx_->same_field(*b.ctx_))) {
      throw std::invalid_argument("field elements from different fields");
    }
  }

  FieldCtxPtr ctx_;
  std::vector<std::uint32_t> c_;
};

inline FieldElem FieldCtx::zero() const { return {shared_from_this(), std::vector<std::uint32_t>(degree(), 0)}; }

inline FieldElem FieldCtx::one() const {
  std::vector<std::uint32_t> c(degree(), 0);
  c[0] = 1;
  return {shared_from_this(), std::move(c)};
}

inline FieldElem FieldCtx::from_int(std::int64_t n) const {
  std::vector<std::uint32_t> c(degree(), 0);
  const std::int64_t pp = p_;
  c[0] = static_cast<std::uint32_t>(((n % pp) + pp) % pp);
  return {shared_from_this(), std::move(c)};
}

inline FieldElem FieldCtx::from_coeffs(std::vector<std::uint32_t> coeffs) const {
  if (coeffs.size() > degree()) {
    coeffs = poly::rem(coeffs, modulus_, p_);
  }
  coeffs.resize(degree(), 0);
  for (auto& c : coeffs) c %= p_;
  return {shared_from_this(), std::move(coeffs)};
}

inline FieldElem FieldCtx::from_encoding(const Integer& code) const {
  if (code < 0 || code >= order_) throw std::invalid_argument("field element encoding out of range");
  std::vector<std::uint32_t> c(degree(), 0);
  Integer rest = code;
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = static_cast<std::uint32_t>(Integer(rest % p_).get_ui());
    rest /= p_;
  }
  return {shared_from_this(), std::move(c)};
}

inline FieldElem FieldCtx::from_hex(const std::string& hex) const {
  Integer code;
  if (hex.empty() || code.set_str(hex, 16) != 0) throw std::invalid_argument("malformed field element hex '" + hex + "'");
  return from_encoding(code);
}

inline FieldElem FieldCtx::gen() const { return from_coeffs({0, 1}); }

inline FieldElem FieldCtx::random(std::mt19937_64& rng) const {
  std::uniform_int_distribution<std::uint32_t> dist(0, p_ - 1);
  std::vector<std::uint32_t> c(degree());
  for (auto& v : c) v = dist(rng);
  return {shared_from_this(), std::move(c)};
}

inline FieldElem FieldCtx::random_in_subfield(std::mt19937_64& rng, std::uint32_t sub_m) const {
  if (sub_m == 0 || m_ % sub_m != 0) throw std::invalid_argument("subfield degree must divide M");
  // The relative trace F_{q^M} -> F_{q^sub_m} is surjective.
  FieldElem y = random(rng);
  FieldElem acc = zero();
  for (std::uint32_t j = 0; j < m_ / sub_m; ++j) acc += y.frobenius(static_cast<long>(j * sub_m));
  return acc;
}

inline void FieldCtx::build_frobenius() {
  const std::uint32_t d = degree();
  frob_.resize(m_);
  // x^(q^k) for k = 0..M-1, then powers of it give the images of the basis.
  poly::Poly x_reduced = poly::rem(poly::Poly{0, 1}, modulus_, p_);
  poly::Poly cur = x_reduced;
  for (std::uint32_t k = 0; k < m_; ++k) {
    auto& images = frob_[k];
    images.assign(d, std::vector<std::uint32_t>(d, 0));
    poly::Poly power{1};
    for (std::uint32_t i = 0; i < d; ++i) {
      poly::Poly pv = power;
      pv.resize(d, 0);
      images[i] = pv;
      power = poly::mul_mod(power, cur, modulus_, p_);
    }
    cur = poly::pow_mod(cur, Integer(static_cast<unsigned long>(q_)), modulus_, p_);
  }
}

inline const FieldCtx::CyclicData& FieldCtx::cyclic() const {
  std::call_once(cyclic_once_, [this] {
    if (order_ > Integer(std::uint64_t{1} << 40)) return;
    const std::uint64_t n = Integer(order_ - 1).get_ui();
    CyclicData data;
    data.factors = poly::prime_factors(n);
    for (Integer code = 1; code < order_; ++code) {
      FieldElem w = from_encoding(code);
      bool primitive = true;
      for (auto r : data.factors) {
        if (w.pow(Integer(static_cast<unsigned long>(n / r))).is_one()) {
          primitive = false;
          break;
        }
      }
      if (primitive) {
        data.generator = w.coeffs();
        break;
      }
    }
    cyclic_ = std::move(data);
  });
  if (!cyclic_) throw std::domain_error("root extraction unsupported for fields above 2^40 elements: " + describe());
  return *cyclic_;
}

namespace detail {

/// Discrete logarithm base the primitive element (baby-step giant-step).
inline std::uint64_t discrete_log(const FieldElem& x) {
  const auto& ctx = *x.ctx();
  const auto& cyc = ctx.cyclic();
  const std::uint64_t n = Integer(ctx.order() - 1).get_ui();
  FieldElem w(x.ctx(), cyc.generator);
  std::uint64_t m = 1;
  while (m * m < n) ++m;
  std::unordered_map<std::string, std::uint64_t> baby;
  baby.reserve(m * 2);
  FieldElem cur = ctx.one();
  for (std::uint64_t j = 0; j < m; ++j) {
    baby.emplace(cur.encoding().get_str(36), j);
    cur *= w;
  }
  FieldElem giant = w.pow(Integer(static_cast<unsigned long>(m))).inverse();
  FieldElem gamma = x;
  for (std::uint64_t i = 0; i <= m; ++i) {
    auto it = baby.find(gamma.encoding().get_str(36));
    if (it != baby.end()) return (i * m + it->second) % n;
    gamma *= giant;
  }
  throw std::logic_error("discrete log failed");
}

inline std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    a %= b;
    std::swap(a, b);
  }
  return a;
}

}  // namespace detail

/// Result of root extraction: a root, or the minimal ambient degree that has one.
struct NthRootResult {
  std::optional<FieldElem> root;
  std::uint32_t required_M = 0;
};

/// Some y with y^n = x, the smallest in encoding order among all roots in
/// F_{q^M}. When no root exists, reports the minimal M' (a multiple of M)
/// whose field contains one.
inline NthRootResult nth_root(const FieldElem& x, std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("nth_root: n must be positive");
  const auto& ctx = *x.ctx();
  if (x.is_zero()) return {ctx.zero(), ctx.M()};
  const std::uint32_t p = ctx.p();
  const std::uint32_t d = ctx.degree();
  // Strip the p-part; p-th roots are unique in a perfect field.
  FieldElem base = x;
  std::int64_t m = n;
  while (m % p == 0) {
    m /= p;
    base = base.pow(ipow(p, d - 1));  // x^(1/p)
  }
  const Integer group = ctx.order() - 1;
  const std::uint64_t n_group = group.get_ui();
  const std::uint64_t g = detail::gcd_u64(static_cast<std::uint64_t>(m), n_group);
  if (!base.pow(group / g).is_one()) {
    for (std::uint32_t j = 2; j <= 4096; ++j) {
      const Integer big_group = ipow(ctx.order(), j) - 1;
      Integer gj;
      mpz_gcd_ui(gj.get_mpz_t(), big_group.get_mpz_t(), static_cast<unsigned long>(m));
      Integer exponent = Integer(big_group / gj) % group;
      if (base.pow(exponent).is_one()) return {std::nullopt, ctx.M() * j};
    }
    return {std::nullopt, 0};
  }
  const std::uint64_t log_x = detail::discrete_log(base);
  // m * L = log_x (mod n_group)  <=>  (m/g) L = log_x/g (mod n_group/g)
  const std::uint64_t reduced = n_group / g;
  Integer inv;
  Integer mg(static_cast<unsigned long>(m / static_cast<std::int64_t>(g)));
  if (reduced == 1) {
    inv = 0;
  } else {
    mpz_invert(inv.get_mpz_t(), mg.get_mpz_t(), Integer(static_cast<unsigned long>(reduced)).get_mpz_t());
  }
  const Integer l0 = Integer(static_cast<unsigned long>(log_x / g)) * inv % Integer(static_cast<unsigned long>(reduced == 0 ? 1 : reduced));
  FieldElem w(x.ctx(), ctx.cyclic().generator);
  FieldElem step = w.pow(Integer(static_cast<unsigned long>(reduced)));
  FieldElem cand = w.pow(l0);
  FieldElem best = cand;
  for (std::uint64_t j = 1; j < g; ++j) {
    cand *= step;
    if (FieldElem::encoding_less(cand, best)) best = cand;
  }
  return {best, ctx.M()};
}

/// F_p-matrix (D x D, column i = image of basis element i) of the map
/// x -> sum_j c_j x^(q^k_j).
inline FpMatrix q_linearized_matrix(const std::vector<std::pair<FieldElem, long>>& terms) {
  const auto& ctx = *terms.front().first.ctx();
  const std::uint32_t d = ctx.degree();
  FpMatrix a(ctx.p(), d, d);
  for (std::uint32_t i = 0; i < d; ++i) {
    std::vector<std::uint32_t> basis(d, 0);
    basis[i] = 1;
    FieldElem b = ctx.from_coeffs(basis);
    FieldElem image = ctx.zero();
    for (const auto& [c, k] : terms) image += c * b.frobenius(k);
    for (std::uint32_t r = 0; r < d; ++r) a.at(r, i) = image.coeffs()[r];
  }
  return a;
}

/// Affine solution space of sum_j c_j x^(q^k_j) = rhs, or nullopt if empty.
inline std::optional<FpAffineSpace> solve_q_linearized_space(const std::vector<std::pair<FieldElem, long>>& terms,
                                                             const FieldElem& rhs) {
  if (terms.empty() || std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.first.is_zero(); })) {
    throw std::invalid_argument("solve_q_linearized: all coefficients are zero");
  }
  for (const auto& t : terms) {
    if (t.second < 0) throw std::invalid_argument("solve_q_linearized: exponents must be non-negative");
  }
  return solve_fp(q_linearized_matrix(terms), rhs.coeffs());
}

/// All solutions in F_{q^M}, sorted by encoding. Possibly empty.
inline std::vector<FieldElem> solve_q_linearized(const std::vector<std::pair<FieldElem, long>>& terms,
                                                 const FieldElem& rhs) {
  auto space = solve_q_linearized_space(terms, rhs);
  std::vector<FieldElem> out;
  if (!space) return out;
  const auto& ctx_ptr = rhs.ctx();
  const std::uint32_t p = ctx_ptr->p();
  const std::size_t dim = space->kernel.size();
  if (ipow(p, dim) > Integer(1 << 20)) throw std::domain_error("solve_q_linearized: solution set too large to enumerate");
  std::vector<std::uint32_t> digits(dim, 0);
  while (true) {
    std::vector<std::uint32_t> v = space->particular;
    for (std::size_t k = 0; k < dim; ++k) {
      if (digits[k] == 0) continue;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = (v[i] + digits[k] * space->kernel[k][i]) % p;
    }
    out.emplace_back(ctx_ptr, std::move(v));
    std::size_t k = 0;
    while (k < dim && ++digits[k] == p) digits[k++] = 0;
    if (k == dim) break;
  }
  std::sort(out.begin(), out.end(), FieldElem::encoding_less);
  return out;
}

/// Smallest solution by encoding, or nullopt.
inline std::optional<FieldElem> solve_q_linearized_smallest(const std::vector<std::pair<FieldElem, long>>& terms,
                                                            const FieldElem& rhs) {
  auto all = solve_q_linearized(terms, rhs);
  if (all.empty()) return std::nullopt;
  return all.front();
}

/// Field embedding F_{q^M} -> F_{q^M'} (M | M'), fixed by sending the
/// generator to the smallest root of its minimal polynomial in the target.
class FieldEmbedding {
 public:
  FieldEmbedding(FieldCtxPtr from, FieldCtxPtr to) : from_(std::move(from)), to_(std::move(to)) {
    if (from_->p() != to_->p() || from_->e() != to_->e() || to_->M() % from_->M() != 0) {
      throw std::invalid_argument("no embedding between " + from_->describe() + " and " + to_->describe());
    }
    if (to_->order() > Integer(1 << 24)) throw std::domain_error("embedding search limited to 2^24 elements");
    const auto& f = from_->modulus();
    for (Integer code = 0; code < to_->order(); ++code) {
      FieldElem y = to_->from_encoding(code);
      FieldElem acc = to_->zero();
      for (std::size_t i = f.size(); i-- > 0;) acc = acc * y + to_->from_int(f[i]);
      if (acc.is_zero()) {
        image_of_gen_ = y;
        break;
      }
    }
    if (!image_of_gen_.valid()) throw std::logic_error("embedding: modulus has no root in target");
  }

  FieldElem operator()(const FieldElem& x) const {
    FieldElem acc = to_->zero();
    const auto& c = x.coeffs();
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * image_of_gen_ + to_->from_int(c[i]);
    return acc;
  }

  const FieldCtxPtr& target() const { return to_; }

 private:
  FieldCtxPtr from_;
  FieldCtxPtr to_;
  FieldElem image_of_gen_;
};

/// Minimal M' (multiple of M, up to max_factor*M) in which the q-linearized
/// equation becomes solvable; 0 when none was found within the search bound.
inline std::uint32_t q_linearized_required_degree(const std::vector<std::pair<FieldElem, long>>& terms,
                                                  const FieldElem& rhs, std::uint32_t max_factor = 8) {
  const auto& ctx = rhs.ctx();
  if (solve_q_linearized_space(terms, rhs)) return ctx->M();
  for (std::uint32_t j = 2; j <= max_factor; ++j) {
    if (ipow(ctx->p(), ctx->degree() * j) > Integer(1 << 24)) break;
    auto big = FieldCtx::make(ctx->p(), ctx->e(), ctx->M() * j);
    FieldEmbedding embed(ctx, big);
    std::vector<std::pair<FieldElem, long>> lifted;
    for (const auto& [c, k] : terms) lifted.emplace_back(embed(c), k);
    if (solve_q_linearized_space(lifted, embed(rhs))) return big->M();
  }
  return 0;
}

}  // namespace loopleaf

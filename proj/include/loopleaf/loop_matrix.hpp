#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopleaf/laurent.hpp"
#include "loopleaf/rational.hpp"

namespace loopleaf {

/// n x n matrix over C((eps)); an element of the loop group when invertible.
template <class C>
class LoopMatrix {
 public:
  using Series = Laurent<C>;

  LoopMatrix() = default;
  LoopMatrix(FieldCtxPtr ctx, std::size_t n) : ctx_(std::move(ctx)), n_(n), e_(n * n, Series::zero(ctx_)) {}

  static LoopMatrix identity(const FieldCtxPtr& ctx, std::size_t n) {
    LoopMatrix out(ctx, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = Series::one(ctx);
    return out;
  }
  /// diag(eps^mu_1, ..., eps^mu_n).
  static LoopMatrix eps_power(const FieldCtxPtr& ctx, const std::vector<long>& mu) {
    LoopMatrix out(ctx, mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) out(i, i) = Series::monomial(CoeffOps<C>::one(ctx), mu[i]);
    return out;
  }

  const FieldCtxPtr& ctx() const { return ctx_; }
  std::size_t size() const { return n_; }
  Series& operator()(std::size_t i, std::size_t j) { return e_[i * n_ + j]; }
  const Series& operator()(std::size_t i, std::size_t j) const { return e_[i * n_ + j]; }

  /// Common truncation order (the minimum over entries), none if exact.
  std::optional<long> order() const {
    std::optional<long> out;
    for (const auto& s : e_) out = Series::min_order(out, s.order());
    return out;
  }
  bool is_exact() const { return !order().has_value(); }

  LoopMatrix truncated(std::optional<long> order) const {
    LoopMatrix out = *this;
    for (auto& s : out.e_) s = s.truncated(order);
    return out;
  }
  template <class F>
  LoopMatrix map_entries(F&& f) const {
    LoopMatrix out = *this;
    for (auto& s : out.e_) s = f(s);
    return out;
  }

  /// eps^k coefficient matrix.
  std::vector<std::vector<C>> level(long k) const {
    std::vector<std::vector<C>> out(n_, std::vector<C>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) out[i][j] = (*this)(i, j).coeff(k);
    }
    return out;
  }

  friend LoopMatrix operator+(const LoopMatrix& a, const LoopMatrix& b) {
    check_shape(a, b);
    LoopMatrix out = a;
    for (std::size_t i = 0; i < a.e_.size(); ++i) out.e_[i] += b.e_[i];
    return out;
  }
  friend LoopMatrix operator-(const LoopMatrix& a, const LoopMatrix& b) {
    check_shape(a, b);
    LoopMatrix out = a;
    for (std::size_t i = 0; i < a.e_.size(); ++i) out.e_[i] -= b.e_[i];
    return out;
  }
  friend LoopMatrix operator*(const LoopMatrix& a, const LoopMatrix& b) { return mat_mul(a, b); }

  friend bool operator==(const LoopMatrix& a, const LoopMatrix& b) { return a.n_ == b.n_ && a.e_ == b.e_; }
  friend bool operator!=(const LoopMatrix& a, const LoopMatrix& b) { return !(a == b); }

  /// Every entry has no certainly nonzero term.
  bool is_known_zero() const {
    return std::all_of(e_.begin(), e_.end(), [](const Series& s) { return s.is_known_zero(); });
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) os << (j ? " | " : "") << (*this)(i, j).str();
      os << "\n";
    }
    return os.str();
  }

  static void check_shape(const LoopMatrix& a, const LoopMatrix& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("loop matrix size mismatch");
  }

  static LoopMatrix mat_mul(const LoopMatrix& a, const LoopMatrix& b) {
    check_shape(a, b);
    const std::size_t n = a.n_;
    LoopMatrix out(a.ctx_, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        Series acc = Series::zero(a.ctx_);
        for (std::size_t k = 0; k < n; ++k) {
          if (a(i, k).is_exact_zero() || b(k, j).is_exact_zero()) continue;
          acc += a(i, k) * b(k, j);
        }
        out(i, j) = std::move(acc);
      }
    }
    return out;
  }

 private:
  FieldCtxPtr ctx_;
  std::size_t n_ = 0;
  std::vector<Series> e_;
};

using FieldLoopMatrix = LoopMatrix<FieldElem>;
using PuiseuxLoopMatrix = LoopMatrix<PuiseuxSeries>;

template <class C>
LoopMatrix<C> mat_mul(const LoopMatrix<C>& a, const LoopMatrix<C>& b) {
  return LoopMatrix<C>::mat_mul(a, b);
}

/// Gauss-Jordan inversion over C((eps)). Pivots have minimal epsilon-order,
/// then minimal coefficient magnitude; exact multi-term pivots are inverted
/// to relative order `relative_cap`.
template <class C>
LoopMatrix<C> mat_inv(const LoopMatrix<C>& a, long relative_cap = 8) {
  using Ops = CoeffOps<C>;
  const std::size_t n = a.size();
  LoopMatrix<C> m = a;
  LoopMatrix<C> inv = LoopMatrix<C>::identity(a.ctx(), n);
  for (std::size_t col = 0; col < n; ++col) {
    std::optional<std::size_t> best;
    long best_val = 0;
    Rational best_mag;
    for (std::size_t r = col; r < n; ++r) {
      auto v = m(r, col).certified_val();
      if (!v) continue;
      Rational mag = Ops::magnitude(m(r, col).terms().begin()->second);
      if (!best || *v < best_val || (*v == best_val && mag < best_mag)) {
        best = r;
        best_val = *v;
        best_mag = mag;
      }
    }
    if (!best) throw PrecisionInsufficient("mat_inv: no certified pivot in column " + std::to_string(col + 1));
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(m(col, j), m(*best, j));
      std::swap(inv(col, j), inv(*best, j));
    }
    const auto pivot_inv = m(col, col).inverse(relative_cap);
    for (std::size_t j = 0; j < n; ++j) {
      m(col, j) = m(col, j) * pivot_inv;
      inv(col, j) = inv(col, j) * pivot_inv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m(r, col).is_exact_zero()) continue;
      const auto f = m(r, col);
      for (std::size_t j = 0; j < n; ++j) {
        if (!m(col, j).is_exact_zero()) m(r, j) -= f * m(col, j);
        if (!inv(col, j).is_exact_zero()) inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

/// Entrywise sigma^k on coefficients; eps is fixed.
template <class C>
LoopMatrix<C> sigma_twist(const LoopMatrix<C>& a, long k) {
  if (k == 0) return a;
  return a.map_entries([k](const Laurent<C>& s) { return s.sigma(k); });
}

/// g^-1 b sigma(g).
template <class C>
LoopMatrix<C> sigma_conjugate(const LoopMatrix<C>& g, const LoopMatrix<C>& b, long relative_cap = 8) {
  return mat_mul(mat_mul(mat_inv(g, relative_cap), b), sigma_twist(g, 1));
}

/// Coefficients c_0 = 1, c_1, ..., c_n of det(lambda - A) = sum c_k lambda^(n-k),
/// by Berkowitz's division-free recursion.
template <class C>
std::vector<Laurent<C>> charpoly(const LoopMatrix<C>& a) {
  using Series = Laurent<C>;
  const std::size_t n = a.size();
  const auto& ctx = a.ctx();
  if (n == 0) return {Series::one(ctx)};
  std::vector<Series> poly{Series::one(ctx), -a(n - 1, n - 1)};
  for (std::size_t k = n - 1; k-- > 0;) {
    const std::size_t m = n - 1 - k;
    std::vector<Series> col{Series::one(ctx), -a(k, k)};
    std::vector<Series> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = a(k + 1 + i, k);
    for (std::size_t step = 0; step < m; ++step) {
      Series dot = Series::zero(ctx);
      for (std::size_t i = 0; i < m; ++i) dot += a(k, k + 1 + i) * v[i];
      col.push_back(-dot);
      if (step + 1 == m) break;
      std::vector<Series> next(m, Series::zero(ctx));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) next[i] += a(k + 1 + i, k + 1 + j) * v[j];
      }
      v = std::move(next);
    }
    std::vector<Series> out(m + 2, Series::zero(ctx));
    for (std::size_t i = 0; i < m + 2; ++i) {
      for (std::size_t j = 0; j <= std::min(i, m); ++j) out[i] += col[i - j] * poly[j];
    }
    poly = std::move(out);
  }
  return poly;
}

/// Permutation expansion for n <= 6 (each term's precision is tracked on
/// its own, which keeps cancellations between terms visible), Berkowitz above.
template <class C>
Laurent<C> determinant(const LoopMatrix<C>& a) {
  const std::size_t n = a.size();
  if (n > 6) {
    auto poly = charpoly(a);
    return n % 2 == 0 ? poly.back() : -poly.back();
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Laurent<C> acc = Laurent<C>::zero(a.ctx());
  do {
    Laurent<C> term = Laurent<C>::one(a.ctx());
    for (std::size_t i = 0; i < n && !term.is_exact_zero(); ++i) term *= a(i, perm[i]);
    if (term.is_exact_zero()) continue;
    std::size_t inversions = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) inversions += perm[i] > perm[j];
    }
    acc += inversions % 2 ? -term : term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

/// Lower convex hull slopes of the points (k, v_k), k = 0..n, with v_0 = 0;
/// unknown points carry only a lower bound. Returns the slope vector in
/// weakly decreasing order, or the shortfall that certification still needs.
struct HullResult {
  std::vector<Rational> slopes;
  long shortfall = 0;
};

inline HullResult lower_hull_slopes(const std::vector<std::optional<Rational>>& known,
                                    const std::vector<long>& lower_bounds) {
  const std::size_t n = known.size() - 1;
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k <= n; ++k) {
    if (known[k]) idx.push_back(k);
  }
  std::vector<std::size_t> hull;
  for (std::size_t k : idx) {
    while (hull.size() >= 2) {
      const auto a = hull[hull.size() - 2];
      const auto b = hull.back();
      // drop b when it lies on or above segment a-k
      Rational lhs = (*known[b] - *known[a]) * Rational(static_cast<long>(k - a));
      Rational rhs = (*known[k] - *known[a]) * Rational(static_cast<long>(b - a));
      if (lhs >= rhs) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(k);
  }
  HullResult out;
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const auto a = hull[h];
    const auto b = hull[h + 1];
    const Rational slope = (*known[b] - *known[a]) / Rational(static_cast<long>(b - a));
    for (std::size_t k = a; k < b; ++k) out.slopes.push_back(slope);
    for (std::size_t k = a + 1; k < b; ++k) {
      if (known[k]) continue;
      const Rational line = *known[a] + slope * Rational(static_cast<long>(k - a));
      if (Rational(lower_bounds[k]) < line) {
        out.shortfall = std::max(out.shortfall, ceil(line - Rational(lower_bounds[k])).get_si());
      }
    }
  }
  std::reverse(out.slopes.begin(), out.slopes.end());
  return out;
}

/// Newton point of b in GL_n(F_{q^M}((eps))): slopes of the characteristic
/// polynomial of the norm b sigma(b) ... sigma^(M-1)(b), divided by M.
inline std::vector<Rational> newton_point(const FieldLoopMatrix& b) {
  const std::size_t n = b.size();
  const long m = b.ctx()->M();
  FieldLoopMatrix norm = b;
  for (long k = 1; k < m; ++k) norm = mat_mul(norm, sigma_twist(b, k));
  auto poly = charpoly(norm);
  if (!poly[n].certified_val()) {
    throw PrecisionInsufficient("newton_point: determinant not certified nonzero",
                                b.order() ? *b.order() + 1 : 0);
  }
  std::vector<std::optional<Rational>> known(n + 1);
  std::vector<long> bounds(n + 1, 0);
  known[0] = Rational(0);
  for (std::size_t k = 1; k <= n; ++k) {
    if (auto v = poly[k].certified_val()) {
      known[k] = Rational(*v);
    } else {
      bounds[k] = poly[k].val_bound();
    }
  }
  HullResult hull = lower_hull_slopes(known, bounds);
  if (hull.shortfall > 0) {
    long have = b.order() ? *b.order() : 0;
    throw PrecisionInsufficient("newton_point: characteristic polynomial not certified below the hull",
                                have + hull.shortfall);
  }
  for (auto& s : hull.slopes) s /= Rational(m);
  return hull.slopes;
}

/// Elementary divisor exponents of b over k[[eps]] (Smith normal form with
/// minimal-valuation pivots), sorted weakly decreasing.
inline std::vector<long> cartan_invariants(const FieldLoopMatrix& b) {
  const std::size_t n = b.size();
  long shift = LONG_MAX;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) shift = std::min(shift, b(i, j).val_bound());
  }
  if (shift == LONG_MAX) throw std::domain_error("cartan_invariants: zero matrix");
  FieldLoopMatrix m = b.map_entries([shift](const Laurent<FieldElem>& s) { return s.shifted(-shift); });
  // Working order: enough to see every elementary divisor of an invertible matrix.
  long det_val = 0;
  if (m.is_exact()) {
    auto d = determinant(m).certified_val();
    if (!d) throw std::domain_error("cartan_invariants: matrix is not invertible");
    det_val = *d;
  }
  const long cap = m.is_exact() ? det_val + 2 : std::max<long>(*m.order(), 1);
  std::vector<long> out;
  for (std::size_t step = 0; step < n; ++step) {
    std::optional<std::pair<std::size_t, std::size_t>> piv;
    long best = LONG_MAX;
    long floor_unknown = LONG_MAX;
    for (std::size_t i = step; i < n; ++i) {
      for (std::size_t j = step; j < n; ++j) {
        const auto& s = m(i, j);
        if (auto v = s.certified_val()) {
          if (*v < best) {
            best = *v;
            piv = std::make_pair(i, j);
          }
        } else if (s.order()) {
          floor_unknown = std::min(floor_unknown, *s.order());
        }
      }
    }
    if (!piv || floor_unknown <= best) {
      long have = b.order() ? *b.order() : cap;
      throw PrecisionInsufficient("cartan_invariants: pivot valuation not certified",
                                  have + (piv ? best - floor_unknown + 1 : 1));
    }
    auto [pi, pj] = *piv;
    for (std::size_t j = 0; j < n; ++j) std::swap(m(step, j), m(pi, j));
    for (std::size_t i = 0; i < n; ++i) std::swap(m(i, step), m(i, pj));
    out.push_back(best + shift);
    // unit part of the pivot, inverted
    const auto unit_inv = m(step, step).shifted(-best).inverse(cap);
    for (std::size_t i = step + 1; i < n; ++i) {
      if (m(i, step).is_exact_zero()) continue;
      const auto f = (m(i, step) * unit_inv).shifted(-best);
      for (std::size_t j = step; j < n; ++j) m(i, j) -= f * m(step, j);
    }
    for (std::size_t j = step + 1; j < n; ++j) {
      if (m(step, j).is_exact_zero()) continue;
      const auto f = (m(step, j) * unit_inv).shifted(-best);
      for (std::size_t i = step; i < n; ++i) m(i, j) -= m(i, step) * f;
    }
  }
  std::sort(out.rbegin(), out.rend());
  return out;
}

/// Entries are eps-integral and the eps^0 reduction is invertible.
template <class C>
bool is_in_K(const LoopMatrix<C>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& s = a(i, j);
      for (const auto& [k, c] : s.terms()) {
        if (k < 0) return false;
        break;
      }
      if (s.order() && *s.order() <= 0) return false;
    }
  }
  LoopMatrix<C> red(a.ctx(), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) red(i, j) = Laurent<C>::constant(a(i, j).coeff(0));
  }
  auto d = determinant(red);
  return d.certified_val() && *d.certified_val() == 0;
}

/// Exponent-0 part in pi of every coefficient; requires pi-integrality.
inline FieldLoopMatrix specialize_pi_zero(const PuiseuxLoopMatrix& a) {
  const std::size_t n = a.size();
  FieldLoopMatrix out(a.ctx(), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto& s = a(i, j);
      Laurent<FieldElem> t(a.ctx(), s.order());
      for (const auto& [k, c] : s.terms()) {
        if (!c.certified_val_at_least(Rational(0))) {
          std::ostringstream os;
          os << "entry (" << i + 1 << "," << j + 1 << ") eps^" << k << " is not certified pi-integral: " << c.str();
          throw std::domain_error(os.str());
        }
        t.add_term(k, c.constant_term());
      }
      out(i, j) = std::move(t);
    }
  }
  return out;
}

/// Constant lift F_{q^M}((eps)) -> k'((eps)).
inline PuiseuxLoopMatrix lift_to_puiseux(const FieldLoopMatrix& a) {
  const std::size_t n = a.size();
  PuiseuxLoopMatrix out(a.ctx(), n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Laurent<PuiseuxSeries> t(a.ctx(), a(i, j).order());
      for (const auto& [k, c] : a(i, j).terms()) t.add_term(k, PuiseuxSeries::constant(c));
      out(i, j) = std::move(t);
    }
  }
  return out;
}

}  // namespace loopleaf

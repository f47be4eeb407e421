#pragma once

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopleaf/loop_matrix.hpp"
#include "loopleaf/rational.hpp"

namespace loopleaf {

/// Dominant rational slope vector (weakly decreasing).
using NewtonPoint = std::vector<Rational>;
/// Dominant integral vector (weakly decreasing).
using Cocharacter = std::vector<long>;

inline NewtonPoint as_newton_point(const Cocharacter& mu) {
  NewtonPoint out;
  for (long m : mu) out.emplace_back(m);
  return out;
}

inline bool is_dominant(const Cocharacter& mu) { return std::is_sorted(mu.rbegin(), mu.rend()); }

/// Isoclinic blocks (slope, multiplicity), slopes decreasing.
inline std::vector<std::pair<Rational, long>> isoclinic_blocks(const NewtonPoint& nu) {
  std::vector<std::pair<Rational, long>> out;
  for (const auto& s : nu) {
    if (!out.empty() && out.back().first == s) {
      ++out.back().second;
    } else {
      out.emplace_back(s, 1);
    }
  }
  return out;
}

inline bool is_valid_newton_point(const NewtonPoint& nu) {
  if (!std::is_sorted(nu.rbegin(), nu.rend())) return false;
  for (const auto& [s, m] : isoclinic_blocks(nu)) {
    Rational total = s * Rational(m);
    if (total.get_den() != 1) return false;
  }
  return true;
}

inline Rational coordinate_sum(const NewtonPoint& nu) {
  Rational out(0);
  for (const auto& s : nu) out += s;
  return out;
}

/// nu <= nu' : equal totals and every partial sum of nu at most that of nu'.
inline bool dominance_leq(const NewtonPoint& a, const NewtonPoint& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dominance_leq: length mismatch");
  if (coordinate_sum(a) != coordinate_sum(b)) return false;
  Rational sa(0), sb(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    if (sa > sb) return false;
  }
  return true;
}

inline bool dominance_leq(const Cocharacter& a, const Cocharacter& b) {
  return dominance_leq(as_newton_point(a), as_newton_point(b));
}

/// n minus the number of simple summands of the isocrystal.
inline long defect(const NewtonPoint& nu) {
  long simple = 0;
  for (const auto& [s, m] : isoclinic_blocks(nu)) simple += m / s.get_den().get_si();
  return static_cast<long>(nu.size()) - simple;
}

/// <rho, x> with rho = ((n-1)/2, (n-3)/2, ..., (1-n)/2).
inline Rational rho_pairing(const NewtonPoint& x) {
  const long n = static_cast<long>(x.size());
  Rational out(0);
  for (long i = 0; i < n; ++i) out += make_rational(n - 1 - 2 * i, 2) * x[i];
  return out;
}

/// <2 rho, nu>.
inline Rational dim_leaf(const NewtonPoint& nu) { return Rational(2) * rho_pairing(nu); }

inline Rational dim_adlv(const Cocharacter& mu, const NewtonPoint& nu) {
  NewtonPoint m = as_newton_point(mu);
  if (!is_valid_newton_point(nu) || !dominance_leq(nu, m)) {
    throw std::invalid_argument("dim_adlv: Newton point does not lie in B(G, mu)");
  }
  NewtonPoint diff(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) diff[i] = m[i] - nu[i];
  Rational out = rho_pairing(diff) - make_rational(defect(nu), 2);
  if (out.get_den() != 1) throw std::logic_error("dim_adlv: non-integral dimension");
  return out;
}

struct BGmuTable {
  Cocharacter mu;
  std::vector<NewtonPoint> classes;
  /// leq[i][j] : classes[i] <= classes[j]
  std::vector<std::vector<bool>> leq;
  std::vector<long> defects;
  std::vector<Rational> adlv_dims;
  std::vector<Rational> leaf_dims;
};

namespace detail {

inline void extend_polygons(long n, const std::vector<long>& mu_partial, long x, long y, const Rational& prev_slope,
                            bool first, std::vector<std::pair<long, long>>& path,
                            std::vector<std::vector<std::pair<long, long>>>& out) {
  const long total = mu_partial[n];
  if (x == n) {
    if (y == total) out.push_back(path);
    return;
  }
  for (long x2 = x + 1; x2 <= n; ++x2) {
    // the slope must reach the endpoint with later slopes no larger
    const Rational min_slope = make_rational(total - y, n - x);
    const long y_lo = ceil(Rational(y) + min_slope * Rational(x2 - x)).get_si();
    const long y_hi = mu_partial[x2];
    for (long y2 = y_lo; y2 <= y_hi; ++y2) {
      const Rational slope = make_rational(y2 - y, x2 - x);
      if (!first && slope >= prev_slope) continue;
      path.emplace_back(x2, y2);
      extend_polygons(n, mu_partial, x2, y2, slope, false, path, out);
      path.pop_back();
    }
  }
}

}  // namespace detail

/// Concave lattice polygons from (0,0) to (n, |mu|) lying below the
/// mu-polygon, as slope vectors.
inline std::vector<NewtonPoint> newton_points_below(const Cocharacter& mu) {
  if (!is_dominant(mu)) throw std::invalid_argument("enumerate_bg_mu: mu is not dominant");
  const long n = static_cast<long>(mu.size());
  std::vector<long> partial(n + 1, 0);
  for (long i = 0; i < n; ++i) partial[i + 1] = partial[i] + mu[i];
  std::vector<std::vector<std::pair<long, long>>> polys;
  std::vector<std::pair<long, long>> path;
  detail::extend_polygons(n, partial, 0, 0, Rational(0), true, path, polys);
  std::vector<NewtonPoint> out;
  for (const auto& poly : polys) {
    NewtonPoint nu;
    long x = 0, y = 0;
    for (const auto& [x2, y2] : poly) {
      const Rational slope = make_rational(y2 - y, x2 - x);
      for (long k = x; k < x2; ++k) nu.push_back(slope);
      x = x2;
      y = y2;
    }
    out.push_back(std::move(nu));
  }
  return out;
}

/// B(GL_n, mu), ordered by <2 rho, nu> and then lexicographically.
inline BGmuTable enumerate_bg_mu(const Cocharacter& mu) {
  BGmuTable t;
  t.mu = mu;
  t.classes = newton_points_below(mu);
  std::sort(t.classes.begin(), t.classes.end(), [](const NewtonPoint& a, const NewtonPoint& b) {
    Rational la = dim_leaf(a), lb = dim_leaf(b);
    if (la != lb) return la < lb;
    return a < b;
  });
  const std::size_t k = t.classes.size();
  t.leq.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) t.leq[i][j] = dominance_leq(t.classes[i], t.classes[j]);
    t.defects.push_back(defect(t.classes[i]));
    t.adlv_dims.push_back(dim_adlv(mu, t.classes[i]));
    t.leaf_dims.push_back(dim_leaf(t.classes[i]));
  }
  return t;
}

/// Covering relations (lower, upper) of the dominance order on the table.
inline std::vector<std::pair<std::size_t, std::size_t>> hasse_diagram(const BGmuTable& t) {
  const std::size_t k = t.classes.size();
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j || !t.leq[i][j]) continue;
      bool covered = true;
      for (std::size_t m = 0; m < k && covered; ++m) {
        if (m != i && m != j && t.leq[i][m] && t.leq[m][j]) covered = false;
      }
      if (covered) out.emplace_back(i, j);
    }
  }
  return out;
}

/// Block-cyclic representative: for each isoclinic block of slope a/d (lowest
/// terms) and multiplicity m d, m copies of F(a, d) with entry
/// eps^floor((i-1+a)/d) at (i, ((i-1+a) mod d) + 1); blocks by increasing slope.
inline FieldLoopMatrix fundamental_alcove(const NewtonPoint& nu, const FieldCtxPtr& ctx) {
  if (!is_valid_newton_point(nu)) throw std::invalid_argument("fundamental_alcove: invalid Newton point");
  FieldLoopMatrix out(ctx, nu.size());
  auto blocks = isoclinic_blocks(nu);
  std::reverse(blocks.begin(), blocks.end());
  std::size_t offset = 0;
  for (const auto& [slope, mult] : blocks) {
    const long d = slope.get_den().get_si();
    const long a = slope.get_num().get_si();
    for (long copy = 0; copy < mult / d; ++copy) {
      for (long i = 0; i < d; ++i) {
        const long shifted = i + a;
        long col = shifted % d;
        if (col < 0) col += d;
        const long power = floor(make_rational(shifted, d)).get_si();
        out(offset + i, offset + col) = Laurent<FieldElem>::monomial(ctx->one(), power);
      }
      offset += d;
    }
  }
  return out;
}

/// "(2/5^(5))" style: each slope with its multiplicity when above one.
inline std::string compact_str(const NewtonPoint& nu) {
  std::ostringstream os;
  os << "(";
  bool first = true;
  for (const auto& [s, m] : isoclinic_blocks(nu)) {
    if (!first) os << ", ";
    first = false;
    os << to_string(s);
    if (m > 1) os << "^(" << m << ")";
  }
  os << ")";
  return os.str();
}

inline std::string vector_str(const NewtonPoint& nu) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < nu.size(); ++i) os << (i ? "," : "") << to_string(nu[i]);
  os << ")";
  return os.str();
}

inline std::string to_dot(const BGmuTable& t) {
  std::ostringstream os;
  os << "digraph bgmu {\n  rankdir=BT;\n";
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    os << "  n" << i + 1 << " [label=\"nu" << i + 1 << " " << compact_str(t.classes[i]) << "\"];\n";
  }
  for (const auto& [lo, hi] : hasse_diagram(t)) os << "  n" << lo + 1 << " -> n" << hi + 1 << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace loopleaf

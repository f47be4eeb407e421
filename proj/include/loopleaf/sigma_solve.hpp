#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "loopleaf/finite_field.hpp"
#include "loopleaf/puiseux.hpp"

namespace loopleaf {

/// sum_j u_j sigma^{k_j}(x) = rhs over truncated Puiseux series.
struct SigmaAffineEquation {
  std::vector<std::pair<PuiseuxSeries, long>> terms;
  PuiseuxSeries rhs;

  /// Left-hand side applied to x.
  PuiseuxSeries apply(const PuiseuxSeries& x) const {
    PuiseuxSeries acc = PuiseuxSeries::zero(rhs.ctx());
    for (const auto& [u, k] : terms) acc += u * x.sigma(k);
    return acc;
  }
  PuiseuxSeries residual(const PuiseuxSeries& x) const { return apply(x) - rhs; }
};

/// Greedy solve gave up before reaching its declared precision.
class SolverBudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveOptions {
  /// Branch-1 refinements allowed while the residual converges to the kernel
  /// threshold from below; fixes how close to the barrier the target is clamped.
  int approach_steps = 6;
  int max_steps = 10000;
};

struct SolveResult {
  PuiseuxSeries x;
  /// Residual valuation guaranteed by the solve (target after clamping).
  Rational declared_precision;
  /// Kernel threshold s* of a two-term equation, if any.
  std::optional<Rational> barrier;
  /// Certified lower bound of val(L(x) - rhs) from the post-check.
  Bound residual_bound;
  int steps = 0;
};

/// sigma^a(x) = u sigma^b(x), a > b >= 0, u a single term c pi^s: the
/// monomial ansatz x = y pi^r with r = s/(q^a - q^b) and y^(q^a - q^b) = c.
inline PuiseuxSeries solve_sigma_monomial(long a, long b, const PuiseuxSeries& u) {
  if (!(a > b && b >= 0)) throw std::invalid_argument("solve_sigma_monomial: need a > b >= 0");
  if (u.size() != 1 || !u.is_exact()) throw std::invalid_argument("solve_sigma_monomial: u must be an exact monomial");
  const auto& ctx = u.ctx();
  const std::uint64_t q = ctx->q();
  const Integer n = ipow(q, a) - ipow(q, b);
  if (!n.fits_slong_p()) throw std::invalid_argument("solve_sigma_monomial: q^a - q^b too large");
  const Rational r = *u.val() / Rational(n);
  NthRootResult root = nth_root(u.leading_coeff(), n.get_si());
  if (!root.root) {
    std::ostringstream os;
    os << "no (" << n.get_str() << ")-th root of the leading coefficient in " << ctx->describe();
    throw ExtensionRequired(os.str(), root.required_M);
  }
  return PuiseuxSeries::monomial(*root.root, r);
}

namespace detail {

inline void throw_extension_for_qlinear(const std::vector<std::pair<FieldElem, long>>& coeff_terms,
                                        const FieldElem& rhs) {
  std::uint32_t needed = q_linearized_required_degree(coeff_terms, rhs);
  throw ExtensionRequired("coefficient-level q-linearized equation has no solution in " + rhs.ctx()->describe(),
                          needed);
}

}  // namespace detail

/// Solves a one- or two-term sigma-affine equation to a residual valuation of
/// at least `target_precision` (clamped, see below) by greedy elimination of
/// the lowest residual term.
///
/// With L(x) = u1 sigma^k1(x) + u2 sigma^k2(x), k1 > k2, a term pi^r is mapped
/// by the two branches to the same exponent s* exactly at the kernel
/// threshold. Below s* the sigma^k1 branch is inverted, above it the
/// sigma^k2 branch, and at s* both together through a q-linearized equation
/// on coefficients. Residual terms below s* converge to s* and never pass
/// it, so a target at or above s* is clamped to
/// s* - (s* - val(rhs)) q^(-(k1-k2) approach_steps) when the rhs has terms
/// below s*. The rhs precision also bounds the target.
inline SolveResult solve_sigma_affine(const SigmaAffineEquation& eq, const Rational& target_precision,
                                      const SolveOptions& options = {}) {
  const auto& ctx = eq.rhs.ctx();
  if (!ctx) throw std::invalid_argument("solve_sigma_affine: rhs without field context");
  std::vector<std::pair<PuiseuxSeries, long>> lhs;
  for (const auto& t : eq.terms) {
    if (!t.first.is_known_zero()) lhs.push_back(t);
  }
  if (lhs.empty()) throw std::invalid_argument("solve_sigma_affine: trivial left-hand side");
  if (lhs.size() > 2) throw std::invalid_argument("solve_sigma_affine: at most two terms supported");
  if (lhs.size() == 2 && lhs[0].second == lhs[1].second) {
    throw std::invalid_argument("solve_sigma_affine: terms must have distinct sigma-exponents");
  }
  if (lhs.size() == 2 && lhs[0].second < lhs[1].second) std::swap(lhs[0], lhs[1]);
  for (const auto& t : lhs) {
    if (t.second < 0) throw std::invalid_argument("solve_sigma_affine: sigma-exponents must be >= 0");
  }

  const Rational q(static_cast<unsigned long>(ctx->q()));
  SolveResult result;
  Rational target = target_precision;
  if (!eq.rhs.precision().is_infinite() && eq.rhs.precision().value() < target) target = eq.rhs.precision().value();

  // One-term equation: x = sigma^{-k}(rhs / u).
  if (lhs.size() == 1) {
    const auto& [u, k] = lhs[0];
    const Rational vu = *u.val();
    PuiseuxSeries ratio = eq.rhs.truncated(Bound(target)) * u.inverse(target - vu + Rational(1));
    result.x = ratio.sigma(-k);
    result.declared_precision = target;
    result.residual_bound = eq.residual(result.x).val_bound();
    result.steps = 1;
    if (result.residual_bound < Bound(target)) {
      throw SolverBudgetExhausted("one-term solve could not certify the residual");
    }
    return result;
  }

  const auto& [u1, k1] = lhs[0];
  const auto& [u2, k2] = lhs[1];
  const Rational v1 = *u1.val();
  const Rational v2 = *u2.val();
  const FieldElem l1 = u1.leading_coeff();
  const FieldElem l2 = u2.leading_coeff();
  const Rational q1 = rpow(ctx->q(), k1);
  const Rational q2 = rpow(ctx->q(), k2);
  const Rational r_star = (v2 - v1) / (q1 - q2);
  const Rational s_star = v1 + q1 * r_star;
  result.barrier = s_star;

  if (auto low = eq.rhs.val(); low && *low < s_star && target >= s_star) {
    const Rational gap = (s_star - *low) / rpow(ctx->q(), (k1 - k2) * options.approach_steps);
    target = s_star - gap;
  }
  result.declared_precision = target;

  auto preimage_exponent = [&](const Rational& s) -> Rational { return s <= s_star ? (s - v1) / q1 : (s - v2) / q2; };

  PuiseuxSeries residual = eq.rhs.truncated(Bound(target));
  PuiseuxSeries x = PuiseuxSeries::zero(ctx);
  const std::vector<std::pair<FieldElem, long>> coeff_terms{{l1, k1}, {l2, k2}};
  while (!residual.is_known_zero()) {
    if (++result.steps > options.max_steps) {
      throw SolverBudgetExhausted("greedy sigma solve exceeded its step budget");
    }
    const Rational s = *residual.val();
    const FieldElem d = residual.leading_coeff();
    PuiseuxSeries term;
    if (s < s_star) {
      term = PuiseuxSeries::monomial((d * l1.inverse()).frobenius(-k1), (s - v1) / q1);
    } else if (s > s_star) {
      term = PuiseuxSeries::monomial((d * l2.inverse()).frobenius(-k2), (s - v2) / q2);
    } else {
      auto y = solve_q_linearized_smallest(coeff_terms, d);
      if (!y) detail::throw_extension_for_qlinear(coeff_terms, d);
      term = PuiseuxSeries::monomial(*y, r_star);
    }
    x += term;
    residual = (residual - (u1 * term.sigma(k1) + u2 * term.sigma(k2))).truncated(Bound(target));
  }

  x = x.truncated(Bound(preimage_exponent(target)));
  result.x = x;
  result.residual_bound = eq.residual(x).val_bound();
  if (result.residual_bound < Bound(target)) {
    throw SolverBudgetExhausted("post-check failed: residual below declared precision");
  }
  return result;
}

}  // namespace loopleaf

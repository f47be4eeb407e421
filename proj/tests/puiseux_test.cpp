#include <gtest/gtest.h>

#include "loopleaf/puiseux.hpp"
#include "loopleaf/sigma_solve.hpp"

using namespace loopleaf;

namespace {

Rational R(long a, long b = 1) { return make_rational(a, b); }

PuiseuxSeries mono(const FieldCtxPtr& ctx, long a, long b = 1) { return PuiseuxSeries::monomial(ctx->one(), R(a, b)); }

}  // namespace

TEST(Puiseux, ValuationAndZero) {
  auto ctx = FieldCtx::make(2, 1, 1);
  EXPECT_FALSE(PuiseuxSeries::zero(ctx).val());
  PuiseuxSeries x = mono(ctx, 3, 7) + mono(ctx, -1, 2);
  EXPECT_EQ(*x.val(), R(-1, 2));
  EXPECT_EQ(x.size(), 2u);
  // characteristic 2 cancellation
  EXPECT_TRUE((x + x).is_exact_zero());
}

TEST(Puiseux, ProductByHand) {
  auto ctx = FieldCtx::make(3, 1, 1);
  // (1 + pi^(1/2)) (1 - pi^(1/2)) = 1 - pi
  PuiseuxSeries a = PuiseuxSeries::one(ctx) + mono(ctx, 1, 2);
  PuiseuxSeries b = PuiseuxSeries::one(ctx) - mono(ctx, 1, 2);
  EXPECT_EQ(a * b, PuiseuxSeries::one(ctx) - PuiseuxSeries::pi(ctx));
}

TEST(Puiseux, PrecisionPropagation) {
  auto ctx = FieldCtx::make(2, 1, 1);
  PuiseuxSeries a = mono(ctx, 0) + PuiseuxSeries::big_o(ctx, R(2));
  PuiseuxSeries b = mono(ctx, 1, 3);
  EXPECT_EQ((a * b).precision(), Bound(R(7, 3)));
  EXPECT_EQ((a + b).precision(), Bound(R(2)));
  EXPECT_EQ(a.sigma(1).precision(), Bound(R(4)));
}

TEST(Puiseux, GeometricInverse) {
  auto ctx = FieldCtx::make(2, 1, 1);
  // 1/(1 + pi) = sum (-pi)^k, exact to relative precision 5
  PuiseuxSeries x = PuiseuxSeries::one(ctx) + PuiseuxSeries::pi(ctx);
  PuiseuxSeries inv = x.inverse(R(5));
  EXPECT_EQ(inv.precision(), Bound(R(5)));
  for (long k = 0; k < 5; ++k) ASSERT_TRUE(inv.coeff(R(k))) << k;
  PuiseuxSeries prod = x * inv;
  EXPECT_TRUE(prod.agrees_with(PuiseuxSeries::one(ctx)));
}

TEST(Puiseux, MonomialInverseIsExact) {
  auto ctx = FieldCtx::make(5, 1, 2);
  PuiseuxSeries x = PuiseuxSeries::monomial(ctx->gen(), R(-3, 4));
  PuiseuxSeries inv = x.inverse();
  EXPECT_TRUE(inv.is_exact());
  EXPECT_EQ(x * inv, PuiseuxSeries::one(ctx));
}

TEST(Puiseux, SigmaScalesExponentsAndRaisesCoefficients) {
  auto f4 = FieldCtx::make(2, 1, 2);
  PuiseuxSeries x = PuiseuxSeries::monomial(f4->gen(), R(1, 6));
  PuiseuxSeries y = x.sigma(1);
  EXPECT_EQ(*y.val(), R(1, 3));
  EXPECT_EQ(y.leading_coeff(), f4->gen() * f4->gen());
  EXPECT_EQ(y.sigma(-1), x);
  EXPECT_EQ(PuiseuxSeries::pi(f4).sigma(2), mono(f4, 4));
}

TEST(Puiseux, ConstantTermRequiresIntegrality) {
  auto ctx = FieldCtx::make(2, 1, 1);
  EXPECT_THROW((mono(ctx, -1, 2)).constant_term(), std::domain_error);
  EXPECT_TRUE((mono(ctx, 1, 2) + PuiseuxSeries::one(ctx)).constant_term().is_one());
  EXPECT_TRUE(mono(ctx, 1, 2).constant_term().is_zero());
}

TEST(SigmaMonomial, ClosedFormExponent) {
  // sigma^a x = u sigma^b x with u = pi: exponent 1/(q^a - q^b)
  for (std::uint32_t p : {2u, 3u}) {
    auto ctx = FieldCtx::make(p, 1, 1);
    for (auto [a, b] : std::vector<std::pair<long, long>>{{1, 0}, {2, 0}, {3, 1}, {5, 2}}) {
      PuiseuxSeries x = solve_sigma_monomial(a, b, PuiseuxSeries::pi(ctx));
      const Integer d = ipow(p, a) - ipow(p, b);
      EXPECT_EQ(*x.val(), make_rational(Integer(1), d));
      EXPECT_EQ(x.sigma(a), PuiseuxSeries::pi(ctx) * x.sigma(b));
    }
  }
}

TEST(SigmaMonomial, NeedsRootOfMinusOne) {
  // sigma^3 x = -pi sigma x over F_3: y^24 = -1 needs an element of order divisible by 16
  std::uint32_t expected = 1;
  while ((ipow(3, expected) - 1) % 16 != 0) ++expected;
  auto f3 = FieldCtx::make(3, 1, 1);
  try {
    solve_sigma_monomial(3, 1, -PuiseuxSeries::pi(f3));
    FAIL() << "expected an extension request";
  } catch (const ExtensionRequired& ex) {
    EXPECT_EQ(ex.needed_degree(), expected);
  }
  auto ext = FieldCtx::make(3, 1, expected);
  PuiseuxSeries x = solve_sigma_monomial(3, 1, -PuiseuxSeries::pi(ext));
  EXPECT_EQ(x.sigma(3), -PuiseuxSeries::pi(ext) * x.sigma(1));
  EXPECT_EQ(*x.val(), R(1, 24));
}

TEST(SigmaMonomial, RejectsBadShapes) {
  auto ctx = FieldCtx::make(2, 1, 1);
  EXPECT_THROW(solve_sigma_monomial(1, 1, PuiseuxSeries::pi(ctx)), std::invalid_argument);
  EXPECT_THROW(solve_sigma_monomial(2, 0, PuiseuxSeries::pi(ctx) + PuiseuxSeries::one(ctx)), std::invalid_argument);
}

TEST(SigmaAffine, SecondLevelGl3Valuation) {
  // sigma^2 x + pi x = x0 with x0 the monomial solution of sigma^3 x0 = -pi sigma x0
  for (auto [p, m] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 2}, {3, 4}}) {
    auto ctx = FieldCtx::make(p, 1, m);
    const Integer q = p;
    PuiseuxSeries x0 = solve_sigma_monomial(3, 1, -PuiseuxSeries::pi(ctx));
    EXPECT_EQ(*x0.val(), make_rational(Integer(1), q * (q * q - 1)));
    SigmaAffineEquation eq{{{PuiseuxSeries::one(ctx), 2}, {PuiseuxSeries::pi(ctx), 0}}, x0};
    auto r = solve_sigma_affine(eq, R(2));
    EXPECT_EQ(*r.x.val(), make_rational(Integer(1), q * q * q * (q * q - 1)));
    EXPECT_GE(r.residual_bound, Bound(r.declared_precision));
    EXPECT_LT(r.declared_precision, *r.barrier);
  }
}

TEST(SigmaAffine, LeadingTermBelowBarrier) {
  // sigma^5 x - pi sigma^2 x = pi: x = pi^(1/q^5) + higher
  auto ctx = FieldCtx::make(2, 1, 1);
  PuiseuxSeries pi = PuiseuxSeries::pi(ctx);
  SigmaAffineEquation eq{{{PuiseuxSeries::one(ctx), 5}, {-pi, 2}}, pi};
  auto r = solve_sigma_affine(eq, R(3, 2));
  EXPECT_EQ(*r.x.val(), R(1, 32));
  EXPECT_TRUE(r.x.leading_coeff().is_one());
  EXPECT_EQ(*r.barrier, R(32, 28));
  EXPECT_GE(eq.residual(r.x).val_bound(), Bound(r.declared_precision));
}

TEST(SigmaAffine, ArtinSchreierAtBarrier) {
  // sigma x + x = 1 over F_2: y^2 + y = 1 needs F_4
  auto f2 = FieldCtx::make(2, 1, 1);
  SigmaAffineEquation eq2{{{PuiseuxSeries::one(f2), 1}, {PuiseuxSeries::one(f2), 0}}, PuiseuxSeries::one(f2)};
  try {
    solve_sigma_affine(eq2, R(1));
    FAIL() << "expected an extension request";
  } catch (const ExtensionRequired& ex) {
    EXPECT_EQ(ex.needed_degree(), 2u);
  }
  auto f4 = FieldCtx::make(2, 1, 2);
  SigmaAffineEquation eq4{{{PuiseuxSeries::one(f4), 1}, {PuiseuxSeries::one(f4), 0}}, PuiseuxSeries::one(f4)};
  auto r = solve_sigma_affine(eq4, R(1));
  const FieldElem y = r.x.constant_term();
  EXPECT_TRUE((y * y + y).is_one());
  EXPECT_TRUE(eq4.residual(r.x).is_known_zero());
}

TEST(SigmaAffine, AboveBarrierUsesLowBranch) {
  // sigma x - pi^-1 x = pi^2: barrier -3/2, solution starts at pi^3
  auto ctx = FieldCtx::make(3, 1, 1);
  SigmaAffineEquation eq{{{PuiseuxSeries::one(ctx), 1}, {-mono(ctx, -1), 0}}, mono(ctx, 2)};
  auto r = solve_sigma_affine(eq, R(10));
  EXPECT_EQ(*r.barrier, R(-3, 2));
  EXPECT_EQ(*r.x.val(), R(3));
  EXPECT_EQ(r.declared_precision, R(10));
  EXPECT_GE(eq.residual(r.x).val_bound(), Bound(R(10)));
}

TEST(SigmaAffine, ClampBelowBarrier) {
  auto ctx = FieldCtx::make(2, 1, 1);
  PuiseuxSeries pi = PuiseuxSeries::pi(ctx);
  SigmaAffineEquation eq{{{PuiseuxSeries::one(ctx), 2}, {pi, 0}}, PuiseuxSeries::one(ctx)};
  SolveOptions opts;
  opts.approach_steps = 3;
  auto r = solve_sigma_affine(eq, R(5), opts);
  // s* = 4/3, rhs at 0: clamp to s* - (4/3) 2^-6
  EXPECT_EQ(*r.barrier, R(4, 3));
  EXPECT_EQ(r.declared_precision, R(4, 3) - R(4, 3) / 64);
  EXPECT_GE(r.residual_bound, Bound(r.declared_precision));
  // target exactly at the barrier is clamped too
  auto r2 = solve_sigma_affine(eq, R(4, 3), opts);
  EXPECT_EQ(r2.declared_precision, r.declared_precision);
}

TEST(SigmaAffine, RhsPrecisionCapsTarget) {
  auto ctx = FieldCtx::make(2, 1, 1);
  PuiseuxSeries rhs = mono(ctx, 1) + PuiseuxSeries::big_o(ctx, R(3, 2));
  SigmaAffineEquation eq{{{PuiseuxSeries::one(ctx), 0}}, rhs};
  auto r = solve_sigma_affine(eq, R(4));
  EXPECT_EQ(r.declared_precision, R(3, 2));
}

TEST(SigmaAffine, OneTermMatchesDivision) {
  auto ctx = FieldCtx::make(3, 1, 2);
  PuiseuxSeries u = PuiseuxSeries::monomial(ctx->gen(), R(1, 2));
  PuiseuxSeries rhs = mono(ctx, 1) + PuiseuxSeries::monomial(ctx->gen(), R(5, 3));
  SigmaAffineEquation eq{{{u, 2}}, rhs};
  auto r = solve_sigma_affine(eq, R(3));
  EXPECT_GE(eq.residual(r.x).val_bound(), Bound(R(3)));
  EXPECT_EQ(*r.x.val(), R(1, 18));
}

TEST(SigmaAffine, InputValidation) {
  auto ctx = FieldCtx::make(2, 1, 1);
  auto one = PuiseuxSeries::one(ctx);
  EXPECT_THROW(solve_sigma_affine({{{one, 1}, {one, 1}}, one}, R(1)), std::invalid_argument);
  EXPECT_THROW(solve_sigma_affine({{{one, 1}, {one, 2}, {one, 0}}, one}, R(1)), std::invalid_argument);
  EXPECT_THROW(solve_sigma_affine({{{PuiseuxSeries::zero(ctx), 1}}, one}, R(1)), std::invalid_argument);
  EXPECT_THROW(solve_sigma_affine({{{one, -1}}, one}, R(1)), std::invalid_argument);
}

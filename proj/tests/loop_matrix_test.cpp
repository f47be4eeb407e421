#include <gtest/gtest.h>

#include "loopleaf/leaf_closures.hpp"
#include "loopleaf/loop_matrix.hpp"

using namespace loopleaf;

namespace {

using L = Laurent<FieldElem>;

Rational R(long a, long b = 1) { return make_rational(a, b); }

std::vector<Rational> nu(std::initializer_list<Rational> v) { return v; }

FieldLoopMatrix from_rows(const FieldCtxPtr& ctx, const std::vector<std::vector<L>>& rows) {
  FieldLoopMatrix m(ctx, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace

TEST(Laurent, TruncatedArithmetic) {
  auto ctx = FieldCtx::make(3, 1, 1);
  L a = L::monomial(ctx->one(), -1) + L::one(ctx);
  L b = L::monomial(ctx->one(), 2).truncated(4);
  L prod = a * b;
  EXPECT_EQ(prod.order(), std::optional<long>(3));
  EXPECT_TRUE(prod.coeff(1).is_one());
  EXPECT_TRUE(prod.coeff(2).is_one());
  EXPECT_THROW(prod.coeff(3), PrecisionInsufficient);
}

TEST(Laurent, InverseOfOnePlusEps) {
  auto ctx = FieldCtx::make(3, 1, 1);
  L x = L::one(ctx) + L::monomial(ctx->one(), 1);
  L inv = x.inverse(6);
  for (long k = 0; k < 6; ++k) EXPECT_EQ(inv.coeff(k), (k % 2 ? -ctx->one() : ctx->one())) << k;
}

TEST(LoopMatrix, InverseOfIdentity) {
  auto ctx = FieldCtx::make(2, 1, 2);
  auto id = FieldLoopMatrix::identity(ctx, 4);
  auto inv = mat_inv(id);
  EXPECT_TRUE((inv - id).is_known_zero());
}

TEST(LoopMatrix, InverseOfBlockPermutation) {
  auto ctx = FieldCtx::make(3, 1, 1);
  FieldLoopMatrix b = preset_b2(ctx);
  FieldLoopMatrix expected(ctx, 5);
  expected(1, 0) = L::one(ctx);
  expected(2, 1) = L::one(ctx);
  expected(0, 2) = L::monomial(ctx->one(), -1);
  expected(4, 3) = L::one(ctx);
  expected(3, 4) = L::monomial(ctx->one(), -1);
  auto inv = mat_inv(b);
  EXPECT_TRUE((inv - expected).is_known_zero()) << inv.str();
  EXPECT_TRUE((mat_mul(b, inv) - FieldLoopMatrix::identity(ctx, 5)).is_known_zero());
}

TEST(LoopMatrix, InverseOfUnipotent) {
  auto ctx = FieldCtx::make(5, 1, 1);
  const FieldElem two = ctx->one() + ctx->one();
  FieldLoopMatrix u = from_rows(ctx, {{L::one(ctx), L::monomial(two, 1), L::monomial(ctx->one(), -2)},
                                      {L::zero(ctx), L::one(ctx), L::monomial(two, 3)},
                                      {L::zero(ctx), L::zero(ctx), L::one(ctx)}});
  auto inv = mat_inv(u);
  EXPECT_TRUE((mat_mul(u, inv) - FieldLoopMatrix::identity(ctx, 3)).is_known_zero());
  // (1,3) of the inverse: a b - c = 2 eps * 2 eps^3 - eps^-2
  EXPECT_EQ(inv(0, 2), L::monomial(ctx->one() + ctx->one() + ctx->one() + ctx->one(), 4) - L::monomial(ctx->one(), -2));
}

TEST(LoopMatrix, SigmaTwistActsOnCoefficientsOnly) {
  auto f4 = FieldCtx::make(2, 1, 2);
  FieldLoopMatrix m(f4, 2);
  m(0, 1) = L::monomial(f4->gen(), 3);
  auto s = sigma_twist(m, 1);
  EXPECT_EQ(s(0, 1), L::monomial(f4->gen() * f4->gen(), 3));
  EXPECT_TRUE((sigma_twist(m, 2) - m).is_known_zero());
}

TEST(LoopMatrix, SigmaConjugateDefinition) {
  auto f4 = FieldCtx::make(2, 1, 2);
  FieldLoopMatrix g = FieldLoopMatrix::identity(f4, 2);
  g(0, 1) = L::monomial(f4->gen(), 1);
  g(1, 1) = L::constant(f4->gen());
  FieldLoopMatrix b = from_rows(f4, {{L::zero(f4), L::one(f4)}, {L::monomial(f4->one(), 1), L::zero(f4)}});
  auto c = sigma_conjugate(g, b);
  EXPECT_TRUE((mat_mul(g, c) - mat_mul(b, sigma_twist(g, 1))).is_known_zero());
  EXPECT_EQ(newton_point(c), newton_point(b));
}

TEST(LoopMatrix, CharpolyOfBlocks) {
  auto ctx = FieldCtx::make(3, 1, 1);
  // (l^3 - eps)(l^2 - eps) = l^5 - eps l^3 - eps l^2 + eps^2
  auto c = charpoly(preset_b2(ctx));
  ASSERT_EQ(c.size(), 6u);
  const FieldElem one = ctx->one();
  EXPECT_EQ(c[0], L::one(ctx));
  EXPECT_TRUE(c[1].is_known_zero());
  EXPECT_EQ(c[2], L::monomial(-one, 1));
  EXPECT_EQ(c[3], L::monomial(-one, 1));
  EXPECT_TRUE(c[4].is_known_zero());
  EXPECT_EQ(c[5], L::monomial(one, 2));
  // 3-cycle times a transposition
  EXPECT_EQ(determinant(preset_b2(ctx)), L::monomial(-one, 2));
}

TEST(LoopMatrix, DeterminantByCofactorExpansion) {
  auto ctx = FieldCtx::make(7, 1, 1);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    FieldLoopMatrix m(ctx, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) m(i, j) = L::monomial(ctx->random(rng), static_cast<long>(rng() % 3)) + L::constant(ctx->random(rng));
    }
    L cof = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
            m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    EXPECT_TRUE((determinant(m) - cof).is_known_zero());
    EXPECT_TRUE((charpoly(m)[3] + cof).is_known_zero());
  }
}

TEST(LoopMatrix, CartanInvariants) {
  auto ctx = FieldCtx::make(2, 1, 1);
  EXPECT_EQ(cartan_invariants(FieldLoopMatrix::eps_power(ctx, {0, 2, 1})), (std::vector<long>{2, 1, 0}));
  // gcd of entries eps^0, det eps^2
  FieldLoopMatrix m = from_rows(ctx, {{L::monomial(ctx->one(), 1), L::one(ctx)}, {L::zero(ctx), L::monomial(ctx->one(), 1)}});
  EXPECT_EQ(cartan_invariants(m), (std::vector<long>{2, 0}));
  EXPECT_EQ(cartan_invariants(preset_b2(ctx)), (std::vector<long>{1, 1, 0, 0, 0}));
  auto f4 = FieldCtx::make(2, 1, 2);
  for (const FieldElem& t : {f4->zero(), f4->one(), f4->gen()}) {
    EXPECT_EQ(cartan_invariants(family_x_t_b2(t)), (std::vector<long>{1, 1, 0, 0, 0}));
    EXPECT_EQ(cartan_invariants(family_x_t_b3(t)), (std::vector<long>{1, 1, 0, 0, 0}));
  }
}

TEST(LoopMatrix, NewtonPointsOfPresets) {
  auto ctx = FieldCtx::make(2, 1, 2);
  EXPECT_EQ(newton_point(preset_b2(ctx)), nu({R(1, 2), R(1, 2), R(1, 3), R(1, 3), R(1, 3)}));
  EXPECT_EQ(newton_point(preset_b1(ctx)), std::vector<Rational>(5, R(2, 5)));
  EXPECT_EQ(newton_point(FieldLoopMatrix::identity(ctx, 5)), std::vector<Rational>(5, R(0)));
  EXPECT_EQ(newton_point(preset_gl3_split(ctx)), nu({R(1, 2), R(1, 2), R(0)}));
  for (const FieldElem& t : {ctx->zero(), ctx->one(), ctx->gen()}) {
    EXPECT_EQ(newton_point(family_x_t_b3(t)), nu({R(1, 2), R(1, 2), R(1, 2), R(1, 2), R(0)}));
    EXPECT_EQ(newton_point(family_x_t_b2(t)), newton_point(preset_b2(ctx)));
  }
}

TEST(LoopMatrix, NewtonPointNeedsFrobeniusNorm) {
  // [[0, c], [eps, 0]] with c not in F_p: the norm over F_4 still has slope 1/2
  auto f4 = FieldCtx::make(2, 1, 2);
  FieldLoopMatrix m = from_rows(f4, {{L::zero(f4), L::constant(f4->gen())}, {L::monomial(f4->one(), 1), L::zero(f4)}});
  EXPECT_EQ(newton_point(m), nu({R(1, 2), R(1, 2)}));
  // diag(1, eps^3) twisted by a unipotent with a generic entry keeps slopes (3, 0)
  FieldLoopMatrix d = FieldLoopMatrix::eps_power(f4, {0, 3});
  d(0, 1) = L::constant(f4->gen());
  EXPECT_EQ(newton_point(d), nu({R(3), R(0)}));
}

TEST(LoopMatrix, PrecisionInsufficientReportsOrder) {
  auto ctx = FieldCtx::make(2, 1, 1);
  FieldLoopMatrix b = preset_b2(ctx).truncated(1);
  try {
    newton_point(b);
    FAIL() << "expected PrecisionInsufficient";
  } catch (const PrecisionInsufficient& ex) {
    EXPECT_GT(ex.required_order(), 1);
  }
  EXPECT_EQ(newton_point(preset_b2(ctx).truncated(4)), newton_point(preset_b2(ctx)));
}

TEST(LoopMatrix, MembershipInK) {
  auto ctx = FieldCtx::make(3, 1, 1);
  EXPECT_TRUE(is_in_K(FieldLoopMatrix::identity(ctx, 3)));
  EXPECT_FALSE(is_in_K(preset_b2(ctx)));
  FieldLoopMatrix m = FieldLoopMatrix::identity(ctx, 2);
  m(0, 1) = L::monomial(ctx->one(), -1);
  EXPECT_FALSE(is_in_K(m));
  m(0, 1) = L::monomial(ctx->one(), 1);
  EXPECT_TRUE(is_in_K(m));
}

TEST(LoopMatrix, SpecializationAtPiZero) {
  auto ctx = FieldCtx::make(2, 1, 1);
  auto x = preset_x_pi(ctx);
  auto s = specialize_pi_zero(x);
  EXPECT_TRUE((s - preset_b1(ctx)).is_known_zero());
  EXPECT_TRUE((specialize_pi_zero(lift_to_puiseux(preset_b2(ctx))) - preset_b2(ctx)).is_known_zero());
  PuiseuxLoopMatrix bad = lift_to_puiseux(preset_b1(ctx));
  bad(0, 0) = Laurent<PuiseuxSeries>::constant(PuiseuxSeries::monomial(ctx->one(), R(-1, 3)));
  EXPECT_THROW(specialize_pi_zero(bad), std::domain_error);
}

TEST(LoopMatrix, PuiseuxInverseRoundTrip) {
  auto ctx = FieldCtx::make(2, 1, 1);
  auto x = preset_gl3_pi(ctx);
  auto inv = mat_inv(x);
  auto prod = mat_mul(x, inv);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const auto& e = prod(i, j);
      for (const auto& [k, c] : e.terms()) {
        if (i == j && k == 0) {
          EXPECT_TRUE((c - PuiseuxSeries::one(ctx)).is_known_zero());
        } else {
          EXPECT_TRUE(c.is_known_zero()) << i << "," << j << " eps^" << k << ": " << c.str();
        }
      }
    }
  }
}

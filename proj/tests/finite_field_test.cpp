#include <gtest/gtest.h>

#include <set>

#include "loopleaf/finite_field.hpp"

using namespace loopleaf;

namespace {

std::vector<FieldElem> all_elements(const FieldCtxPtr& ctx) {
  std::vector<FieldElem> out;
  for (Integer c = 0; c < ctx->order(); ++c) out.push_back(ctx->from_encoding(c));
  return out;
}

}  // namespace

TEST(FiniteField, ModulusIrreducibleAndOrder) {
  for (auto [p, d] : std::vector<std::pair<std::uint32_t, std::uint32_t>>{{2, 1}, {2, 4}, {2, 7}, {3, 3}, {5, 2}, {7, 3}}) {
    auto ctx = FieldCtx::make(p, 1, d);
    ASSERT_EQ(ctx->modulus().size(), d + 1);
    EXPECT_TRUE(poly::is_irreducible(ctx->modulus(), p));
    EXPECT_EQ(ctx->order(), ipow(p, d));
  }
}

TEST(FiniteField, ModulusHasNoRootsByEnumeration) {
  for (std::uint32_t d : {2u, 3u}) {
    auto ctx = FieldCtx::make(3, 1, d);
    const auto& f = ctx->modulus();
    for (std::uint32_t x = 0; x < 3; ++x) {
      std::uint64_t acc = 0;
      for (std::size_t i = f.size(); i-- > 0;) acc = (acc * x + f[i]) % 3;
      EXPECT_NE(acc, 0u);
    }
  }
}

TEST(FiniteField, FrobeniusIdentity) {
  auto ctx = FieldCtx::make(2, 2, 3);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    FieldElem a = ctx->random(rng);
    EXPECT_EQ(a.frobenius(0), a);
    EXPECT_EQ(a.frobenius(1).frobenius(-1), a);
    EXPECT_EQ(a.frobenius(static_cast<long>(ctx->M())), a);
  }
}

TEST(FiniteField, F4DefiningRelation) {
  auto f4 = FieldCtx::make(2, 1, 2);
  const FieldElem g = f4->gen();
  EXPECT_EQ(g * g, g + f4->one());
  EXPECT_EQ(g.frobenius(1), g + f4->one());
}

TEST(FiniteField, InverseByEnumeration) {
  auto ctx = FieldCtx::make(3, 1, 2);
  for (const auto& x : all_elements(ctx)) {
    if (x.is_zero()) continue;
    int hits = 0;
    for (const auto& y : all_elements(ctx)) hits += (x * y).is_one();
    EXPECT_EQ(hits, 1);
    EXPECT_TRUE((x * x.inverse()).is_one());
  }
}

TEST(FiniteField, NthRootTrivialCases) {
  auto f2 = FieldCtx::make(2, 1, 1);
  auto r = nth_root(f2->one(), 1);
  ASSERT_TRUE(r.root);
  EXPECT_TRUE(r.root->is_one());
  auto f5 = FieldCtx::make(5, 1, 1);
  r = nth_root(f5->one(), 4);
  ASSERT_TRUE(r.root);
  EXPECT_TRUE(r.root->pow(4).is_one());
  r = nth_root(f5->zero(), 7);
  ASSERT_TRUE(r.root);
  EXPECT_TRUE(r.root->is_zero());
  EXPECT_THROW(nth_root(f5->one(), 0), std::invalid_argument);
}

TEST(FiniteField, NthRootAgainstEnumerationInF4) {
  auto f4 = FieldCtx::make(2, 1, 2);
  std::vector<FieldElem> roots;
  for (const auto& y : all_elements(f4)) {
    if (y.pow(6).is_one()) roots.push_back(y);
  }
  auto r = nth_root(f4->one(), 6);
  ASSERT_TRUE(r.root);
  EXPECT_TRUE(r.root->pow(6).is_one());
  // smallest encoding among all roots
  EXPECT_EQ(r.root->encoding(), roots.front().encoding());
}

TEST(FiniteField, NthRootReportsExtension) {
  // y^3 = g with g of order 3 needs y of order 9: F_(2^6) is the first field with 9 | 2^M' - 1
  auto f4 = FieldCtx::make(2, 1, 2);
  auto r = nth_root(f4->gen(), 3);
  EXPECT_FALSE(r.root);
  std::uint32_t expected = 0;
  for (std::uint32_t m = 2;; m += 2) {
    if (((1u << m) - 1) % 9 == 0) {
      expected = m;
      break;
    }
  }
  EXPECT_EQ(r.required_M, expected);
  auto big = FieldCtx::make(2, 1, expected);
  FieldEmbedding emb(f4, big);
  auto r2 = nth_root(emb(f4->gen()), 3);
  ASSERT_TRUE(r2.root);
  EXPECT_EQ(r2.root->pow(3), emb(f4->gen()));
}

TEST(FiniteField, NthRootDeterministic) {
  auto ctx = FieldCtx::make(3, 1, 4);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    FieldElem x = ctx->random(rng);
    auto a = nth_root(x, 4), b = nth_root(x, 4);
    ASSERT_EQ(a.root.has_value(), b.root.has_value());
    if (a.root) {
      EXPECT_EQ(*a.root, *b.root);
      EXPECT_EQ(a.root->pow(4), x);
    }
  }
}

TEST(FiniteField, ArtinSchreierKernelIsFq) {
  for (auto [p, e, m] : std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>>{{2, 1, 3}, {2, 2, 2}, {3, 1, 2}}) {
    auto ctx = FieldCtx::make(p, e, m);
    auto sols = solve_q_linearized({{ctx->one(), 1}, {-ctx->one(), 0}}, ctx->zero());
    std::set<std::string> got, fixed;
    for (const auto& s : sols) got.insert(s.to_hex());
    for (const auto& y : all_elements(ctx)) {
      if (y.pow(ctx->q()) == y) fixed.insert(y.to_hex());
    }
    EXPECT_EQ(got, fixed);
    EXPECT_EQ(got.size(), ctx->q());
  }
}

TEST(FiniteField, FrobeniusEquationHasOneSolution) {
  auto ctx = FieldCtx::make(2, 1, 5);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 5; ++i) {
    FieldElem a = ctx->random(rng);
    auto sols = solve_q_linearized({{ctx->one(), 1}}, a);
    ASSERT_EQ(sols.size(), 1u);
    EXPECT_EQ(sols[0].frobenius(1), a);
  }
}

TEST(FiniteField, QSquaredPlusXOverF4) {
  auto f4 = FieldCtx::make(2, 1, 2);
  auto sols = solve_q_linearized({{f4->one(), 2}, {f4->one(), 0}}, f4->zero());
  int brute = 0;
  for (const auto& y : all_elements(f4)) brute += (y.pow(4) + y).is_zero();
  EXPECT_EQ(static_cast<int>(sols.size()), brute);
  EXPECT_EQ(sols.size(), 4u);
}

TEST(FiniteField, SolutionSetClosedUnderKernel) {
  auto ctx = FieldCtx::make(2, 1, 4);
  const FieldElem g = ctx->gen();
  std::vector<std::pair<FieldElem, long>> terms{{ctx->one(), 2}, {g, 1}, {g * g, 0}};
  auto kernel = solve_q_linearized(terms, ctx->zero());
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    FieldElem rhs = ctx->random(rng);
    auto sols = solve_q_linearized(terms, rhs);
    std::set<std::string> set;
    for (const auto& s : sols) set.insert(s.to_hex());
    for (const auto& s : sols) {
      for (const auto& k : kernel) EXPECT_TRUE(set.count((s + k).to_hex()));
    }
    if (!sols.empty()) EXPECT_EQ(sols.size(), kernel.size());
  }
}

TEST(FiniteField, QLinearizedRejectsZeroCoefficients) {
  auto ctx = FieldCtx::make(2, 1, 2);
  EXPECT_THROW(solve_q_linearized({{ctx->zero(), 1}}, ctx->one()), std::invalid_argument);
}

TEST(FiniteField, HexRoundTrip) {
  auto ctx = FieldCtx::make(3, 2, 2);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    FieldElem x = ctx->random(rng);
    EXPECT_EQ(ctx->from_hex(x.to_hex()), x);
  }
}

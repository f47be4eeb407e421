#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "loopleaf/json_io.hpp"

using namespace loopleaf;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Byte-exact comparison; LOOPLEAF_UPDATE_GOLDEN=1 rewrites the file instead.
void check_golden(const std::string& name, const std::string& content) {
  const fs::path path = fs::path(LOOPLEAF_GOLDEN_DIR) / name;
  if (const char* up = std::getenv("LOOPLEAF_UPDATE_GOLDEN"); up && *up && std::string(up) != "0") {
    fs::create_directories(path.parent_path());
    std::ofstream(path) << content;
    return;
  }
  ASSERT_TRUE(fs::exists(path)) << path << " missing; rerun with LOOPLEAF_UPDATE_GOLDEN=1";
  EXPECT_EQ(read_file(path), content) << name;
}

WitnessParams defaults(const std::string& t) {
  WitnessParams w;
  w.t_hex = t;
  return w;
}

}  // namespace

TEST(JsonIo, IntegersSwitchToStringsWhenLarge) {
  EXPECT_EQ(json_io::integer(Integer(42)), json_io::json(42));
  const Integer big = ipow(2, 100);
  EXPECT_TRUE(json_io::integer(big).is_string());
  EXPECT_EQ(json_io::parse_integer(json_io::integer(big)), big);
  EXPECT_THROW(json_io::parse_integer(json_io::json(1.5)), std::invalid_argument);
}

TEST(JsonIo, FieldRoundTrip) {
  auto ctx = FieldCtx::make(3, 2, 2);
  auto back = json_io::parse_field(json_io::field(*ctx));
  EXPECT_EQ(back->p(), 3u);
  EXPECT_EQ(back->q(), 9u);
  EXPECT_EQ(back->modulus(), ctx->modulus());
}

TEST(JsonIo, FieldMatrixRoundTrip) {
  auto ctx = FieldCtx::make(2, 1, 3);
  std::mt19937_64 rng(8);
  FieldLoopMatrix m(ctx, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      Laurent<FieldElem> s(ctx, (i + j) % 2 ? std::optional<long>(4) : std::nullopt);
      for (long k = -1; k < 3; ++k) s.add_term(k, ctx->random(rng));
      m(i, j) = s;
    }
  }
  auto j = json_io::matrix(m);
  EXPECT_EQ(j.at("schema_version"), json_io::schema_version);
  auto back = json_io::parse_matrix<FieldElem>(j);
  EXPECT_EQ(json_io::matrix(back).dump(), j.dump());
}

TEST(JsonIo, PuiseuxMatrixRoundTrip) {
  auto ctx = FieldCtx::make(2, 1, 1);
  auto s = solve_gl3(ctx, 2, make_rational(3, 2));
  auto j = json_io::matrix(s.g);
  EXPECT_EQ(j.at("base"), "puiseux");
  auto back = json_io::parse_matrix<PuiseuxSeries>(j);
  EXPECT_EQ(json_io::matrix(back).dump(), j.dump());
}

TEST(JsonIo, BareEntryListsAreExact) {
  auto j = json_io::json::parse(R"({"field": {"p": 2, "M": 1},
    "entries": [[[], [[0, "1"]], []], [[], [], [[0, "1"]]], [[[1, "1"]], [], []]]})");
  auto m = json_io::parse_matrix<FieldElem>(j);
  EXPECT_TRUE(m.is_exact());
  EXPECT_EQ(newton_point(m), std::vector<Rational>(3, make_rational(1, 3)));
  auto bad = json_io::json::parse(R"({"field": {"p": 2}, "entries": [[[]], [[], []]]})");
  EXPECT_THROW(json_io::parse_matrix<FieldElem>(bad), std::invalid_argument);
}

TEST(JsonIo, PresetMatrixUsesHexCoefficients) {
  auto j = json_io::matrix(preset_b2(FieldCtx::make(2, 1, 1)));
  EXPECT_EQ(j["entries"][2][0]["terms"][0][0], 1);
  EXPECT_EQ(j["entries"][2][0]["terms"][0][1], "1");
  EXPECT_TRUE(j["entries"][0][0]["terms"].empty());
}

TEST(Golden, BgEnumGl5Json) { check_golden("bg_enum_gl5.json", json_io::table(enumerate_bg_mu({1, 1, 0, 0, 0})).dump(2) + "\n"); }

TEST(Golden, BgEnumGl5Dot) { check_golden("bg_enum_gl5.dot", to_dot(enumerate_bg_mu({1, 1, 0, 0, 0}))); }

TEST(Golden, WitnessGl3) { check_golden("witness_gl3_q2_t1.json", json_io::report(witness_b3_to_b2(defaults("1"))).dump(2) + "\n"); }

TEST(Golden, WitnessGl3ZeroParameter) {
  check_golden("witness_gl3_q2_t0.json", json_io::report(witness_b3_to_b2(defaults("0"))).dump(2) + "\n");
}

TEST(Golden, WitnessGl5) { check_golden("witness_gl5_q2_t1.json", json_io::report(witness_b2_to_b1(defaults("1"))).dump(2) + "\n"); }

TEST(Golden, Deterministic) {
  const auto a = json_io::report(witness_b2_to_b1(defaults("1"))).dump();
  const auto b = json_io::report(witness_b2_to_b1(defaults("1"))).dump();
  EXPECT_EQ(a, b);
}

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "loopleaf/json_io.hpp"
#include "loopleaf/leaf_closures.hpp"
#include "loopleaf/newton.hpp"

using namespace loopleaf;
namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kFail = 1, kPrecision = 2, kUsage = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::uint32_t, std::uint32_t> split_prime_power(std::uint64_t q) {
  if (q < 2) throw UsageError("q must be a prime power");
  std::uint64_t p = 2;
  while (q % p != 0) ++p;
  std::uint32_t e = 0;
  std::uint64_t r = q;
  while (r % p == 0) {
    r /= p;
    ++e;
  }
  if (r != 1) throw UsageError("q = " + std::to_string(q) + " is not a prime power");
  return {static_cast<std::uint32_t>(p), e};
}

std::vector<long> parse_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stol(item));
    } catch (const std::exception&) {
      throw UsageError("not an integer list: " + text);
    }
  }
  return out;
}

/// "-" is stdout; relative paths land under $LOOPLEAF_OUTPUT_DIR when set.
void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  fs::path target(path);
  if (const char* dir = std::getenv("LOOPLEAF_OUTPUT_DIR"); dir && *dir && target.is_relative()) target = fs::path(dir) / target;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream out(target);
  if (!out) throw std::runtime_error("cannot write " + target.string());
  out << text;
}

struct FieldOpts {
  std::uint64_t q = 2;
  std::uint32_t M = 1;
  FieldCtxPtr make() const {
    auto [p, e] = split_prime_power(q);
    return FieldCtx::make(p, e, M);
  }
};

void add_field(CLI::App* cmd, FieldOpts& f) {
  cmd->add_option("--q", f.q, "residue field size (prime power)")->capture_default_str();
  cmd->add_option("--M", f.M, "ambient degree over F_q")->capture_default_str();
}

FieldLoopMatrix preset_matrix(const std::string& name, const FieldCtxPtr& ctx, const std::string& t_hex) {
  const FieldElem t = ctx->from_hex(t_hex);
  if (name == "b1") return preset_b1(ctx);
  if (name == "b2") return preset_b2(ctx);
  if (name == "identity") return FieldLoopMatrix::identity(ctx, 5);
  if (name == "xt-b3") return family_x_t_b3(t);
  if (name == "xt-b2") return family_x_t_b2(t);
  if (name == "gl3-split") return preset_gl3_split(ctx);
  throw UsageError("unknown preset " + name);
}

void print_report(const WitnessReport& r) {
  std::cout << r.scenario << "  q=" << r.q << " M=" << r.M << " t=" << r.t_hex << " eps-order=" << r.eps_order
            << " depth=" << r.depth << "\n";
  for (const auto& e : r.residuals) {
    std::cout << "  residual  " << (e.pass ? "ok  " : "FAIL") << "  " << e.label << "  >= " << to_string(e.declared) << "\n";
  }
  for (const auto& v : r.valuations) {
    std::cout << "  val       " << (v.pass ? "ok  " : "FAIL") << "  " << v.label << " = "
              << (v.computed ? to_string(*v.computed) : std::string("?")) << " (expected " << to_string(v.expected) << ")\n";
  }
  for (const auto& c : r.checks) {
    std::cout << "  check     " << (c.pass ? "ok  " : "FAIL") << "  " << c.name;
    if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
    std::cout << "\n";
  }
  for (const auto& n : r.notes) std::cout << "  note      " << n << "\n";
  std::cout << (r.pass() ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"loop group computations over F_q((eps))"};
  app.require_subcommand(1);

  // bg-enum
  long n = 5;
  std::string mu_text = "1,1,0,0,0", json_path, dot_path;
  auto* bg = app.add_subcommand("bg-enum", "enumerate B(GL_n, mu)");
  bg->add_option("--n", n)->capture_default_str();
  bg->add_option("--mu", mu_text, "comma-separated dominant cocharacter")->capture_default_str();
  bg->add_option("--json", json_path, "write JSON (- for stdout)");
  bg->add_option("--dot", dot_path, "write the Hasse diagram as DOT (- for stdout)");

  // newton / cartan
  FieldOpts fopts;
  std::string preset = "b2", t_hex = "1", matrix_path;
  bool as_json = false;
  auto* newton = app.add_subcommand("newton", "Newton point of a matrix over F_q((eps))");
  auto* cartan = app.add_subcommand("cartan", "Cartan invariants of a matrix over F_q((eps))");
  for (auto* cmd : {newton, cartan}) {
    add_field(cmd, fopts);
    cmd->add_option("--preset", preset, "b1|b2|identity|xt-b3|xt-b2|gl3-split")->capture_default_str();
    cmd->add_option("--t", t_hex, "parameter t (hex encoding)")->capture_default_str();
    cmd->add_option("--matrix", matrix_path, "LoopMatrix JSON file (overrides --preset)");
    cmd->add_flag("--json", as_json, "print JSON");
  }

  // witness
  WitnessParams wp;
  std::string scenario;
  std::uint64_t wq = 2;
  std::string pi_precision = "2";
  auto* witness = app.add_subcommand("witness", "sigma-conjugation witness for a closure relation");
  witness->add_option("scenario", scenario, "gl3|gl5")->required()->check(CLI::IsMember({"gl3", "gl5"}));
  witness->add_option("--q", wq)->capture_default_str();
  witness->add_option("--M", wp.M, "starting ambient degree")->capture_default_str();
  witness->add_option("--max-M", wp.max_M)->capture_default_str();
  witness->add_option("--t", wp.t_hex)->capture_default_str();
  witness->add_option("--depth", wp.depth)->capture_default_str();
  witness->add_option("--eps-order", wp.eps_order)->capture_default_str();
  witness->add_option("--pi-precision", pi_precision)->capture_default_str();
  witness->add_option("--json", json_path, "write the report as JSON (- for stdout)");

  // prop23
  Prop23Params pp;
  FieldOpts popts;
  std::uint64_t seed = 1;
  int count = 1;
  std::string p_preset = "b2";
  auto* prop = app.add_subcommand("prop23", "l in K_d with b h = l^-1 b sigma(l) for random h in K_(d+c)");
  add_field(prop, popts);
  prop->add_option("--d", pp.d)->capture_default_str();
  prop->add_option("--c", pp.c)->capture_default_str();
  prop->add_option("--eps-order", pp.eps_order)->capture_default_str();
  prop->add_option("--max-M", pp.max_M)->capture_default_str();
  prop->add_option("--seed", seed)->capture_default_str();
  prop->add_option("--count", count, "number of random h")->capture_default_str();
  prop->add_option("--preset", p_preset, "b (see newton --preset)")->capture_default_str();
  prop->add_option("--json", json_path, "write results as JSON (- for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*bg) {
      auto mu = parse_list(mu_text);
      if (static_cast<long>(mu.size()) != n) throw UsageError("--mu must have n entries");
      if (!is_dominant(mu)) throw UsageError("--mu must be weakly decreasing");
      BGmuTable t = enumerate_bg_mu(mu);
      std::cout << "B(GL_" << n << ", (" << mu_text << ")): " << t.classes.size() << " classes\n";
      auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size() + 1, w), ' ');
        return s;
      };
      std::cout << pad("  i  nu", 36) << pad("defect", 8) << pad("dim X_mu(b)", 13) << "dim leaf\n";
      for (std::size_t i = 0; i < t.classes.size(); ++i) {
        std::cout << pad("  " + std::to_string(i + 1) + "  " + compact_str(t.classes[i]), 36)
                  << pad(std::to_string(t.defects[i]), 8) << pad(to_string(t.adlv_dims[i]), 13) << to_string(t.leaf_dims[i])
                  << "\n";
      }
      if (!json_path.empty()) emit(json_path, json_io::table(t).dump(2) + "\n");
      if (!dot_path.empty()) emit(dot_path, to_dot(t));
      return kPass;
    }
    if (*newton || *cartan) {
      auto ctx = fopts.make();
      FieldLoopMatrix b;
      if (!matrix_path.empty()) {
        std::ifstream in(matrix_path);
        if (!in) throw UsageError("cannot read " + matrix_path);
        auto j = json_io::json::parse(in);
        b = j.contains("field") ? json_io::parse_matrix<FieldElem>(j) : json_io::parse_matrix<FieldElem>(j, ctx);
      } else {
        b = preset_matrix(preset, ctx, t_hex);
      }
      if (*newton) {
        NewtonPoint nu = newton_point(b);
        if (as_json) {
          std::cout << json_io::json{{"schema_version", json_io::schema_version}, {"newton_point", json_io::newton_point(nu)}}.dump(2)
                    << "\n";
        } else {
          std::cout << vector_str(nu) << "\n";
        }
      } else {
        auto mu = cartan_invariants(b);
        if (as_json) {
          std::cout << json_io::json{{"schema_version", json_io::schema_version}, {"cartan_invariants", mu}}.dump(2) << "\n";
        } else {
          std::cout << vector_str(as_newton_point(mu)) << "\n";
        }
      }
      return kPass;
    }
    if (*witness) {
      auto [p, e] = split_prime_power(wq);
      wp.p = p;
      wp.e = e;
      wp.pi_precision = parse_rational(pi_precision);
      WitnessReport r = scenario == "gl3" ? witness_b3_to_b2(wp) : witness_b2_to_b1(wp);
      print_report(r);
      if (!json_path.empty()) emit(json_path, json_io::report(r).dump(2) + "\n");
      return r.pass() ? kPass : kFail;
    }
    if (*prop) {
      auto ctx = popts.make();
      FieldLoopMatrix b = preset_matrix(p_preset, ctx, "0");
      std::mt19937_64 rng(seed);
      json_io::json runs = json_io::json::array();
      int ok = 0;
      for (int k = 0; k < count; ++k) {
        FieldLoopMatrix h = random_k_element(ctx, b.size(), pp.d + pp.c, pp.eps_order, rng);
        Prop23Result r = prop23_witness(b, h, pp);
        std::cout << "h#" << k + 1 << ": ";
        if (r.success) {
          ++ok;
          std::cout << "solved over M=" << r.M << " (" << r.unknowns << " unknowns, kernel dim " << r.kernel_dim << ")\n";
        } else {
          std::cout << (r.rejected ? "rejected: " : "not solved: ") << r.reason << "\n";
        }
        auto j = json_io::prop23(r);
        j["h"] = json_io::matrix(h);
        runs.push_back(j);
      }
      std::cout << ok << "/" << count << " solved\n";
      if (!json_path.empty()) {
        emit(json_path, json_io::json{{"schema_version", json_io::schema_version},
                                      {"preset", p_preset},
                                      {"d", pp.d},
                                      {"c", pp.c},
                                      {"eps_order", pp.eps_order},
                                      {"seed", seed},
                                      {"runs", runs}}
                                .dump(2) +
                            "\n");
      }
      return ok == count ? kPass : kFail;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const PrecisionInsufficient& e) {
    std::cerr << "precision insufficient: " << e.what();
    if (e.required_order()) std::cerr << " (eps-order " << e.required_order() << " suffices)";
    std::cerr << "\n";
    return kPrecision;
  } catch (const ExtensionRequired& e) {
    std::cerr << "field extension required: " << e.what() << " (degree " << e.needed_degree() << ")\n";
    return kPrecision;
  } catch (const SolverBudgetExhausted& e) {
    std::cerr << "solver budget exhausted: " << e.what() << "\n";
    return kPrecision;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}

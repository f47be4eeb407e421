#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "loopleaf/leaf_closures.hpp"
#include "loopleaf/newton.hpp"

namespace loopleaf::json_io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

// Integers go out as numbers when they fit in 64 bits, else as decimal strings.
inline json integer(const Integer& z) {
  if (z.fits_slong_p()) return z.get_si();
  return z.get_str();
}

inline Integer parse_integer(const json& j) {
  if (j.is_number_integer()) return Integer(j.get<long>());
  if (j.is_string()) return Integer(j.get<std::string>());
  throw std::invalid_argument("expected an integer");
}

inline json rational(const Rational& r) { return to_string(r); }
inline json bound(const Bound& b) { return b.is_infinite() ? json(nullptr) : rational(b.value()); }

inline json field(const FieldCtx& ctx) {
  return {{"p", ctx.p()}, {"e", ctx.e()}, {"M", ctx.M()}, {"modulus", ctx.modulus()}};
}

inline FieldCtxPtr parse_field(const json& j) {
  const auto p = j.at("p").get<std::uint32_t>();
  const auto e = j.value("e", 1u);
  const auto m = j.value("M", 1u);
  if (j.contains("modulus")) return FieldCtx::make_with_modulus(p, e, m, j.at("modulus").get<poly::Poly>());
  return FieldCtx::make(p, e, m);
}

inline json coeff(const FieldElem& x) { return x.to_hex(); }
inline json coeff(const PuiseuxSeries& x) {
  json terms = json::array();
  for (const auto& [r, c] : x.terms()) terms.push_back({integer(r.get_num()), integer(r.get_den()), c.to_hex()});
  return {{"terms", terms}, {"precision", bound(x.precision())}};
}

inline FieldElem parse_coeff(const FieldCtxPtr& ctx, const json& j, const FieldElem*) {
  return ctx->from_hex(j.get<std::string>());
}
inline PuiseuxSeries parse_coeff(const FieldCtxPtr& ctx, const json& j, const PuiseuxSeries*) {
  const json& prec = j.at("precision");
  PuiseuxSeries out = prec.is_null() ? PuiseuxSeries::zero(ctx) : PuiseuxSeries::big_o(ctx, parse_rational(prec.get<std::string>()));
  for (const auto& t : j.at("terms")) {
    out.add_term(make_rational(parse_integer(t.at(0)), parse_integer(t.at(1))), ctx->from_hex(t.at(2).get<std::string>()));
  }
  return out;
}

template <class C>
json matrix(const LoopMatrix<C>& m) {
  json entries = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.size(); ++j) {
      const auto& s = m(i, j);
      json terms = json::array();
      for (const auto& [k, c] : s.terms()) terms.push_back({k, coeff(c)});
      json cell = {{"terms", terms}};
      cell["order"] = s.order() ? json(*s.order()) : json(nullptr);
      row.push_back(cell);
    }
    entries.push_back(row);
  }
  json out = {{"schema_version", schema_version},
              {"size", m.size()},
              {"base", std::is_same_v<C, FieldElem> ? "field" : "puiseux"},
              {"field", field(*m.ctx())}};
  out["order"] = m.order() ? json(*m.order()) : json(nullptr);
  out["entries"] = entries;
  return out;
}

/// Rows of entries, each {"terms": [[eps-exponent, coefficient], ...], "order": N|null}.
/// A bare list of [exponent, coefficient] pairs is accepted as an exact entry.
template <class C>
LoopMatrix<C> parse_matrix(const json& j, FieldCtxPtr ctx = nullptr) {
  if (!ctx) ctx = parse_field(j.at("field"));
  const json& rows = j.at("entries");
  const std::size_t n = rows.size();
  LoopMatrix<C> m(ctx, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw std::invalid_argument("matrix rows must have length " + std::to_string(n));
    for (std::size_t k = 0; k < n; ++k) {
      const json& cell = rows[i][k];
      const json& terms = cell.is_array() ? cell : cell.at("terms");
      std::optional<long> order;
      if (cell.is_object() && cell.contains("order") && !cell.at("order").is_null()) order = cell.at("order").get<long>();
      if (!cell.is_object() && j.contains("order") && !j.at("order").is_null()) order = j.at("order").get<long>();
      Laurent<C> s(ctx, order);
      for (const auto& t : terms) s.add_term(t.at(0).get<long>(), parse_coeff(ctx, t.at(1), static_cast<const C*>(nullptr)));
      m(i, k) = s;
    }
  }
  return m;
}

inline json newton_point(const NewtonPoint& nu) {
  json out = json::array();
  for (const auto& s : nu) out.push_back(rational(s));
  return out;
}

inline json table(const BGmuTable& t) {
  json classes = json::array();
  for (std::size_t i = 0; i < t.classes.size(); ++i) {
    classes.push_back({{"index", i + 1},
                       {"nu", newton_point(t.classes[i])},
                       {"compact", compact_str(t.classes[i])},
                       {"defect", t.defects[i]},
                       {"dim_adlv", rational(t.adlv_dims[i])},
                       {"dim_leaf", rational(t.leaf_dims[i])}});
  }
  json edges = json::array();
  for (const auto& [lo, hi] : hasse_diagram(t)) edges.push_back({lo + 1, hi + 1});
  return {{"schema_version", schema_version}, {"mu", t.mu}, {"classes", classes}, {"hasse", edges}};
}

inline json report(const WitnessReport& r) {
  json out = {{"schema_version", schema_version},
              {"scenario", r.scenario},
              {"pass", r.pass()},
              {"params",
               {{"p", r.p},
                {"e", r.e},
                {"M", r.M},
                {"q", r.q},
                {"t", r.t_hex},
                {"eps_order", r.eps_order},
                {"depth", r.depth},
                {"pi_precision", rational(r.pi_precision)}}},
              {"degrees_tried", r.degrees_tried}};
  json res = json::array();
  for (const auto& e : r.residuals) {
    res.push_back({{"label", e.label}, {"declared", rational(e.declared)}, {"residual", bound(e.residual)}, {"pass", e.pass}});
  }
  out["residuals"] = res;
  json vals = json::array();
  for (const auto& v : r.valuations) {
    vals.push_back({{"label", v.label},
                    {"computed", v.computed ? rational(*v.computed) : json(nullptr)},
                    {"expected", rational(v.expected)},
                    {"pass", v.pass}});
  }
  out["valuations"] = vals;
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  out["checks"] = checks;
  out["notes"] = r.notes;
  if (r.g) out["g"] = matrix(*r.g);
  if (r.conjugated) out["conjugated"] = matrix(*r.conjugated);
  if (r.specialization) out["specialization"] = matrix(*r.specialization);
  if (r.target) out["target"] = matrix(*r.target);
  return out;
}

inline json prop23(const Prop23Result& r) {
  json out = {{"schema_version", schema_version},
              {"success", r.success},
              {"rejected", r.rejected},
              {"reason", r.reason},
              {"M", r.M},
              {"degrees_tried", r.degrees_tried},
              {"unknowns", r.unknowns},
              {"kernel_dim", r.kernel_dim}};
  if (r.l) out["l"] = matrix(*r.l);
  return out;
}

}  // namespace loopleaf::json_io

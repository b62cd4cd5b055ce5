#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddpgd/offline.hpp"
#include "ddpgd/subdomain.hpp"

namespace ddpgd {

enum class Coupling { StokesStokes, StokesDarcy };

struct ExactSolution {
  std::string u, v, p;
};

/// Complete description of a coupled parametric problem.
struct CaseConfig {
  std::string name;
  Coupling coupling = Coupling::StokesStokes;
  std::map<std::string, double> constants;
  ParamSpace params;
  std::vector<SubdomainSpec> subdomains;
  std::optional<SubdomainSpec> reference;  // single-domain problem for the monolithic solve
  std::optional<ExactSolution> exact;
  std::vector<double> mu;                  // default online point
  PgdOptions pgd;
  double compress_tol = 1e-3;
  double gmres_tol = 1e-6;
  nlohmann::json source;
};

namespace detail {

using nlohmann::json;

inline double num(const json& j, const std::string& ctx) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return Expression(j.get<std::string>(), {})(std::span<const double>());
  throw ConfigError(ctx + ": expected a number");
}

inline Box parse_box(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 4) throw ConfigError(ctx + ": box must be [x0, x1, y0, y1]");
  return {num(j[0], ctx), num(j[1], ctx), num(j[2], ctx), num(j[3], ctx)};
}

inline std::vector<Segment> parse_segments(const json& j, const std::string& ctx) {
  std::vector<Segment> out;
  if (!j.is_array() || j.empty()) throw ConfigError(ctx + ": spacing table must be a non-empty list");
  for (const auto& s : j) {
    if (!s.is_array() || s.size() != 2) throw ConfigError(ctx + ": spacing entries are [length, cells]");
    double len = num(s[0], ctx), cells = num(s[1], ctx);
    out.push_back({len, static_cast<int>(std::lround(cells))});
  }
  return out;
}

inline FieldSpec parse_field(const json& j, const std::string& ctx) {
  FieldSpec f;
  if (!j.is_array()) throw ConfigError(ctx + ": a field is a list of terms");
  for (const auto& t : j) {
    FieldTermSpec term;
    auto strings = [&](const json& a) {
      std::vector<std::string> v;
      if (a.is_string()) v.push_back(a.get<std::string>());
      else if (a.is_array())
        for (const auto& e : a) v.push_back(e.is_string() ? e.get<std::string>() : e.dump());
      else throw ConfigError(ctx + ": expected expression list");
      return v;
    };
    if (t.contains("space")) {
      term.kind = FieldTermSpec::Kind::Separable;
      term.space = strings(t["space"]);
      if (t.contains("params"))
        for (auto& [k, v] : t["params"].items()) term.params[k] = v.is_string() ? v.get<std::string>() : v.dump();
    } else if (t.contains("sample")) {
      term.kind = FieldTermSpec::Kind::Sampled;
      term.sample = strings(t["sample"]);
    } else if (t.contains("inverse_of")) {
      term.kind = FieldTermSpec::Kind::InverseOf;
      term.source = t["inverse_of"].get<std::string>();
    } else {
      throw ConfigError(ctx + ": term needs 'space', 'sample' or 'inverse_of'");
    }
    if (t.contains("tol")) term.tol = num(t["tol"], ctx);
    f.terms.push_back(std::move(term));
  }
  return f;
}

inline SubdomainSpec parse_subdomain(const json& j, const std::string& ctx0) {
  SubdomainSpec s;
  s.name = j.value("name", ctx0);
  const std::string ctx = "subdomain '" + s.name + "'";
  std::string phys = j.value("physics", "");
  if (phys == "stokes") s.physics = Physics::Stokes;
  else if (phys == "darcy") s.physics = Physics::Darcy;
  else throw ConfigError(ctx + ": physics must be 'stokes' or 'darcy'");
  s.velocity_degree = j.value("velocity_degree", 1);
  s.pressure_degree = j.value("pressure_degree", 1);
  if (!j.contains("mesh")) throw ConfigError(ctx + ": missing mesh");
  const auto& m = j["mesh"];
  s.mesh.x0 = m.contains("x0") ? num(m["x0"], ctx) : 0.0;
  s.mesh.y0 = m.contains("y0") ? num(m["y0"], ctx) : 0.0;
  if (!m.contains("x") || !m.contains("y")) throw ConfigError(ctx + ": mesh needs 'x' and 'y' spacing tables");
  s.mesh.x = parse_segments(m["x"], ctx);
  s.mesh.y = parse_segments(m["y"], ctx);
  if (m.contains("active"))
    for (const auto& b : m["active"]) s.mesh.active.push_back(parse_box(b, ctx));
  if (j.contains("parameters"))
    for (const auto& p : j["parameters"]) s.parameters.push_back(p.get<std::string>());
  s.tau = j.contains("tau") ? num(j["tau"], ctx) : 0.0;
  s.beta = j.contains("beta") ? num(j["beta"], ctx) : 0.0;
  if (!j.contains("boundary")) throw ConfigError(ctx + ": missing boundary rules");
  for (const auto& r : j["boundary"]) {
    BoundaryRule rule;
    if (r.contains("box")) rule.box = parse_box(r["box"], ctx);
    rule.label = r.value("label", "");
    rule.data = r.value("data", "");
    s.boundary.push_back(rule);
  }
  if (j.contains("fields"))
    for (auto& [k, v] : j["fields"].items()) s.fields[k] = parse_field(v, ctx + " field '" + k + "'");
  for (const auto& r : s.boundary)
    if (!r.data.empty() && !s.fields.count(r.data))
      throw ConfigError(ctx + ": boundary data '" + r.data + "' has no field definition");
  return s;
}

}  // namespace detail

inline CaseConfig parse_case(const nlohmann::json& j) {
  using detail::num;
  CaseConfig c;
  c.source = j;
  c.name = j.value("name", "case");
  std::string cp = j.value("coupling", "stokes-stokes");
  if (cp == "stokes-stokes") c.coupling = Coupling::StokesStokes;
  else if (cp == "stokes-darcy") c.coupling = Coupling::StokesDarcy;
  else throw ConfigError("coupling must be 'stokes-stokes' or 'stokes-darcy'");
  if (j.contains("constants"))
    for (auto& [k, v] : j["constants"].items()) c.constants[k] = num(v, "constant " + k);
  if (!j.contains("parameters")) throw ConfigError("missing 'parameters'");
  for (const auto& p : j["parameters"]) {
    std::string name = p.value("name", "");
    if (name.empty()) throw ConfigError("parameter without name");
    if (p.contains("range")) {
      const auto& r = p["range"];
      c.params.axes.push_back(ParamAxis::range(name, num(r[0], name), num(r[1], name), num(r[2], name)));
    } else if (p.contains("values")) {
      ParamAxis a{name, {}};
      for (const auto& v : p["values"]) a.points.push_back(num(v, name));
      c.params.axes.push_back(a);
    } else {
      throw ConfigError("parameter '" + name + "' needs 'range' or 'values'");
    }
  }
  if (!j.contains("subdomains") || j["subdomains"].size() != 2) throw ConfigError("exactly two subdomains required");
  int k = 1;
  for (const auto& s : j["subdomains"]) c.subdomains.push_back(detail::parse_subdomain(s, "omega" + std::to_string(k++)));
  if (c.coupling == Coupling::StokesStokes &&
      (c.subdomains[0].physics != Physics::Stokes || c.subdomains[1].physics != Physics::Stokes))
    throw ConfigError("stokes-stokes coupling needs two Stokes subdomains");
  if (c.coupling == Coupling::StokesDarcy &&
      (c.subdomains[0].physics != Physics::Stokes || c.subdomains[1].physics != Physics::Darcy))
    throw ConfigError("stokes-darcy coupling needs a Stokes then a Darcy subdomain");
  if (j.contains("reference")) c.reference = detail::parse_subdomain(j["reference"], "reference");
  if (j.contains("exact")) {
    const auto& e = j["exact"];
    c.exact = ExactSolution{e.at("u").get<std::string>(), e.at("v").get<std::string>(), e.at("p").get<std::string>()};
  }
  if (j.contains("mu"))
    for (const auto& v : j["mu"]) c.mu.push_back(num(v, "mu"));
  if (j.contains("pgd")) {
    const auto& p = j["pgd"];
    c.pgd.enrich_tol = p.value("enrich_tol", c.pgd.enrich_tol);
    c.pgd.max_modes = p.value("max_modes", c.pgd.max_modes);
    c.pgd.max_inner = p.value("max_inner", c.pgd.max_inner);
    c.pgd.inner_tol = p.value("inner_tol", c.pgd.inner_tol);
  }
  c.compress_tol = j.value("compress_tol", c.compress_tol);
  c.gmres_tol = j.value("gmres_tol", c.gmres_tol);
  return c;
}

inline CaseConfig load_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  return parse_case(j);
}

}  // namespace ddpgd

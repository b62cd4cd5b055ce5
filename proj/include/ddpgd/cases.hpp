#pragma once

#include <string>
#include <vector>

#include "ddpgd/config.hpp"

namespace ddpgd {

namespace cases {

using nlohmann::json;

inline json box(double x0, double x1, double y0, double y1) { return json::array({x0, x1, y0, y1}); }

inline json rule(const std::string& label, const json& b = nullptr, const std::string& data = "") {
  json r{{"label", label}};
  if (!b.is_null()) r["box"] = b;
  if (!data.empty()) r["data"] = data;
  return r;
}

inline json term(std::vector<std::string> space, json params = json::object()) {
  json t{{"space", space}};
  if (!params.empty()) t["params"] = params;
  return t;
}

inline json sampled(std::vector<std::string> comps) { return json{{"sample", comps}, {"tol", 1e-4}}; }

/// Two-subdomain Stokes problem with parametric viscosity (1 - y) + y mu on the unit square.
inline json stokes_stokes() {
  const std::vector<std::string> u0{"(3*x-y)/100", "(3*x^2-3*y-x)/100"};
  const std::vector<std::string> u1{"x^2*(1-x)^2*(2*y-6*y^2+4*y^3)", "-y^2*(1-y)^2*(2*x-6*x^2+4*x^3)"};
  json fields;
  fields["nu"] = {term({"1-y"}), term({"y"}, {{"mu", "mu"}})};
  fields["f"] = {
      term({"(3*x-1)/50", "-(97*y-144)/50"}),
      term({"(1800*x^4*y^2 - 2400*x^4*y + 700*x^4 - 3600*x^3*y^2 + 4800*x^3*y - 1400*x^3 + 1800*x^2*y^4 - "
            "4800*x^2*y^3 + 6000*x^2*y^2 - 3600*x^2*y + 550*x^2 - 1800*x*y^4 + 4800*x*y^3 - 4200*x*y^2 + 1200*x*y - "
            "3*x + 300*y^4 - 800*y^3 + 700*y^2 - 200*y + 51)/50",
            "-(y - 1)*(4000*x^3*y^2 - 3200*x^3*y + 400*x^3 - 6000*x^2*y^2 + 4800*x^2*y - 600*x^2 + 1200*x*y^4 - "
            "2400*x*y^3 + 3200*x*y^2 - 1600*x*y + 200*x - 600*y^4 + 1200*y^3 - 600*y^2 + 3)/50"},
           {{"mu", "mu"}}),
      term({"-2*(18*x^4*y^2 - 12*x^4*y + x^4 - 36*x^3*y^2 + 24*x^3*y - 2*x^3 + 18*x^2*y^4 - 24*x^2*y^3 + "
            "24*x^2*y^2 - 12*x^2*y + x^2 - 18*x*y^4 + 24*x*y^3 - 6*x*y^2 + 3*y^4 - 4*y^3 + y^2)",
            "4*y*(2*x - 1)*(10*x^2*y^2 - 12*x^2*y + 3*x^2 - 10*x*y^2 + 12*x*y - 3*x + 3*y^4 - 6*y^3 + 3*y^2)"},
           {{"mu", "mu^2"}})};
  fields["g_D"] = {term(u0), term(u1, {{"mu", "mu"}})};
  // traction on the bottom edge, outward normal (0, -1)
  fields["g_N"] = {term({"-(3*x-1)/50", "3/50"}), term({"-2*x^2*(x-1)^2", "-x*(x-1)*(x+1)"}, {{"mu", "mu"}})};

  auto sub = [&](const std::string& name, double x0, double x1, double xi) {
    json s;
    s["name"] = name;
    s["physics"] = "stokes";
    s["velocity_degree"] = 2;
    s["pressure_degree"] = 1;
    s["mesh"] = {{"x0", x0}, {"y0", 0.0}, {"x", {{x1 - x0, 11}}}, {"y", {{1.0, 20}}}};
    s["parameters"] = {"mu"};
    json rules = json::array();
    if (xi >= 0) rules.push_back(rule("interface", box(xi, xi, 0, 1)));
    rules.push_back(rule("neumann", box(x0, x1, 0, 0), "g_N"));
    rules.push_back(rule("dirichlet", nullptr, "g_D"));
    s["boundary"] = rules;
    s["fields"] = fields;
    return s;
  };
  json c;
  c["name"] = "stokes_stokes";
  c["coupling"] = "stokes-stokes";
  c["parameters"] = {{{"name", "mu"}, {"range", {1.0, 5.0, 1e-3}}}};
  c["subdomains"] = {sub("omega1", 0.0, 0.55, 0.55), sub("omega2", 0.45, 1.0, 0.45)};
  json ref = sub("global", 0.0, 1.0, -1);
  ref["mesh"]["x"] = {{1.0, 20}};
  c["reference"] = ref;
  c["exact"] = {{"u", u0[0] + "+mu*(" + u1[0] + ")"}, {"v", u0[1] + "+mu*(" + u1[1] + ")"}, {"p", "y*(3-y)+mu*x*(1-x^2)"}};
  c["mu"] = {3.0};
  c["pgd"] = {{"enrich_tol", 1e-4}};
  c["compress_tol"] = 1e-3;
  c["gmres_tol"] = 1e-6;
  return c;
}

/// Stokes-Darcy problem with an analytic solution; `stokes_degree` selects Q1-Q1 GLS or Q2-Q1.
inline json stokes_darcy_analytic(int stokes_degree = 1) {
  const std::string arg = "(x*mu1/sqrt(nu*K)+mu2)";
  const std::string ey = "exp(y*mu1/sqrt(nu*K))";
  const std::string eb = "exp(mu1/(2*sqrt(nu*K)))";
  const std::string a = "(mu1/sqrt(nu*K))";
  const std::string u = "sin" + arg + "*" + ey;
  const std::string v = "-cos" + arg + "*" + ey;
  const std::string p = "sqrt(nu/K)*(1/mu1-mu1)*cos" + arg + "*" + eb + "+y-0.5";

  json stokes;
  stokes["name"] = "omega1";
  stokes["physics"] = "stokes";
  stokes["velocity_degree"] = stokes_degree;
  stokes["pressure_degree"] = 1;
  stokes["mesh"] = {{"x0", 0.0}, {"y0", 0.45}, {"x", {{1.0, 40}}}, {"y", {{0.55, 22}}}};
  stokes["parameters"] = {"mu1", "mu2"};
  stokes["tau"] = stokes_degree == 1 ? 5.5 : 0.0;
  stokes["boundary"] = {rule("interface", box(0, 1, 0.45, 0.45)), rule("dirichlet", box(0, 0, 0.45, 1), "g_D"),
                        rule("neumann", box(0, 1, 1, 1), "g_N_top"), rule("neumann", box(1, 1, 0.45, 1), "g_N_right")};
  json sf;
  sf["nu"] = {term({"nu"})};
  sf["f"] = {sampled({"(mu1^2-1)/K*sin" + arg + "*" + eb, "1"})};
  sf["g_D"] = {sampled({u, v})};
  sf["g_N_top"] = {sampled({"2*nu*" + a + "*sin" + arg + "*" + ey, "-2*nu*" + a + "*cos" + arg + "*" + ey + "-(" + p + ")"})};
  sf["g_N_right"] = {sampled({"2*nu*" + a + "*cos" + arg + "*" + ey + "-(" + p + ")", "2*nu*" + a + "*sin" + arg + "*" + ey})};
  stokes["fields"] = sf;

  json darcy;
  darcy["name"] = "omega2";
  darcy["physics"] = "darcy";
  darcy["velocity_degree"] = 1;
  darcy["pressure_degree"] = 1;
  darcy["mesh"] = {{"x0", 0.0}, {"y0", 0.0}, {"x", {{1.0, 40}}}, {"y", {{0.55, 22}}}};
  darcy["parameters"] = {"mu1", "mu2"};
  darcy["beta"] = 1.0;
  darcy["boundary"] = {rule("interface", box(0, 1, 0.55, 0.55)), rule("pressure", box(1, 1, 0, 0.55), "g_D"),
                       rule("flux", nullptr, "g_N")};
  json df;
  df["nu"] = {term({"nu"})};
  df["nu_inv"] = {term({"1/nu"})};
  df["K"] = {term({"K"})};
  df["K_inv"] = {term({"1/K"})};
  df["f"] = {sampled({"nu/K*sin" + arg + "*" + ey + "+(mu1^2-1)/K*sin" + arg + "*" + eb, "-nu/K*cos" + arg + "*" + ey + "+1"})};
  df["g_D"] = {sampled({p})};
  df["g_N"] = {sampled({u, v})};
  darcy["fields"] = df;

  json c;
  c["name"] = stokes_degree == 1 ? "stokes_darcy_analytic" : "stokes_darcy_q2";
  c["coupling"] = "stokes-darcy";
  c["constants"] = {{"nu", 0.1}, {"K", 1.0}};
  c["parameters"] = {{{"name", "mu1"}, {"range", {0.1, 1.0, 0.1}}}, {{"name", "mu2"}, {"range", {1.0, 2.0, 0.05}}}};
  c["subdomains"] = {stokes, darcy};
  c["exact"] = {{"u", u}, {"v", v}, {"p", p}};
  c["mu"] = {0.5, 1.05};
  c["pgd"] = {{"enrich_tol", 1e-4}};
  c["compress_tol"] = 1e-3;
  c["gmres_tol"] = 1e-6;
  return c;
}

/// Membrane cross-flow: channel over a porous block, inflow angle mu1, scaled inverse permeability mu2.
/// `refine` = 1 gives the full mesh (h = 1/64), 2 the coarsened default.
inline json crossflow(int refine = 2) {
  const double h = refine / 64.0;
  const double w = h / 4;
  const int nfine = static_cast<int>(std::lround((1 - 4 * h) / h));
  json stokes;
  stokes["name"] = "omega1";
  stokes["physics"] = "stokes";
  stokes["mesh"] = {{"x0", 0.0},
                    {"y0", 0.5 - w},
                    {"x", {{3.0, static_cast<int>(std::lround(3 / h))}}},
                    {"y", {{w, 1}, {2 * h, 8}, {2 * h, 4}, {1 - 4 * h, nfine}}},
                    {"active", {box(0, 3, 0.5, 1.5), box(0.75, 2.125, 0.5 - w, 0.5)}}};
  stokes["parameters"] = {"mu1"};
  stokes["tau"] = 5.5;
  stokes["boundary"] = {rule("interface", box(0.75, 2.125, 0.5 - w, 0.5 - w)), rule("neumann", box(3, 3, 1.25, 1.5)),
                        rule("dirichlet", box(0, 0, 0.5, 1.5), "g_in"), rule("dirichlet")};
  json sf;
  sf["nu"] = {term({"nu"})};
  // dimensional profile (-16000 Y^2 + 160 Y - 0.3) with Y = 0.005 y, divided by the velocity scale 0.1
  sf["g_in"] = {term({"-4*y^2+8*y-3", "0"}, {{"mu1", "cos(mu1)"}}), term({"0", "-4*y^2+8*y-3"}, {{"mu1", "sin(mu1)"}})};
  stokes["fields"] = sf;

  json darcy;
  darcy["name"] = "omega2";
  darcy["physics"] = "darcy";
  darcy["mesh"] = {{"x0", 0.75},
                   {"y0", 0.0},
                   {"x", {{1.375, static_cast<int>(std::lround(1.375 / h))}}},
                   {"y", {{0.5 - 4 * h, static_cast<int>(std::lround((0.5 - 4 * h) / h))}, {2 * h, 4}, {2 * h, 8}}}};
  darcy["parameters"] = {"mu2"};
  darcy["beta"] = 1.0;
  darcy["boundary"] = {rule("interface", box(0.75, 2.125, 0.5, 0.5)), rule("pressure", box(0.75, 2.125, 0, 0)),
                       rule("flux")};
  json df;
  df["nu"] = {term({"nu"})};
  df["nu_inv"] = {term({"1/nu"})};
  df["K_inv"] = {term({"1/nu"}, {{"mu2", "mu2"}})};
  df["K"] = {{{"inverse_of", "K_inv"}, {"tol", 1e-4}}};
  darcy["fields"] = df;

  json c;
  c["name"] = refine == 1 ? "crossflow_full" : "crossflow";
  c["coupling"] = "stokes-darcy";
  c["constants"] = {{"nu", 0.002}};
  c["parameters"] = {{{"name", "mu1"}, {"range", {"-pi/2", "pi/2", "pi/8"}}},
                     {{"name", "mu2"}, {"values", {2e-6, 2e-5, 2e-4, 2e-3, 2e-2, 2e-1, 2.0, 20.0, 200.0}}}};
  c["subdomains"] = {stokes, darcy};
  c["mu"] = {0.0, 2e-5};
  c["pgd"] = {{"enrich_tol", 1e-4}};
  c["compress_tol"] = 1e-3;
  c["gmres_tol"] = 1e-6;
  return c;
}

inline std::vector<std::string> names() {
  return {"stokes_stokes", "stokes_darcy_analytic", "stokes_darcy_q2", "crossflow", "crossflow_full"};
}

}  // namespace cases

inline nlohmann::json builtin_case_json(const std::string& name) {
  if (name == "stokes_stokes") return cases::stokes_stokes();
  if (name == "stokes_darcy_analytic") return cases::stokes_darcy_analytic(1);
  if (name == "stokes_darcy_q2") return cases::stokes_darcy_analytic(2);
  if (name == "crossflow") return cases::crossflow(2);
  if (name == "crossflow_full") return cases::crossflow(1);
  throw ConfigError("unknown case '" + name + "'");
}

inline CaseConfig builtin_case(const std::string& name) { return parse_case(builtin_case_json(name)); }

}  // namespace ddpgd

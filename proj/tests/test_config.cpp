#include <gtest/gtest.h>

#include "ddpgd/cases.hpp"

using namespace ddpgd;
using nlohmann::json;

TEST(Config, BuiltinCasesParse) {
  for (const auto& n : cases::names()) {
    auto c = builtin_case(n);
    EXPECT_EQ(c.name, n);
    EXPECT_EQ(c.subdomains.size(), 2u);
    EXPECT_EQ(c.mu.size(), c.params.axes.size()) << n;
    EXPECT_DOUBLE_EQ(c.pgd.enrich_tol, 1e-4);
    EXPECT_DOUBLE_EQ(c.compress_tol, 1e-3);
  }
  EXPECT_THROW(builtin_case("nope"), ConfigError);
}

TEST(Config, ParameterGrids) {
  auto ss = builtin_case("stokes_stokes");
  ASSERT_EQ(ss.params.axes.size(), 1u);
  EXPECT_EQ(ss.params.axes[0].size(), 4001u);
  EXPECT_NEAR(ss.params.axes[0].points.back(), 5.0, 1e-12);
  auto sd = builtin_case("stokes_darcy_analytic");
  EXPECT_EQ(sd.params.axes[0].size(), 10u);
  EXPECT_EQ(sd.params.axes[1].size(), 21u);
  auto cf = builtin_case("crossflow");
  EXPECT_EQ(cf.params.axes[0].size(), 9u);
  EXPECT_NEAR(cf.params.axes[0].points.front(), -std::numbers::pi / 2, 1e-14);
  EXPECT_EQ(cf.params.axes[1].size(), 9u);
}

TEST(Config, JsonRoundTrip) {
  for (const auto& n : cases::names()) {
    auto j = builtin_case_json(n);
    auto c = parse_case(json::parse(j.dump()));
    EXPECT_EQ(c.source, j);
    auto d = parse_case(c.source);
    EXPECT_EQ(d.params.axes[0].points, c.params.axes[0].points);
  }
}

TEST(Config, OverridesAreRead) {
  auto j = cases::stokes_stokes();
  j["pgd"] = {{"enrich_tol", 1e-6}, {"max_modes", 7}, {"max_inner", 3}, {"inner_tol", 1e-3}};
  j["compress_tol"] = 1e-2;
  j["gmres_tol"] = 1e-9;
  auto c = parse_case(j);
  EXPECT_DOUBLE_EQ(c.pgd.enrich_tol, 1e-6);
  EXPECT_EQ(c.pgd.max_modes, 7);
  EXPECT_EQ(c.pgd.max_inner, 3);
  EXPECT_DOUBLE_EQ(c.pgd.inner_tol, 1e-3);
  EXPECT_DOUBLE_EQ(c.compress_tol, 1e-2);
  EXPECT_DOUBLE_EQ(c.gmres_tol, 1e-9);
}

TEST(Config, InvalidInputsAreRejected) {
  auto base = cases::stokes_stokes();
  auto bad = [&](auto edit) {
    auto j = base;
    edit(j);
    return j;
  };
  EXPECT_THROW(parse_case(bad([](json& j) { j.erase("parameters"); })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["parameters"][0].erase("range"); })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["parameters"][0]["range"] = {5.0, 1.0, 0.1}; })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["subdomains"].erase(1); })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["coupling"] = "stokes-navier"; })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["coupling"] = "stokes-darcy"; })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["subdomains"][0]["physics"] = "euler"; })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["subdomains"][0].erase("mesh"); })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["subdomains"][0]["boundary"][1]["data"] = "missing"; })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["subdomains"][0]["fields"]["nu"][0] = json::object(); })), ConfigError);
  EXPECT_THROW(parse_case(bad([](json& j) { j["mu"] = {"3+"}; })), ConfigError);
}

TEST(Config, InvalidLabelIsRejectedAtDiscretization) {
  auto j = cases::stokes_stokes();
  j["subdomains"][0]["boundary"][1]["label"] = "flux";
  auto c = parse_case(j);
  EXPECT_THROW(Subdomain(c.subdomains[0], c.params), ConfigError);
}

TEST(Config, MissingFileIsAConfigError) { EXPECT_THROW(load_case_file("/nonexistent/case.json"), ConfigError); }

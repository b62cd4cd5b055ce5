#include <cmath>

#include <gtest/gtest.h>

#include "ddpgd/cases.hpp"
#include "ddpgd/verify.hpp"

using namespace ddpgd;

namespace {
double eval(const std::string& s, std::vector<double> x = {0.3, 0.7}) {
  return Expression(s, {"x", "y"}, {{"nu", 0.1}})(std::span<const double>(x));
}
}  // namespace

TEST(Expression, ArithmeticAndPrecedence) {
  EXPECT_DOUBLE_EQ(eval("1+2*3"), 7.0);
  EXPECT_DOUBLE_EQ(eval("2^3^2"), 512.0);
  EXPECT_DOUBLE_EQ(eval("-x^2"), -0.09);
  EXPECT_DOUBLE_EQ(eval("(x+y)/2"), 0.5);
  EXPECT_NEAR(eval("sqrt(nu)*sin(pi/2)"), std::sqrt(0.1), 1e-15);
  EXPECT_NEAR(eval("exp(log(y))"), 0.7, 1e-15);
}

TEST(Expression, RejectsBadInput) {
  EXPECT_THROW(Expression("x+", {"x"}), ConfigError);
  EXPECT_THROW(Expression("z*2", {"x"}), ConfigError);
  EXPECT_THROW(Expression("foo(x)", {"x"}), ConfigError);
  EXPECT_THROW(Expression("(x", {"x"}), ConfigError);
}

TEST(Expression, TracksDependencies) {
  Expression e("x*mu1+3", {"x", "y", "mu1", "mu2"});
  EXPECT_TRUE(e.depends_on("mu1"));
  EXPECT_FALSE(e.depends_on("mu2"));
  EXPECT_FALSE(e.depends_on("y"));
}

TEST(Expression, DerivativesMatchFiniteDifferences) {
  Expression e("sin(x*y)*exp(y/2)+x^3*y", {"x", "y"});
  std::vector<double> p{0.4, 1.3}, g(2);
  e.gradient(p, g);
  const double h = 1e-6;
  for (std::size_t i = 0; i < 2; ++i) {
    auto a = p, b = p;
    a[i] += h;
    b[i] -= h;
    double fd = (e(std::span<const double>(a)) - e(std::span<const double>(b))) / (2 * h);
    EXPECT_NEAR(g[i], fd, 1e-8);
  }
  // d2/dxdy of x^3 y is 3x^2; of sin(xy) e^{y/2} by hand.
  double x = p[0], y = p[1];
  double ref = 3 * x * x + (std::cos(x * y) - x * y * std::sin(x * y)) * std::exp(y / 2) +
               y * std::cos(x * y) * std::exp(y / 2) / 2;
  EXPECT_NEAR(e.second(p, 0, 1), ref, 1e-12);
}

TEST(ExactSolutions, SatisfyTheirEquations) {
  for (const char* name : {"stokes_stokes", "stokes_darcy_analytic"}) {
    auto cfg = builtin_case(name);
    auto r = exact_solution_residuals(cfg, 100, 5);
    EXPECT_LE(r.momentum, 1e-8) << name;
    EXPECT_LE(r.divergence, 1e-8) << name;
    EXPECT_EQ(r.samples, 200);
  }
}

TEST(ExactSolutions, BoundaryDataMatchExactValues) {
  auto cfg = builtin_case("stokes_stokes");
  CaseExpressions ce(cfg);
  const auto& sd = cfg.subdomains[0];
  auto gx = ce.field(sd, "g_D", 0), gy = ce.field(sd, "g_D", 1);
  auto tx = ce.field(sd, "g_N", 0), ty = ce.field(sd, "g_N", 1);
  for (double x : {0.0, 0.2, 0.55})
    for (double mu : {1.0, 3.3}) {
      std::vector<double> p{x, 1.0, mu};
      EXPECT_NEAR(gx(std::span<const double>(p)), ce.exact(0)(std::span<const double>(p)), 1e-14);
      EXPECT_NEAR(gy(std::span<const double>(p)), ce.exact(1)(std::span<const double>(p)), 1e-14);
      // Traction on y = 0 with outward normal (0,-1): -(sigma_xy, sigma_yy).
      p[1] = 0.0;
      std::vector<double> gu(3), gv(3);
      ce.exact(0).gradient(p, gu);
      ce.exact(1).gradient(p, gv);
      double nu = 1.0;  // (1 - y) + y mu at y = 0
      double pr = ce.exact(2)(std::span<const double>(p));
      EXPECT_NEAR(tx(std::span<const double>(p)), -nu * (gu[1] + gv[0]), 1e-13);
      EXPECT_NEAR(ty(std::span<const double>(p)), -(2 * nu * gv[1] - pr), 1e-13);
    }
}

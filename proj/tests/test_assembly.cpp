#include <gtest/gtest.h>

#include "ddpgd/cases.hpp"
#include "ddpgd/reference.hpp"

using namespace ddpgd;
using nlohmann::json;

namespace {

ParamSpace mu_space() {
  ParamSpace ps;
  ps.axes.push_back(ParamAxis::range("mu", 1.0, 5.0, 0.5));
  return ps;
}

json square(const std::string& physics, int vdeg, int n, json fields, json boundary) {
  json s;
  s["name"] = "square";
  s["physics"] = physics;
  s["velocity_degree"] = vdeg;
  s["pressure_degree"] = 1;
  s["mesh"] = {{"x0", 0.0}, {"y0", 0.0}, {"x", {{1.0, n}}}, {"y", {{1.0, n}}}};
  s["parameters"] = json::array();
  s["fields"] = fields;
  s["boundary"] = boundary;
  return s;
}

Mat dense(const SepMatrix& K, const Subdomain& sd, const std::vector<double>& mu) {
  return Mat(sep::evaluate(K, sd.ndofs(), sd.ndofs(), sd.params(), mu));
}

std::vector<double> exact_nodal(const Subdomain& sd, const std::array<std::string, 3>& e) {
  std::array<Expression, 3> ex{Expression(e[0], {"x", "y"}), Expression(e[1], {"x", "y"}), Expression(e[2], {"x", "y"})};
  std::vector<double> u(static_cast<std::size_t>(sd.ndofs()));
  for (int d = 0; d < sd.ndofs(); ++d) {
    auto xy = sd.dof_coords(d);
    u[static_cast<std::size_t>(d)] = ex[static_cast<std::size_t>(sd.dof_kind(d))](std::span<const double>(xy));
  }
  return u;
}

}  // namespace

TEST(Assembly, StokesViscosityGivesTwoAffineTerms) {
  auto cfg = builtin_case("stokes_stokes");
  Subdomain sd(cfg.subdomains[0], cfg.params);
  auto op = assemble(sd, cfg.constants);
  // Two viscosity terms plus the parameter-free divergence blocks merge into two distinct weights.
  auto merged = sep::merge_identical(op.K);
  EXPECT_EQ(merged.rank(), 2u);
}

TEST(Assembly, EvaluatedOperatorMatchesDirectAssembly) {
  const double mub = 3.0;
  json nu_param = {cases::term({"1-y"}), cases::term({"y"}, {{"mu", "mu"}})};
  json nu_fixed = {cases::term({"(1-y)+3*y"})};
  json bnd = {cases::rule("dirichlet")};
  for (int deg : {1, 2}) {
    auto a = square("stokes", deg, 3, {{"nu", nu_param}}, bnd);
    auto b = square("stokes", deg, 3, {{"nu", nu_fixed}}, bnd);
    a["parameters"] = {"mu"};
    if (deg == 1) a["tau"] = b["tau"] = 5.5;
    auto ps = mu_space();
    Subdomain sa(detail::parse_subdomain(a, "a"), ps), sb(detail::parse_subdomain(b, "b"), ps);
    Mat Ka = dense(assemble(sa).K, sa, {mub}), Kb = dense(assemble(sb).K, sb, {});
    EXPECT_LE((Ka - Kb).cwiseAbs().maxCoeff(), 1e-12 * Kb.cwiseAbs().maxCoeff()) << "degree " << deg;
  }
}

TEST(Assembly, GlsPressureBlockIsNegativeSemidefinite) {
  auto s = square("stokes", 1, 4, {{"nu", {cases::term({"1+x"})}}}, {cases::rule("dirichlet")});
  s["tau"] = 5.5;
  Subdomain sd(detail::parse_subdomain(s, "s"), ParamSpace{});
  Mat K = dense(assemble(sd).K, sd, {});
  const int np = sd.np(), off = 2 * sd.nv();
  Mat C = K.block(off, off, np, np);
  EXPECT_LE((C - C.transpose()).norm(), 1e-13 * C.norm());
  Eigen::SelfAdjointEigenSolver<Mat> es(C);
  EXPECT_LE(es.eigenvalues().maxCoeff(), 1e-12 * C.norm());
  EXPECT_LT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Assembly, DivergenceOfConstantPressureVanishesForInteriorVelocity) {
  auto s = square("stokes", 2, 3, {{"nu", {cases::term({"1"})}}}, {cases::rule("dirichlet")});
  Subdomain sd(detail::parse_subdomain(s, "s"), ParamSpace{});
  Mat K = dense(assemble(sd).K, sd, {});
  const int np = sd.np(), off = 2 * sd.nv();
  Vec q = Vec::Ones(np);
  // Velocity bubbles (interior dofs) have zero boundary flux.
  for (int d : sd.free()) {
    if (sd.is_pressure(d)) continue;
    double s2 = K.row(d).segment(off, np).dot(q);
    EXPECT_NEAR(s2, 0.0, 1e-13);
  }
}

TEST(Assembly, AffineStokesSolutionReproduced) {
  // u = (3x - y, -x - 3y)/100, p = 2x + y, constant viscosity: f = grad p.
  const std::array<std::string, 3> ex{"(3*x-y)/100", "(-x-3*y)/100", "2*x+y"};
  for (int deg : {1, 2}) {
    json fields = {{"nu", {cases::term({"0.7"})}},
                   {"f", {cases::term({"2", "1"})}},
                   {"g_D", {cases::term({ex[0], ex[1]})}},
                   // traction on y = 0: -(sigma_xy, sigma_yy) with sigma = 2 nu sym grad u - p I
                   {"g_N", {cases::term({"-0.7*(-1-1)/100", "-(2*0.7*(-3)/100-(2*x+y))"})}}};
    auto s = square("stokes", deg, 3, fields, {cases::rule("neumann", cases::box(0, 1, 0, 0), "g_N"),
                                                cases::rule("dirichlet", nullptr, "g_D")});
    if (deg == 1) s["tau"] = 5.5;
    Subdomain sd(detail::parse_subdomain(s, "s"), ParamSpace{});
    auto op = assemble(sd);
    Vec u = solve_monolithic(sd, op, {});
    auto ref = exact_nodal(sd, ex);
    for (int d = 0; d < sd.ndofs(); ++d) EXPECT_NEAR(u[d], ref[static_cast<std::size_t>(d)], 1e-12) << "degree " << deg;
  }
}

TEST(Assembly, UniformDarcyFlowReproduced) {
  // u = (1, 0), p = 3 - x*nu/K: nu K^-1 u + grad p = 0.
  json fields = {{"nu", {cases::term({"0.1"})}},  {"nu_inv", {cases::term({"10"})}}, {"K", {cases::term({"1"})}},
                 {"K_inv", {cases::term({"1"})}}, {"f", {cases::term({"0", "0"})}},    {"g_D", {cases::term({"3-0.1*x"})}},
                 {"g_N", {cases::term({"1", "0"})}}};
  auto s = square("darcy", 1, 4, fields, {cases::rule("pressure", cases::box(1, 1, 0, 1), "g_D"),
                                           cases::rule("flux", nullptr, "g_N")});
  s["beta"] = 1.0;
  Subdomain sd(detail::parse_subdomain(s, "s"), ParamSpace{});
  Vec u = solve_monolithic(sd, assemble(sd), {});
  auto ref = exact_nodal(sd, {"1", "0", "3-0.1*x"});
  for (int d = 0; d < sd.ndofs(); ++d) EXPECT_NEAR(u[d], ref[static_cast<std::size_t>(d)], 1e-11);
}

TEST(Assembly, LiftingReproducesBoundaryValues) {
  auto cfg = builtin_case("stokes_stokes");
  Subdomain sd(cfg.subdomains[0], cfg.params);
  auto op = assemble(sd, cfg.constants);
  Vec G = sep::evaluate(op.G, sd.ndofs(), sd.params(), {3.0});
  Expression u(cfg.exact->u, {"x", "y", "mu"}), v(cfg.exact->v, {"x", "y", "mu"});
  int checked = 0;
  std::vector<char> is_trace(static_cast<std::size_t>(sd.ndofs()), 0);
  for (int d : sd.trace()) is_trace[static_cast<std::size_t>(d)] = 1;
  for (int d : sd.essential()) {
    if (is_trace[static_cast<std::size_t>(d)]) continue;
    auto xy = sd.dof_coords(d);
    std::vector<double> p{xy[0], xy[1], 3.0};
    double ref = sd.dof_kind(d) == 0 ? u(std::span<const double>(p)) : v(std::span<const double>(p));
    EXPECT_NEAR(G[d], ref, 1e-12);
    ++checked;
  }
  EXPECT_GT(checked, 0);
  for (int d : sd.free()) EXPECT_EQ(G[d], 0.0);
}

TEST(Assembly, MissingViscosityIsAConfigError) {
  auto s = square("stokes", 2, 2, json::object(), {cases::rule("dirichlet")});
  Subdomain sd(detail::parse_subdomain(s, "s"), ParamSpace{});
  EXPECT_THROW(assemble(sd), ConfigError);
}

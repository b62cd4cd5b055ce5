#include <gtest/gtest.h>

#include "coarse.hpp"

using namespace ddpgd;

namespace {

struct Built {
  std::unique_ptr<Problem> pb;
  std::array<SubdomainSurrogate, 2> s;
};

Built& stokes_darcy() {
  static Built b = [] {
    Built x;
    x.pb = std::make_unique<Problem>(coarse::stokes_darcy());
    for (std::size_t i = 0; i < 2; ++i) x.s[i] = build_surrogate(*x.pb->sd[i], x.pb->op_of(i), x.pb->offline_options());
    return x;
  }();
  return b;
}

}  // namespace

TEST(Online, PhaseIsPure) {
  auto& b = stokes_darcy();
  auto before = Counters::get().snapshot();
  auto r = online_solve({&b.s[0], &b.s[1]}, b.pb->dec, b.pb->cfg.mu, b.pb->gmres_options());
  auto used = Counters::get().snapshot() - before;
  EXPECT_TRUE(r.solution.gmres.converged);
  EXPECT_EQ(used.assemblies, 0);
  EXPECT_EQ(used.factorizations, 0);
  EXPECT_EQ(used.pgd_solves, 0);
}

TEST(Online, ReferenceSolveFactorizesOncePerSubdomain) {
  auto& b = stokes_darcy();
  auto before = Counters::get().snapshot();
  auto r = solve_dd_fem({b.pb->sd[0].get(), b.pb->sd[1].get()}, {&b.pb->op_of(0), &b.pb->op_of(1)}, b.pb->dec,
                        b.pb->cfg.mu, b.pb->gmres_options());
  auto used = Counters::get().snapshot() - before;
  EXPECT_TRUE(r.gmres.converged);
  EXPECT_EQ(used.factorizations, 2);
  EXPECT_EQ(used.assemblies, 0);
}

TEST(Online, SurrogateSolutionTracksFullOrderSolution) {
  auto& b = stokes_darcy();
  const auto& mu = b.pb->cfg.mu;
  auto g = b.pb->gmres_options();
  g.rel_tol = 1e-10;
  auto fem = solve_dd_fem({b.pb->sd[0].get(), b.pb->sd[1].get()}, {&b.pb->op_of(0), &b.pb->op_of(1)}, b.pb->dec, mu, g);
  auto pgd = online_solve({&b.s[0], &b.s[1]}, b.pb->dec, mu, g);
  EXPECT_LE(interface_mismatch(b.pb->dec, fem), 1e-8);
  EXPECT_LE(interface_mismatch(b.pb->dec, pgd.solution), 1e-8);
  auto ex = *b.pb->exact(mu);
  auto ef = interpolated_errors(b.pb->regions(fem.u), ex);
  auto ep = interpolated_errors(b.pb->regions(pgd.solution.u), ex);
  for (int c = 0; c < 3; ++c) {
    EXPECT_LT(ef[c], 0.1) << c;
    EXPECT_LT(ep[c], 0.1) << c;
  }
}

TEST(Online, MismatchDetectsPerturbedInterface) {
  auto& b = stokes_darcy();
  auto r = online_solve({&b.s[0], &b.s[1]}, b.pb->dec, b.pb->cfg.mu, b.pb->gmres_options());
  auto bad = r.solution;
  bad.lambda[0][0] += 0.25;
  EXPECT_NEAR(interface_mismatch(b.pb->dec, bad) , 0.25, 0.25 * 1e-3 + interface_mismatch(b.pb->dec, r.solution));
}

TEST(Online, ParameterOutsideGridIsRejected) {
  auto& b = stokes_darcy();
  EXPECT_THROW(online_solve({&b.s[0], &b.s[1]}, b.pb->dec, {3.0, 1.25}), std::exception);
  EXPECT_THROW(online_solve({&b.s[0], &b.s[1]}, b.pb->dec, {0.6}), std::exception);
}

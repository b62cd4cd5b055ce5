#include <gtest/gtest.h>

#include <random>

#include "coarse.hpp"

using namespace ddpgd;

namespace {

Vec random_vec(Eigen::Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Vec v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

/// Solve the separated local problems at one grid point with direct factorization and superpose.
Vec superposed(const Subdomain& sd, const SubdomainOperator& op, const std::vector<double>& mu, const Vec& lambda) {
  auto lp = local_problems(sd, op);
  auto m = local_point(sd.global_axes(), mu);
  const auto nf = static_cast<Eigen::Index>(sd.free().size());
  SpMat A = sep::evaluate(lp.lhs, nf, nf, sd.params(), m);
  SparseDirect lu;
  lu.compute(A);
  Vec rhs = sep::evaluate(lp.data_rhs, nf, sd.params(), m);
  for (std::size_t j = 0; j < lp.trace_rhs.size(); ++j)
    rhs += lambda[static_cast<Eigen::Index>(j)] * sep::evaluate(lp.trace_rhs[j], nf, sd.params(), m);
  Vec x = lu.solve(rhs);
  Vec u = sep::evaluate(op.G, sd.ndofs(), sd.params(), m);
  for (Eigen::Index i = 0; i < nf; ++i) u[sd.free()[static_cast<std::size_t>(i)]] += x[i];
  if (sd.physics() == Physics::Stokes)
    for (std::size_t j = 0; j < sd.trace().size(); ++j) u[sd.trace()[j]] += lambda[static_cast<Eigen::Index>(j)];
  return u;
}

void check_full_order(const CaseConfig& cfg, const std::vector<double>& mu) {
  Problem pb(cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& sd = *pb.sd[i];
    const auto& op = pb.op_of(i);
    Vec lambda = random_vec(static_cast<Eigen::Index>(sd.trace().size()), 7 + static_cast<unsigned>(i));
    Vec ref = LocalSolver(sd, op, mu)(lambda);
    Vec sup = superposed(sd, op, mu, lambda);
    EXPECT_LE((sup - ref).norm(), 1e-10 * ref.norm()) << sd.name();
  }
}

}  // namespace

TEST(Superposition, FullOrderStokesStokes) { check_full_order(coarse::stokes_stokes(), {2.5}); }

TEST(Superposition, FullOrderStokesDarcy) { check_full_order(coarse::stokes_darcy(), {0.6, 1.25}); }

TEST(Superposition, PgdExpansionMatchesDirectSolve) {
  auto cfg = coarse::stokes_stokes();
  Problem pb(cfg);
  const auto& sd = *pb.sd[0];
  const auto& op = pb.op_of(0);
  auto opt = pb.offline_options();
  opt.compress = false;
  auto s = build_surrogate(sd, op, opt);
  ASSERT_EQ(s.unconverged, 0);
  const double eps = cfg.pgd.enrich_tol;
  for (double mu : pb.cfg.mu) {
    Vec lambda = random_vec(static_cast<Eigen::Index>(sd.trace().size()), 11);
    auto e = evaluate_expansion(s, {mu});
    Vec pgd = e.base + e.U * lambda;
    Vec ref = LocalSolver(sd, op, {mu})(lambda);
    // interface values are imposed exactly; compare the solved part
    Vec d = pgd - ref;
    Vec r = ref - sep::evaluate(op.G, sd.ndofs(), sd.params(), {mu});
    EXPECT_LE(d.norm(), 10 * eps * r.norm()) << "mu = " << mu;
  }
}

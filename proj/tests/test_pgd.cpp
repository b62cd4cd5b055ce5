#include <gtest/gtest.h>

#include "ddpgd/pgd.hpp"

using namespace ddpgd;

namespace {

// 1D P1 stiffness on [0,1] with 5 interior nodes; element e has weight w[e].
SpMat stiffness(const std::vector<double>& w) {
  const int n = 5;
  const double h = 1.0 / (n + 1);
  std::vector<Eigen::Triplet<double>> t;
  for (int e = 0; e <= n; ++e) {
    int a = e - 1, b = e;
    double k = w[static_cast<std::size_t>(e)] / h;
    if (a >= 0) t.emplace_back(a, a, k);
    if (b < n) t.emplace_back(b, b, k);
    if (a >= 0 && b < n) {
      t.emplace_back(a, b, -k);
      t.emplace_back(b, a, -k);
    }
  }
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void check_against_direct(const SepMatrix& A, const SepVector& b, double tol) {
  PgdReport rep;
  PgdOptions opt;
  opt.enrich_tol = tol;
  auto x = pgd_solve(PgdOperator(A), b, ConvergenceMask::whole(5), opt, &rep);
  EXPECT_TRUE(rep.converged);
  for (std::size_t j = 0; j < A.param_sizes()[0]; ++j) {
    Mat K = Mat::Zero(5, 5);
    Vec f = Vec::Zero(5);
    for (const auto& t : A.terms()) K += t.params[0][static_cast<Eigen::Index>(j)] * Mat(t.space);
    for (const auto& t : b.terms()) f += t.params[0][static_cast<Eigen::Index>(j)] * t.space;
    Vec ref = K.lu().solve(f);
    Vec got = sep::evaluate_index(x, 5, {j});
    EXPECT_LE((got - ref).norm() / ref.norm(), tol) << "grid point " << j;
  }
}

}  // namespace

TEST(Pgd, UniformConductivityToy) {
  Vec mu(3);
  mu << 0.0, 0.5, 1.0;
  SepMatrix A({3});
  SpMat K = stiffness(std::vector<double>(6, 1.0));
  A.push(K, {Vec::Ones(3)});
  A.push(K, {mu});
  SepVector b({3});
  b.push(Vec::Ones(5), {Vec::Ones(3)});
  check_against_direct(A, b, 1e-4);
}

TEST(Pgd, PiecewiseConductivityToy) {
  // Conductivity 1 + mu on the left half only: the solution has rank 2.
  Vec mu(3);
  mu << 0.0, 0.5, 1.0;
  SepMatrix A({3});
  A.push(stiffness({1, 1, 1, 0, 0, 0}), {Vec(mu.array() + 1.0)});
  A.push(stiffness({0, 0, 0, 1, 1, 1}), {Vec::Ones(3)});
  SepVector b({3});
  Vec f(5);
  f << 1, 2, 0, -1, 1;
  b.push(f, {Vec::Ones(3)});
  b.push(Vec::Ones(5), {mu});
  check_against_direct(A, b, 1e-4);
}

TEST(Pgd, TwoParameterToyOnFinerGrid) {
  Vec m1 = Vec::LinSpaced(7, 0, 2), m2 = Vec::LinSpaced(5, 1, 3);
  SepMatrix A({7, 5});
  A.push(stiffness({1, 1, 1, 0, 0, 0}), {Vec(m1.array() + 1.0), Vec::Ones(5)});
  A.push(stiffness({0, 0, 0, 1, 1, 1}), {Vec::Ones(7), m2});
  SepVector b({7, 5});
  b.push(Vec::Ones(5), {Vec::Ones(7), Vec::Ones(5)});
  PgdReport rep;
  PgdOptions opt;
  opt.enrich_tol = 1e-8;
  auto x = pgd_solve(PgdOperator(A), b, ConvergenceMask::whole(5), opt, &rep);
  ASSERT_TRUE(rep.converged);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      Mat K = (1 + m1[static_cast<Eigen::Index>(i)]) * Mat(stiffness({1, 1, 1, 0, 0, 0})) +
              m2[static_cast<Eigen::Index>(j)] * Mat(stiffness({0, 0, 0, 1, 1, 1}));
      Vec ref = K.lu().solve(Vec::Ones(5));
      EXPECT_LE((sep::evaluate_index(x, 5, {i, j}) - ref).norm() / ref.norm(), 1e-6);
    }
}

TEST(Pgd, NoParametersReducesToDirectSolve) {
  SepMatrix A(std::vector<std::size_t>{});
  A.push(stiffness(std::vector<double>(6, 2.0)), {});
  SepVector b(std::vector<std::size_t>{});
  b.push(Vec::Ones(5), {});
  auto x = pgd_solve(PgdOperator(A), b, ConvergenceMask::whole(5));
  Vec ref = Mat(stiffness(std::vector<double>(6, 2.0))).lu().solve(Vec::Ones(5));
  EXPECT_LE((sep::evaluate_index(x, 5, {}) - ref).norm(), 1e-12);
}

TEST(Pgd, CountsSolves) {
  auto before = Counters::get().snapshot().pgd_solves;
  SepMatrix A({2});
  A.push(stiffness(std::vector<double>(6, 1.0)), {Vec::Ones(2)});
  SepVector b({2});
  b.push(Vec::Ones(5), {Vec::Ones(2)});
  pgd_solve(PgdOperator(A), b, ConvergenceMask::whole(5));
  EXPECT_EQ(Counters::get().snapshot().pgd_solves, before + 1);
}

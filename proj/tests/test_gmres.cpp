#include <random>

#include <gtest/gtest.h>

#include "ddpgd/gmres.hpp"

using namespace ddpgd;

TEST(Gmres, SolvesNonsymmetricSystem) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  const int n = 40;
  Mat A = Mat::Identity(n, n) * 4;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) += 0.3 * u(rng);
  Vec b = Vec::NullaryExpr(n, [&](Eigen::Index) { return u(rng); });
  auto r = gmres([&](const Vec& x) -> Vec { return A * x; }, b, {1e-10, -1});
  ASSERT_TRUE(r.converged);
  EXPECT_LE((A * r.x - b).norm() / b.norm(), 1e-10);
  EXPECT_EQ(r.residuals.size(), static_cast<std::size_t>(r.iterations));
}

TEST(Gmres, ExactAfterDistinctEigenvalues) {
  // Diagonal operator with 3 distinct eigenvalues: Krylov space closes after 3 steps.
  Vec d(9);
  d << 1, 1, 1, 2, 2, 2, 5, 5, 5;
  auto r = gmres([&](const Vec& x) -> Vec { return d.cwiseProduct(x); }, Vec::Ones(9), {1e-12, -1});
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 3);
}

TEST(Gmres, ZeroRightHandSide) {
  auto r = gmres([](const Vec& x) -> Vec { return x; }, Vec::Zero(4));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(Gmres, ResidualsDecreaseMonotonically) {
  const int n = 30;
  Mat A = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 2 + 0.1 * i;
    if (i + 1 < n) A(i, i + 1) = -1;
  }
  auto r = gmres([&](const Vec& x) -> Vec { return A * x; }, Vec::Ones(n));
  for (std::size_t k = 1; k < r.residuals.size(); ++k) EXPECT_LE(r.residuals[k], r.residuals[k - 1] * (1 + 1e-12));
}

#include <random>

#include <gtest/gtest.h>

#include "ddpgd/septensor.hpp"

using namespace ddpgd;

namespace {

std::mt19937 rng(7);

Vec random_vec(Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

SepVector random_sep(Eigen::Index n, std::vector<std::size_t> sizes, int rank) {
  SepVector t(sizes);
  for (int r = 0; r < rank; ++r) {
    std::vector<Vec> p;
    for (auto s : sizes) p.push_back(random_vec(static_cast<Eigen::Index>(s)));
    t.push(random_vec(n), p);
  }
  return t;
}

SpMat random_sparse(Eigen::Index r, Eigen::Index c) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      if (u(rng) > 0.3) trip.emplace_back(static_cast<int>(i), static_cast<int>(j), u(rng));
  SpMat m(r, c);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SepMatrix random_sepmat(Eigen::Index r, Eigen::Index c, std::vector<std::size_t> sizes, int rank) {
  SepMatrix t(sizes);
  for (int k = 0; k < rank; ++k) {
    std::vector<Vec> p;
    for (auto s : sizes) p.push_back(random_vec(static_cast<Eigen::Index>(s)));
    t.push(random_sparse(r, c), p);
  }
  return t;
}

// Every grid multi-index of a parametric grid.
std::vector<std::vector<std::size_t>> grid(const std::vector<std::size_t>& sizes) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> idx(sizes.size(), 0);
  for (;;) {
    out.push_back(idx);
    std::size_t k = 0;
    for (; k < sizes.size(); ++k) {
      if (++idx[k] < sizes[k]) break;
      idx[k] = 0;
    }
    if (k == sizes.size()) return out;
  }
}

Mat dense_at(const SepMatrix& t, Eigen::Index r, Eigen::Index c, const std::vector<std::size_t>& idx) {
  Mat m = Mat::Zero(r, c);
  for (const auto& term : t.terms()) m += sep::weight_at(term.params, idx) * Mat(term.space);
  return m;
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

const std::vector<std::size_t> kSizes{4, 3, 5};

}  // namespace

TEST(SepTensor, RandomIndicesMatchDenseMaterialization) {
  auto t = random_sep(6, kSizes, 4);
  auto dense = sep::to_dense(t, 6);
  std::uniform_int_distribution<std::size_t> pick(0, 59);
  for (int s = 0; s < 20; ++s) {
    std::size_t flat = pick(rng);
    std::vector<std::size_t> idx{flat % 4, (flat / 4) % 3, flat / 12};
    Vec v = sep::evaluate_index(t, 6, idx);
    for (Eigen::Index i = 0; i < 6; ++i) {
      double ref = dense[flat * 6 + static_cast<std::size_t>(i)];
      EXPECT_NEAR(v[i], ref, 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(SepTensor, AddAndScaleMatchDense) {
  auto a = random_sep(5, kSizes, 3), b = random_sep(5, kSizes, 2);
  auto c = sep::add(sep::scale(a, 2.5), b);
  for (const auto& idx : grid(kSizes)) {
    Vec ref = 2.5 * sep::evaluate_index(a, 5, idx) + sep::evaluate_index(b, 5, idx);
    EXPECT_LT(rel(sep::evaluate_index(c, 5, idx), ref), 1e-12);
  }
}

TEST(SepTensor, ApplyMatchesDenseProduct) {
  auto A = random_sepmat(5, 4, kSizes, 3);
  auto x = random_sep(4, kSizes, 2);
  auto y = sep::apply(A, x);
  EXPECT_EQ(y.rank(), 6u);
  for (const auto& idx : grid(kSizes)) {
    Vec ref = dense_at(A, 5, 4, idx) * sep::evaluate_index(x, 4, idx);
    EXPECT_LT(rel(sep::evaluate_index(y, 5, idx), ref), 1e-12);
  }
}

TEST(SepTensor, TransposeMatchesDense) {
  auto A = random_sepmat(5, 4, kSizes, 2);
  auto At = sep::transpose(A);
  for (const auto& idx : grid(kSizes))
    EXPECT_LT((dense_at(At, 4, 5, idx) - dense_at(A, 5, 4, idx).transpose()).norm(), 1e-12);
}

TEST(SepTensor, BlockConcatenationMatchesDense) {
  auto A = random_sepmat(3, 3, kSizes, 2), B = random_sepmat(3, 2, kSizes, 1), C = random_sepmat(2, 3, kSizes, 1);
  auto K = sep::block({{&A, &B}, {&C, nullptr}}, {3, 2}, {3, 2}, kSizes);
  for (const auto& idx : grid(kSizes)) {
    Mat ref = Mat::Zero(5, 5);
    ref.topLeftCorner(3, 3) = dense_at(A, 3, 3, idx);
    ref.topRightCorner(3, 2) = dense_at(B, 3, 2, idx);
    ref.bottomLeftCorner(2, 3) = dense_at(C, 2, 3, idx);
    EXPECT_LT((dense_at(K, 5, 5, idx) - ref).norm(), 1e-12 * ref.norm());
  }
}

TEST(SepTensor, InnerProductMatchesDense) {
  auto a = random_sep(5, kSizes, 3), b = random_sep(5, kSizes, 2);
  auto da = sep::to_dense(a, 5), db = sep::to_dense(b, 5);
  double ref = 0;
  for (std::size_t i = 0; i < da.size(); ++i) ref += da[i] * db[i];
  EXPECT_NEAR(sep::inner(a, b), ref, 1e-12 * std::abs(ref));
}

TEST(SepTensor, MergeIdenticalPreservesValues) {
  auto a = random_sep(4, kSizes, 2);
  auto b = a;
  for (auto& t : b.terms()) t.space = random_vec(4);
  auto m = sep::merge_identical(sep::add(a, b));
  EXPECT_EQ(m.rank(), 2u);
  for (const auto& idx : grid(kSizes)) {
    Vec ref = sep::evaluate_index(a, 4, idx) + sep::evaluate_index(b, 4, idx);
    EXPECT_LT(rel(sep::evaluate_index(m, 4, idx), ref), 1e-12);
  }
}

TEST(SepTensor, RestrictAndScatterAreInverse) {
  auto a = random_sep(6, kSizes, 2);
  std::vector<int> rows{0, 2, 5};
  auto s = sep::scatter_rows(sep::restrict_rows(a, rows), rows, 6);
  for (const auto& idx : grid(kSizes)) {
    Vec full = sep::evaluate_index(a, 6, idx), got = sep::evaluate_index(s, 6, idx);
    for (int r : rows) EXPECT_NEAR(got[r], full[r], 1e-14 * std::abs(full[r]) + 1e-300);
    EXPECT_EQ(got[1], 0.0);
  }
}

TEST(SepTensor, SubmatrixMatchesDense) {
  auto A = random_sepmat(5, 5, kSizes, 2);
  std::vector<int> r{0, 3, 4}, c{1, 2};
  auto S = submatrix(A, r, c);
  for (const auto& idx : grid(kSizes)) {
    Mat full = dense_at(A, 5, 5, idx), got = dense_at(S, 3, 2, idx);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(got(i, j), full(r[i], c[j]), 1e-14);
  }
}

TEST(SepTensor, OffGridEvaluationInterpolatesLinearly) {
  ParamSpace ps;
  ps.axes.push_back(ParamAxis::range("mu", 0.0, 1.0, 0.25));
  SepVector t({5});
  Vec p(5);
  p << 0, 1, 4, 9, 16;
  t.push(Vec::Ones(2), {p});
  Vec v = sep::evaluate(t, 2, ps, {0.375});
  EXPECT_NEAR(v[0], 2.5, 1e-14);
}

TEST(SepTensor, AxisMismatchIsRejected) {
  SepVector a({3}), b({4});
  a.push(Vec::Ones(2), {Vec::Ones(3)});
  b.push(Vec::Ones(2), {Vec::Ones(4)});
  EXPECT_THROW(sep::add(a, b), std::invalid_argument);
  EXPECT_THROW(a.push(Vec::Ones(2), {Vec::Ones(5)}), std::invalid_argument);
}

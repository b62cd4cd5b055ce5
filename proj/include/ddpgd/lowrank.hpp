#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ddpgd/septensor.hpp"

namespace ddpgd {

/// Dense multi-axis array, axis 0 fastest.
struct DenseTensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    std::size_t n = 1;
    for (auto k : shape) n *= k;
    data.assign(n, 0.0);
  }
  std::size_t size() const { return data.size(); }
  double norm() const {
    double s = 0;
    for (double v : data) s += v * v;
    return std::sqrt(s);
  }
};

struct LowRankOptions {
  double tol = 1e-4;
  int max_rank = 200;
  int max_als = 50;
  double als_tol = 1e-9;
  // Row blocks that must each meet `tol` relative to their own norm; empty means the whole tensor.
  std::vector<std::vector<int>> blocks;
};

namespace detail {

/// Least-squares refit of every spatial factor for fixed parametric factors.
inline Mat refit_spatial(const std::vector<std::vector<Vec>>& P, const Mat& projections) {
  const auto M = static_cast<Eigen::Index>(P.size());
  Mat G(M, M);
  for (Eigen::Index a = 0; a < M; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      double g = 1.0;
      for (std::size_t k = 0; k < P[a].size(); ++k) g *= P[a][k].dot(P[b][k]);
      G(a, b) = G(b, a) = g;
    }
  G.diagonal().array() += 1e-13 * G.diagonal().cwiseAbs().maxCoeff();
  Mat X = G.ldlt().solve(projections.transpose());
  return X.transpose();
}

}  // namespace detail

/// Greedy rank-one re-approximation of a separated vector to relative tolerance.
inline SepVector compress(const SepVector& t, const LowRankOptions& opt = {}) {
  const std::size_t D = t.dims();
  if (t.rank() == 0) return t;
  const Eigen::Index n = t[0].space.size();
  const double tnorm2 = sep::inner(t, t);
  SepVector out(t.param_sizes());
  if (!(tnorm2 > 0)) return out;
  std::vector<SepVector> tb;
  std::vector<double> tb2;
  for (const auto& b : opt.blocks) {
    tb.push_back(sep::restrict_rows(t, b));
    tb2.push_back(sep::inner(tb.back(), tb.back()));
  }
  auto converged = [&](const SepVector& o) {
    if (opt.blocks.empty()) {
      double err2 = tnorm2 - 2 * sep::inner(t, o) + sep::inner(o, o);
      return err2 <= opt.tol * opt.tol * tnorm2;
    }
    for (std::size_t k = 0; k < opt.blocks.size(); ++k) {
      SepVector ob = sep::restrict_rows(o, opt.blocks[k]);
      double err2 = tb2[k] - 2 * sep::inner(tb[k], ob) + sep::inner(ob, ob);
      if (err2 > opt.tol * opt.tol * tb2[k]) return false;
    }
    return true;
  };
  if (D == 0) {
    Vec s = Vec::Zero(n);
    for (const auto& term : t.terms()) s += term.space;
    out.push(s, {});
    return out;
  }
  std::vector<std::vector<Vec>> P;
  const int cap = std::min(opt.max_rank, static_cast<int>(t.rank()));
  for (int r = 0; r < cap; ++r) {
    SepVector res = sep::add(t, sep::scale(out, -1.0));
    // Initialise from the dominant residual term.
    std::size_t best = 0;
    double bestn = -1;
    for (std::size_t i = 0; i < res.rank(); ++i) {
      double v = res[i].space.norm();
      for (const auto& p : res[i].params) v *= p.norm();
      if (v > bestn) { bestn = v; best = i; }
    }
    std::vector<Vec> S(D);
    for (std::size_t k = 0; k < D; ++k) {
      S[k] = res[best].params[k];
      double nn = S[k].norm();
      S[k] = nn > 0 ? Vec(S[k] / nn) : Vec(Vec::Ones(S[k].size()) / std::sqrt(double(S[k].size())));
    }
    Vec X = Vec::Zero(n);
    for (int it = 0; it < opt.max_als; ++it) {
      Vec Xn = Vec::Zero(n);
      for (const auto& term : res.terms()) {
        double w = 1.0;
        for (std::size_t k = 0; k < D; ++k) w *= term.params[k].dot(S[k]);
        if (w != 0.0) Xn += w * term.space;
      }
      double xn2 = Xn.squaredNorm();
      if (!(xn2 > 0)) break;
      for (std::size_t k = 0; k < D; ++k) {
        Vec next = Vec::Zero(S[k].size());
        for (const auto& term : res.terms()) {
          double w = term.space.dot(Xn);
          for (std::size_t j = 0; j < D; ++j)
            if (j != k) w *= term.params[j].dot(S[j]);
          if (w != 0.0) next += w * term.params[k];
        }
        double nn = next.norm();
        if (!(nn > 0)) break;
        S[k] = next / nn;
      }
      double change = (Xn - X).norm() / std::sqrt(xn2);
      X = std::move(Xn);
      if (change < opt.als_tol) break;
    }
    P.push_back(S);
    // Refit all spatial factors against the original tensor.
    Mat proj = Mat::Zero(n, static_cast<Eigen::Index>(P.size()));
    for (std::size_t m = 0; m < P.size(); ++m)
      for (const auto& term : t.terms()) {
        double w = 1.0;
        for (std::size_t k = 0; k < D; ++k) w *= term.params[k].dot(P[m][k]);
        if (w != 0.0) proj.col(static_cast<Eigen::Index>(m)) += w * term.space;
      }
    Mat Xs = detail::refit_spatial(P, proj);
    out = SepVector(t.param_sizes());
    for (std::size_t m = 0; m < P.size(); ++m) out.push(Xs.col(static_cast<Eigen::Index>(m)), P[m]);
    if (converged(out)) return out;
  }
  // Not within tolerance at the rank cap: the input itself is exact and no larger.
  return static_cast<int>(t.rank()) <= opt.max_rank ? t : out;
}

/// Greedy rank-one decomposition of a dense array; axis 0 becomes the spatial factor.
inline SepVector tensor_separation(const DenseTensor& a, const LowRankOptions& opt = {}) {
  if (a.shape.empty()) throw std::invalid_argument("tensor_separation: empty shape");
  const std::size_t n = a.shape[0];
  const std::size_t D = a.shape.size() - 1;
  std::vector<std::size_t> psizes(a.shape.begin() + 1, a.shape.end());
  SepVector out(psizes);
  const double anorm = a.norm();
  if (!(anorm > 0)) return out;
  const std::size_t nblocks = a.size() / n;
  std::vector<std::vector<std::size_t>> idx(nblocks, std::vector<std::size_t>(D));
  {
    std::vector<std::size_t> cur(D, 0);
    for (std::size_t b = 0; b < nblocks; ++b) {
      idx[b] = cur;
      for (std::size_t k = 0; k < D; ++k) {
        if (++cur[k] < psizes[k]) break;
        cur[k] = 0;
      }
    }
  }
  auto block = [&](const std::vector<double>& d, std::size_t b) {
    return Eigen::Map<const Vec>(d.data() + b * n, static_cast<Eigen::Index>(n));
  };
  if (D == 0) {
    out.push(block(a.data, 0), {});
    return out;
  }
  std::vector<double> res = a.data;
  std::vector<std::vector<Vec>> P;
  for (int r = 0; r < opt.max_rank; ++r) {
    // Initialise parametric factors from the fibre through the largest residual entry.
    std::size_t imax = 0;
    for (std::size_t i = 1; i < res.size(); ++i)
      if (std::abs(res[i]) > std::abs(res[imax])) imax = i;
    const std::size_t bmax = imax / n, rowmax = imax % n;
    std::vector<Vec> S(D);
    for (std::size_t k = 0; k < D; ++k) {
      S[k] = Vec::Zero(static_cast<Eigen::Index>(psizes[k]));
      for (std::size_t b = 0; b < nblocks; ++b) {
        bool on = true;
        for (std::size_t j = 0; j < D && on; ++j)
          if (j != k && idx[b][j] != idx[bmax][j]) on = false;
        if (on) S[k][static_cast<Eigen::Index>(idx[b][k])] = res[b * n + rowmax];
      }
      double nn = S[k].norm();
      if (!(nn > 0)) S[k] = Vec::Ones(S[k].size()), nn = S[k].norm();
      S[k] /= nn;
    }
    Vec X = Vec::Zero(static_cast<Eigen::Index>(n));
    std::vector<double> c(nblocks);
    for (int it = 0; it < opt.max_als; ++it) {
      Vec Xn = Vec::Zero(static_cast<Eigen::Index>(n));
      for (std::size_t b = 0; b < nblocks; ++b) {
        double w = 1.0;
        for (std::size_t k = 0; k < D; ++k) w *= S[k][static_cast<Eigen::Index>(idx[b][k])];
        if (w != 0.0) Xn += w * block(res, b);
      }
      if (!(Xn.squaredNorm() > 0)) break;
      for (std::size_t b = 0; b < nblocks; ++b) c[b] = block(res, b).dot(Xn);
      for (std::size_t k = 0; k < D; ++k) {
        Vec next = Vec::Zero(S[k].size());
        for (std::size_t b = 0; b < nblocks; ++b) {
          double w = c[b];
          for (std::size_t j = 0; j < D; ++j)
            if (j != k) w *= S[j][static_cast<Eigen::Index>(idx[b][j])];
          next[static_cast<Eigen::Index>(idx[b][k])] += w;
        }
        double nn = next.norm();
        if (!(nn > 0)) break;
        S[k] = next / nn;
      }
      double change = (Xn - X).norm() / Xn.norm();
      X = std::move(Xn);
      if (change < opt.als_tol) break;
    }
    P.push_back(S);
    Mat proj = Mat::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(P.size()));
    for (std::size_t b = 0; b < nblocks; ++b) {
      auto blk = block(a.data, b);
      for (std::size_t m = 0; m < P.size(); ++m) {
        double w = 1.0;
        for (std::size_t k = 0; k < D; ++k) w *= P[m][k][static_cast<Eigen::Index>(idx[b][k])];
        if (w != 0.0) proj.col(static_cast<Eigen::Index>(m)) += w * blk;
      }
    }
    Mat Xs = detail::refit_spatial(P, proj);
    res = a.data;
    for (std::size_t b = 0; b < nblocks; ++b) {
      Eigen::Map<Vec> rb(res.data() + b * n, static_cast<Eigen::Index>(n));
      for (std::size_t m = 0; m < P.size(); ++m) {
        double w = 1.0;
        for (std::size_t k = 0; k < D; ++k) w *= P[m][k][static_cast<Eigen::Index>(idx[b][k])];
        if (w != 0.0) rb -= w * Xs.col(static_cast<Eigen::Index>(m));
      }
    }
    double rn = 0;
    for (double v : res) rn += v * v;
    if (std::sqrt(rn) <= opt.tol * anorm || static_cast<int>(P.size()) >= opt.max_rank) {
      for (std::size_t m = 0; m < P.size(); ++m) out.push(Xs.col(static_cast<Eigen::Index>(m)), P[m]);
      return out;
    }
  }
  return out;
}

/// Separated approximation of the pointwise reciprocal of a separated field.
inline SepVector separated_inverse(const SepVector& field, Eigen::Index n, const LowRankOptions& opt = {}) {
  DenseTensor d;
  d.shape.push_back(static_cast<std::size_t>(n));
  for (auto s : field.param_sizes()) d.shape.push_back(s);
  d.data = sep::to_dense(field, n);
  for (double& v : d.data) {
    if (v == 0.0 || !std::isfinite(v)) throw std::domain_error("separated_inverse: field vanishes at a sample");
    v = 1.0 / v;
  }
  return tensor_separation(d, opt);
}

}  // namespace ddpgd

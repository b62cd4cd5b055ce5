#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "ddpgd/direct.hpp"
#include "ddpgd/septensor.hpp"

namespace ddpgd {

struct PgdOptions {
  double enrich_tol = 1e-4;
  int max_modes = 200;
  int max_inner = 25;
  double inner_tol = 1e-6;
};

/// Index blocks of the unknown vector whose relative mode amplitudes must each fall below tolerance.
struct ConvergenceMask {
  std::vector<std::vector<int>> blocks;

  static ConvergenceMask whole(int n) {
    ConvergenceMask m;
    m.blocks.emplace_back(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) m.blocks[0][static_cast<std::size_t>(i)] = i;
    return m;
  }
};

struct PgdReport {
  int modes = 0;
  bool converged = false;
  int inner_iterations = 0;
  std::vector<double> ratios;  // largest block ratio of every computed mode
};

/// Separated operator prepared for repeated weighted-sum factorizations.
class PgdOperator {
public:
  PgdOperator() = default;
  explicit PgdOperator(SepMatrix a) : a_(std::move(a)) {
    if (a_.rank() == 0) throw std::invalid_argument("pgd operator has no terms");
    n_ = a_[0].space.rows();
    SpMat pattern(n_, n_);
    for (const auto& t : a_.terms()) {
      SpMat ones = t.space;
      for (Eigen::Index k = 0; k < ones.nonZeros(); ++k) ones.valuePtr()[k] = 1.0;
      pattern += ones;
    }
    pattern.makeCompressed();
    pattern_ = pattern;
    values_.resize(a_.rank());
    for (std::size_t t = 0; t < a_.rank(); ++t) {
      Vec v = Vec::Zero(pattern_.nonZeros());
      const SpMat& m = a_[t].space;
      for (int c = 0; c < m.outerSize(); ++c)
        for (SpMat::InnerIterator it(m, c); it; ++it) {
          auto begin = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[c];
          auto end = pattern_.innerIndexPtr() + pattern_.outerIndexPtr()[c + 1];
          auto pos = std::lower_bound(begin, end, static_cast<int>(it.row()));
          v[pos - pattern_.innerIndexPtr()] += it.value();
        }
      values_[t] = std::move(v);
    }
    if (a_.rank() == 1) {
      shared_ = std::make_shared<SparseDirect>();
      shared_->compute(a_[0].space);
    }
  }

  const SepMatrix& tensor() const { return a_; }
  Eigen::Index size() const { return n_; }
  std::size_t rank() const { return a_.rank(); }

  SpMat weighted(const std::vector<double>& alpha) const {
    SpMat m = pattern_;
    Eigen::Map<Vec> vals(m.valuePtr(), m.nonZeros());
    vals.setZero();
    for (std::size_t t = 0; t < alpha.size(); ++t) vals += alpha[t] * values_[t];
    return m;
  }

  /// Solve (sum_t alpha_t A_t) x = b, refactorizing unless the operator has a single term.
  Vec solve(const std::vector<double>& alpha, const Vec& b, SparseDirect& work, bool& analyzed) const {
    if (shared_) return shared_->solve(b) / alpha[0];
    SpMat m = weighted(alpha);
    if (!analyzed) {
      work.analyze(m);
      analyzed = true;
    }
    work.factorize(m);
    return work.solve(b);
  }

private:
  SepMatrix a_;
  Eigen::Index n_ = 0;
  SpMat pattern_;
  std::vector<Vec> values_;
  std::shared_ptr<SparseDirect> shared_;
};

namespace detail {

inline double prod_except(const std::vector<double>& f, std::size_t skip) {
  double p = 1.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    if (k != skip) p *= f[k];
  return p;
}

inline void normalize_sign(Vec& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) v = -v;
}

}  // namespace detail

/// Greedy Galerkin PGD with alternating directions for a separated linear system A x = b.
inline SepVector pgd_solve(const PgdOperator& op, const SepVector& b, const ConvergenceMask& mask,
                           const PgdOptions& opt = {}, PgdReport* report = nullptr) {
  Counters::get().pgd_solves++;
  const SepMatrix& A = op.tensor();
  sep::check_compatible(A, b);
  const std::size_t D = A.dims();
  const std::size_t T = A.rank();
  const std::size_t S = b.rank();
  const Eigen::Index n = op.size();
  for (const auto& t : b.terms())
    if (t.space.size() != n) throw std::invalid_argument("pgd: right-hand side size mismatch");

  SepVector sol(A.param_sizes());
  std::vector<std::vector<Vec>> AU;  // AU[m][t] = A_t U_m
  const std::size_t nb = mask.blocks.size();
  std::vector<Mat> gram(nb);  // per block: (U_m^b . U_n^b) prod_k (phi_m^k . phi_n^k)
  PgdReport rep;
  SparseDirect work;
  bool analyzed = false;

  auto block_norm = [&](const Vec& v, std::size_t blk) {
    double s = 0.0;
    for (int i : mask.blocks[blk]) s += v[i] * v[i];
    return std::sqrt(s);
  };

  auto spatial = [&](const std::vector<Vec>& Sx) -> Vec {
    std::vector<double> alpha(T);
    for (std::size_t t = 0; t < T; ++t) {
      double p = 1.0;
      for (std::size_t k = 0; k < D; ++k) p *= Sx[k].cwiseAbs2().dot(A[t].params[k]);
      alpha[t] = p;
    }
    Vec rhs = Vec::Zero(n);
    for (std::size_t s = 0; s < S; ++s) {
      double p = 1.0;
      for (std::size_t k = 0; k < D; ++k) p *= Sx[k].dot(b[s].params[k]);
      if (p != 0.0) rhs += p * b[s].space;
    }
    for (std::size_t m = 0; m < sol.rank(); ++m)
      for (std::size_t t = 0; t < T; ++t) {
        double p = 1.0;
        for (std::size_t k = 0; k < D; ++k) p *= Sx[k].cwiseProduct(A[t].params[k]).dot(sol[m].params[k]);
        if (p != 0.0) rhs -= p * AU[m][t];
      }
    rep.inner_iterations++;
    return op.solve(alpha, rhs, work, analyzed);
  };

  auto parametric = [&](const Vec& R, std::vector<Vec>& Sx) -> bool {
    std::vector<double> q(T), r(S);
    for (std::size_t t = 0; t < T; ++t) q[t] = R.dot(A[t].space * R);
    for (std::size_t s = 0; s < S; ++s) r[s] = R.dot(b[s].space);
    std::vector<std::vector<double>> w(sol.rank(), std::vector<double>(T));
    for (std::size_t m = 0; m < sol.rank(); ++m)
      for (std::size_t t = 0; t < T; ++t) w[m][t] = R.dot(AU[m][t]);
    for (std::size_t k = 0; k < D; ++k) {
      const Eigen::Index nk = static_cast<Eigen::Index>(A.param_sizes()[k]);
      Vec den = Vec::Zero(nk), num = Vec::Zero(nk);
      for (std::size_t t = 0; t < T; ++t) {
        double c = q[t];
        for (std::size_t j = 0; j < D; ++j)
          if (j != k) c *= Sx[j].cwiseAbs2().dot(A[t].params[j]);
        den += c * A[t].params[k];
      }
      for (std::size_t s = 0; s < S; ++s) {
        double c = r[s];
        for (std::size_t j = 0; j < D; ++j)
          if (j != k) c *= Sx[j].dot(b[s].params[j]);
        num += c * b[s].params[k];
      }
      for (std::size_t m = 0; m < sol.rank(); ++m)
        for (std::size_t t = 0; t < T; ++t) {
          double c = w[m][t];
          for (std::size_t j = 0; j < D; ++j)
            if (j != k) c *= Sx[j].cwiseProduct(A[t].params[j]).dot(sol[m].params[j]);
          if (c != 0.0) num -= c * A[t].params[k].cwiseProduct(sol[m].params[k]);
        }
      double dmax = den.cwiseAbs().maxCoeff();
      Vec next(nk);
      for (Eigen::Index i = 0; i < nk; ++i)
        next[i] = std::abs(den[i]) > 1e-14 * dmax && dmax > 0 ? num[i] / den[i] : 0.0;
      double nn = next.norm();
      if (!(nn > 0) || !std::isfinite(nn)) return false;
      next /= nn;
      detail::normalize_sign(next);
      Sx[k] = std::move(next);
    }
    return true;
  };

  for (int mode = 0; mode < opt.max_modes + 1; ++mode) {
    std::vector<Vec> Sx(D);
    for (std::size_t k = 0; k < D; ++k) {
      auto nk = static_cast<Eigen::Index>(A.param_sizes()[k]);
      Sx[k] = Vec::Ones(nk) / std::sqrt(static_cast<double>(nk));
    }
    Vec R = spatial(Sx);
    double rn = R.norm();
    if (D > 0 && rn > 0 && std::isfinite(rn)) {
      for (int it = 0; it < opt.max_inner; ++it) {
        if (!parametric(R, Sx)) break;
        Vec Rn = spatial(Sx);
        double nn = Rn.norm();
        if (!(nn > 0) || !std::isfinite(nn)) {
          R = Rn;
          break;
        }
        double change = std::min((Rn / nn - R / R.norm()).norm(), (Rn / nn + R / R.norm()).norm());
        R = std::move(Rn);
        if (change < opt.inner_tol) break;
      }
    }
    if (!R.allFinite()) throw std::runtime_error("pgd: non-finite mode");

    // Relative amplitude of the candidate mode in each block.
    double total_acc = 0.0;
    std::vector<double> acc(nb);
    for (std::size_t blk = 0; blk < nb; ++blk) {
      acc[blk] = std::sqrt(std::max(0.0, gram[blk].sum()));
      total_acc = std::max(total_acc, acc[blk]);
    }
    double worst = 0.0;
    for (std::size_t blk = 0; blk < nb; ++blk) {
      double amp = block_norm(R, blk);
      double ref = std::max(acc[blk], 1e-12 * total_acc);
      double ratio = ref > 0 ? amp / ref : (amp > 0 ? std::numeric_limits<double>::infinity() : 0.0);
      worst = std::max(worst, ratio);
    }
    rep.ratios.push_back(worst);
    if (worst < opt.enrich_tol) {
      rep.converged = true;
      break;
    }
    if (static_cast<int>(sol.rank()) >= opt.max_modes) break;

    // Accept the mode.
    std::size_t m = sol.rank();
    for (std::size_t blk = 0; blk < nb; ++blk) {
      Mat g = Mat::Zero(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m + 1));
      g.topLeftCorner(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) = gram[blk];
      Vec Rb = Vec::Zero(n);
      for (int i : mask.blocks[blk]) Rb[i] = R[i];
      for (std::size_t j = 0; j <= m; ++j) {
        const Vec& Uj = j < m ? sol[j].space : R;
        double v = 0.0;
        for (int i : mask.blocks[blk]) v += Rb[i] * Uj[i];
        for (std::size_t k = 0; k < D; ++k) v *= Sx[k].dot(j < m ? sol[j].params[k] : Sx[k]);
        g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = v;
        g(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) = v;
      }
      gram[blk] = std::move(g);
    }
    std::vector<Vec> au(T);
    for (std::size_t t = 0; t < T; ++t) au[t] = A[t].space * R;
    AU.push_back(std::move(au));
    sol.push(std::move(R), std::move(Sx));
    if (D == 0 && b.rank() > 0) {
      // Without parametric axes a single direct solve is exact.
      rep.converged = true;
      break;
    }
  }
  rep.modes = static_cast<int>(sol.rank());
  if (report) *report = rep;
  return sol;
}

}  // namespace ddpgd

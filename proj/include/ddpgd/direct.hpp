#pragma once

#include <atomic>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "ddpgd/septensor.hpp"

namespace ddpgd {

/// Process-wide counters used to check that the online stage never assembles or factorizes.
struct Counters {
  std::atomic<long> assemblies{0};
  std::atomic<long> factorizations{0};
  std::atomic<long> pgd_solves{0};

  static Counters& get() {
    static Counters c;
    return c;
  }
  struct Snapshot {
    long assemblies, factorizations, pgd_solves;
    bool operator==(const Snapshot&) const = default;
    Snapshot operator-(const Snapshot& o) const {
      return {assemblies - o.assemblies, factorizations - o.factorizations, pgd_solves - o.pgd_solves};
    }
  };
  Snapshot snapshot() const { return {assemblies.load(), factorizations.load(), pgd_solves.load()}; }
};

/// Sparse direct solver for general (unsymmetric or indefinite) matrices.
class SparseDirect {
public:
  void analyze(const SpMat& a) {
    solver_.analyzePattern(a);
    analyzed_ = true;
  }
  void factorize(const SpMat& a) {
    if (!analyzed_) analyze(a);
    solver_.factorize(a);
    if (solver_.info() != Eigen::Success) throw std::runtime_error("sparse factorization failed: " + solver_.lastErrorMessage());
    Counters::get().factorizations++;
  }
  void compute(const SpMat& a) {
    analyzed_ = false;
    factorize(a);
  }
  Vec solve(const Vec& b) const {
    Vec x = solver_.solve(b);
    return x;
  }
  Mat solve(const Mat& b) const {
    Mat x = solver_.solve(b);
    return x;
  }

private:
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> solver_;
  bool analyzed_ = false;
};

}  // namespace ddpgd

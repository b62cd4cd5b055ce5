#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddpgd/expr.hpp"

namespace ddpgd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;

/// One parametric axis collocated on an explicit point set.
struct ParamAxis {
  std::string name;
  std::vector<double> points;

  static ParamAxis range(std::string name, double lo, double hi, double step) {
    if (!(step > 0) || hi < lo) throw ConfigError("parameter '" + name + "': bad range");
    auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    ParamAxis a{std::move(name), {}};
    for (long i = 0; i <= n; ++i) a.points.push_back(lo + step * static_cast<double>(i));
    return a;
  }

  std::size_t size() const { return points.size(); }

  /// Linear interpolation stencil for a value; values outside the range are rejected.
  void stencil(double v, std::size_t& i0, std::size_t& i1, double& w1) const {
    const auto n = points.size();
    double span = points.back() - points.front();
    double tol = 1e-10 * std::max(std::abs(span), std::abs(points.back()));
    if (n == 1 || v < points.front() - tol || v > points.back() + tol) {
      if (n == 1 && std::abs(v - points[0]) <= 1e-12 * std::max(1.0, std::abs(v))) {
        i0 = i1 = 0; w1 = 0; return;
      }
      throw std::out_of_range("parameter '" + name + "' value " + std::to_string(v) + " outside its grid");
    }
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs(points[k] - v) <= tol) { i0 = i1 = k; w1 = 0; return; }
    auto it = std::upper_bound(points.begin(), points.end(), v);
    i1 = std::min<std::size_t>(static_cast<std::size_t>(it - points.begin()), n - 1);
    i0 = i1 - 1;
    w1 = (v - points[i0]) / (points[i1] - points[i0]);
  }

  double interpolate(const Vec& f, double v) const {
    std::size_t i0, i1;
    double w1;
    stencil(v, i0, i1, w1);
    return (1 - w1) * f[static_cast<Eigen::Index>(i0)] + w1 * f[static_cast<Eigen::Index>(i1)];
  }
};

/// Ordered list of parametric axes for one separated tensor.
struct ParamSpace {
  std::vector<ParamAxis> axes;
  std::size_t dims() const { return axes.size(); }
  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s;
    for (const auto& a : axes) s.push_back(a.size());
    return s;
  }
  std::size_t total_points() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
  }
};

/// Rank-one term: a spatial factor times one vector per parametric axis.
template <class Spatial>
struct SepTerm {
  Spatial space;
  std::vector<Vec> params;
};

/// Finite sum of rank-one terms; axis 0 is space, axes 1..N are parameters.
template <class Spatial>
class SepTensor {
public:
  SepTensor() = default;
  explicit SepTensor(std::vector<std::size_t> param_sizes) : sizes_(std::move(param_sizes)) {}

  const std::vector<std::size_t>& param_sizes() const { return sizes_; }
  std::size_t dims() const { return sizes_.size(); }
  std::size_t rank() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<SepTerm<Spatial>>& terms() const { return terms_; }
  std::vector<SepTerm<Spatial>>& terms() { return terms_; }
  const SepTerm<Spatial>& operator[](std::size_t i) const { return terms_[i]; }
  SepTerm<Spatial>& operator[](std::size_t i) { return terms_[i]; }

  void push(Spatial space, std::vector<Vec> params) {
    if (params.size() != sizes_.size()) throw std::invalid_argument("separated term: wrong number of axes");
    for (std::size_t k = 0; k < params.size(); ++k)
      if (static_cast<std::size_t>(params[k].size()) != sizes_[k])
        throw std::invalid_argument("separated term: axis length mismatch");
    terms_.push_back({std::move(space), std::move(params)});
  }
  /// Term constant in every parameter.
  void push_constant(Spatial space) {
    std::vector<Vec> p;
    for (auto n : sizes_) p.push_back(Vec::Ones(static_cast<Eigen::Index>(n)));
    push(std::move(space), std::move(p));
  }

private:
  std::vector<std::size_t> sizes_;
  std::vector<SepTerm<Spatial>> terms_;
};

using SepVector = SepTensor<Vec>;
using SepMatrix = SepTensor<SpMat>;

namespace sep {

inline Eigen::Index rows(const Vec& v) { return v.size(); }
inline Eigen::Index rows(const SpMat& m) { return m.rows(); }

template <class S, class T>
void check_compatible(const SepTensor<S>& a, const SepTensor<T>& b) {
  if (a.param_sizes() != b.param_sizes()) throw std::invalid_argument("separated tensors: axis mismatch");
}

template <class S>
SepTensor<S> add(const SepTensor<S>& a, const SepTensor<S>& b) {
  check_compatible(a, b);
  SepTensor<S> out = a;
  for (const auto& t : b.terms()) out.terms().push_back(t);
  return out;
}

template <class S>
SepTensor<S> scale(SepTensor<S> a, double s) {
  for (auto& t : a.terms()) t.space *= s;
  return a;
}

inline SepMatrix transpose(const SepMatrix& a) {
  SepMatrix out(a.param_sizes());
  for (const auto& t : a.terms()) out.push(SpMat(t.space.transpose()), t.params);
  return out;
}

/// Product of a separated operator with a separated vector: rank is the product of ranks.
inline SepVector apply(const SepMatrix& A, const SepVector& x) {
  check_compatible(A, x);
  SepVector out(A.param_sizes());
  for (const auto& a : A.terms())
    for (const auto& b : x.terms()) {
      std::vector<Vec> p(a.params.size());
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = a.params[k].cwiseProduct(b.params[k]);
      out.push(Vec(a.space * b.space), std::move(p));
    }
  return out;
}

/// Pointwise product of parametric factors of two scalar-weighted tensors (space factors multiplied
/// by the user-supplied combiner).
template <class S, class T, class F>
auto outer_params(const SepTensor<S>& a, const SepTensor<T>& b, F&& combine) {
  using R = decltype(combine(a[0].space, b[0].space));
  SepTensor<R> out(a.param_sizes());
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      std::vector<Vec> p(s.params.size());
      for (std::size_t k = 0; k < p.size(); ++k) p[k] = s.params[k].cwiseProduct(t.params[k]);
      out.push(combine(s.space, t.space), std::move(p));
    }
  return out;
}

/// Block matrix assembled from a grid of separated blocks (empty blocks are zero).
/// Each block term becomes one term of the result, padded with zeros elsewhere.
inline SepMatrix block(const std::vector<std::vector<const SepMatrix*>>& grid, const std::vector<Eigen::Index>& row_sizes,
                       const std::vector<Eigen::Index>& col_sizes, const std::vector<std::size_t>& param_sizes) {
  Eigen::Index nr = std::accumulate(row_sizes.begin(), row_sizes.end(), Eigen::Index{0});
  Eigen::Index nc = std::accumulate(col_sizes.begin(), col_sizes.end(), Eigen::Index{0});
  SepMatrix out(param_sizes);
  Eigen::Index r0 = 0;
  for (std::size_t bi = 0; bi < grid.size(); ++bi) {
    Eigen::Index c0 = 0;
    for (std::size_t bj = 0; bj < grid[bi].size(); ++bj) {
      const SepMatrix* blk = grid[bi][bj];
      if (blk) {
        if (blk->param_sizes() != param_sizes) throw std::invalid_argument("block: axis mismatch");
        for (const auto& t : blk->terms()) {
          if (t.space.rows() != row_sizes[bi] || t.space.cols() != col_sizes[bj])
            throw std::invalid_argument("block: size mismatch");
          std::vector<Eigen::Triplet<double>> trip;
          trip.reserve(static_cast<std::size_t>(t.space.nonZeros()));
          for (int c = 0; c < t.space.outerSize(); ++c)
            for (SpMat::InnerIterator it(t.space, c); it; ++it)
              trip.emplace_back(static_cast<int>(r0 + it.row()), static_cast<int>(c0 + it.col()), it.value());
          SpMat m(nr, nc);
          m.setFromTriplets(trip.begin(), trip.end());
          out.push(std::move(m), t.params);
        }
      }
      c0 += col_sizes[bj];
    }
    r0 += row_sizes[bi];
  }
  return out;
}

/// Merge terms whose parametric factors are identical.
template <class S>
SepTensor<S> merge_identical(const SepTensor<S>& a) {
  SepTensor<S> out(a.param_sizes());
  for (const auto& t : a.terms()) {
    bool merged = false;
    for (auto& o : out.terms()) {
      bool same = true;
      for (std::size_t k = 0; k < t.params.size() && same; ++k) same = (o.params[k].array() == t.params[k].array()).all();
      if (same) {
        o.space += t.space;
        merged = true;
        break;
      }
    }
    if (!merged) out.terms().push_back(t);
  }
  return out;
}

/// Parametric weight of a term at a grid multi-index.
inline double weight_at(const std::vector<Vec>& params, const std::vector<std::size_t>& idx) {
  double w = 1.0;
  for (std::size_t k = 0; k < params.size(); ++k) w *= params[k][static_cast<Eigen::Index>(idx[k])];
  return w;
}

/// Parametric weight at an arbitrary point, by per-axis linear interpolation.
inline double weight_at(const std::vector<Vec>& params, const ParamSpace& ps, const std::vector<double>& mu) {
  if (mu.size() != params.size() || ps.dims() != params.size())
    throw std::invalid_argument("evaluation point has wrong dimension");
  double w = 1.0;
  for (std::size_t k = 0; k < params.size(); ++k) w *= ps.axes[k].interpolate(params[k], mu[k]);
  return w;
}

inline Vec evaluate(const SepVector& t, Eigen::Index n, const ParamSpace& ps, const std::vector<double>& mu) {
  Vec out = Vec::Zero(n);
  for (const auto& term : t.terms()) out += weight_at(term.params, ps, mu) * term.space;
  return out;
}

inline SpMat evaluate(const SepMatrix& t, Eigen::Index rows, Eigen::Index cols, const ParamSpace& ps,
                      const std::vector<double>& mu) {
  SpMat out(rows, cols);
  for (const auto& term : t.terms()) out += weight_at(term.params, ps, mu) * term.space;
  return out;
}

inline Vec evaluate_index(const SepVector& t, Eigen::Index n, const std::vector<std::size_t>& idx) {
  Vec out = Vec::Zero(n);
  for (const auto& term : t.terms()) out += weight_at(term.params, idx) * term.space;
  return out;
}

/// Euclidean inner product over space x full parametric grid.
inline double inner(const SepVector& a, const SepVector& b) {
  double s = 0.0;
  for (const auto& x : a.terms())
    for (const auto& y : b.terms()) {
      double w = x.space.dot(y.space);
      for (std::size_t k = 0; k < x.params.size() && w != 0.0; ++k) w *= x.params[k].dot(y.params[k]);
      s += w;
    }
  return s;
}

inline double norm(const SepVector& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

/// Restrict the spatial factor to a subset of rows.
inline SepVector restrict_rows(const SepVector& a, const std::vector<int>& rows) {
  SepVector out(a.param_sizes());
  for (const auto& t : a.terms()) {
    Vec v(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) v[static_cast<Eigen::Index>(i)] = t.space[rows[i]];
    out.push(std::move(v), t.params);
  }
  return out;
}

/// Scatter the spatial factor into a larger zero vector.
inline SepVector scatter_rows(const SepVector& a, const std::vector<int>& rows, Eigen::Index n) {
  SepVector out(a.param_sizes());
  for (const auto& t : a.terms()) {
    Vec v = Vec::Zero(n);
    for (std::size_t i = 0; i < rows.size(); ++i) v[rows[i]] = t.space[static_cast<Eigen::Index>(i)];
    out.push(std::move(v), t.params);
  }
  return out;
}

/// Dense materialisation, space index fastest; intended for small tensors and tests.
inline std::vector<double> to_dense(const SepVector& a, Eigen::Index n) {
  std::size_t total = static_cast<std::size_t>(n);
  for (auto s : a.param_sizes()) total *= s;
  std::vector<double> out(total, 0.0);
  std::vector<std::size_t> idx(a.dims(), 0);
  std::size_t block = static_cast<std::size_t>(n);
  for (std::size_t off = 0; off < total; off += block) {
    for (const auto& t : a.terms()) {
      double w = weight_at(t.params, idx);
      if (w == 0.0) continue;
      for (Eigen::Index i = 0; i < n; ++i) out[off + static_cast<std::size_t>(i)] += w * t.space[i];
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (++idx[k] < a.param_sizes()[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

}  // namespace sep

/// Row/column extraction from a sparse matrix through index lists.
inline SpMat submatrix(const SpMat& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> rmap(static_cast<std::size_t>(a.rows()), -1), cmap(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t i = 0; i < rows.size(); ++i) rmap[static_cast<std::size_t>(rows[i])] = static_cast<int>(i);
  for (std::size_t i = 0; i < cols.size(); ++i) cmap[static_cast<std::size_t>(cols[i])] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < a.outerSize(); ++c) {
    int cc = cmap[static_cast<std::size_t>(c)];
    if (cc < 0) continue;
    for (SpMat::InnerIterator it(a, c); it; ++it) {
      int rr = rmap[static_cast<std::size_t>(it.row())];
      if (rr >= 0) trip.emplace_back(rr, cc, it.value());
    }
  }
  SpMat out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline SepMatrix submatrix(const SepMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  SepMatrix out(a.param_sizes());
  for (const auto& t : a.terms()) out.push(submatrix(t.space, rows, cols), t.params);
  return out;
}

}  // namespace ddpgd

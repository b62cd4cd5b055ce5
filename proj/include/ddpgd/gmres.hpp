#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "ddpgd/septensor.hpp"

namespace ddpgd {

struct GmresOptions {
  double rel_tol = 1e-6;
  int max_iter = -1;  // default: 5 x system size
};

struct GmresResult {
  Vec x;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // relative residual after each iteration
};

/// Unrestarted GMRES with modified Gram-Schmidt and Givens rotations, zero initial guess.
inline GmresResult gmres(const std::function<Vec(const Vec&)>& apply, const Vec& b, const GmresOptions& opt = {}) {
  const Eigen::Index n = b.size();
  GmresResult out;
  out.x = Vec::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  const int max_iter = opt.max_iter > 0 ? opt.max_iter : static_cast<int>(5 * n);
  std::vector<Vec> V;
  V.push_back(b / bnorm);
  Mat H = Mat::Zero(max_iter + 1, max_iter);
  Vec cs = Vec::Zero(max_iter), sn = Vec::Zero(max_iter), g = Vec::Zero(max_iter + 1);
  g[0] = bnorm;
  int k = 0;
  for (; k < max_iter; ++k) {
    Vec w = apply(V[static_cast<std::size_t>(k)]);
    for (int i = 0; i <= k; ++i) {
      H(i, k) = w.dot(V[static_cast<std::size_t>(i)]);
      w -= H(i, k) * V[static_cast<std::size_t>(i)];
    }
    H(k + 1, k) = w.norm();
    for (int i = 0; i < k; ++i) {
      double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
      H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
      H(i, k) = t;
    }
    double r = std::hypot(H(k, k), H(k + 1, k));
    cs[k] = H(k, k) / r;
    sn[k] = H(k + 1, k) / r;
    H(k, k) = r;
    H(k + 1, k) = 0.0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = cs[k] * g[k];
    double rel = std::abs(g[k + 1]) / bnorm;
    out.residuals.push_back(rel);
    if (rel <= opt.rel_tol) {
      ++k;
      out.converged = true;
      break;
    }
    double hn = w.norm();
    if (hn == 0.0) {
      ++k;
      out.converged = true;
      break;
    }
    V.push_back(w / hn);
  }
  Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  for (int i = 0; i < k; ++i) out.x += y[i] * V[static_cast<std::size_t>(i)];
  out.iterations = k;
  return out;
}

}  // namespace ddpgd

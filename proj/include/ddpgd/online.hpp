#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ddpgd/direct.hpp"
#include "ddpgd/gmres.hpp"
#include "ddpgd/offline.hpp"

namespace ddpgd {

/// Interpolation rows taking a full field of `from` to the trace dofs of `to`.
/// Coincident nodes give unit rows; other points use the element basis of `from`.
inline SpMat restriction(const Subdomain& to, const Subdomain& from) {
  const auto& tr = to.trace();
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t r = 0; r < tr.size(); ++r) {
    int kind = to.dof_kind(tr[r]);
    auto xy = to.dof_coords(tr[r]);
    int d = from.find_dof(kind, xy[0], xy[1]);
    if (d >= 0) {
      t.emplace_back(static_cast<int>(r), d, 1.0);
      continue;
    }
    const auto& space = kind == 2 ? *from.pspace() : *from.vspace();
    auto cell = from.mesh().locate(xy[0], xy[1]);
    if (!cell)
      throw ConfigError("interface point (" + std::to_string(xy[0]) + ", " + std::to_string(xy[1]) + ") of '" +
                        to.name() + "' lies outside '" + from.name() + "'");
    const auto& m = from.mesh();
    auto [ci, cj] = *cell;
    double tx = (xy[0] - m.xs()[ci]) / (m.xs()[ci + 1] - m.xs()[ci]);
    double ty = (xy[1] - m.ys()[cj]) / (m.ys()[cj + 1] - m.ys()[cj]);
    double vx[3], dx[3], ddx[3], vy[3], dy[3], ddy[3];
    const int p = space.degree();
    Lagrange1D::eval(p, tx, vx, dx, ddx);
    Lagrange1D::eval(p, ty, vy, dy, ddy);
    int nodes[9];
    space.cell_nodes(ci, cj, nodes);
    for (int b = 0; b <= p; ++b)
      for (int a = 0; a <= p; ++a) {
        double w = vx[a] * vy[b];
        if (w == 0.0) continue;
        int n = nodes[a + (p + 1) * b];
        t.emplace_back(static_cast<int>(r), kind == 2 ? from.pdof(n) : from.vdof(kind, n), w);
      }
  }
  SpMat R(static_cast<Eigen::Index>(tr.size()), from.ndofs());
  R.setFromTriplets(t.begin(), t.end());
  return R;
}

/// Restriction maps of a two-subdomain decomposition: R[i] maps fields of the other subdomain to trace i.
struct Decomposition {
  std::array<SpMat, 2> R;
};

namespace detail {

inline bool is_vertex(const TensorMesh& m, double x, double y) {
  auto on = [](const std::vector<double>& g, double v, double tol) {
    auto it = std::lower_bound(g.begin(), g.end(), v - tol);
    return it != g.end() && std::abs(*it - v) <= tol;
  };
  double tol = 1e-12 * std::max(1.0, m.min_spacing());
  return on(m.xs(), x, tol) && on(m.ys(), y, tol);
}

/// Every vertex of `a` inside `b` must be a vertex of `b`.
inline void check_conforming(const Subdomain& a, const Subdomain& b) {
  const auto& m = a.mesh();
  for (int j = 0; j < m.ncy(); ++j)
    for (int i = 0; i < m.ncx(); ++i) {
      if (!m.active(i, j)) continue;
      double cx = 0.5 * (m.xs()[i] + m.xs()[i + 1]), cy = 0.5 * (m.ys()[j] + m.ys()[j + 1]);
      if (!b.mesh().locate(cx, cy)) continue;
      for (double x : {m.xs()[i], m.xs()[i + 1]})
        for (double y : {m.ys()[j], m.ys()[j + 1]})
          if (!is_vertex(b.mesh(), x, y))
            throw ConfigError("overlap meshes of '" + a.name() + "' and '" + b.name() + "' do not match at (" +
                              std::to_string(x) + ", " + std::to_string(y) + ")");
    }
}

}  // namespace detail

inline Decomposition decompose(const Subdomain& a, const Subdomain& b) {
  if (a.trace().empty() || b.trace().empty()) throw ConfigError("decomposition needs an interface in both subdomains");
  for (int ta : a.trace()) {
    auto p = a.dof_coords(ta);
    for (int tb : b.trace()) {
      auto q = b.dof_coords(tb);
      if (std::hypot(p[0] - q[0], p[1] - q[1]) <= 1e-12 * std::max(1.0, a.mesh().min_spacing()))
        throw ConfigError("interfaces of '" + a.name() + "' and '" + b.name() + "' intersect: the overlap is empty");
    }
  }
  detail::check_conforming(a, b);
  detail::check_conforming(b, a);
  return {{restriction(a, b), restriction(b, a)}};
}

/// Surrogate evaluated at one parameter point: u(lambda) = base + U lambda over all dofs.
struct EvaluatedExpansion {
  Vec base;  // data solution plus lifting
  Mat U;     // one column per trace dof, extension included
};

inline std::vector<double> local_point(const std::vector<int>& axes, const std::vector<double>& mu) {
  std::vector<double> out;
  for (int a : axes) {
    if (a >= static_cast<int>(mu.size())) throw std::invalid_argument("parameter point has too few entries");
    out.push_back(mu[static_cast<std::size_t>(a)]);
  }
  return out;
}

inline EvaluatedExpansion evaluate_expansion(const SubdomainSurrogate& s, const std::vector<double>& mu) {
  const auto m = local_point(s.global_axes, mu);
  const auto nf = static_cast<Eigen::Index>(s.free.size());
  EvaluatedExpansion e;
  e.base = sep::evaluate(s.lifting, s.ndofs, s.params, m);
  Vec d = sep::evaluate(s.data, nf, s.params, m);
  for (Eigen::Index i = 0; i < nf; ++i) e.base[s.free[static_cast<std::size_t>(i)]] += d[i];
  e.U = Mat::Zero(s.ndofs, static_cast<Eigen::Index>(s.trace.size()));
  for (std::size_t j = 0; j < s.traces.size(); ++j) {
    Vec c = sep::evaluate(s.traces[j], nf, s.params, m);
    auto col = static_cast<Eigen::Index>(j);
    for (Eigen::Index i = 0; i < nf; ++i) e.U(s.free[static_cast<std::size_t>(i)], col) = c[i];
    if (s.physics == Physics::Stokes) e.U(s.trace[j], col) += 1.0;
  }
  return e;
}

/// Affine map from interface coefficients to the full field of one subdomain.
using LocalMap = std::function<Vec(const Vec&)>;

struct CoupledSolution {
  std::array<Vec, 2> lambda;
  std::array<Vec, 2> u;
  GmresResult gmres;
  double seconds = 0;
  Counters::Snapshot work{};  // assemblies/factorizations performed inside the iteration
};

/// Solve [l1 - R1 u2(l2); l2 - R2 u1(l1)] = 0 for the interface coefficients.
inline CoupledSolution solve_interface(const Decomposition& dec, const std::array<LocalMap, 2>& map,
                                       const std::array<int, 2>& ntrace, const GmresOptions& opt = {}) {
  auto c0 = Counters::get().snapshot();
  auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index n0 = ntrace[0], n1 = ntrace[1];
  std::array<Vec, 2> base{map[0](Vec::Zero(n0)), map[1](Vec::Zero(n1))};
  Vec b(n0 + n1);
  b << dec.R[0] * base[1], dec.R[1] * base[0];
  auto apply = [&](const Vec& x) {
    Vec l0 = x.head(n0), l1 = x.tail(n1);
    Vec y(n0 + n1);
    y << l0 - dec.R[0] * (map[1](l1) - base[1]), l1 - dec.R[1] * (map[0](l0) - base[0]);
    return y;
  };
  CoupledSolution s;
  s.gmres = gmres(apply, b, opt);
  s.lambda[0] = s.gmres.x.head(n0);
  s.lambda[1] = s.gmres.x.tail(n1);
  s.u[0] = map[0](s.lambda[0]);
  s.u[1] = map[1](s.lambda[1]);
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  s.work = Counters::get().snapshot() - c0;
  return s;
}

/// Largest violation of the interface conditions lambda_i = R_i u_j by a coupled solution.
inline double interface_mismatch(const Decomposition& dec, const CoupledSolution& s) {
  double m = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    Vec r = s.lambda[i] - dec.R[i] * s.u[1 - i];
    if (r.size()) m = std::max(m, r.cwiseAbs().maxCoeff());
  }
  return m;
}

struct OnlineResult {
  CoupledSolution solution;
  double eval_seconds = 0;
  double total_seconds = 0;
};

/// Online phase: evaluate both surrogates at mu, then couple them with GMRES.
inline OnlineResult online_solve(const std::array<const SubdomainSurrogate*, 2>& sur, const Decomposition& dec,
                                 const std::vector<double>& mu, const GmresOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  std::array<EvaluatedExpansion, 2> ev{evaluate_expansion(*sur[0], mu), evaluate_expansion(*sur[1], mu)};
  auto t1 = std::chrono::steady_clock::now();
  std::array<LocalMap, 2> maps;
  for (int i = 0; i < 2; ++i) {
    const EvaluatedExpansion* e = &ev[static_cast<std::size_t>(i)];
    maps[static_cast<std::size_t>(i)] = [e](const Vec& l) -> Vec { return e->base + e->U * l; };
  }
  OnlineResult r;
  r.solution = solve_interface(dec, maps, {static_cast<int>(sur[0]->trace.size()), static_cast<int>(sur[1]->trace.size())},
                               opt);
  r.eval_seconds = std::chrono::duration<double>(t1 - t0).count();
  r.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace ddpgd

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "ddpgd/direct.hpp"
#include "ddpgd/subdomain.hpp"

namespace ddpgd {

/// Separated full-dof operator and data of one subdomain.
struct SubdomainOperator {
  SepMatrix K;   // N x N, blocks [A B^T; B C]
  SepVector F;   // N
  SepVector G;   // lifting: prescribed values at essential dofs, zero elsewhere
  SpMat M;       // Darcy: N x ntrace coupling with interface pressure traces
};

namespace detail {

struct Gauss3 {
  static constexpr double t[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
  static constexpr double w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

/// Shape data of a tensor-product basis at the 3x3 Gauss points of one cell.
struct CellBasis {
  int degree = 1, nb = 4;
  double hx = 0, hy = 0;
  std::array<double, 9> x{}, y{}, w{};
  // [q][a]
  std::array<std::array<double, 9>, 9> v{}, gx{}, gy{}, hxx{}, hyy{}, hxy{};

  void build(const TensorMesh& mesh, int i, int j, int deg) {
    degree = deg;
    nb = (deg + 1) * (deg + 1);
    double x0 = mesh.xs()[i], y0 = mesh.ys()[j];
    hx = mesh.xs()[i + 1] - x0;
    hy = mesh.ys()[j + 1] - y0;
    for (int qy = 0; qy < 3; ++qy)
      for (int qx = 0; qx < 3; ++qx) {
        int q = qx + 3 * qy;
        x[q] = x0 + hx * Gauss3::t[qx];
        y[q] = y0 + hy * Gauss3::t[qy];
        w[q] = Gauss3::w[qx] * Gauss3::w[qy] * hx * hy;
        double vx[3], dx[3], ddx[3], vy[3], dy[3], ddy[3];
        Lagrange1D::eval(deg, Gauss3::t[qx], vx, dx, ddx);
        Lagrange1D::eval(deg, Gauss3::t[qy], vy, dy, ddy);
        for (int b = 0; b <= deg; ++b)
          for (int a = 0; a <= deg; ++a) {
            int k = a + (deg + 1) * b;
            v[q][k] = vx[a] * vy[b];
            gx[q][k] = dx[a] * vy[b] / hx;
            gy[q][k] = vx[a] * dy[b] / hy;
            hxx[q][k] = ddx[a] * vy[b] / (hx * hx);
            hyy[q][k] = vx[a] * ddy[b] / (hy * hy);
            hxy[q][k] = dx[a] * dy[b] / (hx * hy);
          }
      }
  }
};

/// Shape values of a cell basis at 3 Gauss points along one edge.
struct EdgeBasis {
  std::array<double, 3> x{}, y{}, w{};
  std::array<std::array<double, 9>, 3> v{};

  void build(const TensorMesh& mesh, const BoundaryEdge& e, int deg) {
    double x0 = mesh.xs()[e.i], y0 = mesh.ys()[e.j];
    double hx = mesh.xs()[e.i + 1] - x0, hy = mesh.ys()[e.j + 1] - y0;
    for (int q = 0; q < 3; ++q) {
      double tx = 0, ty = 0;
      if (e.side == 0) { tx = 0; ty = Gauss3::t[q]; }
      if (e.side == 1) { tx = 1; ty = Gauss3::t[q]; }
      if (e.side == 2) { tx = Gauss3::t[q]; ty = 0; }
      if (e.side == 3) { tx = Gauss3::t[q]; ty = 1; }
      x[q] = x0 + hx * tx;
      y[q] = y0 + hy * ty;
      w[q] = Gauss3::w[q] * (e.side < 2 ? hy : hx);
      double vx[3], dx[3], ddx[3], vy[3], dy[3], ddy[3];
      Lagrange1D::eval(deg, tx, vx, dx, ddx);
      Lagrange1D::eval(deg, ty, vy, dy, ddy);
      for (int b = 0; b <= deg; ++b)
        for (int a = 0; a <= deg; ++a) v[q][a + (deg + 1) * b] = vx[a] * vy[b];
    }
  }
};

using Triplets = std::vector<Eigen::Triplet<double>>;

inline SpMat from_triplets(const Triplets& t, int rows, int cols) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(0.0);
  return m;
}

inline std::vector<Vec> param_product(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  std::vector<Vec> out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k].cwiseProduct(b[k]);
  return out;
}

inline std::vector<Vec> ones(const ParamSpace& ps) {
  std::vector<Vec> out;
  for (const auto& a : ps.axes) out.push_back(Vec::Ones(static_cast<Eigen::Index>(a.size())));
  return out;
}

/// Field samples at the quadrature points of a cell, one entry per term.
inline std::vector<std::array<FieldSample, 9>> sample_cell(const SeparatedField& f, const CellBasis& cb, int i, int j) {
  std::vector<std::array<FieldSample, 9>> out(f.terms.size());
  for (std::size_t t = 0; t < f.terms.size(); ++t)
    for (int q = 0; q < 9; ++q) f.terms[t].space(cb.x[q], cb.y[q], out[t][static_cast<std::size_t>(q)], i, j);
  return out;
}

/// Lifting vector: prescribed essential values from the data field of each boundary rule.
inline SepVector lifting(const Subdomain& sd, const std::map<std::string, double>& constants) {
  SepVector G(sd.params().sizes());
  const auto& rules = sd.spec().boundary;
  std::map<int, std::vector<std::size_t>> by_rule;
  for (std::size_t k = 0; k < sd.essential().size(); ++k) by_rule[sd.essential_rule()[k]].push_back(k);
  for (const auto& [rule, list] : by_rule) {
    const auto& data = rules[static_cast<std::size_t>(rule)].data;
    if (data.empty()) continue;
    std::vector<int> support;
    for (auto k : list) support.push_back(sd.essential()[k] % sd.nv());
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    SeparatedField g = sd.field(data, 2, support, constants);
    if (g.empty()) throw ConfigError("subdomain '" + sd.name() + "': data field '" + data + "' missing");
    for (const auto& term : g.terms) {
      Vec v = Vec::Zero(sd.ndofs());
      FieldSample s;
      for (auto k : list) {
        int dof = sd.essential()[k];
        auto xy = sd.dof_coords(dof);
        term.space(xy[0], xy[1], s);
        v[dof] = s.v[sd.dof_kind(dof)];
      }
      G.push(std::move(v), term.params);
    }
  }
  return sep::merge_identical(G);
}

/// Divergence of b * sym-grad(phi e_k): components (0,1) for basis a at point q.
inline std::array<double, 2> div_sym(const CellBasis& cb, int q, int a, int k, const FieldSample& b) {
  double lap = cb.hxx[q][a] + cb.hyy[q][a];
  double gx = cb.gx[q][a], gy = cb.gy[q][a];
  double bgrad = b.dx[0] * gx + b.dy[0] * gy;
  if (k == 0)
    return {0.5 * b.v[0] * (lap + cb.hxx[q][a]) + 0.5 * (bgrad + b.dx[0] * gx),
            0.5 * b.v[0] * cb.hxy[q][a] + 0.5 * b.dx[0] * gy};
  return {0.5 * b.v[0] * cb.hxy[q][a] + 0.5 * b.dy[0] * gx,
          0.5 * b.v[0] * (lap + cb.hyy[q][a]) + 0.5 * (bgrad + b.dy[0] * gy)};
}

}  // namespace detail

/// Separated Stokes operator with optional GLS stabilization (coefficient tau, h = longest cell edge).
inline SubdomainOperator assemble_stokes(const Subdomain& sd, const std::map<std::string, double>& constants = {}) {
  Counters::get().assemblies++;
  using namespace detail;
  const auto& mesh = sd.mesh();
  const auto& V = *sd.vspace();
  const auto& P = *sd.pspace();
  const int N = sd.ndofs();
  const double tau = sd.spec().tau;
  const bool gls = tau != 0.0;
  const auto& ps = sd.params();

  SeparatedField nu = sd.field("nu", 1, {}, constants);
  if (nu.empty()) throw ConfigError("subdomain '" + sd.name() + "': viscosity field 'nu' is required");
  SeparatedField f = sd.field("f", 2, {}, constants);
  const std::size_t L = nu.rank(), NF = f.rank();

  std::vector<Triplets> A(L), Bq(1), C(1);
  std::vector<Triplets> Astab(L * L), Bstab(L);
  std::vector<Vec> Ff(NF, Vec::Zero(N)), Fs(NF * L, Vec::Zero(N)), Gs(NF, Vec::Zero(N));

  CellBasis cv, cp;
  int vn[9], pn[9];
  for (int j = 0; j < mesh.ncy(); ++j)
    for (int i = 0; i < mesh.ncx(); ++i) {
      if (!mesh.active(i, j)) continue;
      cv.build(mesh, i, j, V.degree());
      cp.build(mesh, i, j, P.degree());
      V.cell_nodes(i, j, vn);
      P.cell_nodes(i, j, pn);
      const double h2 = std::pow(std::max(cv.hx, cv.hy), 2);
      auto nus = sample_cell(nu, cv, i, j);
      auto fs = sample_cell(f, cv, i, j);
      const int nb = cv.nb, pb = cp.nb;
      // viscous terms
      for (std::size_t l = 0; l < L; ++l)
        for (int k = 0; k < 2; ++k)
          for (int a = 0; a < nb; ++a)
            for (int m = 0; m < 2; ++m)
              for (int c = 0; c < nb; ++c) {
                double s = 0;
                for (int q = 0; q < 9; ++q) {
                  double ga[2] = {cv.gx[q][a], cv.gy[q][a]}, gc[2] = {cv.gx[q][c], cv.gy[q][c]};
                  double val = (k == m ? ga[0] * gc[0] + ga[1] * gc[1] : 0.0) + gc[k] * ga[m];
                  s += cv.w[q] * nus[l][q].v[0] * val;
                }
                if (s != 0.0) A[l].emplace_back(sd.vdof(k, vn[a]), sd.vdof(m, vn[c]), s);
              }
      // divergence coupling
      for (int a = 0; a < pb; ++a)
        for (int m = 0; m < 2; ++m)
          for (int c = 0; c < nb; ++c) {
            double s = 0;
            for (int q = 0; q < 9; ++q) s -= cv.w[q] * cp.v[q][a] * (m == 0 ? cv.gx[q][c] : cv.gy[q][c]);
            if (s != 0.0) {
              Bq[0].emplace_back(sd.pdof(pn[a]), sd.vdof(m, vn[c]), s);
              Bq[0].emplace_back(sd.vdof(m, vn[c]), sd.pdof(pn[a]), s);
            }
          }
      // body force
      for (std::size_t t = 0; t < NF; ++t)
        for (int k = 0; k < 2; ++k)
          for (int a = 0; a < nb; ++a) {
            double s = 0;
            for (int q = 0; q < 9; ++q) s += cv.w[q] * fs[t][q].v[k] * cv.v[q][a];
            Ff[t][sd.vdof(k, vn[a])] += s;
          }
      if (!gls) continue;
      // D_l(phi_a e_k) at every quadrature point
      std::vector<std::array<std::array<std::array<double, 2>, 9>, 18>> D(L);
      for (std::size_t l = 0; l < L; ++l)
        for (int k = 0; k < 2; ++k)
          for (int a = 0; a < nb; ++a)
            for (int q = 0; q < 9; ++q) D[l][static_cast<std::size_t>(k * nb + a)][q] = div_sym(cv, q, a, k, nus[l][q]);
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t m = l; m < L; ++m)
          for (int r = 0; r < 2 * nb; ++r)
            for (int c = 0; c < 2 * nb; ++c) {
              double s = 0;
              for (int q = 0; q < 9; ++q) {
                const auto& dcl = D[l][static_cast<std::size_t>(c)][q];
                const auto& drm = D[m][static_cast<std::size_t>(r)][q];
                double v = dcl[0] * drm[0] + dcl[1] * drm[1];
                if (m != l) {
                  const auto& dcm = D[m][static_cast<std::size_t>(c)][q];
                  const auto& drl = D[l][static_cast<std::size_t>(r)][q];
                  v += dcm[0] * drl[0] + dcm[1] * drl[1];
                }
                s += cv.w[q] * v;
              }
              s *= -tau * h2;
              if (s != 0.0)
                Astab[l * L + m].emplace_back(sd.vdof(r / nb, vn[r % nb]), sd.vdof(c / nb, vn[c % nb]), s);
            }
      for (std::size_t l = 0; l < L; ++l)
        for (int a = 0; a < pb; ++a)
          for (int c = 0; c < 2 * nb; ++c) {
            double s = 0;
            for (int q = 0; q < 9; ++q) {
              const auto& d = D[l][static_cast<std::size_t>(c)][q];
              s += cv.w[q] * (cp.gx[q][a] * d[0] + cp.gy[q][a] * d[1]);
            }
            s *= tau * h2;
            if (s != 0.0) {
              Bstab[l].emplace_back(sd.pdof(pn[a]), sd.vdof(c / nb, vn[c % nb]), s);
              Bstab[l].emplace_back(sd.vdof(c / nb, vn[c % nb]), sd.pdof(pn[a]), s);
            }
          }
      for (int a = 0; a < pb; ++a)
        for (int c = 0; c < pb; ++c) {
          double s = 0;
          for (int q = 0; q < 9; ++q) s += cv.w[q] * (cp.gx[q][a] * cp.gx[q][c] + cp.gy[q][a] * cp.gy[q][c]);
          s *= -tau * h2;
          if (s != 0.0) C[0].emplace_back(sd.pdof(pn[a]), sd.pdof(pn[c]), s);
        }
      for (std::size_t t = 0; t < NF; ++t) {
        for (std::size_t m = 0; m < L; ++m)
          for (int r = 0; r < 2 * nb; ++r) {
            double s = 0;
            for (int q = 0; q < 9; ++q) {
              const auto& d = D[m][static_cast<std::size_t>(r)][q];
              s += cv.w[q] * (fs[t][q].v[0] * d[0] + fs[t][q].v[1] * d[1]);
            }
            Fs[t * L + m][sd.vdof(r / nb, vn[r % nb])] += tau * h2 * s;
          }
        for (int a = 0; a < pb; ++a) {
          double s = 0;
          for (int q = 0; q < 9; ++q) s += cv.w[q] * (fs[t][q].v[0] * cp.gx[q][a] + fs[t][q].v[1] * cp.gy[q][a]);
          Gs[t][sd.pdof(pn[a])] -= tau * h2 * s;
        }
      }
    }

  SubdomainOperator op;
  op.K = SepMatrix(ps.sizes());
  for (std::size_t l = 0; l < L; ++l) op.K.push(from_triplets(A[l], N, N), nu.terms[l].params);
  op.K.push(from_triplets(Bq[0], N, N), ones(ps));
  if (gls) {
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t m = l; m < L; ++m)
        op.K.push(from_triplets(Astab[l * L + m], N, N), param_product(nu.terms[l].params, nu.terms[m].params));
    for (std::size_t l = 0; l < L; ++l) op.K.push(from_triplets(Bstab[l], N, N), nu.terms[l].params);
    op.K.push(from_triplets(C[0], N, N), ones(ps));
  }
  op.K = sep::merge_identical(op.K);

  op.F = SepVector(ps.sizes());
  for (std::size_t t = 0; t < NF; ++t) op.F.push(Ff[t], f.terms[t].params);
  if (gls)
    for (std::size_t t = 0; t < NF; ++t) {
      for (std::size_t m = 0; m < L; ++m) op.F.push(Fs[t * L + m], param_product(f.terms[t].params, nu.terms[m].params));
      op.F.push(Gs[t], f.terms[t].params);
    }
  // tractions
  const auto& rules = sd.spec().boundary;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    if (rules[r].label != "neumann" || rules[r].data.empty()) continue;
    SeparatedField g = sd.field(rules[r].data, 2, sd.rule_nodes(static_cast<int>(r), V), constants);
    if (g.empty()) throw ConfigError("subdomain '" + sd.name() + "': data field '" + rules[r].data + "' missing");
    std::vector<Vec> gv(g.rank(), Vec::Zero(N));
    EdgeBasis eb;
    for (const auto& e : sd.edges()) {
      if (e.label != static_cast<int>(r)) continue;
      eb.build(mesh, e, V.degree());
      V.cell_nodes(e.i, e.j, vn);
      for (std::size_t t = 0; t < g.rank(); ++t)
        for (int q = 0; q < 3; ++q) {
          FieldSample s;
          g.terms[t].space(eb.x[q], eb.y[q], s, e.i, e.j);
          for (int a = 0; a < (V.degree() + 1) * (V.degree() + 1); ++a)
            for (int k = 0; k < 2; ++k) gv[t][sd.vdof(k, vn[a])] += eb.w[q] * s.v[k] * eb.v[q][a];
        }
    }
    for (std::size_t t = 0; t < g.rank(); ++t) op.F.push(gv[t], g.terms[t].params);
  }
  op.F = sep::merge_identical(op.F);
  op.G = lifting(sd, constants);
  return op;
}

/// Separated Masud-Hughes stabilized Darcy operator. Pressure rows carry the negated forms so the
/// symmetric part of the operator is positive definite.
inline SubdomainOperator assemble_darcy(const Subdomain& sd, const std::map<std::string, double>& constants = {}) {
  Counters::get().assemblies++;
  using namespace detail;
  const auto& mesh = sd.mesh();
  const auto& V = *sd.vspace();
  const auto& P = *sd.pspace();
  const int N = sd.ndofs();
  const auto& ps = sd.params();

  auto require = [&](const char* name, int nc) {
    SeparatedField fld = sd.field(name, nc, {}, constants);
    if (fld.empty()) throw ConfigError("subdomain '" + sd.name() + "': field '" + name + "' is required");
    return fld;
  };
  SeparatedField nu = require("nu", 1);
  SeparatedField nu_inv = require("nu_inv", 1);
  auto kcomp = [&](const char* name) {
    auto it = sd.spec().fields.find(name);
    if (it == sd.spec().fields.end() || it->second.terms.empty())
      throw ConfigError(std::string("subdomain '") + sd.name() + "': field '" + name + "' is required");
    const auto& t = it->second.terms.front();
    std::size_t n = t.kind == FieldTermSpec::Kind::Separable ? t.space.size()
                    : t.kind == FieldTermSpec::Kind::Sampled ? t.sample.size()
                                                             : 1;
    return static_cast<int>(n);
  };
  const int nk = kcomp("K");
  if (kcomp("K_inv") != nk) throw ConfigError("subdomain '" + sd.name() + "': K and K_inv must have equal shape");
  if (nk != 1 && nk != 4) throw ConfigError("subdomain '" + sd.name() + "': K must be scalar or 2x2 (4 components)");
  SeparatedField K = require("K", nk);
  SeparatedField K_inv = require("K_inv", nk);
  SeparatedField f = sd.field("f", 2, {}, constants);
  const bool divdiv = sd.spec().beta != 0.0 && nk == 1;
  const double beta = sd.spec().beta;

  const std::size_t Ln = nu.rank(), Lk = K_inv.rank(), Li = nu_inv.rank(), LK = K.rank(), NF = f.rank();
  std::vector<Triplets> A(Ln * Lk), Cm(Li * LK), B(1);
  std::vector<Vec> Ff(NF, Vec::Zero(N)), Gf(Li * LK * NF, Vec::Zero(N));

  auto kmat = [&](const FieldSample& s, double out[2][2]) {
    if (nk == 1) {
      out[0][0] = out[1][1] = s.v[0];
      out[0][1] = out[1][0] = 0.0;
    } else {
      out[0][0] = s.v[0]; out[0][1] = s.v[1]; out[1][0] = s.v[2]; out[1][1] = s.v[3];
    }
  };

  CellBasis cv, cp;
  int vn[9], pn[9];
  for (int j = 0; j < mesh.ncy(); ++j)
    for (int i = 0; i < mesh.ncx(); ++i) {
      if (!mesh.active(i, j)) continue;
      cv.build(mesh, i, j, V.degree());
      cp.build(mesh, i, j, P.degree());
      V.cell_nodes(i, j, vn);
      P.cell_nodes(i, j, pn);
      const double h2 = std::pow(std::max(cv.hx, cv.hy), 2);
      auto s_nu = sample_cell(nu, cv, i, j), s_ki = sample_cell(K_inv, cv, i, j);
      auto s_ni = sample_cell(nu_inv, cv, i, j), s_k = sample_cell(K, cv, i, j);
      auto s_f = sample_cell(f, cv, i, j);
      const int nb = cv.nb, pb = cp.nb;
      for (std::size_t l = 0; l < Ln; ++l)
        for (std::size_t m = 0; m < Lk; ++m)
          for (int k = 0; k < 2; ++k)
            for (int a = 0; a < nb; ++a)
              for (int n = 0; n < 2; ++n)
                for (int c = 0; c < nb; ++c) {
                  double s = 0;
                  for (int q = 0; q < 9; ++q) {
                    double km[2][2];
                    kmat(s_ki[m][q], km);
                    double coef = s_nu[l][q].v[0];
                    double val = 0.5 * coef * km[k][n] * cv.v[q][c] * cv.v[q][a];
                    if (divdiv) {
                      double da = k == 0 ? cv.gx[q][a] : cv.gy[q][a];
                      double dc = n == 0 ? cv.gx[q][c] : cv.gy[q][c];
                      val += 0.5 * beta * coef * km[0][0] * h2 * da * dc;
                    }
                    s += cv.w[q] * val;
                  }
                  if (s != 0.0) A[l * Lk + m].emplace_back(sd.vdof(k, vn[a]), sd.vdof(n, vn[c]), s);
                }
      for (int a = 0; a < pb; ++a)
        for (int n = 0; n < 2; ++n)
          for (int c = 0; c < nb; ++c) {
            double s = 0;
            for (int q = 0; q < 9; ++q) {
              double dc = n == 0 ? cv.gx[q][c] : cv.gy[q][c];
              double dq = n == 0 ? cp.gx[q][a] : cp.gy[q][a];
              s += cv.w[q] * (-cp.v[q][a] * dc - 0.5 * dq * cv.v[q][c]);
            }
            if (s != 0.0) {
              B[0].emplace_back(sd.pdof(pn[a]), sd.vdof(n, vn[c]), -s);
              B[0].emplace_back(sd.vdof(n, vn[c]), sd.pdof(pn[a]), s);
            }
          }
      for (std::size_t l = 0; l < Li; ++l)
        for (std::size_t m = 0; m < LK; ++m)
          for (int a = 0; a < pb; ++a)
            for (int c = 0; c < pb; ++c) {
              double s = 0;
              for (int q = 0; q < 9; ++q) {
                double km[2][2];
                kmat(s_k[m][q], km);
                double gc[2] = {cp.gx[q][c], cp.gy[q][c]}, ga[2] = {cp.gx[q][a], cp.gy[q][a]};
                double kg0 = km[0][0] * gc[0] + km[0][1] * gc[1], kg1 = km[1][0] * gc[0] + km[1][1] * gc[1];
                s += cv.w[q] * s_ni[l][q].v[0] * (ga[0] * kg0 + ga[1] * kg1);
              }
              s *= 0.5;
              if (s != 0.0) Cm[l * LK + m].emplace_back(sd.pdof(pn[a]), sd.pdof(pn[c]), s);
            }
      for (std::size_t t = 0; t < NF; ++t) {
        for (int k = 0; k < 2; ++k)
          for (int a = 0; a < nb; ++a) {
            double s = 0;
            for (int q = 0; q < 9; ++q) s += cv.w[q] * s_f[t][q].v[k] * cv.v[q][a];
            Ff[t][sd.vdof(k, vn[a])] += 0.5 * s;
          }
        for (std::size_t l = 0; l < Li; ++l)
          for (std::size_t m = 0; m < LK; ++m)
            for (int a = 0; a < pb; ++a) {
              double s = 0;
              for (int q = 0; q < 9; ++q) {
                double km[2][2];
                kmat(s_k[m][q], km);
                double f0 = s_f[t][q].v[0], f1 = s_f[t][q].v[1];
                double kf0 = km[0][0] * f0 + km[0][1] * f1, kf1 = km[1][0] * f0 + km[1][1] * f1;
                s += cv.w[q] * s_ni[l][q].v[0] * (cp.gx[q][a] * kf0 + cp.gy[q][a] * kf1);
              }
              Gf[(l * LK + m) * NF + t][sd.pdof(pn[a])] += 0.5 * s;
            }
      }
    }

  SubdomainOperator op;
  op.K = SepMatrix(ps.sizes());
  for (std::size_t l = 0; l < Ln; ++l)
    for (std::size_t m = 0; m < Lk; ++m)
      op.K.push(from_triplets(A[l * Lk + m], N, N), param_product(nu.terms[l].params, K_inv.terms[m].params));
  op.K.push(from_triplets(B[0], N, N), ones(ps));
  for (std::size_t l = 0; l < Li; ++l)
    for (std::size_t m = 0; m < LK; ++m)
      op.K.push(from_triplets(Cm[l * LK + m], N, N), param_product(nu_inv.terms[l].params, K.terms[m].params));
  op.K = sep::merge_identical(op.K);

  op.F = SepVector(ps.sizes());
  for (std::size_t t = 0; t < NF; ++t) op.F.push(Ff[t], f.terms[t].params);
  for (std::size_t l = 0; l < Li; ++l)
    for (std::size_t m = 0; m < LK; ++m)
      for (std::size_t t = 0; t < NF; ++t)
        op.F.push(Gf[(l * LK + m) * NF + t],
                  param_product(param_product(nu_inv.terms[l].params, K.terms[m].params), f.terms[t].params));
  // natural pressure data: -int g (v.n)
  const auto& rules = sd.spec().boundary;
  for (std::size_t r = 0; r < rules.size(); ++r) {
    if (rules[r].label != "pressure" || rules[r].data.empty()) continue;
    SeparatedField g = sd.field(rules[r].data, 1, sd.rule_nodes(static_cast<int>(r), V), constants);
    if (g.empty()) throw ConfigError("subdomain '" + sd.name() + "': data field '" + rules[r].data + "' missing");
    std::vector<Vec> gv(g.rank(), Vec::Zero(N));
    EdgeBasis eb;
    for (const auto& e : sd.edges()) {
      if (e.label != static_cast<int>(r)) continue;
      eb.build(mesh, e, V.degree());
      V.cell_nodes(e.i, e.j, vn);
      for (std::size_t t = 0; t < g.rank(); ++t)
        for (int q = 0; q < 3; ++q) {
          FieldSample s;
          g.terms[t].space(eb.x[q], eb.y[q], s, e.i, e.j);
          for (int a = 0; a < (V.degree() + 1) * (V.degree() + 1); ++a)
            for (int k = 0; k < 2; ++k) gv[t][sd.vdof(k, vn[a])] -= eb.w[q] * s.v[0] * e.normal[k] * eb.v[q][a];
        }
    }
    for (std::size_t t = 0; t < g.rank(); ++t) op.F.push(gv[t], g.terms[t].params);
  }
  op.F = sep::merge_identical(op.F);
  op.G = lifting(sd, constants);

  // interface coupling: int_Gamma eta_j (v.n)
  const auto& tr = sd.trace();
  std::vector<int> col(static_cast<std::size_t>(N), -1);
  for (std::size_t j = 0; j < tr.size(); ++j) col[static_cast<std::size_t>(tr[j])] = static_cast<int>(j);
  Triplets mt;
  EdgeBasis ev, ep;
  for (const auto& e : sd.edges()) {
    if (sd.edge_label(e) != "interface") continue;
    ev.build(mesh, e, V.degree());
    ep.build(mesh, e, P.degree());
    V.cell_nodes(e.i, e.j, vn);
    P.cell_nodes(e.i, e.j, pn);
    for (int b = 0; b < (P.degree() + 1) * (P.degree() + 1); ++b) {
      int cj = col[static_cast<std::size_t>(sd.pdof(pn[b]))];
      if (cj < 0) continue;
      for (int a = 0; a < (V.degree() + 1) * (V.degree() + 1); ++a)
        for (int k = 0; k < 2; ++k) {
          double s = 0;
          for (int q = 0; q < 3; ++q) s += ev.w[q] * ep.v[q][b] * ev.v[q][a] * e.normal[k];
          if (s != 0.0) mt.emplace_back(sd.vdof(k, vn[a]), cj, s);
        }
    }
  }
  op.M = from_triplets(mt, N, static_cast<int>(tr.size()));
  return op;
}

inline SubdomainOperator assemble(const Subdomain& sd, const std::map<std::string, double>& constants = {}) {
  return sd.physics() == Physics::Stokes ? assemble_stokes(sd, constants) : assemble_darcy(sd, constants);
}

}  // namespace ddpgd

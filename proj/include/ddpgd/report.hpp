#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <string>
#include <vector>

#include "ddpgd/assembly.hpp"

namespace ddpgd {

/// Velocity and pressure of a full dof vector, evaluated pointwise.
struct FieldView {
  const Subdomain* sd = nullptr;
  const Vec* u = nullptr;

  void eval(double x, double y, int ci, int cj, double out[3]) const {
    const auto& mesh = sd->mesh();
    if (ci < 0 || !mesh.active(ci, cj)) {
      auto c = mesh.locate(x, y);
      if (!c) throw std::out_of_range("point outside subdomain '" + sd->name() + "'");
      ci = (*c)[0];
      cj = (*c)[1];
    }
    double tx = (x - mesh.xs()[ci]) / (mesh.xs()[ci + 1] - mesh.xs()[ci]);
    double ty = (y - mesh.ys()[cj]) / (mesh.ys()[cj + 1] - mesh.ys()[cj]);
    auto interp = [&](const LagrangeSpace& sp, int comp) {
      const int p = sp.degree();
      double vx[3], d[3], dd[3], vy[3];
      Lagrange1D::eval(p, tx, vx, d, dd);
      Lagrange1D::eval(p, ty, vy, d, dd);
      int nodes[9];
      sp.cell_nodes(ci, cj, nodes);
      double s = 0;
      for (int b = 0; b <= p; ++b)
        for (int a = 0; a <= p; ++a) {
          int n = nodes[a + (p + 1) * b];
          s += vx[a] * vy[b] * (*u)[comp == 2 ? sd->pdof(n) : sd->vdof(comp, n)];
        }
      return s;
    };
    out[0] = interp(*sd->vspace(), 0);
    out[1] = interp(*sd->vspace(), 1);
    out[2] = interp(*sd->pspace(), 2);
  }
};

/// Part of a subdomain contributing to a global integral.
struct Region {
  FieldView field;
  std::function<bool(int, int)> include;  // by cell; empty: all active cells
};

/// Omega_1 entirely, Omega_2 without the cells lying inside Omega_1.
inline std::vector<Region> stitched(const Subdomain& a, const Vec& ua, const Subdomain& b, const Vec& ub) {
  std::vector<Region> r;
  r.push_back({{&a, &ua}, {}});
  const TensorMesh* ma = &a.mesh();
  const TensorMesh* mb = &b.mesh();
  r.push_back({{&b, &ub}, [ma, mb](int i, int j) {
                 double cx = 0.5 * (mb->xs()[i] + mb->xs()[i + 1]), cy = 0.5 * (mb->ys()[j] + mb->ys()[j + 1]);
                 return !ma->locate(cx, cy).has_value();
               }});
  return r;
}

using PointFn = std::function<void(double x, double y, double out[3])>;

/// Relative L2 errors (x velocity, y velocity, pressure) over the regions, 3x3 Gauss per cell.
inline std::array<double, 3> l2_errors(const std::vector<Region>& regions, const PointFn& ref) {
  std::array<double, 3> num{}, den{};
  for (const auto& reg : regions) {
    const auto& mesh = reg.field.sd->mesh();
    for (int j = 0; j < mesh.ncy(); ++j)
      for (int i = 0; i < mesh.ncx(); ++i) {
        if (!mesh.active(i, j) || (reg.include && !reg.include(i, j))) continue;
        double hx = mesh.xs()[i + 1] - mesh.xs()[i], hy = mesh.ys()[j + 1] - mesh.ys()[j];
        for (int qy = 0; qy < 3; ++qy)
          for (int qx = 0; qx < 3; ++qx) {
            double x = mesh.xs()[i] + hx * detail::Gauss3::t[qx], y = mesh.ys()[j] + hy * detail::Gauss3::t[qy];
            double w = detail::Gauss3::w[qx] * detail::Gauss3::w[qy] * hx * hy;
            double a[3], e[3];
            reg.field.eval(x, y, i, j, a);
            ref(x, y, e);
            for (int c = 0; c < 3; ++c) {
              num[static_cast<std::size_t>(c)] += w * (a[c] - e[c]) * (a[c] - e[c]);
              den[static_cast<std::size_t>(c)] += w * e[c] * e[c];
            }
          }
      }
  }
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) out[c] = den[c] > 0 ? std::sqrt(num[c] / den[c]) : std::sqrt(num[c]);
  return out;
}

/// Nodal interpolant of a point function on the spaces of a subdomain.
inline Vec interpolant(const Subdomain& sd, const PointFn& f) {
  Vec u(sd.ndofs());
  double v[3];
  for (int d = 0; d < sd.ndofs(); ++d) {
    auto xy = sd.dof_coords(d);
    f(xy[0], xy[1], v);
    u[d] = v[sd.dof_kind(d)];
  }
  return u;
}

/// Relative L2 errors of (u_h - I_h u) over the regions, with I_h the nodal interpolant of the exact field.
inline std::array<double, 3> interpolated_errors(const std::vector<Region>& regions, const PointFn& exact) {
  std::vector<Vec> nodal;
  nodal.reserve(regions.size());
  for (const auto& r : regions) nodal.push_back(interpolant(*r.field.sd, exact));
  std::array<double, 3> num{}, den{};
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto& reg = regions[k];
    FieldView ref{reg.field.sd, &nodal[k]};
    const auto& mesh = reg.field.sd->mesh();
    for (int j = 0; j < mesh.ncy(); ++j)
      for (int i = 0; i < mesh.ncx(); ++i) {
        if (!mesh.active(i, j) || (reg.include && !reg.include(i, j))) continue;
        double hx = mesh.xs()[i + 1] - mesh.xs()[i], hy = mesh.ys()[j + 1] - mesh.ys()[j];
        for (int qy = 0; qy < 3; ++qy)
          for (int qx = 0; qx < 3; ++qx) {
            double x = mesh.xs()[i] + hx * detail::Gauss3::t[qx], y = mesh.ys()[j] + hy * detail::Gauss3::t[qy];
            double w = detail::Gauss3::w[qx] * detail::Gauss3::w[qy] * hx * hy;
            double a[3], e[3];
            reg.field.eval(x, y, i, j, a);
            ref.eval(x, y, i, j, e);
            for (int c = 0; c < 3; ++c) {
              num[static_cast<std::size_t>(c)] += w * (a[c] - e[c]) * (a[c] - e[c]);
              den[static_cast<std::size_t>(c)] += w * e[c] * e[c];
            }
          }
      }
  }
  std::array<double, 3> out{};
  for (std::size_t c = 0; c < 3; ++c) out[c] = den[c] > 0 ? std::sqrt(num[c] / den[c]) : std::sqrt(num[c]);
  return out;
}

/// Reference given by another set of regions on possibly different meshes.
inline PointFn regions_fn(const std::vector<Region>& regions) {
  return [regions](double x, double y, double out[3]) {
    for (const auto& r : regions) {
      auto c = r.field.sd->mesh().locate(x, y);
      if (!c || (r.include && !r.include((*c)[0], (*c)[1]))) continue;
      r.field.eval(x, y, (*c)[0], (*c)[1], out);
      return;
    }
    throw std::out_of_range("reference field undefined at a quadrature point");
  };
}

/// Largest nodal differences between two subdomain fields at coincident nodes.
struct OverlapMismatch {
  double velocity = 0, pressure = 0;
  int nodes = 0;
};

inline OverlapMismatch overlap_mismatch(const Subdomain& a, const Vec& ua, const Subdomain& b, const Vec& ub) {
  OverlapMismatch m;
  for (int d = 0; d < b.ndofs(); ++d) {
    auto xy = b.dof_coords(d);
    int k = b.dof_kind(d);
    int e = a.find_dof(k, xy[0], xy[1]);
    if (e < 0) continue;
    double diff = std::abs(ua[e] - ub[d]);
    if (k == 2) {
      m.pressure = std::max(m.pressure, diff);
      ++m.nodes;
    } else {
      m.velocity = std::max(m.velocity, diff);
    }
  }
  return m;
}

/// Legacy VTK unstructured grid of one subdomain (Q1 sub-cells for Q2 velocity).
inline void write_vtk(const std::string& path, const Subdomain& sd, const Vec& u, const std::string& title,
                      const Vec* error = nullptr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const auto& V = *sd.vspace();
  const auto& mesh = sd.mesh();
  const int p = V.degree();
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << V.size() << " double\n" << std::setprecision(12);
  for (int n = 0; n < V.size(); ++n) {
    auto xy = V.node(n);
    out << xy[0] << ' ' << xy[1] << " 0\n";
  }
  std::vector<std::array<int, 4>> quads;
  int nodes[9];
  for (int j = 0; j < mesh.ncy(); ++j)
    for (int i = 0; i < mesh.ncx(); ++i) {
      if (!mesh.active(i, j)) continue;
      V.cell_nodes(i, j, nodes);
      for (int b = 0; b < p; ++b)
        for (int a = 0; a < p; ++a) {
          int s = p + 1;
          quads.push_back({nodes[a + s * b], nodes[a + 1 + s * b], nodes[a + 1 + s * (b + 1)], nodes[a + s * (b + 1)]});
        }
    }
  out << "CELLS " << quads.size() << ' ' << quads.size() * 5 << '\n';
  for (const auto& q : quads) out << "4 " << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
  out << "CELL_TYPES " << quads.size() << '\n';
  for (std::size_t k = 0; k < quads.size(); ++k) out << "9\n";
  out << "POINT_DATA " << V.size() << "\nVECTORS velocity double\n";
  FieldView f{&sd, &u};
  std::vector<std::array<double, 3>> vals(static_cast<std::size_t>(V.size()));
  for (int n = 0; n < V.size(); ++n) {
    auto xy = V.node(n);
    f.eval(xy[0], xy[1], -1, -1, vals[static_cast<std::size_t>(n)].data());
    out << vals[static_cast<std::size_t>(n)][0] << ' ' << vals[static_cast<std::size_t>(n)][1] << " 0\n";
  }
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (const auto& v : vals) out << v[2] << '\n';
  if (error) {
    const char* names[3] = {"log10_error_u", "log10_error_v", "log10_error_p"};
    for (int c = 0; c < 3; ++c) {
      out << "SCALARS " << names[c] << " double 1\nLOOKUP_TABLE default\n";
      for (int n = 0; n < V.size(); ++n) out << (*error)[3 * n + c] << '\n';
    }
  }
}

/// Nodal error field log10(|v - v_ref| / max|v_ref|) per variable on the velocity nodes.
inline Vec log_error_field(const Subdomain& sd, const Vec& u, const PointFn& ref) {
  const auto& V = *sd.vspace();
  FieldView f{&sd, &u};
  std::vector<std::array<double, 3>> a(static_cast<std::size_t>(V.size())), e(a.size());
  std::array<double, 3> mx{};
  for (int n = 0; n < V.size(); ++n) {
    auto xy = V.node(n);
    f.eval(xy[0], xy[1], -1, -1, a[static_cast<std::size_t>(n)].data());
    ref(xy[0], xy[1], e[static_cast<std::size_t>(n)].data());
    for (std::size_t c = 0; c < 3; ++c) mx[c] = std::max(mx[c], std::abs(e[static_cast<std::size_t>(n)][c]));
  }
  Vec out(3 * V.size());
  for (int n = 0; n < V.size(); ++n)
    for (std::size_t c = 0; c < 3; ++c) {
      double d = std::abs(a[static_cast<std::size_t>(n)][c] - e[static_cast<std::size_t>(n)][c]);
      out[3 * n + static_cast<Eigen::Index>(c)] = std::log10(std::max(d / std::max(mx[c], 1e-300), 1e-16));
    }
  return out;
}

struct ErrorRow {
  std::string variable;
  double pgd = NAN, ddfem = NAN, global = NAN;
};

inline void write_error_csv(const std::string& path, const std::vector<ErrorRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "variable,error_pgd,error_ddfem,error_global\n" << std::setprecision(6) << std::scientific;
  for (const auto& r : rows) out << r.variable << ',' << r.pgd << ',' << r.ddfem << ',' << r.global << '\n';
}

}  // namespace ddpgd

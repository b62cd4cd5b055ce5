#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ddpgd/expr.hpp"

namespace ddpgd {

/// Axis-aligned box [x0,x1]x[y0,y1]; degenerate boxes select lines.
struct Box {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool contains(double x, double y, double tol) const {
    return x >= x0 - tol && x <= x1 + tol && y >= y0 - tol && y <= y1 + tol;
  }
};

/// Tensor-product grid of rectangular cells with an activity mask.
class TensorMesh {
public:
  TensorMesh() = default;
  TensorMesh(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
    validate();
    active_.assign(static_cast<std::size_t>(ncx() * ncy()), 1);
  }
  TensorMesh(std::vector<double> xs, std::vector<double> ys, const std::vector<Box>& active_boxes)
      : TensorMesh(std::move(xs), std::move(ys)) {
    if (active_boxes.empty()) return;
    for (int j = 0; j < ncy(); ++j)
      for (int i = 0; i < ncx(); ++i) {
        double cx = 0.5 * (xs_[i] + xs_[i + 1]), cy = 0.5 * (ys_[j] + ys_[j + 1]);
        bool on = false;
        for (const auto& b : active_boxes) on = on || b.contains(cx, cy, 0.0);
        active_[cell(i, j)] = on ? 1 : 0;
      }
  }

  static TensorMesh rectangle(double x0, double x1, int nx, double y0, double y1, int ny) {
    return TensorMesh(uniform(x0, x1, nx), uniform(y0, y1, ny));
  }
  static std::vector<double> uniform(double a, double b, int n) {
    if (n <= 0) throw ConfigError("mesh: cell count must be positive");
    std::vector<double> v(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * i / n;
    v.back() = b;
    return v;
  }

  int ncx() const { return static_cast<int>(xs_.size()) - 1; }
  int ncy() const { return static_cast<int>(ys_.size()) - 1; }
  std::size_t cell(int i, int j) const { return static_cast<std::size_t>(j) * ncx() + i; }
  bool active(int i, int j) const {
    return i >= 0 && j >= 0 && i < ncx() && j < ncy() && active_[cell(i, j)] != 0;
  }
  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  int active_cells() const { return static_cast<int>(std::count(active_.begin(), active_.end(), 1)); }
  double min_spacing() const {
    double h = 1e300;
    for (int i = 0; i < ncx(); ++i) h = std::min(h, xs_[i + 1] - xs_[i]);
    for (int j = 0; j < ncy(); ++j) h = std::min(h, ys_[j + 1] - ys_[j]);
    return h;
  }
  double tolerance() const { return 1e-9 * min_spacing(); }

  /// Index of the active cell containing (x,y), or nullopt.
  std::optional<std::array<int, 2>> locate(double x, double y) const {
    auto find = [](const std::vector<double>& g, double v) -> int {
      double tol = 1e-12 * (g.back() - g.front());
      if (v < g.front() - tol || v > g.back() + tol) return -1;
      auto it = std::upper_bound(g.begin(), g.end(), v);
      int k = static_cast<int>(it - g.begin()) - 1;
      return std::clamp(k, 0, static_cast<int>(g.size()) - 2);
    };
    int i = find(xs_, x), j = find(ys_, y);
    if (i < 0 || j < 0) return std::nullopt;
    if (active(i, j)) return std::array<int, 2>{i, j};
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        int a = i + di, b = j + dj;
        if (!active(a, b)) continue;
        double tol = tolerance();
        if (x >= xs_[a] - tol && x <= xs_[a + 1] + tol && y >= ys_[b] - tol && y <= ys_[b + 1] + tol)
          return std::array<int, 2>{a, b};
      }
    return std::nullopt;
  }

private:
  std::vector<double> xs_, ys_;
  std::vector<unsigned char> active_;

  void validate() const {
    if (xs_.size() < 2 || ys_.size() < 2) throw ConfigError("mesh: need at least one cell per direction");
    for (std::size_t i = 1; i < xs_.size(); ++i)
      if (!(xs_[i] > xs_[i - 1])) throw ConfigError("mesh: x coordinates must increase");
    for (std::size_t i = 1; i < ys_.size(); ++i)
      if (!(ys_[i] > ys_[i - 1])) throw ConfigError("mesh: y coordinates must increase");
  }
};

/// 1D Lagrange basis on [0,1] with equispaced nodes.
struct Lagrange1D {
  static void eval(int degree, double t, double* v, double* d, double* dd) {
    if (degree == 1) {
      v[0] = 1 - t; v[1] = t;
      d[0] = -1; d[1] = 1;
      dd[0] = 0; dd[1] = 0;
    } else if (degree == 2) {
      v[0] = 2 * (t - 0.5) * (t - 1); v[1] = -4 * t * (t - 1); v[2] = 2 * t * (t - 0.5);
      d[0] = 4 * t - 3; d[1] = 4 - 8 * t; d[2] = 4 * t - 1;
      dd[0] = 4; dd[1] = -8; dd[2] = 4;
    } else {
      throw ConfigError("element degree must be 1 or 2");
    }
  }
};

/// Scalar continuous Lagrange space of degree 1 or 2 on a TensorMesh.
/// Nodes are numbered lexicographically with x fastest.
class LagrangeSpace {
public:
  LagrangeSpace() = default;
  LagrangeSpace(std::shared_ptr<const TensorMesh> mesh_ptr, int degree) : mesh_(std::move(mesh_ptr)), degree_(degree) {
    const TensorMesh& mesh = *mesh_;
    if (degree != 1 && degree != 2) throw ConfigError("element degree must be 1 or 2");
    nlx_ = degree * mesh.ncx() + 1;
    nly_ = degree * mesh.ncy() + 1;
    lattice_to_node_.assign(static_cast<std::size_t>(nlx_) * nly_, -1);
    for (int j = 0; j < mesh.ncy(); ++j)
      for (int i = 0; i < mesh.ncx(); ++i) {
        if (!mesh.active(i, j)) continue;
        for (int b = 0; b <= degree; ++b)
          for (int a = 0; a <= degree; ++a) lattice_to_node_[lat(degree * i + a, degree * j + b)] = 0;
      }
    int n = 0;
    for (int lj = 0; lj < nly_; ++lj)
      for (int li = 0; li < nlx_; ++li) {
        auto& slot = lattice_to_node_[lat(li, lj)];
        if (slot < 0) continue;
        slot = n++;
        node_lattice_.push_back({li, lj});
      }
  }

  const TensorMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const TensorMesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(node_lattice_.size()); }
  int nodes_per_cell() const { return (degree_ + 1) * (degree_ + 1); }

  double lattice_x(int li) const { return lattice_coord(mesh_->xs(), li); }
  double lattice_y(int lj) const { return lattice_coord(mesh_->ys(), lj); }
  std::array<double, 2> node(int n) const {
    auto [li, lj] = node_lattice_[static_cast<std::size_t>(n)];
    return {lattice_x(li), lattice_y(lj)};
  }

  /// Local-to-global node map of cell (i,j), local index a + (degree+1) b.
  void cell_nodes(int i, int j, int* out) const {
    for (int b = 0; b <= degree_; ++b)
      for (int a = 0; a <= degree_; ++a)
        out[a + (degree_ + 1) * b] = lattice_to_node_[lat(degree_ * i + a, degree_ * j + b)];
  }

  /// Node at the given coordinates, or -1.
  int find_node(double x, double y) const {
    int li = find_lattice(mesh_->xs(), x, true), lj = find_lattice(mesh_->ys(), y, false);
    if (li < 0 || lj < 0) return -1;
    return lattice_to_node_[lat(li, lj)];
  }

  /// Nodes lying on the closed edge of cell (i,j) on the given side (0 left, 1 right, 2 bottom, 3 top).
  std::vector<int> edge_nodes(int i, int j, int side) const {
    std::vector<int> local(static_cast<std::size_t>(nodes_per_cell()));
    cell_nodes(i, j, local.data());
    std::vector<int> out;
    for (int k = 0; k <= degree_; ++k) {
      int a = 0, b = 0;
      if (side == 0) { a = 0; b = k; }
      else if (side == 1) { a = degree_; b = k; }
      else if (side == 2) { a = k; b = 0; }
      else { a = k; b = degree_; }
      out.push_back(local[static_cast<std::size_t>(a + (degree_ + 1) * b)]);
    }
    return out;
  }

private:
  std::shared_ptr<const TensorMesh> mesh_;
  int degree_ = 1;
  int nlx_ = 0, nly_ = 0;
  std::vector<int> lattice_to_node_;
  std::vector<std::array<int, 2>> node_lattice_;

  std::size_t lat(int li, int lj) const { return static_cast<std::size_t>(lj) * nlx_ + li; }
  double lattice_coord(const std::vector<double>& g, int l) const {
    int c = l / degree_, r = l % degree_;
    if (c >= static_cast<int>(g.size()) - 1) return g.back();
    return g[c] + (g[c + 1] - g[c]) * r / degree_;
  }
  int find_lattice(const std::vector<double>& g, double v, bool) const {
    double tol = mesh_->tolerance();
    auto it = std::lower_bound(g.begin(), g.end(), v - tol);
    int c = static_cast<int>(it - g.begin());
    if (c < static_cast<int>(g.size()) && std::abs(g[c] - v) <= tol) return c * degree_;
    if (c == 0 || c >= static_cast<int>(g.size())) return -1;
    int cell = c - 1;
    for (int r = 1; r < degree_; ++r) {
      double p = g[cell] + (g[cell + 1] - g[cell]) * r / degree_;
      if (std::abs(p - v) <= tol) return cell * degree_ + r;
    }
    return -1;
  }
};

/// One exterior edge of the active region.
struct BoundaryEdge {
  int i = 0, j = 0, side = 0;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  std::array<double, 2> normal{};
  int label = -1;
  int data = -1;
  double length() const { return std::hypot(x1 - x0, y1 - y0); }
};

/// Edge classification rule; the first matching rule wins.
struct BoundaryRule {
  std::optional<Box> box;
  std::string label;
  std::string data;
};

/// Exterior edges of a mesh, each labelled by the first matching rule.
inline std::vector<BoundaryEdge> boundary_edges(const TensorMesh& mesh) {
  std::vector<BoundaryEdge> out;
  const auto& xs = mesh.xs();
  const auto& ys = mesh.ys();
  for (int j = 0; j < mesh.ncy(); ++j)
    for (int i = 0; i < mesh.ncx(); ++i) {
      if (!mesh.active(i, j)) continue;
      const int ni[4] = {i - 1, i + 1, i, i};
      const int nj[4] = {j, j, j - 1, j + 1};
      for (int s = 0; s < 4; ++s) {
        if (mesh.active(ni[s], nj[s])) continue;
        BoundaryEdge e;
        e.i = i; e.j = j; e.side = s;
        if (s == 0) { e.x0 = e.x1 = xs[i]; e.y0 = ys[j]; e.y1 = ys[j + 1]; e.normal = {-1, 0}; }
        if (s == 1) { e.x0 = e.x1 = xs[i + 1]; e.y0 = ys[j]; e.y1 = ys[j + 1]; e.normal = {1, 0}; }
        if (s == 2) { e.y0 = e.y1 = ys[j]; e.x0 = xs[i]; e.x1 = xs[i + 1]; e.normal = {0, -1}; }
        if (s == 3) { e.y0 = e.y1 = ys[j + 1]; e.x0 = xs[i]; e.x1 = xs[i + 1]; e.normal = {0, 1}; }
        out.push_back(e);
      }
    }
  return out;
}

inline int classify_edge(const BoundaryEdge& e, const std::vector<BoundaryRule>& rules, double tol) {
  double mx = 0.5 * (e.x0 + e.x1), my = 0.5 * (e.y0 + e.y1);
  for (std::size_t r = 0; r < rules.size(); ++r) {
    if (!rules[r].box || rules[r].box->contains(mx, my, tol)) return static_cast<int>(r);
  }
  return -1;
}

/// Spacing table: consecutive segments of given length split into equal cells.
struct Segment {
  double length = 0;
  int cells = 0;
};

inline std::vector<double> graded_coordinates(double origin, const std::vector<Segment>& segs) {
  std::vector<double> v{origin};
  double pos = origin;
  for (const auto& s : segs) {
    if (s.cells <= 0 || !(s.length > 0)) throw ConfigError("mesh: bad spacing segment");
    for (int k = 1; k <= s.cells; ++k) v.push_back(pos + s.length * k / s.cells);
    pos += s.length;
    v.back() = pos;
  }
  return v;
}

}  // namespace ddpgd

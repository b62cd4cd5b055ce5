#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ddpgd/fields.hpp"
#include "ddpgd/mesh.hpp"
#include "ddpgd/septensor.hpp"

namespace ddpgd {

enum class Physics { Stokes, Darcy };

inline std::string to_string(Physics p) { return p == Physics::Stokes ? "stokes" : "darcy"; }

struct MeshSpec {
  double x0 = 0, y0 = 0;
  std::vector<Segment> x, y;
  std::vector<Box> active;
};

struct SubdomainSpec {
  std::string name;
  Physics physics = Physics::Stokes;
  MeshSpec mesh;
  int velocity_degree = 1;
  int pressure_degree = 1;
  std::vector<BoundaryRule> boundary;
  std::vector<std::string> parameters;  // active parametric axes, by name
  double tau = 0.0;                     // GLS coefficient (Stokes)
  double beta = 0.0;                    // div-div coefficient (Darcy, scalar permeability)
  std::map<std::string, FieldSpec> fields;
};

/// Discrete subdomain: mesh, spaces, labelled boundary and degree-of-freedom partition.
/// Velocity dofs are blocked by component (all x, then all y), pressure dofs follow.
class Subdomain {
public:
  Subdomain(const SubdomainSpec& spec, const ParamSpace& global) : spec_(spec) {
    std::vector<double> xs = graded_coordinates(spec.mesh.x0, spec.mesh.x);
    std::vector<double> ys = graded_coordinates(spec.mesh.y0, spec.mesh.y);
    mesh_ = std::make_shared<TensorMesh>(std::move(xs), std::move(ys), spec.mesh.active);
    vspace_ = std::make_shared<LagrangeSpace>(mesh_, spec.velocity_degree);
    pspace_ = std::make_shared<LagrangeSpace>(mesh_, spec.pressure_degree);
    for (const auto& name : spec.parameters) {
      bool found = false;
      for (std::size_t k = 0; k < global.axes.size(); ++k)
        if (global.axes[k].name == name) {
          params_.axes.push_back(global.axes[k]);
          axes_.push_back(static_cast<int>(k));
          found = true;
        }
      if (!found) throw ConfigError("subdomain '" + spec.name + "': unknown parameter '" + name + "'");
    }
    edges_ = boundary_edges(*mesh_);
    const double tol = 1e-6 * mesh_->min_spacing();
    for (auto& e : edges_) {
      e.label = classify_edge(e, spec.boundary, tol);
      if (e.label < 0)
        throw ConfigError("subdomain '" + spec.name + "': boundary edge at (" + std::to_string(0.5 * (e.x0 + e.x1)) +
                          ", " + std::to_string(0.5 * (e.y0 + e.y1)) + ") matches no rule");
      const auto& lab = spec.boundary[static_cast<std::size_t>(e.label)].label;
      static const std::set<std::string> stokes_labels{"dirichlet", "neumann", "interface"};
      static const std::set<std::string> darcy_labels{"flux", "pressure", "interface"};
      const auto& ok = spec.physics == Physics::Stokes ? stokes_labels : darcy_labels;
      if (!ok.count(lab)) throw ConfigError("subdomain '" + spec.name + "': label '" + lab + "' not valid for " +
                                            to_string(spec.physics));
    }
    nv_ = vspace_->size();
    np_ = pspace_->size();
    build_partition();
  }

  Subdomain(const Subdomain&) = delete;
  Subdomain& operator=(const Subdomain&) = delete;

  const SubdomainSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  Physics physics() const { return spec_.physics; }
  const TensorMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<LagrangeSpace>& vspace() const { return vspace_; }
  const std::shared_ptr<LagrangeSpace>& pspace() const { return pspace_; }
  const ParamSpace& params() const { return params_; }
  const std::vector<int>& global_axes() const { return axes_; }
  const std::vector<BoundaryEdge>& edges() const { return edges_; }

  int nv() const { return nv_; }
  int np() const { return np_; }
  int ndofs() const { return 2 * nv_ + np_; }
  int vdof(int comp, int node) const { return comp * nv_ + node; }
  int pdof(int node) const { return 2 * nv_ + node; }
  bool is_pressure(int dof) const { return dof >= 2 * nv_; }

  const std::vector<int>& essential() const { return essential_; }
  const std::vector<int>& essential_rule() const { return essential_rule_; }
  const std::vector<int>& trace() const { return trace_; }
  const std::vector<int>& free() const { return free_; }

  /// Coordinates and kind (0,1 velocity component, 2 pressure) of a dof.
  std::array<double, 2> dof_coords(int dof) const {
    if (is_pressure(dof)) return pspace_->node(dof - 2 * nv_);
    return vspace_->node(dof % nv_);
  }
  int dof_kind(int dof) const { return is_pressure(dof) ? 2 : dof / nv_; }
  int find_dof(int kind, double x, double y) const {
    if (kind == 2) {
      int n = pspace_->find_node(x, y);
      return n < 0 ? -1 : pdof(n);
    }
    int n = vspace_->find_node(x, y);
    return n < 0 ? -1 : vdof(kind, n);
  }

  /// Velocity-space nodes on the closed edges carrying the given rule.
  std::vector<int> rule_nodes(int rule, const LagrangeSpace& space) const {
    std::set<int> s;
    for (const auto& e : edges_)
      if (e.label == rule)
        for (int n : space.edge_nodes(e.i, e.j, e.side)) s.insert(n);
    return {s.begin(), s.end()};
  }
  std::vector<int> label_nodes(const std::string& label, const LagrangeSpace& space) const {
    std::set<int> s;
    for (const auto& e : edges_)
      if (spec_.boundary[static_cast<std::size_t>(e.label)].label == label)
        for (int n : space.edge_nodes(e.i, e.j, e.side)) s.insert(n);
    return {s.begin(), s.end()};
  }
  const std::string& edge_label(const BoundaryEdge& e) const {
    return spec_.boundary[static_cast<std::size_t>(e.label)].label;
  }

  /// Realise a named data field with sampling support on the given velocity nodes.
  SeparatedField field(const std::string& name, int ncomp, std::vector<int> support = {},
                       const std::map<std::string, double>& constants = {}) const {
    auto it = spec_.fields.find(name);
    if (it == spec_.fields.end()) return SeparatedField{ncomp, params_.sizes(), {}};
    FieldContext ctx;
    ctx.space = vspace_;
    ctx.support = std::move(support);
    ctx.params = &params_;
    ctx.constants = constants;
    ctx.library = &spec_.fields;
    return realize(it->second, ncomp, ctx, name);
  }
  bool has_field(const std::string& name) const { return spec_.fields.count(name) > 0; }

private:
  SubdomainSpec spec_;
  std::shared_ptr<TensorMesh> mesh_;
  std::shared_ptr<LagrangeSpace> vspace_, pspace_;
  ParamSpace params_;
  std::vector<int> axes_;
  std::vector<BoundaryEdge> edges_;
  int nv_ = 0, np_ = 0;
  std::vector<int> essential_, essential_rule_, trace_, free_;

  void build_partition() {
    std::map<int, int> ess;  // dof -> rule
    std::vector<const BoundaryEdge*> order;
    for (const auto& e : edges_) order.push_back(&e);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->label < b->label; });
    for (const auto* e : order) {
      const auto& lab = edge_label(*e);
      if (spec_.physics == Physics::Stokes && lab == "dirichlet") {
        for (int n : vspace_->edge_nodes(e->i, e->j, e->side))
          for (int c = 0; c < 2; ++c) ess.emplace(vdof(c, n), e->label);
      } else if (spec_.physics == Physics::Darcy && lab == "flux") {
        int c = std::abs(e->normal[0]) > 0.5 ? 0 : 1;
        for (int n : vspace_->edge_nodes(e->i, e->j, e->side)) ess.emplace(vdof(c, n), e->label);
      }
    }
    for (auto [d, r] : ess) {
      essential_.push_back(d);
      essential_rule_.push_back(r);
    }
    std::set<int> tr;
    for (const auto& e : edges_) {
      if (edge_label(e) != "interface") continue;
      if (spec_.physics == Physics::Stokes) {
        for (int n : vspace_->edge_nodes(e.i, e.j, e.side))
          for (int c = 0; c < 2; ++c)
            if (!ess.count(vdof(c, n))) tr.insert(vdof(c, n));
      } else {
        for (int n : pspace_->edge_nodes(e.i, e.j, e.side)) tr.insert(pdof(n));
      }
    }
    trace_.assign(tr.begin(), tr.end());  // ascending: component-major, nodes lexicographic
    std::vector<char> taken(static_cast<std::size_t>(ndofs()), 0);
    for (int d : essential_) taken[static_cast<std::size_t>(d)] = 1;
    if (spec_.physics == Physics::Stokes)
      for (int d : trace_) taken[static_cast<std::size_t>(d)] = 1;
    for (int d = 0; d < ndofs(); ++d)
      if (!taken[static_cast<std::size_t>(d)]) free_.push_back(d);
  }
};

}  // namespace ddpgd

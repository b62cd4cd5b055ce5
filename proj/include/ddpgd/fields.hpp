#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ddpgd/expr.hpp"
#include "ddpgd/lowrank.hpp"
#include "ddpgd/mesh.hpp"
#include "ddpgd/septensor.hpp"

namespace ddpgd {

/// Pointwise values and gradients of a (possibly vector-valued) spatial function.
struct FieldSample {
  double v[4] = {0, 0, 0, 0};
  double dx[4] = {0, 0, 0, 0};
  double dy[4] = {0, 0, 0, 0};
};

/// Spatial factor of a separated data term.
class SpatialField {
public:
  using Fn = std::function<void(double x, double y, int ci, int cj, FieldSample&)>;

  SpatialField() = default;
  SpatialField(int ncomp, Fn fn) : ncomp_(ncomp), fn_(std::move(fn)) {}

  static SpatialField constant(std::vector<double> values) {
    int nc = static_cast<int>(values.size());
    return SpatialField(nc, [values](double, double, int, int, FieldSample& s) {
      for (std::size_t c = 0; c < values.size(); ++c) {
        s.v[c] = values[c];
        s.dx[c] = s.dy[c] = 0.0;
      }
    });
  }

  static SpatialField analytic(std::vector<Expression> comps) {
    int nc = static_cast<int>(comps.size());
    return SpatialField(nc, [comps = std::move(comps)](double x, double y, int, int, FieldSample& s) {
      const double p[2] = {x, y};
      double g[2];
      for (std::size_t c = 0; c < comps.size(); ++c) {
        s.v[c] = comps[c].gradient(std::span<const double>(p, 2), std::span<double>(g, 2));
        s.dx[c] = g[0];
        s.dy[c] = g[1];
      }
    });
  }

  /// Finite-element interpolant; values[c] holds nodal coefficients of component c on the space.
  static SpatialField nodal(std::shared_ptr<const LagrangeSpace> sp, std::vector<Vec> values) {
    int nc = static_cast<int>(values.size());
    return SpatialField(nc, [sp = std::move(sp), values = std::move(values)](double x, double y, int ci, int cj,
                                                                           FieldSample& s) {
      const LagrangeSpace& space = *sp;
      const auto& mesh = space.mesh();
      if (ci < 0 || !mesh.active(ci, cj)) {
        auto c = mesh.locate(x, y);
        if (!c) {
          for (std::size_t k = 0; k < values.size(); ++k) s.v[k] = s.dx[k] = s.dy[k] = 0.0;
          return;
        }
        ci = (*c)[0];
        cj = (*c)[1];
      }
      const int p = space.degree();
      double hx = mesh.xs()[ci + 1] - mesh.xs()[ci], hy = mesh.ys()[cj + 1] - mesh.ys()[cj];
      double tx = (x - mesh.xs()[ci]) / hx, ty = (y - mesh.ys()[cj]) / hy;
      double vx[3], dxv[3], ddx[3], vy[3], dyv[3], ddy[3];
      Lagrange1D::eval(p, tx, vx, dxv, ddx);
      Lagrange1D::eval(p, ty, vy, dyv, ddy);
      int nodes[9];
      space.cell_nodes(ci, cj, nodes);
      for (std::size_t k = 0; k < values.size(); ++k) {
        double v = 0, gx = 0, gy = 0;
        for (int b = 0; b <= p; ++b)
          for (int a = 0; a <= p; ++a) {
            double c = values[k][nodes[a + (p + 1) * b]];
            v += c * vx[a] * vy[b];
            gx += c * dxv[a] * vy[b] / hx;
            gy += c * vx[a] * dyv[b] / hy;
          }
        s.v[k] = v;
        s.dx[k] = gx;
        s.dy[k] = gy;
      }
    });
  }

  int components() const { return ncomp_; }
  void operator()(double x, double y, FieldSample& s, int ci = -1, int cj = -1) const { fn_(x, y, ci, cj, s); }
  double value(double x, double y, int comp = 0) const {
    FieldSample s;
    fn_(x, y, -1, -1, s);
    return s.v[comp];
  }

private:
  int ncomp_ = 0;
  Fn fn_;
};

/// Separated data field: sum of spatial fields times parametric collocation vectors.
struct SeparatedField {
  int ncomp = 1;
  std::vector<std::size_t> param_sizes;
  struct Term {
    SpatialField space;
    std::vector<Vec> params;
  };
  std::vector<Term> terms;

  std::size_t rank() const { return terms.size(); }
  bool empty() const { return terms.empty(); }

  /// Values at a grid multi-index.
  void sample(double x, double y, const std::vector<std::size_t>& idx, double* out) const {
    for (int c = 0; c < ncomp; ++c) out[c] = 0.0;
    FieldSample s;
    for (const auto& t : terms) {
      t.space(x, y, s);
      double w = sep::weight_at(t.params, idx);
      for (int c = 0; c < ncomp; ++c) out[c] += w * s.v[c];
    }
  }
};

/// Configuration of one data term.
struct FieldTermSpec {
  enum class Kind { Separable, Sampled, InverseOf } kind = Kind::Separable;
  std::vector<std::string> space;                 // Separable: component expressions in x, y
  std::map<std::string, std::string> params;      // Separable: axis name -> expression in that axis
  std::vector<std::string> sample;                // Sampled: component expressions in x, y and axis names
  std::string source;                             // InverseOf: name of the field to invert
  double tol = 1e-4;
};

struct FieldSpec {
  std::vector<FieldTermSpec> terms;
};

/// Context needed to turn field specifications into separated fields.
struct FieldContext {
  std::shared_ptr<const LagrangeSpace> space;     // sampling space for Sampled terms
  std::vector<int> support;                       // sampling nodes (empty: all nodes of the space)
  const ParamSpace* params = nullptr;
  std::map<std::string, double> constants;
  const std::map<std::string, FieldSpec>* library = nullptr;  // for InverseOf lookups
};

namespace detail {

inline Vec collocate(const Expression& e, const ParamAxis& axis) {
  Vec v(static_cast<Eigen::Index>(axis.size()));
  for (std::size_t i = 0; i < axis.size(); ++i) {
    double p = axis.points[i];
    v[static_cast<Eigen::Index>(i)] = e(std::span<const double>(&p, 1));
  }
  return v;
}

}  // namespace detail

SeparatedField realize(const FieldSpec& spec, int ncomp, const FieldContext& ctx, const std::string& name = "");

/// Sample a separated field (or raw expressions) at the support nodes over the whole grid.
inline DenseTensor sample_dense(const std::function<void(double, double, const std::vector<double>&,
                                                         const std::vector<std::size_t>&, double*)>& f,
                                int ncomp, const FieldContext& ctx) {
  const auto& space = *ctx.space;
  std::vector<int> support = ctx.support;
  if (support.empty()) {
    support.resize(static_cast<std::size_t>(space.size()));
    for (int i = 0; i < space.size(); ++i) support[static_cast<std::size_t>(i)] = i;
  }
  const std::size_t ns = support.size() * static_cast<std::size_t>(ncomp);
  DenseTensor d;
  d.shape.push_back(ns);
  for (const auto& a : ctx.params->axes) d.shape.push_back(a.size());
  std::size_t total = 1;
  for (auto s : d.shape) total *= s;
  d.data.assign(total, 0.0);
  const std::size_t D = ctx.params->dims();
  std::vector<std::size_t> idx(D, 0);
  std::vector<double> mu(D);
  double vals[4];
  for (std::size_t off = 0; off < total; off += ns) {
    for (std::size_t k = 0; k < D; ++k) mu[k] = ctx.params->axes[k].points[idx[k]];
    for (std::size_t s = 0; s < support.size(); ++s) {
      auto xy = space.node(support[s]);
      f(xy[0], xy[1], mu, idx, vals);
      for (int c = 0; c < ncomp; ++c) d.data[off + static_cast<std::size_t>(c) * support.size() + s] = vals[c];
    }
    for (std::size_t k = 0; k < D; ++k) {
      if (++idx[k] < d.shape[k + 1]) break;
      idx[k] = 0;
    }
  }
  return d;
}

/// Convert a separated dense decomposition on support nodes back into nodal spatial fields.
inline SeparatedField from_separated_samples(const SepVector& sv, int ncomp, const FieldContext& ctx) {
  const auto& space = *ctx.space;
  std::vector<int> support = ctx.support;
  if (support.empty()) {
    support.resize(static_cast<std::size_t>(space.size()));
    for (int i = 0; i < space.size(); ++i) support[static_cast<std::size_t>(i)] = i;
  }
  SeparatedField out;
  out.ncomp = ncomp;
  out.param_sizes = ctx.params->sizes();
  for (const auto& t : sv.terms()) {
    std::vector<Vec> comps(static_cast<std::size_t>(ncomp), Vec::Zero(space.size()));
    for (int c = 0; c < ncomp; ++c)
      for (std::size_t s = 0; s < support.size(); ++s)
        comps[static_cast<std::size_t>(c)][support[s]] = t.space[static_cast<Eigen::Index>(c * support.size() + s)];
    out.terms.push_back({SpatialField::nodal(ctx.space, std::move(comps)), t.params});
  }
  return out;
}

inline SeparatedField realize(const FieldSpec& spec, int ncomp, const FieldContext& ctx, const std::string& name) {
  const ParamSpace& ps = *ctx.params;
  SeparatedField out;
  out.ncomp = ncomp;
  out.param_sizes = ps.sizes();
  std::vector<std::string> names;
  for (const auto& a : ps.axes) names.push_back(a.name);
  for (const auto& term : spec.terms) {
    if (term.kind == FieldTermSpec::Kind::Separable) {
      if (static_cast<int>(term.space.size()) != ncomp)
        throw ConfigError("field '" + name + "': expected " + std::to_string(ncomp) + " spatial components");
      std::vector<Expression> comps;
      for (const auto& s : term.space) comps.emplace_back(s, std::vector<std::string>{"x", "y"}, ctx.constants);
      std::vector<Vec> params;
      for (const auto& axis : ps.axes) {
        auto it = term.params.find(axis.name);
        if (it == term.params.end()) {
          params.push_back(Vec::Ones(static_cast<Eigen::Index>(axis.size())));
        } else {
          params.push_back(detail::collocate(Expression(it->second, {axis.name}, ctx.constants), axis));
        }
      }
      for (const auto& [axis_name, expr] : term.params) {
        bool known = false;
        for (const auto& a : ps.axes) known = known || a.name == axis_name;
        if (!known) throw ConfigError("field '" + name + "': parameter '" + axis_name + "' is not active here");
      }
      out.terms.push_back({SpatialField::analytic(std::move(comps)), std::move(params)});
    } else if (term.kind == FieldTermSpec::Kind::Sampled) {
      if (static_cast<int>(term.sample.size()) != ncomp)
        throw ConfigError("field '" + name + "': expected " + std::to_string(ncomp) + " sampled components");
      if (!ctx.space) throw ConfigError("field '" + name + "': sampling requires a space");
      std::vector<std::string> vars{"x", "y"};
      vars.insert(vars.end(), names.begin(), names.end());
      std::vector<Expression> comps;
      for (const auto& s : term.sample) comps.emplace_back(s, vars, ctx.constants);
      auto d = sample_dense(
          [&](double x, double y, const std::vector<double>& mu, const std::vector<std::size_t>&, double* v) {
            std::vector<double> p{x, y};
            p.insert(p.end(), mu.begin(), mu.end());
            for (std::size_t c = 0; c < comps.size(); ++c) v[c] = comps[c](std::span<const double>(p));
          },
          ncomp, ctx);
      LowRankOptions lo;
      lo.tol = term.tol;
      auto sv = tensor_separation(d, lo);
      auto part = from_separated_samples(sv, ncomp, ctx);
      for (auto& t : part.terms) out.terms.push_back(std::move(t));
    } else {
      if (!ctx.library) throw ConfigError("field '" + name + "': inverse requires a field library");
      auto it = ctx.library->find(term.source);
      if (it == ctx.library->end())
        throw ConfigError("field '" + name + "': source field '" + term.source + "' not found");
      if (ncomp != 1) throw ConfigError("field '" + name + "': only scalar fields can be inverted");
      SeparatedField src = realize(it->second, 1, ctx, term.source);
      auto d = sample_dense(
          [&](double x, double y, const std::vector<double>&, const std::vector<std::size_t>& idx, double* v) {
            src.sample(x, y, idx, v);
            if (v[0] == 0.0 || !std::isfinite(v[0]))
              throw ConfigError("field '" + name + "': source vanishes, cannot invert");
            v[0] = 1.0 / v[0];
          },
          1, ctx);
      LowRankOptions lo;
      lo.tol = term.tol;
      auto sv = tensor_separation(d, lo);
      auto part = from_separated_samples(sv, 1, ctx);
      for (auto& t : part.terms) out.terms.push_back(std::move(t));
    }
  }
  return out;
}

}  // namespace ddpgd

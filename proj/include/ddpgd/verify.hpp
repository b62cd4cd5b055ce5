#pragma once

#include <random>
#include <string>
#include <vector>

#include "ddpgd/config.hpp"

namespace ddpgd {

/// Closed-form evaluation of configured data fields and exact solutions, with derivatives.
class CaseExpressions {
public:
  explicit CaseExpressions(const CaseConfig& cfg) : cfg_(cfg) {
    vars_ = {"x", "y"};
    for (const auto& a : cfg.params.axes) vars_.push_back(a.name);
    if (cfg.exact) {
      exact_ = {Expression(cfg.exact->u, vars_, cfg.constants), Expression(cfg.exact->v, vars_, cfg.constants),
                Expression(cfg.exact->p, vars_, cfg.constants)};
    }
  }

  bool has_exact() const { return !exact_.empty(); }
  const std::vector<std::string>& variables() const { return vars_; }

  /// One component of a data field of subdomain `sd` as a single expression in (x, y, params...).
  Expression field(const SubdomainSpec& sd, const std::string& name, std::size_t comp) const {
    auto it = sd.fields.find(name);
    if (it == sd.fields.end()) throw ConfigError("subdomain '" + sd.name + "' has no field '" + name + "'");
    std::string src;
    for (const auto& t : it->second.terms) {
      std::string term;
      if (t.kind == FieldTermSpec::Kind::Separable) {
        if (comp >= t.space.size()) throw ConfigError("field '" + name + "': missing component");
        term = "(" + t.space[comp] + ")";
        for (const auto& [axis, e] : t.params) term += "*(" + e + ")";
      } else if (t.kind == FieldTermSpec::Kind::Sampled) {
        if (comp >= t.sample.size()) throw ConfigError("field '" + name + "': missing component");
        term = "(" + t.sample[comp] + ")";
      } else {
        throw ConfigError("field '" + name + "' is defined implicitly and has no closed form");
      }
      src += (src.empty() ? "" : "+") + term;
    }
    if (src.empty()) src = "0";
    return Expression(src, vars_, cfg_.constants);
  }

  const Expression& exact(std::size_t c) const { return exact_.at(c); }

private:
  const CaseConfig& cfg_;
  std::vector<std::string> vars_;
  std::vector<Expression> exact_;
};

struct ResidualReport {
  double momentum = 0;    // scaled strong-form momentum residual
  double divergence = 0;  // scaled divergence of the exact velocity
  int samples = 0;
};

/// Strong-form residuals of the exact solution at random points of every subdomain and random parameters.
inline ResidualReport exact_solution_residuals(const CaseConfig& cfg, int samples, unsigned seed = 1) {
  ResidualReport rep;
  if (!cfg.exact) return rep;
  CaseExpressions ce(cfg);
  std::mt19937 rng(seed);
  const std::size_t nv = ce.variables().size();
  for (const auto& sd : cfg.subdomains) {
    const bool stokes = sd.physics == Physics::Stokes;
    double x1 = sd.mesh.x0, y1 = sd.mesh.y0;
    for (const auto& s : sd.mesh.x) x1 += s.length;
    for (const auto& s : sd.mesh.y) y1 += s.length;
    std::uniform_real_distribution<double> ux(sd.mesh.x0, x1), uy(sd.mesh.y0, y1);
    Expression nu = ce.field(sd, "nu", 0);
    std::array<Expression, 2> f{ce.field(sd, "f", 0), ce.field(sd, "f", 1)};
    std::optional<Expression> kinv;
    if (!stokes) kinv = ce.field(sd, "K_inv", 0);
    for (int s = 0; s < samples; ++s) {
      std::vector<double> p(nv);
      p[0] = ux(rng);
      p[1] = uy(rng);
      for (std::size_t k = 0; k < cfg.params.axes.size(); ++k) {
        const auto& pts = cfg.params.axes[k].points;
        std::uniform_real_distribution<double> um(pts.front(), pts.back());
        p[2 + k] = um(rng);
      }
      std::span<const double> P(p);
      std::vector<double> gu(nv), gv(nv), gp(nv), gn(nv);
      double u[2];
      u[0] = ce.exact(0).gradient(P, gu);
      u[1] = ce.exact(1).gradient(P, gv);
      ce.exact(2).gradient(P, gp);
      const double nuv = nu.gradient(P, gn);
      const double* g[2] = {gu.data(), gv.data()};
      double scale = 1.0;
      for (int i = 0; i < 2; ++i) {
        double r = -f[static_cast<std::size_t>(i)](P) + gp[static_cast<std::size_t>(i)];
        scale = std::max({scale, std::abs(f[static_cast<std::size_t>(i)](P)), std::abs(gp[static_cast<std::size_t>(i)])});
        if (stokes) {
          // -div(2 nu sym grad u)_i
          for (std::size_t j = 0; j < 2; ++j) {
            double sym = g[i][j] + g[j][static_cast<std::size_t>(i)];
            double d2 = ce.exact(static_cast<std::size_t>(i)).second(P, j, j) +
                        ce.exact(j).second(P, static_cast<std::size_t>(i), j);
            r -= gn[j] * sym + nuv * d2;
          }
        } else {
          r += nuv * (*kinv)(P)*u[i];
        }
        rep.momentum = std::max(rep.momentum, std::abs(r) / scale);
      }
      double gscale = std::max({1.0, std::abs(gu[0]), std::abs(gv[1])});
      rep.divergence = std::max(rep.divergence, std::abs(gu[0] + gv[1]) / gscale);
      ++rep.samples;
    }
  }
  return rep;
}

}  // namespace ddpgd

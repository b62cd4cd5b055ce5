#pragma once

#include <array>
#include <memory>
#include <optional>

#include "ddpgd/cases.hpp"
#include "ddpgd/reference.hpp"
#include "ddpgd/report.hpp"

namespace ddpgd {

/// Discretized two-subdomain problem; operators are assembled on demand.
struct Problem {
  CaseConfig cfg;
  std::array<std::unique_ptr<Subdomain>, 2> sd;
  std::array<std::optional<SubdomainOperator>, 2> op;
  Decomposition dec;

  explicit Problem(CaseConfig c) : cfg(std::move(c)) {
    for (std::size_t i = 0; i < 2; ++i) sd[i] = std::make_unique<Subdomain>(cfg.subdomains[i], cfg.params);
    dec = decompose(*sd[0], *sd[1]);
  }

  const SubdomainOperator& op_of(std::size_t i) {
    if (!op[i]) op[i] = assemble(*sd[i], cfg.constants);
    return *op[i];
  }

  OfflineOptions offline_options(int jobs = 1) const {
    OfflineOptions o;
    o.pgd = cfg.pgd;
    o.compress_tol = cfg.compress_tol;
    o.jobs = jobs;
    return o;
  }

  GmresOptions gmres_options() const {
    GmresOptions g;
    g.rel_tol = cfg.gmres_tol;
    return g;
  }

  std::vector<Region> regions(const std::array<Vec, 2>& u) const { return stitched(*sd[0], u[0], *sd[1], u[1]); }

  /// Exact solution as a point function at mu, if the case has one.
  std::optional<PointFn> exact(const std::vector<double>& mu) const {
    if (!cfg.exact) return std::nullopt;
    std::vector<std::string> vars{"x", "y"};
    for (const auto& a : cfg.params.axes) vars.push_back(a.name);
    auto e = std::make_shared<std::array<Expression, 3>>(std::array<Expression, 3>{
        Expression(cfg.exact->u, vars, cfg.constants), Expression(cfg.exact->v, vars, cfg.constants),
        Expression(cfg.exact->p, vars, cfg.constants)});
    return PointFn([e, mu](double x, double y, double out[3]) {
      std::vector<double> p{x, y};
      p.insert(p.end(), mu.begin(), mu.end());
      for (std::size_t c = 0; c < 3; ++c) out[c] = (*e)[c](std::span<const double>(p));
    });
  }
};

}  // namespace ddpgd

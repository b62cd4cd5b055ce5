#pragma once

#include <memory>
#include <vector>

#include "ddpgd/online.hpp"

namespace ddpgd {

/// Full-order local solver of one subdomain at a fixed parameter point.
/// Maps interface coefficients to the full field; the factorization is reused.
class LocalSolver {
public:
  LocalSolver(const Subdomain& sd, const SubdomainOperator& op, const std::vector<double>& mu) : sd_(&sd) {
    const auto m = local_point(sd.global_axes(), mu);
    const int N = sd.ndofs();
    SpMat K = sep::evaluate(op.K, N, N, sd.params(), m);
    const auto& I = sd.free();
    std::vector<int> all(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) all[static_cast<std::size_t>(i)] = i;
    KII_ = submatrix(K, I, all);
    Vec F = sep::evaluate(op.F, N, sd.params(), m);
    G_ = sep::evaluate(op.G, N, sd.params(), m);
    rhs0_ = Vec(static_cast<Eigen::Index>(I.size()));
    for (std::size_t k = 0; k < I.size(); ++k) rhs0_[static_cast<Eigen::Index>(k)] = F[I[k]];
    rhs0_ -= KII_ * G_;
    if (sd.physics() == Physics::Darcy) {
      std::vector<int> cols(sd.trace().size());
      for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
      MI_ = submatrix(op.M, I, cols);
    }
    SpMat A = submatrix(K, I, I);
    lu_.compute(A);
  }

  Vec operator()(const Vec& lambda) const {
    const auto& I = sd_->free();
    const auto& tr = sd_->trace();
    Vec u = G_;
    Vec rhs = rhs0_;
    if (sd_->physics() == Physics::Stokes) {
      Vec e = Vec::Zero(sd_->ndofs());
      for (std::size_t j = 0; j < tr.size(); ++j) e[tr[j]] = lambda[static_cast<Eigen::Index>(j)];
      rhs -= KII_ * e;
      u += e;
    } else if (MI_.cols() > 0) {
      rhs -= MI_ * lambda;
    }
    Vec x = lu_.solve(rhs);
    for (std::size_t k = 0; k < I.size(); ++k) u[I[k]] += x[static_cast<Eigen::Index>(k)];
    return u;
  }

private:
  const Subdomain* sd_;
  SpMat KII_, MI_;
  Vec G_, rhs0_;
  SparseDirect lu_;
};

/// Classical overlapping DD with direct local solves inside every GMRES application.
inline CoupledSolution solve_dd_fem(const std::array<const Subdomain*, 2>& sd,
                                    const std::array<const SubdomainOperator*, 2>& op, const Decomposition& dec,
                                    const std::vector<double>& mu, const GmresOptions& opt = {}) {
  auto a = std::make_shared<LocalSolver>(*sd[0], *op[0], mu);
  auto b = std::make_shared<LocalSolver>(*sd[1], *op[1], mu);
  std::array<LocalMap, 2> maps{[a](const Vec& l) { return (*a)(l); }, [b](const Vec& l) { return (*b)(l); }};
  return solve_interface(dec, maps, {static_cast<int>(sd[0]->trace().size()), static_cast<int>(sd[1]->trace().size())},
                         opt);
}

/// Single-domain direct solve (no interface dofs).
inline Vec solve_monolithic(const Subdomain& sd, const SubdomainOperator& op, const std::vector<double>& mu) {
  if (!sd.trace().empty()) throw ConfigError("monolithic problem '" + sd.name() + "' must not have interface edges");
  LocalSolver s(sd, op, mu);
  return s(Vec());
}

}  // namespace ddpgd

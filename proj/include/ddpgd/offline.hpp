#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "ddpgd/assembly.hpp"
#include "ddpgd/lowrank.hpp"
#include "ddpgd/pgd.hpp"

namespace ddpgd {

struct OfflineOptions {
  PgdOptions pgd;
  double compress_tol = 1e-3;
  bool compress = true;
  int jobs = 1;
  std::function<void(const std::string&)> log;
};

/// Per-subdomain PGD expansions: one data problem plus one problem per interface trace dof.
struct SubdomainSurrogate {
  std::string name;
  Physics physics = Physics::Stokes;
  int ndofs = 0;
  std::vector<int> free, trace;
  std::vector<int> global_axes;
  ParamSpace params;
  SepVector data;                 // over free dofs
  std::vector<SepVector> traces;  // over free dofs
  SepVector lifting;              // over all dofs
  int modes_raw = 0;
  int modes_compressed = 0;
  int data_modes_raw = 0;
  int data_modes_compressed = 0;
  int unconverged = 0;
  double seconds = 0;

  int problems() const { return static_cast<int>(traces.size()) + 1; }
};

/// Restricted separated systems solved offline on one subdomain.
struct LocalProblems {
  SepMatrix lhs;
  SepVector data_rhs;
  std::vector<SepVector> trace_rhs;
  ConvergenceMask mask;
};

inline LocalProblems local_problems(const Subdomain& sd, const SubdomainOperator& op) {
  LocalProblems lp;
  const auto& I = sd.free();
  lp.lhs = sep::merge_identical(submatrix(op.K, I, I));
  std::vector<int> all(static_cast<std::size_t>(sd.ndofs()));
  for (int i = 0; i < sd.ndofs(); ++i) all[static_cast<std::size_t>(i)] = i;
  SepMatrix KI = submatrix(op.K, I, all);
  SepVector rhs = sep::restrict_rows(op.F, I);
  if (!op.G.empty()) rhs = sep::add(rhs, sep::scale(sep::apply(KI, op.G), -1.0));
  lp.data_rhs = sep::merge_identical(rhs);
  const auto& tr = sd.trace();
  if (sd.physics() == Physics::Stokes) {
    SepMatrix KIG = submatrix(op.K, I, tr);
    for (std::size_t j = 0; j < tr.size(); ++j) {
      SepVector b(sd.params().sizes());
      for (const auto& t : KIG.terms()) {
        Vec col = -Vec(t.space.col(static_cast<Eigen::Index>(j)));
        if (col.squaredNorm() > 0) b.push(std::move(col), t.params);
      }
      lp.trace_rhs.push_back(sep::merge_identical(b));
    }
  } else {
    std::vector<int> cols(tr.size());
    for (std::size_t j = 0; j < tr.size(); ++j) cols[j] = static_cast<int>(j);
    SpMat MI = submatrix(op.M, I, cols);
    for (std::size_t j = 0; j < tr.size(); ++j) {
      SepVector b(sd.params().sizes());
      b.push_constant(-Vec(MI.col(static_cast<Eigen::Index>(j))));
      lp.trace_rhs.push_back(b);
    }
  }
  std::vector<int> vel, pre;
  for (std::size_t k = 0; k < I.size(); ++k) (sd.is_pressure(I[k]) ? pre : vel).push_back(static_cast<int>(k));
  if (!vel.empty()) lp.mask.blocks.push_back(vel);
  if (!pre.empty()) lp.mask.blocks.push_back(pre);
  return lp;
}

/// Solve every local problem of a subdomain with PGD and compress each result.
inline SubdomainSurrogate build_surrogate(const Subdomain& sd, const SubdomainOperator& op,
                                          const OfflineOptions& opt = {}) {
  auto t0 = std::chrono::steady_clock::now();
  LocalProblems lp = local_problems(sd, op);
  PgdOperator pop(lp.lhs);
  SubdomainSurrogate s;
  s.name = sd.name();
  s.physics = sd.physics();
  s.ndofs = sd.ndofs();
  s.free = sd.free();
  s.trace = sd.trace();
  s.global_axes = sd.global_axes();
  s.params = sd.params();
  s.lifting = op.G;
  s.traces.resize(lp.trace_rhs.size());

  std::mutex mu;
  auto solve_one = [&](const SepVector& rhs, SepVector& out, int& raw, int& comp) {
    PgdReport rep;
    SepVector x = pgd_solve(pop, rhs, lp.mask, opt.pgd, &rep);
    raw = rep.modes;
    if (opt.compress && x.rank() > 1) {
      LowRankOptions lo;
      lo.tol = opt.compress_tol;
      lo.max_rank = std::max<int>(1, static_cast<int>(x.rank()));
      lo.blocks = lp.mask.blocks;
      x = compress(x, lo);
    }
    comp = static_cast<int>(x.rank());
    out = std::move(x);
    if (!rep.converged) {
      std::lock_guard<std::mutex> lock(mu);
      s.unconverged++;
    }
  };

  solve_one(lp.data_rhs, s.data, s.data_modes_raw, s.data_modes_compressed);
  if (opt.log)
    opt.log(sd.name() + ": data problem " + std::to_string(s.data_modes_raw) + " modes (" +
            std::to_string(s.data_modes_compressed) + " compressed)");
  std::vector<int> raw(lp.trace_rhs.size()), comp(lp.trace_rhs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t j = next++;
      if (j >= lp.trace_rhs.size()) return;
      solve_one(lp.trace_rhs[j], s.traces[j], raw[j], comp[j]);
    }
  };
  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  s.modes_raw = s.data_modes_raw;
  s.modes_compressed = s.data_modes_compressed;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    s.modes_raw += raw[j];
    s.modes_compressed += comp[j];
  }
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.log)
    opt.log(sd.name() + ": " + std::to_string(s.problems()) + " problems, " + std::to_string(s.modes_raw) +
            " modes (" + std::to_string(s.modes_compressed) + " compressed), " + std::to_string(s.seconds) + " s");
  return s;
}

}  // namespace ddpgd

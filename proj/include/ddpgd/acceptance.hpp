#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ddpgd/archive.hpp"
#include "ddpgd/pipeline.hpp"
#include "ddpgd/verify.hpp"

namespace ddpgd {

using LogFn = std::function<void(const std::string&)>;

/// Surrogates built once per (configuration, subdomain) and kept on disk when a directory is given.
class SurrogateStore {
public:
  explicit SurrogateStore(std::string dir = {}, int jobs = 1, LogFn log = {})
      : dir_(std::move(dir)), jobs_(jobs), log_(std::move(log)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  const SubdomainSurrogate& get(Problem& pb, std::size_t i) {
    const std::string key = key_of(pb, i);
    if (auto it = mem_.find(key); it != mem_.end()) return it->second;
    const std::string path = dir_.empty() ? std::string() : (std::filesystem::path(dir_) / (key + ".ddpgd")).string();
    if (!path.empty() && std::filesystem::exists(path)) {
      try {
        auto s = load_surrogate(path);
        say("loaded " + path);
        return mem_.emplace(key, std::move(s)).first->second;
      } catch (const ArchiveError& e) {
        say(std::string("ignoring unreadable archive: ") + e.what());
      }
    }
    auto opt = pb.offline_options(jobs_);
    opt.log = log_;
    auto s = build_surrogate(*pb.sd[i], pb.op_of(i), opt);
    if (!path.empty()) save_surrogate(s, path);
    return mem_.emplace(key, std::move(s)).first->second;
  }

  static std::string key_of(const Problem& pb, std::size_t i) {
    std::string src = pb.cfg.source.dump() + "#" + std::to_string(i) + "#v" + std::to_string(archive::kVersion);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(archive::fnv1a(src.data(), src.size())));
    return pb.cfg.name + "_" + pb.sd[i]->name() + "_" + hex;
  }

private:
  void say(const std::string& m) const {
    if (log_) log_(m);
  }

  std::string dir_;
  int jobs_;
  LogFn log_;
  std::map<std::string, SubdomainSurrogate> mem_;
};

/// Surrogate and reference solutions of one case at one parameter point.
struct CaseEvaluation {
  std::vector<double> mu;
  OnlineResult pgd;
  std::optional<CoupledSolution> fem;
  std::unique_ptr<Subdomain> global_sd;
  Vec global_u;
  std::optional<std::array<double, 3>> err_pgd, err_fem, err_global;
  double fem_seconds = 0, global_seconds = 0;
  double mismatch = 0;  // interface condition violation of the surrogate solution
  OverlapMismatch overlap;
};

inline CaseEvaluation evaluate_case(Problem& pb, SurrogateStore& store, const std::vector<double>& mu, bool with_fem,
                                    bool with_global) {
  CaseEvaluation ev;
  ev.mu = mu;
  const auto& s0 = store.get(pb, 0);
  const auto& s1 = store.get(pb, 1);
  ev.pgd = online_solve({&s0, &s1}, pb.dec, mu, pb.gmres_options());
  ev.mismatch = interface_mismatch(pb.dec, ev.pgd.solution);
  ev.overlap = overlap_mismatch(*pb.sd[0], ev.pgd.solution.u[0], *pb.sd[1], ev.pgd.solution.u[1]);
  auto ex = pb.exact(mu);
  if (ex) ev.err_pgd = interpolated_errors(pb.regions(ev.pgd.solution.u), *ex);
  if (with_fem) {
    auto t0 = std::chrono::steady_clock::now();
    ev.fem = solve_dd_fem({pb.sd[0].get(), pb.sd[1].get()}, {&pb.op_of(0), &pb.op_of(1)}, pb.dec, mu,
                          pb.gmres_options());
    ev.fem_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ex) ev.err_fem = interpolated_errors(pb.regions(ev.fem->u), *ex);
  }
  if (with_global && pb.cfg.reference) {
    auto t0 = std::chrono::steady_clock::now();
    ev.global_sd = std::make_unique<Subdomain>(*pb.cfg.reference, pb.cfg.params);
    ev.global_u = solve_monolithic(*ev.global_sd, assemble(*ev.global_sd, pb.cfg.constants), mu);
    ev.global_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (ex) ev.err_global = interpolated_errors({Region{{ev.global_sd.get(), &ev.global_u}, {}}}, *ex);
  }
  return ev;
}

/// Errors of a Stokes surrogate on its own subdomain when the interface trace is the exact solution.
inline std::array<double, 3> exact_trace_errors(const Problem& pb, const SubdomainSurrogate& s,
                                                const std::vector<double>& mu) {
  const auto& sd = *pb.sd[0];
  auto ex = *pb.exact(mu);
  Vec lambda(static_cast<Eigen::Index>(sd.trace().size()));
  for (std::size_t j = 0; j < sd.trace().size(); ++j) {
    auto xy = sd.dof_coords(sd.trace()[j]);
    double v[3];
    ex(xy[0], xy[1], v);
    lambda[static_cast<Eigen::Index>(j)] = v[sd.dof_kind(sd.trace()[j])];
  }
  auto e = evaluate_expansion(s, mu);
  Vec u = e.base + e.U * lambda;
  return interpolated_errors({Region{{&sd, &u}, {}}}, ex);
}

// ---------------------------------------------------------------------------------------------
// Criteria

struct Check {
  std::string id;
  std::string title;
  bool pass = false;
  std::string detail;
  bool gated = true;
};

inline bool within_factor(double v, double ref, double f = 2.0) { return v >= ref / f && v <= ref * f; }

inline std::string sci(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

inline std::string triple(const std::array<double, 3>& v) { return "(" + sci(v[0]) + ", " + sci(v[1]) + ", " + sci(v[2]) + ")"; }

inline bool all_within(const std::array<double, 3>& v, const std::array<double, 3>& ref, double f = 2.0) {
  return within_factor(v[0], ref[0], f) && within_factor(v[1], ref[1], f) && within_factor(v[2], ref[2], f);
}

namespace tol {
inline constexpr double kErrorFactor = 2.0;
inline constexpr std::array<double, 3> kSsPgd{8.64e-4, 1.65e-3, 1.32e-3};
inline constexpr std::array<double, 3> kSsFem{1.90e-5, 3.81e-5, 1.98e-3};
inline constexpr std::array<double, 3> kSsGlobal{4.14e-6, 4.15e-6, 9.87e-4};
inline constexpr int kSsItersLo = 20, kSsItersHi = 35;
inline constexpr double kInterfaceMismatch = 1e-6;
inline constexpr double kPressureOverlap = 5e-3;
inline constexpr std::array<double, 3> kQ1Stokes{1.32e-3, 3.35e-3, 9.78e-3};
inline constexpr std::array<double, 3> kQ2Stokes{6.77e-4, 1.79e-3, 1.40e-2};
inline constexpr std::size_t kQ1Problems = 80, kQ2Problems = 160;
inline constexpr std::array<double, 3> kSdPgd{1.37e-3, 3.96e-3, 8.45e-3};
inline constexpr int kSdItersLo = 25, kSdItersHi = 45;
inline constexpr std::size_t kDarcyProblems = 41;
inline constexpr double kModeBand = 0.30;
inline constexpr int kStokesModes = 94, kStokesModesRaw = 139, kDarcyModes = 57, kDarcyModesRaw = 113;
inline constexpr int kCrossflowIters = 15;
inline constexpr double kDenseOracle = 1e-12;
inline constexpr double kSuperposition = 1e-10;
inline constexpr double kPdeResidual = 1e-8;
}  // namespace tol

struct AcceptanceContext {
  SurrogateStore store;
  LogFn log;
  unsigned seed = 1;
  std::map<std::string, std::unique_ptr<Problem>> problems;

  Problem& problem(const std::string& name) {
    auto& p = problems[name];
    if (!p) p = std::make_unique<Problem>(builtin_case(name));
    return *p;
  }
  void say(const std::string& m) const {
    if (log) log(m);
  }
};

/// Criteria 1, 2 and the informational timing line for the Stokes-Stokes case.
inline std::vector<Check> check_stokes_stokes(AcceptanceContext& ctx) {
  auto& pb = ctx.problem("stokes_stokes");
  ctx.say("stokes_stokes: offline and online");
  auto ev = evaluate_case(pb, ctx.store, pb.cfg.mu, true, true);
  std::vector<Check> out;
  const int ip = ev.pgd.solution.gmres.iterations, ifem = ev.fem->gmres.iterations;
  Check c1{"1", "Stokes-Stokes errors and GMRES iterations"};
  const bool e_pgd = all_within(*ev.err_pgd, tol::kSsPgd), e_fem = all_within(*ev.err_fem, tol::kSsFem),
             e_glob = all_within(*ev.err_global, tol::kSsGlobal);
  const bool it_ok = ip >= tol::kSsItersLo && ip <= tol::kSsItersHi && ifem >= tol::kSsItersLo && ifem <= tol::kSsItersHi;
  c1.pass = e_pgd && e_fem && e_glob && it_ok;
  c1.detail = std::string("DD-PGD ") + triple(*ev.err_pgd) + (e_pgd ? " ok" : " OUT") + "; DD-FEM " + triple(*ev.err_fem) +
              (e_fem ? " ok" : " OUT") + "; global " + triple(*ev.err_global) + (e_glob ? " ok" : " OUT") +
              "; iterations " + std::to_string(ip) + "/" + std::to_string(ifem) + (it_ok ? " ok" : " OUT");
  out.push_back(c1);

  Check c2{"2", "Stokes-Stokes overlap diagnostics"};
  c2.pass = ev.mismatch <= tol::kInterfaceMismatch && ev.overlap.pressure <= tol::kPressureOverlap;
  c2.detail = "interface velocity mismatch " + sci(ev.mismatch) + " (<= " + sci(tol::kInterfaceMismatch) +
              "), pressure overlap max " + sci(ev.overlap.pressure) + " (<= " + sci(tol::kPressureOverlap) + ")";
  out.push_back(c2);

  Check c8{"8", "timing (informational)"};
  c8.gated = false;
  c8.pass = true;
  const auto& s0 = ctx.store.get(pb, 0);
  const auto& s1 = ctx.store.get(pb, 1);
  c8.detail = "offline " + sci(s0.seconds + s1.seconds) + " s, online " + sci(ev.pgd.total_seconds) + " s, DD-FEM " +
              sci(ev.fem_seconds) + " s, monolithic " + sci(ev.global_seconds) + " s, DD-FEM/online speedup " +
              sci(ev.fem_seconds / std::max(ev.pgd.total_seconds, 1e-12));
  out.push_back(c8);
  return out;
}

/// Criterion 3: Stokes surrogates on the Stokes-Darcy geometry driven by the exact interface trace.
inline Check check_discretizations(AcceptanceContext& ctx) {
  Check c{"3", "Q1-Q1 GLS vs Q2-Q1 Stokes surrogates (exact trace)"};
  auto& q1 = ctx.problem("stokes_darcy_analytic");
  auto& q2 = ctx.problem("stokes_darcy_q2");
  ctx.say("Stokes surrogates, Q1 and Q2");
  const auto& s1 = ctx.store.get(q1, 0);
  const auto& s2 = ctx.store.get(q2, 0);
  auto e1 = exact_trace_errors(q1, s1, q1.cfg.mu);
  auto e2 = exact_trace_errors(q2, s2, q2.cfg.mu);
  const bool ok1 = all_within(e1, tol::kQ1Stokes), ok2 = all_within(e2, tol::kQ2Stokes);
  const bool cnt = s1.traces.size() == tol::kQ1Problems && s2.traces.size() == tol::kQ2Problems;
  c.pass = ok1 && ok2 && cnt;
  c.detail = "Q1 " + triple(e1) + (ok1 ? " ok" : " OUT") + "; Q2 " + triple(e2) + (ok2 ? " ok" : " OUT") +
             "; problems " + std::to_string(s1.traces.size()) + "/" + std::to_string(s2.traces.size()) +
             (cnt ? " ok" : " OUT") + "; modes Q2 " + std::to_string(s2.modes_compressed) + " (" +
             std::to_string(s2.modes_raw) + ")";
  return c;
}

/// Criteria 4 and 5 for the analytic Stokes-Darcy case.
inline std::vector<Check> check_stokes_darcy(AcceptanceContext& ctx) {
  auto& pb = ctx.problem("stokes_darcy_analytic");
  ctx.say("stokes_darcy_analytic: offline and online");
  auto ev = evaluate_case(pb, ctx.store, pb.cfg.mu, false, false);
  const auto& s0 = ctx.store.get(pb, 0);
  const auto& s1 = ctx.store.get(pb, 1);
  std::vector<Check> out;
  Check c4{"4", "Stokes-Darcy errors, GMRES iterations, Darcy problem count"};
  const int it = ev.pgd.solution.gmres.iterations;
  const bool e_ok = all_within(*ev.err_pgd, tol::kSdPgd);
  const bool it_ok = ev.pgd.solution.gmres.converged && it >= tol::kSdItersLo && it <= tol::kSdItersHi;
  const bool n_ok = s1.traces.size() == tol::kDarcyProblems;
  c4.pass = e_ok && it_ok && n_ok;
  c4.detail = "DD-PGD " + triple(*ev.err_pgd) + (e_ok ? " ok" : " OUT") + "; iterations " + std::to_string(it) +
              (it_ok ? " ok" : " OUT") + "; Darcy unit-trace problems " + std::to_string(s1.traces.size()) +
              (n_ok ? " ok" : " OUT");
  out.push_back(c4);

  Check c5{"5", "mode counts"};
  auto band = [](int v, int ref) { return std::abs(v - ref) <= tol::kModeBand * ref; };
  const bool m = band(s0.modes_compressed, tol::kStokesModes) && band(s0.modes_raw, tol::kStokesModesRaw) &&
                 band(s1.modes_compressed, tol::kDarcyModes) && band(s1.modes_raw, tol::kDarcyModesRaw);
  c5.pass = m;
  c5.detail = "Stokes Q1 " + std::to_string(s0.modes_compressed) + " (" + std::to_string(s0.modes_raw) + ") vs " +
              std::to_string(tol::kStokesModes) + " (" + std::to_string(tol::kStokesModesRaw) + "); Darcy " +
              std::to_string(s1.modes_compressed) + " (" + std::to_string(s1.modes_raw) + ") vs " +
              std::to_string(tol::kDarcyModes) + " (" + std::to_string(tol::kDarcyModesRaw) + ")";
  out.push_back(c5);
  return out;
}

/// Criterion 6: coarse cross-flow case.
inline Check check_crossflow(AcceptanceContext& ctx) {
  Check c{"6", "cross-flow convergence and parameter structure"};
  auto& pb = ctx.problem("crossflow");
  ctx.say("crossflow: offline and online");
  const auto& s0 = ctx.store.get(pb, 0);
  const auto& s1 = ctx.store.get(pb, 1);
  const std::vector<std::vector<double>> pts{{0.0, 20.0}, {-std::numbers::pi / 4, 20.0}, {0.0, 2e-5}};
  bool conv = true;
  int it_low = -1;
  std::string its;
  for (const auto& mu : pts) {
    auto r = online_solve({&s0, &s1}, pb.dec, mu, pb.gmres_options());
    conv = conv && r.solution.gmres.converged;
    its += (its.empty() ? "" : "/") + std::to_string(r.solution.gmres.iterations);
    if (mu[1] == 2e-5) it_low = r.solution.gmres.iterations;
  }
  // Omega1 sees only mu1, Omega2 only mu2: both as declared axes and as evaluated fields.
  bool structure = s0.global_axes == std::vector<int>{0} && s1.global_axes == std::vector<int>{1};
  auto a = evaluate_expansion(s0, {0.0, 20.0}), b = evaluate_expansion(s0, {0.0, 2e-5});
  auto d = evaluate_expansion(s1, {0.0, 20.0}), e = evaluate_expansion(s1, {-std::numbers::pi / 4, 20.0});
  structure = structure && a.base == b.base && a.U == b.U && d.base == e.base && d.U == e.U;
  const bool it_ok = it_low >= 0 && it_low <= tol::kCrossflowIters;
  c.pass = conv && it_ok && structure;
  c.detail = std::string("converged ") + (conv ? "yes" : "NO") + ", iterations " + its + " at (0,20)/(-pi/4,20)/(0,2e-5)" +
             (it_ok ? " ok" : " OUT") + "; parameter structure " + (structure ? "ok" : "OUT");
  return c;
}

// ---------------------------------------------------------------------------------------------
// Property suite

namespace props {

inline Vec rnd(std::mt19937& g, Eigen::Index n) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (auto& x : v) x = d(g);
  return v;
}

/// Largest relative deviation of separated operations from their dense counterparts.
inline double septensor_oracle(unsigned seed) {
  std::mt19937 g(seed);
  const std::vector<std::size_t> sz{4, 3, 5};
  const Eigen::Index n = 6;
  auto vec = [&](int rank) {
    SepVector t(sz);
    for (int r = 0; r < rank; ++r) t.push(rnd(g, n), {rnd(g, 4), rnd(g, 3), rnd(g, 5)});
    return t;
  };
  auto mat = [&](int rank) {
    SepMatrix t(sz);
    for (int r = 0; r < rank; ++r) t.push(SpMat(Mat(rnd(g, n * n).reshaped(n, n)).sparseView()), {rnd(g, 4), rnd(g, 3), rnd(g, 5)});
    return t;
  };
  auto dense_mat = [&](const SepMatrix& A, const std::vector<std::size_t>& idx) {
    Mat m = Mat::Zero(A.rank() ? A[0].space.rows() : 0, A.rank() ? A[0].space.cols() : 0);
    for (const auto& t : A.terms()) m += sep::weight_at(t.params, idx) * Mat(t.space);
    return m;
  };
  auto x = vec(3), y = vec(2);
  auto A = mat(2);
  auto s = sep::add(x, sep::scale(y, -2.5));
  auto Ax = sep::apply(A, x);
  auto AT = sep::transpose(A);
  std::vector<int> rows{5, 0, 3};
  auto r = sep::restrict_rows(x, rows);
  double worst = 0;
  double ip = 0;
  auto upd = [&](const Vec& got, const Vec& ref) {
    worst = std::max(worst, (got - ref).norm() / std::max(1e-300, ref.norm()));
  };
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t k = 0; k < 5; ++k) {
        std::vector<std::size_t> idx{i, j, k};
        Vec xi = sep::evaluate_index(x, n, idx), yi = sep::evaluate_index(y, n, idx);
        Mat Ai = dense_mat(A, idx);
        upd(sep::evaluate_index(s, n, idx), xi - 2.5 * yi);
        upd(sep::evaluate_index(Ax, n, idx), Ai * xi);
        upd(dense_mat(AT, idx).reshaped(), Mat(Ai.transpose()).reshaped());
        Vec ri(3);
        for (int q = 0; q < 3; ++q) ri[q] = xi[rows[static_cast<std::size_t>(q)]];
        upd(sep::evaluate_index(r, 3, idx), ri);
        ip += xi.dot(yi);
      }
  // the dense tensor layout check
  auto dense = sep::to_dense(x, n);
  double dn = 0;
  for (double v : dense) dn += v * v;
  worst = std::max(worst, std::abs(std::sqrt(dn) - sep::norm(x)) / std::sqrt(dn));
  worst = std::max(worst, std::abs(sep::inner(x, y) - ip) / std::max(1e-300, std::abs(ip)));
  return worst;
}

/// Full-order superposition of separated local problems against the direct local solver (coarse mesh).
inline double superposition_full(unsigned seed) {
  auto j = cases::stokes_stokes();
  j["parameters"][0]["range"] = {1.0, 5.0, 0.5};
  for (auto& s : j["subdomains"]) s["mesh"]["y"] = {{1.0, 4}};
  Problem pb(parse_case(j));
  std::mt19937 g(seed);
  double worst = 0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& sd = *pb.sd[i];
    const auto& op = pb.op_of(i);
    auto lp = local_problems(sd, op);
    const std::vector<double> mu{2.5};
    const auto nf = static_cast<Eigen::Index>(sd.free().size());
    Vec lambda = rnd(g, static_cast<Eigen::Index>(sd.trace().size()));
    SpMat K = sep::evaluate(lp.lhs, nf, nf, sd.params(), mu);
    SparseDirect lu;
    lu.compute(K);
    Vec rhs = sep::evaluate(lp.data_rhs, nf, sd.params(), mu);
    for (std::size_t t = 0; t < lp.trace_rhs.size(); ++t)
      rhs += lambda[static_cast<Eigen::Index>(t)] * sep::evaluate(lp.trace_rhs[t], nf, sd.params(), mu);
    Vec x = lu.solve(rhs);
    Vec u = sep::evaluate(op.G, sd.ndofs(), sd.params(), mu);
    for (Eigen::Index k = 0; k < nf; ++k) u[sd.free()[static_cast<std::size_t>(k)]] += x[k];
    for (std::size_t t = 0; t < sd.trace().size(); ++t) u[sd.trace()[t]] += lambda[static_cast<Eigen::Index>(t)];
    Vec ref = LocalSolver(sd, op, mu)(lambda);
    worst = std::max(worst, (u - ref).norm() / ref.norm());
  }
  return worst;
}

/// Surrogate expansion against the direct local solve at a grid point, relative to the solved part.
inline double superposition_pgd(unsigned seed, double enrich_tol) {
  auto j = cases::stokes_stokes();
  j["parameters"][0]["range"] = {1.0, 5.0, 0.5};
  for (auto& s : j["subdomains"]) s["mesh"]["y"] = {{1.0, 4}};
  j["pgd"]["enrich_tol"] = enrich_tol;
  Problem pb(parse_case(j));
  const auto& sd = *pb.sd[0];
  const auto& op = pb.op_of(0);
  auto opt = pb.offline_options();
  opt.compress = false;
  auto s = build_surrogate(sd, op, opt);
  std::mt19937 g(seed);
  Vec lambda = rnd(g, static_cast<Eigen::Index>(sd.trace().size()));
  const std::vector<double> mu{3.0};
  auto e = evaluate_expansion(s, mu);
  Vec ref = LocalSolver(sd, op, mu)(lambda);
  Vec lift = sep::evaluate(op.G, sd.ndofs(), sd.params(), mu);
  for (std::size_t t = 0; t < sd.trace().size(); ++t) lift[sd.trace()[t]] += lambda[static_cast<Eigen::Index>(t)];
  return (e.base + e.U * lambda - ref).norm() / (ref - lift).norm();
}

struct Purity {
  long assemblies = 0, factorizations = 0, pgd_solves = 0;
  bool converged = false;
};

/// Work counted inside one online solve of a coarse Stokes-Darcy problem.
inline Purity online_purity() {
  auto j = cases::stokes_darcy_analytic(1);
  j["parameters"][0]["range"] = {0.2, 1.0, 0.2};
  j["parameters"][1]["range"] = {1.0, 2.0, 0.25};
  for (auto& s : j["subdomains"]) {
    s["mesh"]["x"] = {{1.0, 10}};
    s["mesh"]["y"] = {{0.55, 11}};
  }
  j["mu"] = {0.6, 1.25};
  Problem pb(parse_case(j));
  auto a = build_surrogate(*pb.sd[0], pb.op_of(0), pb.offline_options());
  auto b = build_surrogate(*pb.sd[1], pb.op_of(1), pb.offline_options());
  auto r = online_solve({&a, &b}, pb.dec, pb.cfg.mu, pb.gmres_options());
  return {r.solution.work.assemblies, r.solution.work.factorizations, r.solution.work.pgd_solves,
          r.solution.gmres.converged};
}

/// Largest scaled strong residual of the analytic solutions of all cases that have one.
inline double pde_residual(unsigned seed) {
  double w = 0;
  for (const auto& n : {"stokes_stokes", "stokes_darcy_analytic"}) {
    auto r = exact_solution_residuals(builtin_case(n), 200, seed);
    w = std::max({w, r.momentum, r.divergence});
  }
  return w;
}

/// 1D diffusion toy: 5 interior nodes, conductivity 1 + mu on mu in {0, 0.5, 1}; worst relative error.
inline double pgd_toy(double enrich_tol) {
  const int n = 5;
  const double h = 1.0 / (n + 1);
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2 / h);
    if (i > 0) t.emplace_back(i, i - 1, -1 / h);
    if (i + 1 < n) t.emplace_back(i, i + 1, -1 / h);
  }
  SpMat K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  Vec mu(3);
  mu << 0.0, 0.5, 1.0;
  SepMatrix A({3});
  A.push(K, {Vec::Ones(3)});
  A.push(K, {mu});
  SepVector b({3});
  b.push(Vec::Constant(n, h), {Vec::Ones(3)});
  PgdOptions opt;
  opt.enrich_tol = enrich_tol;
  auto x = pgd_solve(PgdOperator(A), b, ConvergenceMask::whole(n), opt);
  double worst = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    Vec ref = Mat((1 + mu[static_cast<Eigen::Index>(j)]) * Mat(K)).lu().solve(Vec::Constant(n, h));
    Vec got = sep::evaluate_index(x, n, {j});
    worst = std::max(worst, (got - ref).norm() / ref.norm());
  }
  return worst;
}

/// Compression of a redundant tensor with decaying content; returns (estimated, dense) relative errors and ranks.
struct CompressionCheck {
  double estimate = 0, dense = 0;
  std::size_t rank_in = 0, rank_out = 0;
};

inline CompressionCheck compression(unsigned seed, double comp_tol) {
  std::mt19937 g(seed);
  const std::vector<std::size_t> sz{7, 6};
  const Eigen::Index n = 9;
  SepVector t(sz);
  // every term appears twice; term r carries weight 0.2^r
  for (int r = 0; r < 6; ++r) {
    Vec s = rnd(g, n), p0(7), p1(6);
    for (int i = 0; i < 7; ++i) p0[i] = std::pow(i / 6.0, r);
    for (int i = 0; i < 6; ++i) p1[i] = std::cos(r * 0.4 * i);
    t.push(0.5 * std::pow(0.2, r) * s, {p0, p1});
    t.push(0.5 * std::pow(0.2, r) * s, {p0, p1});
  }
  LowRankOptions lo;
  lo.tol = comp_tol;
  lo.max_rank = static_cast<int>(t.rank());
  auto c = compress(t, lo);
  CompressionCheck out;
  out.rank_in = t.rank();
  out.rank_out = c.rank();
  out.estimate = sep::norm(sep::add(t, sep::scale(c, -1.0))) / sep::norm(t);
  auto a = sep::to_dense(t, n), b = sep::to_dense(c, n);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  out.dense = std::sqrt(num / den);
  return out;
}

}  // namespace props

/// Criterion 7: the property suite.
inline Check check_properties(AcceptanceContext& ctx) {
  Check c{"7", "property suite"};
  ctx.say("property suite");
  const double enrich = 1e-4, comp = 1e-3;
  const double a = props::septensor_oracle(ctx.seed);
  const double b1 = props::superposition_full(ctx.seed);
  const double b2 = props::superposition_pgd(ctx.seed, enrich);
  const auto pu = props::online_purity();
  const double d = props::pde_residual(ctx.seed);
  const double e = props::pgd_toy(enrich);
  const auto cc = props::compression(ctx.seed, comp);
  const double fe = cc.estimate, fd = cc.dense;
  const bool pa = a <= tol::kDenseOracle, pb1 = b1 <= tol::kSuperposition, pb2 = b2 <= 10 * enrich,
             pc = pu.converged && pu.assemblies == 0 && pu.factorizations == 0 && pu.pgd_solves == 0,
             pd = d <= tol::kPdeResidual, pe = e <= enrich, pf = fe <= comp && fd <= comp && std::abs(fe - fd) <= 1e-8 && cc.rank_out < cc.rank_in;
  c.pass = pa && pb1 && pb2 && pc && pd && pe && pf;
  auto tag = [](bool ok) { return ok ? " ok" : " OUT"; };
  c.detail = "(a) " + sci(a) + tag(pa) + "; (b) " + sci(b1) + tag(pb1) + ", pgd " + sci(b2) + tag(pb2) +
             "; (c) assemblies/factorizations/pgd " + std::to_string(pu.assemblies) + "/" +
             std::to_string(pu.factorizations) + "/" + std::to_string(pu.pgd_solves) + tag(pc) + "; (d) " + sci(d) +
             tag(pd) + "; (e) " + sci(e) + tag(pe) + "; (f) estimate " + sci(fe) + " dense " + sci(fd) + ", rank " +
             std::to_string(cc.rank_in) + " -> " + std::to_string(cc.rank_out) + tag(pf);
  return c;
}

/// Selected groups of criteria; an empty filter runs everything.
inline std::vector<Check> run_acceptance(AcceptanceContext& ctx, const std::vector<std::string>& only = {}) {
  auto want = [&](const std::string& g) { return only.empty() || std::find(only.begin(), only.end(), g) != only.end(); };
  std::vector<Check> all;
  auto add = [&](std::vector<Check> v) { all.insert(all.end(), v.begin(), v.end()); };
  if (want("properties")) add({check_properties(ctx)});
  if (want("stokes_stokes")) add(check_stokes_stokes(ctx));
  if (want("discretizations")) add({check_discretizations(ctx)});
  if (want("stokes_darcy")) add(check_stokes_darcy(ctx));
  if (want("crossflow")) add({check_crossflow(ctx)});
  std::stable_sort(all.begin(), all.end(), [](const Check& a, const Check& b) { return a.id < b.id; });
  return all;
}

inline std::string format_check(const Check& c) {
  std::string tag = c.gated ? (c.pass ? "PASS" : "FAIL") : "INFO";
  return "[" + tag + "] criterion " + c.id + ": " + c.title + " | " + c.detail;
}

}  // namespace ddpgd

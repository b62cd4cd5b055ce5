#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ddpgd/acceptance.hpp"

namespace fs = std::filesystem;
using namespace ddpgd;

namespace {

struct Common {
  std::string case_name = "stokes_stokes";
  std::string config;
  std::string mu;
  std::string out;
  int jobs = 1;
  unsigned seed = 1;
};

void add_common(CLI::App* c, Common& o, const std::string& out_help) {
  c->add_option("--case", o.case_name, "built-in case id")->check(CLI::IsMember(cases::names()));
  c->add_option("--config", o.config, "case configuration file (overrides --case)")->check(CLI::ExistingFile);
  c->add_option("--mu", o.mu, "parameter point, comma separated");
  c->add_option("--out", o.out, out_help);
  c->add_option("--jobs", o.jobs, "offline worker threads")->check(CLI::PositiveNumber);
  c->add_option("--seed", o.seed, "random seed for sampled checks");
}

CaseConfig load(const Common& o) { return o.config.empty() ? builtin_case(o.case_name) : load_case_file(o.config); }

std::vector<double> parse_mu(const std::string& s, const CaseConfig& cfg) {
  if (s.empty()) return cfg.mu;
  std::vector<double> mu;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      mu.push_back(Expression(tok, {})(std::span<const double>()));
    } catch (const ConfigError&) {
      throw ConfigError("--mu: cannot read '" + tok + "'");
    }
  }
  if (mu.size() != cfg.params.axes.size())
    throw ConfigError("--mu: expected " + std::to_string(cfg.params.axes.size()) + " values, got " +
                      std::to_string(mu.size()));
  return mu;
}

void log_line(const std::string& m) { std::cerr << m << std::endl; }

int run_offline(const Common& o) {
  Problem pb(load(o));
  const std::string dir = o.out.empty() ? "archives" : o.out;
  // a fresh build always replaces what is cached
  for (std::size_t i = 0; i < 2; ++i) fs::remove(fs::path(dir) / (SurrogateStore::key_of(pb, i) + ".ddpgd"));
  SurrogateStore store(dir, o.jobs, log_line);
  std::cout << "case " << pb.cfg.name << "\n\n";
  std::cout << std::left << std::setw(10) << "subdomain" << std::setw(9) << "physics" << std::setw(15) << "data problems"
            << std::setw(21) << "unit-trace problems" << std::setw(22) << "modes (uncompressed)" << "time [s]\n";
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& s = store.get(pb, i);
    std::ostringstream modes;
    modes << s.modes_compressed << " (" << s.modes_raw << ")";
    std::cout << std::left << std::setw(10) << s.name << std::setw(9) << to_string(s.physics) << std::setw(15) << 1
              << std::setw(21) << s.traces.size() << std::setw(22) << modes.str() << std::fixed << std::setprecision(1)
              << s.seconds << std::defaultfloat << "\n";
    if (s.unconverged) std::cout << "  warning: " << s.unconverged << " local problems hit the mode limit\n";
  }
  std::cout << "\narchives in " << dir << "\n";
  return 0;
}

int run_online(const Common& o, bool with_fem, bool with_vtk) {
  Problem pb(load(o));
  auto mu = parse_mu(o.mu, pb.cfg);
  const std::string dir = o.out.empty() ? "archives" : o.out;
  SurrogateStore store(dir, o.jobs, log_line);
  auto ev = evaluate_case(pb, store, mu, with_fem, with_fem);
  const auto& g = ev.pgd.solution.gmres;
  std::cout << "case " << pb.cfg.name << " at mu = (";
  for (std::size_t k = 0; k < mu.size(); ++k) std::cout << (k ? ", " : "") << mu[k];
  std::cout << ")\n";
  std::cout << "DD-PGD: " << g.iterations << " GMRES iterations, " << (g.converged ? "converged" : "NOT converged")
            << ", online " << ev.pgd.total_seconds << " s (surrogate evaluation " << ev.pgd.eval_seconds << " s)\n";
  std::cout << "interface mismatch " << ev.mismatch << "\n";
  if (ev.fem)
    std::cout << "DD-FEM: " << ev.fem->gmres.iterations << " GMRES iterations, " << ev.fem_seconds << " s\n";
  std::vector<ErrorRow> rows{{"u"}, {"v"}, {"p"}};
  for (std::size_t c = 0; c < 3; ++c) {
    if (ev.err_pgd) rows[c].pgd = (*ev.err_pgd)[c];
    if (ev.err_fem) rows[c].ddfem = (*ev.err_fem)[c];
    if (ev.err_global) rows[c].global = (*ev.err_global)[c];
  }
  if (ev.err_pgd) {
    std::cout << "relative L2 errors (pgd, ddfem, global):\n";
    for (const auto& r : rows) std::cout << "  " << r.variable << "  " << r.pgd << "  " << r.ddfem << "  " << r.global << "\n";
    write_error_csv((fs::path(dir) / (pb.cfg.name + "_errors.csv")).string(), rows);
  }
  if (with_vtk) {
    auto ex = pb.exact(mu);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& sd = *pb.sd[i];
      const auto& u = ev.pgd.solution.u[i];
      auto path = (fs::path(dir) / (pb.cfg.name + "_" + sd.name() + ".vtk")).string();
      if (ex) {
        Vec err = log_error_field(sd, u, *ex);
        write_vtk(path, sd, u, pb.cfg.name + " " + sd.name(), &err);
      } else if (ev.fem) {
        // without an exact solution the full-order DD solution is the reference
        Vec ref = ev.fem->u[i];
        FieldView f{&sd, &ref};
        Vec err = log_error_field(sd, u, [&](double x, double y, double out[3]) { f.eval(x, y, -1, -1, out); });
        write_vtk(path, sd, u, pb.cfg.name + " " + sd.name(), &err);
      } else {
        write_vtk(path, sd, u, pb.cfg.name + " " + sd.name());
      }
      std::cout << "wrote " << path << "\n";
    }
  }
  return g.converged ? 0 : 1;
}

int run_validate(const Common& o, bool all_cases) {
  std::vector<std::string> groups{"properties"};
  auto add = [&](std::initializer_list<const char*> g) { groups.insert(groups.end(), g.begin(), g.end()); };
  if (all_cases) {
    add({"stokes_stokes", "discretizations", "stokes_darcy", "crossflow"});
  } else if (o.case_name == "stokes_stokes") {
    add({"stokes_stokes"});
  } else if (o.case_name == "stokes_darcy_analytic") {
    add({"stokes_darcy", "discretizations"});
  } else if (o.case_name == "stokes_darcy_q2") {
    add({"discretizations"});
  } else if (o.case_name == "crossflow") {
    add({"crossflow"});
  } else {
    std::cout << "case " << o.case_name << " has no gated criteria; running the property suite only\n";
  }
  AcceptanceContext ctx{SurrogateStore(o.out.empty() ? "archives" : o.out, o.jobs, log_line), log_line, o.seed, {}};
  auto checks = run_acceptance(ctx, groups);
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << format_check(c) << "\n";
    if (c.gated && !c.pass) ++failed;
  }
  std::cout << (failed ? std::to_string(failed) + " gated checks failed" : std::string("all gated checks passed")) << "\n";
  return failed ? 1 : 0;
}

int run_export(const Common& o, bool all_cases) {
  const std::string dir = o.out.empty() ? "configs" : o.out;
  fs::create_directories(dir);
  std::vector<std::string> names = all_cases ? cases::names() : std::vector<std::string>{o.case_name};
  for (const auto& n : names) {
    auto path = fs::path(dir) / (n + ".json");
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    f << builtin_case_json(n).dump(2) << "\n";
    std::cout << "wrote " << path.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric Stokes and Stokes-Darcy flows by overlapping domain decomposition of PGD surrogates"};
  app.require_subcommand(1);
  Common o;
  bool no_fem = false, no_vtk = false, all_cases = false;

  auto* off = app.add_subcommand("offline", "build and store the local surrogates of a case");
  add_common(off, o, "archive directory (default: archives)");
  auto* on = app.add_subcommand("online", "couple stored surrogates at a parameter point");
  add_common(on, o, "archive and output directory (default: archives)");
  on->add_flag("--no-fem", no_fem, "skip the full-order reference solves");
  on->add_flag("--no-vtk", no_vtk, "skip VTK output");
  auto* val = app.add_subcommand("validate", "run the gated acceptance checks");
  add_common(val, o, "archive cache directory (default: archives)");
  val->add_flag("--all", all_cases, "check every case");
  auto* exp = app.add_subcommand("export", "write the built-in case configurations as JSON");
  add_common(exp, o, "output directory (default: configs)");
  exp->add_flag("--all", all_cases, "export every built-in case");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*off) return run_offline(o);
    if (*on) return run_online(o, !no_fem, !no_vtk);
    if (*val) return run_validate(o, all_cases);
    if (*exp) return run_export(o, all_cases);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const ArchiveError& e) {
    std::cerr << "archive error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

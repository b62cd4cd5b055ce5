#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ddpgd/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria: one PASS/FAIL line per criterion"};
  std::string cache;
  std::vector<std::string> only;
  int jobs = 1;
  unsigned seed = 1;
  bool quiet = false;
  bool report_only = false;
  std::string output;
  app.add_option("--cache", cache, "directory for cached surrogate archives");
  app.add_option("--only", only, "criterion groups: properties, stokes_stokes, discretizations, stokes_darcy, crossflow");
  app.add_option("--jobs", jobs, "offline worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed for sampled checks");
  app.add_flag("--quiet", quiet, "suppress progress messages");
  app.add_flag("--report-only", report_only, "exit 0 once every check has run, whatever its outcome");
  app.add_option("--output", output, "also write the result lines to this file");
  CLI11_PARSE(app, argc, argv);

  ddpgd::LogFn log;
  if (!quiet) log = [](const std::string& m) { std::cerr << m << std::endl; };
  ddpgd::AcceptanceContext ctx{ddpgd::SurrogateStore(cache, jobs, log), log, seed, {}};
  std::vector<ddpgd::Check> checks;
  try {
    checks = ddpgd::run_acceptance(ctx, only);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance run aborted: " << e.what() << std::endl;
    return 2;
  }
  int failed = 0;
  std::ostringstream lines;
  for (const auto& c : checks) {
    lines << ddpgd::format_check(c) << "\n";
    if (c.gated && !c.pass) ++failed;
  }
  lines << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  std::cout << lines.str() << std::flush;
  if (!output.empty()) std::ofstream(output) << lines.str();
  return failed && !report_only ? 1 : 0;
}

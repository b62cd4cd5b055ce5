#pragma once

#include "ddpgd/pipeline.hpp"

namespace ddpgd::coarse {

/// Stokes-Stokes case on a coarse mesh and a 9-point parameter grid.
inline CaseConfig stokes_stokes() {
  auto j = cases::stokes_stokes();
  j["parameters"][0]["range"] = {1.0, 5.0, 0.5};
  for (auto& s : j["subdomains"]) s["mesh"]["y"] = {{1.0, 4}};
  j["reference"]["mesh"]["y"] = {{1.0, 4}};
  return parse_case(j);
}

/// Stokes-Darcy analytic case on a coarse mesh and a 5 x 5 parameter grid.
inline CaseConfig stokes_darcy(int degree = 1) {
  auto j = cases::stokes_darcy_analytic(degree);
  j["parameters"][0]["range"] = {0.2, 1.0, 0.2};
  j["parameters"][1]["range"] = {1.0, 2.0, 0.25};
  j["subdomains"][0]["mesh"]["x"] = {{1.0, 10}};
  j["subdomains"][0]["mesh"]["y"] = {{0.55, 11}};
  j["subdomains"][1]["mesh"]["x"] = {{1.0, 10}};
  j["subdomains"][1]["mesh"]["y"] = {{0.55, 11}};
  j["mu"] = {0.6, 1.25};
  return parse_case(j);
}

}  // namespace ddpgd::coarse

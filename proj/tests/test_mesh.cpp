#include <gtest/gtest.h>

#include "ddpgd/cases.hpp"
#include "ddpgd/online.hpp"

using namespace ddpgd;

namespace {

struct Built {
  CaseConfig cfg;
  std::unique_ptr<Subdomain> a, b;
};

Built build(const nlohmann::json& j) {
  Built out{parse_case(j), nullptr, nullptr};
  out.a = std::make_unique<Subdomain>(out.cfg.subdomains[0], out.cfg.params);
  out.b = std::make_unique<Subdomain>(out.cfg.subdomains[1], out.cfg.params);
  return out;
}

int count_kind(const Subdomain& s, int kind) {
  int n = 0;
  for (int d : s.trace()) n += s.dof_kind(d) == kind;
  return n;
}

}  // namespace

TEST(Mesh, TwoByTwoQ1HasNineNodes) {
  auto m = std::make_shared<TensorMesh>(TensorMesh::rectangle(0, 1, 2, 0, 1, 2));
  LagrangeSpace q1(m, 1), q2(m, 2);
  EXPECT_EQ(q1.size(), 9);
  EXPECT_EQ(q2.size(), 25);
  // Lexicographic numbering, x fastest.
  EXPECT_EQ(q1.node(1)[0], 0.5);
  EXPECT_EQ(q1.node(3)[1], 0.5);
}

TEST(Mesh, RejectsNonPositiveCounts) {
  EXPECT_THROW(TensorMesh::uniform(0, 1, 0), ConfigError);
  EXPECT_THROW(TensorMesh({0.0, 0.0}, {0.0, 1.0}), ConfigError);
}

TEST(Mesh, StokesStokesSpacingAndInterfaceCounts) {
  auto s = build(cases::stokes_stokes());
  EXPECT_NEAR(s.a->mesh().min_spacing(), 0.05, 1e-14);
  for (const auto* sd : {s.a.get(), s.b.get()}) {
    EXPECT_EQ(count_kind(*sd, 0), 40);
    EXPECT_EQ(count_kind(*sd, 1), 40);
    EXPECT_EQ(count_kind(*sd, 2), 0);
  }
}

TEST(Mesh, StokesDarcyInterfaceCounts) {
  auto q1 = build(cases::stokes_darcy_analytic(1));
  EXPECT_EQ(count_kind(*q1.a, 0), 40);
  EXPECT_EQ(q1.a->trace().size(), 80u);
  EXPECT_EQ(q1.b->trace().size(), 41u);
  EXPECT_EQ(count_kind(*q1.b, 2), 41);
  auto q2 = build(cases::stokes_darcy_analytic(2));
  EXPECT_EQ(count_kind(*q2.a, 0), 80);
  EXPECT_EQ(q2.a->trace().size(), 160u);
}

TEST(Mesh, CrossflowFullCounts) {
  auto s = build(cases::crossflow(1));
  EXPECT_EQ(s.a->vspace()->size(), 14178);
  EXPECT_EQ(s.b->vspace()->size(), 3649);
  EXPECT_EQ(s.a->trace().size(), 2u * 87u);
  EXPECT_EQ(s.b->trace().size(), 89u);
  // Overlap width is a quarter of the mesh size.
  const auto& ys = s.a->mesh().ys();
  EXPECT_NEAR(ys[1] - ys[0], 1.5625e-2 / 4, 1e-15);
}

TEST(Mesh, OverlapNodesCoincide) {
  auto s = build(cases::stokes_stokes());
  int matched = 0;
  for (int n = 0; n < s.b->vspace()->size(); ++n) {
    auto xy = s.b->vspace()->node(n);
    if (xy[0] > 0.55 + 1e-12) continue;
    EXPECT_GE(s.a->vspace()->find_node(xy[0], xy[1]), 0);
    ++matched;
  }
  EXPECT_EQ(matched, 5 * 41);
  EXPECT_NO_THROW(decompose(*s.a, *s.b));
}

TEST(Mesh, ZeroWidthOverlapRejected) {
  auto j = cases::stokes_stokes();
  for (int k = 0; k < 2; ++k) {
    double x0 = k == 0 ? 0.0 : 0.5, x1 = k == 0 ? 0.5 : 1.0, xi = 0.5;
    auto& s = j["subdomains"][k];
    s["mesh"]["x0"] = x0;
    s["mesh"]["x"] = {{x1 - x0, 10}};
    s["boundary"][0]["box"] = {xi, xi, 0, 1};
    s["boundary"][1]["box"] = {x0, x1, 0, 0};
  }
  auto s = build(j);
  EXPECT_THROW(decompose(*s.a, *s.b), ConfigError);
}

TEST(Mesh, MismatchedOverlapMeshRejected) {
  auto j = cases::stokes_stokes();
  j["subdomains"][1]["mesh"]["y"] = {{1.0, 21}};
  auto s = build(j);
  EXPECT_THROW(decompose(*s.a, *s.b), ConfigError);
}

TEST(Mesh, RestrictionReproducesCoincidentValues) {
  auto s = build(cases::stokes_stokes());
  auto d = decompose(*s.a, *s.b);
  Vec ub(s.b->ndofs());
  for (int i = 0; i < s.b->ndofs(); ++i) {
    auto xy = s.b->dof_coords(i);
    ub[i] = 1 + xy[0] * xy[0] - 2 * xy[1] + s.b->dof_kind(i);
  }
  Vec t = d.R[0] * ub;
  for (std::size_t r = 0; r < s.a->trace().size(); ++r) {
    int dof = s.a->trace()[r];
    auto xy = s.a->dof_coords(dof);
    EXPECT_NEAR(t[static_cast<Eigen::Index>(r)], 1 + xy[0] * xy[0] - 2 * xy[1] + s.a->dof_kind(dof), 1e-13);
  }
}

TEST(Mesh, InterpolatedRestrictionIsExactForBilinear) {
  // Q2 trace points read from a Q1 Darcy field: bilinear data are reproduced.
  auto s = build(cases::stokes_darcy_analytic(2));
  auto d = decompose(*s.a, *s.b);
  Vec ub(s.b->ndofs());
  for (int i = 0; i < s.b->ndofs(); ++i) {
    auto xy = s.b->dof_coords(i);
    ub[i] = 2 + xy[0] - 3 * xy[1] + xy[0] * xy[1];
  }
  Vec t = d.R[0] * ub;
  for (std::size_t r = 0; r < s.a->trace().size(); ++r) {
    auto xy = s.a->dof_coords(s.a->trace()[r]);
    EXPECT_NEAR(t[static_cast<Eigen::Index>(r)], 2 + xy[0] - 3 * xy[1] + xy[0] * xy[1], 1e-12);
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gbsing/cli/scene.hpp"

using namespace gbs;
using namespace gbs::cli;

namespace {

std::vector<SceneIssue> issues_of(std::string_view text) {
  try {
    parse_scene(text);
  } catch (const SceneError& e) {
    return e.issues();
  }
  return {};
}

}  // namespace

TEST(Scene, MinimalBlaschkeSceneGetsDefaults) {
  const Scene s = parse_scene("[blaschke]\nx = x\ny = y\nz = 2*z\n");
  EXPECT_EQ(s.topology, Topology::Sphere);
  EXPECT_EQ(s.kind, SceneKind::Surface);
  EXPECT_EQ(s.mode, SurfaceMode::Blaschke);
  EXPECT_FALSE(s.blaschke_metric);
  ASSERT_EQ(s.surface.size(), 2u);
  EXPECT_EQ(s.surface[1][2].str(), s.surface[0][2].str());
  EXPECT_EQ(s.grid, 32);
  EXPECT_EQ(s.jet_order, 6);
  EXPECT_DOUBLE_EQ(s.tol_global, 1e-2);
  EXPECT_DOUBLE_EQ(s.tol_triangle, 1e-6);
  EXPECT_TRUE(s.triangles.empty());
}

TEST(Scene, VectorFieldMetricDefaults) {
  const Scene torus = parse_scene("atlas = torus\n[vectorfield]\nX1 = sin(u)\nX2 = cos(v)\n");
  EXPECT_EQ(torus.metric[0][0].str(), "1");
  EXPECT_EQ(torus.metric[0][1].str(), "0");
  const Scene sphere = parse_scene("[vectorfield]\nX1 = u\nX2 = v\n");
  const auto vars = Atlas::sphere().variables(0, Point2{0.3, -0.2});
  EXPECT_NEAR(sphere.metric[1][2].eval(vars), 4 / std::pow(1 + 0.09 + 0.04, 2), 1e-15);
}

TEST(Scene, DefsAndChartOverrides) {
  const Scene s = parse_scene(
      "atlas = sphere\n"
      "[defs]\n"
      "r = 1 + 0.1*z^2\n"
      "[surface]\n"
      "x = r*x\n"
      "y = r*y\n"
      "z = r*z\n"
      "z@1 = z\n");
  EXPECT_EQ(s.surface[0][0].str(), parse_expr("(1 + 0.1*z^2)*x").str());
  EXPECT_EQ(s.surface[0][2].str(), parse_expr("(1 + 0.1*z^2)*z").str());
  EXPECT_EQ(s.surface[1][2].str(), "z");
}

TEST(Scene, RoundTripOfCuratedScenes) {
  for (const auto& entry : std::filesystem::directory_iterator(GBSING_SCENE_DIR)) {
    if (entry.path().extension() != ".scene") continue;
    SCOPED_TRACE(entry.path().filename().string());
    const Scene a = load_scene(entry.path().string());
    const std::string text = serialize_scene(a);
    const Scene b = parse_scene(text);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(serialize_scene(b), text);
  }
}

TEST(Scene, RoundTripKeepsOverridesTrianglesAndOutputs) {
  const Scene a = parse_scene(
      "name = mixed\n"
      "atlas = window(-1.5, 2, -0.25, 1e-1)\n"
      "grid = 48\n"
      "tol_triangle = 3.3e-7\n"
      "[bundle]\n"
      "phi11 = 1 + u\nphi12 = 0.1\nphi21 = -v\nphi22 = exp(u*v)\n"
      "g11 = 2\n"
      "tangent = false\n"
      "[connection]\nbeta_u = 0.3*v\nbeta_v = 0.1\n"
      "[triangle]\nchart = 0\na = 0.1, 0.2\nb = 0.30000000000000004, 0.2\nc = 0.2, 0.05\n"
      "[triangle]\na = -1, -0.2\nb = -0.5, -0.2\nc = -0.7, 0\n"
      "[output]\nreport = out/r.json\nsvg = out/f.svg\n");
  const Scene b = parse_scene(serialize_scene(a));
  EXPECT_TRUE(a == b);
  EXPECT_EQ(b.triangles.size(), 2u);
  EXPECT_EQ(b.triangles[0].corners[1].u, 0.30000000000000004);
  EXPECT_EQ(b.window[3], 0.1);
  EXPECT_EQ(b.svg_path, "out/f.svg");

  const Scene sphere = parse_scene("[vectorfield]\nX1 = u\nX2 = v\nX2@1 = -v\n");
  const std::string text = serialize_scene(sphere);
  EXPECT_NE(text.find("X2@0 = v"), std::string::npos);
  EXPECT_NE(text.find("X2@1 = " + parse_expr("-v").str()), std::string::npos);
  EXPECT_NE(text.find("\nX1 = u"), std::string::npos);
  EXPECT_TRUE(parse_scene(text) == sphere);
}

TEST(Scene, UnknownFunctionIsNamedWithItsColumn) {
  const auto issues = issues_of("atlas = torus\n[vectorfield]\nX1 = 2*frob(u)\nX2 = 1\n");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].line, 3);
  EXPECT_NE(issues[0].message.find("frob"), std::string::npos);
  EXPECT_EQ(issues[0].column, 8);  // "X1 = 2*frob(u)": the token starts at column 8
}

TEST(Scene, EveryErrorIsReported) {
  const std::string text =
      "atlas = torus\n"
      "grid = many\n"
      "[vectorfield]\n"
      "X1 = sin(u\n"
      "X3 = 1\n"
      "[frobnicate]\n"
      "[bundle]\n";
  const auto issues = issues_of(text);
  ASSERT_GE(issues.size(), 5u);
  std::vector<int> lines;
  for (const auto& i : issues) lines.push_back(i.line);
  for (int line : {2, 4, 5, 6, 7}) EXPECT_NE(std::find(lines.begin(), lines.end(), line), lines.end()) << line;
  // X2 is missing too, reported at the section header
  EXPECT_NE(std::find(lines.begin(), lines.end(), 3), lines.end());
  try {
    parse_scene(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
  }
}

TEST(Scene, ValidationRules) {
  EXPECT_FALSE(issues_of("atlas = torus\n[blaschke]\nx = cos(u)\ny = sin(u)\nz = v\n").empty());
  EXPECT_FALSE(issues_of("atlas = torus\n[vectorfield]\nX1 = x\nX2 = 1\n").empty());
  EXPECT_FALSE(issues_of("[blaschke]\nx = x\ny = y\nz = z\n[connection]\nambient_x = y\n").empty());
  EXPECT_FALSE(issues_of("atlas = torus\n[bundle]\nphi11 = 1\nphi12 = 0\nphi21 = 0\nphi22 = 1\n"
                         "connection = levi-civita\n")
                   .empty());
  EXPECT_FALSE(issues_of("atlas = torus\n[vectorfield]\nX1 = 1\nX2 = 1\nX1@1 = 2\n").empty());
  EXPECT_FALSE(issues_of("[vectorfield]\nX1 = 1\nX2 = 1\n[surface]\nx = x\ny = y\nz = z\n").empty());
  EXPECT_FALSE(issues_of("# nothing\n").empty());
  EXPECT_FALSE(issues_of("atlas = window(1, 0, 0, 1)\n[bundle]\nphi11 = 1\nphi12 = 0\nphi21 = 0\nphi22 = 1\n")
                   .empty());
  EXPECT_TRUE(issues_of("atlas = torus\n[bundle]\nphi11 = 1\nphi12 = 0\nphi21 = 0\nphi22 = 1\n"
                        "[connection]\nbeta_u = sin(v)\n")
                  .empty());
}

TEST(Scene, BuildModelMatchesKind) {
  const SceneModel field = build_model(parse_scene("atlas = torus\n[vectorfield]\nX1 = sin(u)\nX2 = sin(v)\n"));
  EXPECT_TRUE(field.field.has_value());
  EXPECT_FALSE(field.perturbed);
  const BundleHom h = field.bundle(4);
  // φ = DX on the flat torus: λ = det DX = cos u cos v
  EXPECT_NEAR(lambda(h, 0, {0.4, 1.1}, 0).value(), std::cos(0.4) * std::cos(1.1), 1e-12);

  const SceneModel bl = build_model(parse_scene("[blaschke]\nx = x\ny = y\nz = z\n"));
  ASSERT_TRUE(bl.blaschke != nullptr);
  EXPECT_FALSE(bl.source);

  const SceneModel pert = build_model(
      parse_scene("[surface]\nx = x\ny = y\nz = 2*z\n[connection]\nambient_x = y\nambient_y = 0\nambient_z = 0\n"));
  EXPECT_TRUE(pert.perturbed);
  EXPECT_TRUE(pert.surface.has_value());
}

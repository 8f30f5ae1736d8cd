#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "gbsing/cli/app.hpp"
#include "gbsing/cli/report.hpp"
#include "gbsing/cli/svg.hpp"

using namespace gbs;
using namespace gbs::cli;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gbsing");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string scene(const char* name) { return std::string(GBSING_SCENE_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gbsing_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_scene(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

}  // namespace

TEST(Cli, VerifyEllipsoidPasses) {
  const CliRun r = run_cli({"verify", "--scene", scene("ellipsoid.scene")});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["integers"]["a3_plus"], 0);
  EXPECT_GT(j["front"]["min_front_det"].get<double>(), 0.01);
}

TEST(Cli, DegeneratePointIsAnInputError) {
  const CliRun r = run_cli({"verify", "--scene", scene("degenerate.scene")});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find("DegeneratePoint"), std::string::npos) << r.err;
  EXPECT_TRUE(std::regex_search(r.err, std::regex(R"(chart 0 at \(\S+, \S+\))"))) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, SceneErrorsCarryLocations) {
  const fs::path p = write_scene("broken.scene", "atlas = torus\n[vectorfield]\nX1 = sin(u))\nX2 = cosh(v)\n");
  const CliRun r = run_cli({"trace", "--scene", p.string()});
  EXPECT_EQ(r.code, kExitError);
  EXPECT_NE(r.err.find(p.string() + ":3:"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find(p.string() + ":4:6: "), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("cosh"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, kExitError);
  EXPECT_EQ(run_cli({"verify"}).code, kExitError);
  EXPECT_EQ(run_cli({"verify", "--scene", scene("no_such.scene")}).code, kExitError);
  EXPECT_EQ(run_cli({"trace", "--scene", scene("whitney_cusp.scene"), "--grid", "2"}).code, kExitError);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}

TEST(Cli, FailedIdentityExitsOne) {
  // the triangle residual is at rounding level, which no tolerance of 1e-30 admits
  std::string text = slurp(scene("whitney_cusp.scene"));
  text.insert(text.find("[bundle]"), "tol_triangle = 1e-30\n");
  const fs::path p = write_scene("strict.scene", text);
  const CliRun r = run_cli({"verify", "--scene", p.string()});
  EXPECT_EQ(r.code, kExitFailed) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_EQ(j["rows"][0]["name"], "triangle_0");
}

TEST(Cli, TraceReportsPerPointData) {
  const fs::path report = scratch("trace.json");
  const CliRun r = run_cli({"trace", "--scene", scene("whitney_cusp.scene"), "--report", report.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  const Json j = Json::parse(slurp(report));
  ASSERT_EQ(j["curves"].size(), 1u);
  const Json& c = j["curves"][0];
  EXPECT_FALSE(c["closed"].get<bool>());
  for (const Json& p : c["points"]) {
    // Σ is the parabola v = 3u²
    EXPECT_NEAR(p["v"].get<double>(), 3 * std::pow(p["u"].get<double>(), 2), 1e-9);
    EXPECT_LE(std::abs(p["lambda"].get<double>()), 1e-9);
    EXPECT_TRUE(p.contains("psi"));
    EXPECT_TRUE(p.contains("kappa_s"));
  }
  ASSERT_EQ(c["a3"].size(), 1u);
  EXPECT_NEAR(c["a3"][0]["at"]["u"].get<double>(), 0.0, 1e-9);
  EXPECT_EQ(c["a3"][0]["sign"], 1);
}

TEST(Cli, RenderIsByteIdenticalAcrossRuns) {
  const fs::path a = scratch("a.svg"), b = scratch("b.svg");
  ASSERT_EQ(run_cli({"render", "--scene", scene("whitney_cusp.scene"), "--out", a.string()}).code, kExitOk);
  ASSERT_EQ(run_cli({"render", "--scene", scene("whitney_cusp.scene"), "--out", b.string()}).code, kExitOk);
  const std::string sa = slurp(a);
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, slurp(b));
}

TEST(Cli, WhitneyCuspFigureHasOneMarkerAtTheOrigin) {
  const fs::path p = scratch("cusp.svg");
  ASSERT_EQ(run_cli({"render", "--scene", scene("whitney_cusp.scene"), "--out", p.string()}).code, kExitOk);
  const std::string svg = slurp(p);
  // window [−0.93, 1.07] × [−0.96, 1.04] on a 320 px panel at (24, 52)
  const double x0 = 24 + 0.93 / 2.0 * 320, y0 = 52 + 1.04 / 2.0 * 320;
  std::smatch m;
  std::regex marker(R"(<polygon points="([-\d.]+),([-\d.]+) )");
  std::vector<std::pair<double, double>> apex;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), marker); it != std::sregex_iterator(); ++it) {
    apex.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  }
  ASSERT_EQ(apex.size(), 3u);  // the A₃ point plus the two legend symbols
  EXPECT_NEAR(apex[0].first, x0, 0.01);
  EXPECT_NEAR(apex[0].second, y0 - 6, 0.01);  // apex up for a positive point
  EXPECT_EQ(std::count(svg.begin(), svg.end(), '\n') > 10, true);
  EXPECT_NE(svg.find("S₊ = 1, S₋ = 0"), std::string::npos);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
}

TEST(Cli, EmptySingularSetIsOneFillWithTrivialLegend) {
  Figure f;
  f.title = "plain";
  f.atlas = Atlas::torus();
  f.lambda = [](const ChartPoint&) { return std::optional<double>(1.0); };
  f.legend = {identity_legend("S", true, true, 0, 0, 0, 0, true)};
  const std::string svg = render_svg(f);
  EXPECT_NE(svg.find(">0 = 0<"), std::string::npos);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
  std::regex fill(R"re(<rect x="[\d.]+" y="[\d.]+" width="[\d.]+" height="[\d.]+" fill="(#[0-9a-f]+)"/>)re");
  std::set<std::string> colors;
  int rects = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), fill); it != std::sregex_iterator(); ++it) {
    colors.insert((*it)[1]);
    ++rects;
  }
  // one merged run per raster row, plus the legend swatches
  EXPECT_EQ(rects, f.raster + 1);
  EXPECT_EQ(colors.size(), 2u);
  EXPECT_EQ(svg, render_svg(f));
}

TEST(Cli, LegendForms) {
  EXPECT_EQ(identity_legend("I", true, true, 2, -2, 8, 12, false), "2χ(M⁻) = I₊ − I₋ : -4 = 8 − 12");
  EXPECT_EQ(identity_legend("S", false, true, 1, 1, 2, 0, false), "χ(M⁺) − χ(M⁻) + S₊ − S₋ = 1 − 1 + 2 − 0 = 2");
  EXPECT_EQ(identity_legend("S", true, false, 0, 0, 1, 0, false), "S₊ = 1, S₋ = 0");
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gbsing/atlas.hpp"
#include "gbsing/error.hpp"

using namespace gbs;

namespace {
constexpr double kPi = std::numbers::pi;

double round_area(Point2 p) {
  const double r2 = p.u * p.u + p.v * p.v;
  return 4.0 / ((1.0 + r2) * (1.0 + r2));
}

double band_bump(double z) {
  const double s = z / 0.2;
  return std::abs(s) >= 1.0 ? 0.0 : std::pow(1.0 - s * s, 6);
}

// ∫_{-1}^{1} (1 − s²)^n ds
double bump_moment(int n) {
  return std::pow(2.0, 2 * n + 1) * std::pow(std::tgamma(n + 1.0), 2) / std::tgamma(2.0 * n + 2.0);
}
}  // namespace

TEST(Atlas, SphereTransitions) {
  const Atlas a = Atlas::sphere();
  auto t1 = a.transition(0, 1, {1, 0});
  ASSERT_TRUE(t1);
  EXPECT_DOUBLE_EQ(t1->u, 1);
  EXPECT_DOUBLE_EQ(t1->v, 0);
  auto t2 = a.transition(0, 1, {2, 0});
  ASSERT_TRUE(t2);
  EXPECT_DOUBLE_EQ(t2->u, 0.5);
  EXPECT_FALSE(a.transition(0, 1, {0.0, 0.0}));

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> rad(std::sqrt(0.5), std::sqrt(2.0)), ang(0, 2 * kPi);
  for (int k = 0; k < 200; ++k) {
    const double r = rad(rng), th = ang(rng);
    const Point2 p{r * std::cos(th), r * std::sin(th)};
    const auto q = a.transition(0, 1, p);
    ASSERT_TRUE(q);
    const auto back = a.transition(1, 0, *q);
    ASSERT_TRUE(back);
    EXPECT_NEAR(back->u, p.u, 1e-12);
    EXPECT_NEAR(back->v, p.v, 1e-12);
    const auto J = a.transition_jacobian(0, 1, p);
    EXPECT_GT(J[0] * J[3] - J[1] * J[2], 0.0);
    // both charts describe the same point of S²
    const auto x0 = a.variables(0, p);
    const auto x1 = a.variables(1, *q);
    for (int i = 2; i < 5; ++i) EXPECT_NEAR(x0[i], x1[i], 1e-12);
    // partition of unity
    EXPECT_NEAR(a.weight(0, p) + a.weight(1, *q), 1.0, 1e-12);
  }
}

TEST(Atlas, TransitionExprMatchesMap) {
  const Atlas a = Atlas::sphere();
  const auto [eu, ev] = a.transition_expr(0, 1);
  const Point2 p{0.9, -0.7};
  const auto q = a.transition(0, 1, p);
  EXPECT_NEAR(eu.eval(p.u, p.v), q->u, 1e-15);
  EXPECT_NEAR(ev.eval(p.u, p.v), q->v, 1e-15);
}

TEST(Atlas, TorusNormalize) {
  const Atlas a = Atlas::torus();
  const Point2 p = a.normalize(0, {2 * kPi + 0.1, 0});
  EXPECT_NEAR(p.u, 0.1, 1e-12);
  EXPECT_NEAR(a.normalize(0, {-0.5, 4 * kPi + 1}).v, 1.0, 1e-12);
  EXPECT_EQ(a.euler_characteristic(), 0);
  EXPECT_EQ(Atlas::sphere().euler_characteristic(), 2);
}

TEST(Atlas, SphereArea) {
  const Atlas a = Atlas::sphere();
  const auto r = integrate(a, [](int, Point2 p) { return round_area(p); });
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 4 * kPi, 1e-6);
}

TEST(Atlas, TorusAreaAndHalfMask) {
  const Atlas a = Atlas::torus();
  Density one = [](int, Point2) { return 1.0; };
  EXPECT_NEAR(integrate(a, one).value, 4 * kPi * kPi, 1e-9);
  LevelSet half = [](int, Point2 p) { return std::array<double, 3>{p.u - kPi, 1.0, 0.0}; };
  EXPECT_NEAR(integrate(a, one, &half).value, 2 * kPi * kPi, 1e-6);
}

TEST(Atlas, AdditivityOverComplementaryMasks) {
  const Atlas a = Atlas::torus();
  Density f = [](int, Point2 p) { return 2.0 + std::sin(p.u) * std::cos(2 * p.v); };
  LevelSet disk = [](int, Point2 p) {
    const double du = p.u - 3.0, dv = p.v - 2.5;
    return std::array<double, 3>{du * du + dv * dv - 1.7, 2 * du, 2 * dv};
  };
  LevelSet outside = [&](int c, Point2 p) {
    auto g = disk(c, p);
    return std::array<double, 3>{-g[0], -g[1], -g[2]};
  };
  const double total = integrate_fixed(a, f, nullptr, 64);
  const double in = integrate_fixed(a, f, &disk, 64);
  const double out = integrate_fixed(a, f, &outside, 64);
  EXPECT_NEAR(in + out, total, 1e-9);
}

TEST(Atlas, MaskedDiskArea) {
  const Atlas a = Atlas::torus();
  LevelSet disk = [](int, Point2 p) {
    const double du = p.u - 3.0, dv = p.v - 2.5;
    return std::array<double, 3>{du * du + dv * dv - 1.7, 2 * du, 2 * dv};
  };
  const auto r = integrate(a, [](int, Point2) { return 1.0; }, &disk);
  EXPECT_NEAR(r.value, kPi * 1.7, 1e-8);
}

TEST(Atlas, ExactFormIntegratesToZero) {
  // d(f du + g dv) with periodic f, g
  const Atlas a = Atlas::torus();
  Density d = [](int, Point2 p) {
    const double gu = std::cos(p.u) * std::exp(std::sin(p.v));             // ∂u g, g = sin u e^{sin v}
    const double fv = -std::sin(p.v + 2 * p.u) + 3 * std::cos(3 * p.v);  // ∂v f, f = cos(v+2u) + sin 3v
    return gu - fv;
  };
  EXPECT_NEAR(integrate(a, d).value, 0.0, 1e-6);
}

TEST(Atlas, ChartIndependentAttribution) {
  // A band density around the equator: integrate with the partition of unity,
  // and entirely in either chart; Archimedes gives the exact value.
  const Atlas a = Atlas::sphere();
  Density band = [&](int chart, Point2 p) {
    const double z = a.variables(chart, p)[4];
    return band_bump(z) * round_area(p);
  };
  const double exact = 2 * kPi * 0.2 * bump_moment(6);
  const auto pou = integrate(a, band);
  EXPECT_NEAR(pou.value, exact, 1e-6);
  const Atlas w = Atlas::window(-1.3, 1.3, -1.3, 1.3);
  Density in0 = [&](int, Point2 p) { return band(0, p); };
  Density in1 = [&](int, Point2 p) { return band(1, p); };
  const double v0 = integrate_fixed(w, in0, nullptr, 256);
  const double v1 = integrate_fixed(w, in1, nullptr, 256);
  EXPECT_NEAR(v0, v1, 1e-8);
  EXPECT_NEAR(v0, exact, 1e-6);
}

TEST(Atlas, NoConvergenceReportsBothValues) {
  const Atlas a = Atlas::window(0, 1, 0, 1);
  // an unresolved oscillation cannot settle between 16 and 32 cells
  IntegrateOptions o;
  o.max_cells = 32;
  try {
    integrate(a, [](int, Point2 p) { return std::sin(300 * p.u * p.v); }, nullptr, o);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
    EXPECT_NE(std::string(e.what()).find("gap"), std::string::npos);
  }
}

TEST(Atlas, GridSample) {
  const auto g = sample_grid(Atlas::torus(), 0, 16);
  EXPECT_EQ(g.nodes.size(), 17u * 17u);
  EXPECT_THROW(sample_grid(Atlas::torus(), 0, 8), Error);
}

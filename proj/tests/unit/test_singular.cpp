#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gbsing/error.hpp"
#include "gbsing/fields3d.hpp"
#include "gbsing/singular.hpp"
#include "gbsing/topology.hpp"
#include "helpers.hpp"

using namespace gbs;
using gbs::testing::expr_source;
using gbs::testing::synthetic_lambda;

namespace {

constexpr double kPi = std::numbers::pi;

// Whitney cusp X(u, v) = (u³ − uv, v) as φ = dX into the flat plane.
BundleHom whitney(const Atlas& window) {
  return BundleHom(window, expr_source(window, {"1", "0", "1"}, {"3*u^2 - v", "-u", "0", "1"}));
}

Atlas cusp_window() { return Atlas::window(-0.93, 1.07, -0.96, 1.04); }

/// Angular width of a set of planar directions seen from the origin.
double angular_width(std::vector<double> ang) {
  if (ang.empty()) return 0.0;
  std::sort(ang.begin(), ang.end());
  double gap = ang.front() + 2 * kPi - ang.back();
  for (std::size_t i = 1; i < ang.size(); ++i) gap = std::max(gap, ang[i] - ang[i - 1]);
  return 2 * kPi - gap;
}

/// Image-sector oracle: +1 when the M⁻ side subtends the smaller angle.
template <class Image, class Lambda>
int sector_oracle(Image image, Lambda lam, double eps) {
  std::vector<double> minus, plus;
  for (int j = 0; j < 4000; ++j) {
    const double th = 2 * kPi * (j + 0.5) / 4000;
    const double u = eps * std::cos(th), v = eps * std::sin(th);
    const auto [x, y] = image(u, v);
    (lam(u, v) < 0 ? minus : plus).push_back(std::atan2(y, x));
  }
  return angular_width(minus) < angular_width(plus) ? +1 : -1;
}

}  // namespace

TEST(Singular, IdentityHasNoCurves) {
  EXPECT_TRUE(trace_singular_set(synthetic_lambda(Atlas::sphere(), "1"), 32).empty());
  EXPECT_TRUE(trace_singular_set(synthetic_lambda(Atlas::torus(), "2"), 32).empty());
}

TEST(Singular, WhitneyCuspParabola) {
  const BundleHom h = whitney(cusp_window());
  const auto curves = trace_singular_set(h, 64);
  ASSERT_EQ(curves.size(), 1u);
  const auto& c = curves[0];
  EXPECT_FALSE(c.closed);
  EXPECT_GT(c.points.size(), 40u);
  for (const auto& s : c.points) {
    EXPECT_LE(std::abs(s.at.p.v - 3 * s.at.p.u * s.at.p.u), 1e-10);
    // M⁺ = {v < 3u²} lies on the left
    const Point2 left{-s.tangent.v, s.tangent.u};
    EXPECT_GT(lambda(h, 0, s.at.p + 1e-4 * left, 0).value(), 0.0);
  }
  // points along the curve between samples stay on the parabola
  for (std::size_t k = 0; k + 1 < c.points.size(); k += 7) {
    const CurvePoint cp = curve_point(h, c, k, 0.37);
    EXPECT_LE(std::abs(cp.pos.v - 3 * cp.pos.u * cp.pos.u), 1e-12);
  }
}

TEST(Singular, NullDirectionHandValues) {
  const BundleHom h = whitney(cusp_window());
  // Φ(1, 3) = [[0, −1], [0, 1]] has kernel (1, 0)
  const Point2 eta = null_direction(h, 0, {1, 3});
  EXPECT_NEAR(std::abs(eta.u), 1.0, 1e-15);
  EXPECT_NEAR(eta.v, 0.0, 1e-15);
  const Atlas w = Atlas::window(-1, 1, -1, 1);
  const BundleHom d(w, expr_source(w, {"1", "0", "1"}, {"2", "0", "0", "0"}));
  const Point2 e2 = null_direction(d, 0, {0.2, 0.1});
  EXPECT_NEAR(e2.u, 0.0, 1e-15);
  EXPECT_NEAR(std::abs(e2.v), 1.0, 1e-15);
  const BundleHom z(w, expr_source(w, {"1", "0", "1"}, {"0", "0", "0", "0"}));
  try {
    null_direction(z, 0, {0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankZero);
  }
}

TEST(Singular, WhitneyCuspClassification) {
  const BundleHom h = whitney(cusp_window());
  auto curves = trace_singular_set(h, 64);
  auto& c = curves[0];
  for (std::size_t i = 1; i < c.points.size(); ++i) EXPECT_GT(dot(c.points[i].eta, c.points[i - 1].eta), 0.0);
  const auto a3 = classify_points(h, c);
  ASSERT_EQ(a3.size(), 1u);
  EXPECT_NEAR(a3[0].at.p.u, 0.0, 1e-12);
  EXPECT_NEAR(a3[0].at.p.v, 0.0, 1e-12);
  // with γ(u) = (u, 3u²) and η = (1, 0), ψ = −6u per unit u; along the unit
  // chart tangent at the origin |dψ/ds| = 6
  EXPECT_NEAR(std::abs(a3[0].dpsi), 6.0, 1e-8);
  EXPECT_EQ(c.a2_samples + 0, static_cast<int>(c.points.size()));
  for (const auto& s : c.points) {
    const double u = s.at.p.u;
    const double expect = -6 * u / std::sqrt(1 + 36 * u * u);  // det(γ̇/|γ̇|, (1, 0))
    EXPECT_NEAR(std::abs(s.psi), std::abs(expect), 1e-9);
  }
  EXPECT_NO_THROW(cross_check_classification(h, c));
}

TEST(Singular, WhitneyCuspSignMatchesSectorOracle) {
  const BundleHom h = whitney(cusp_window());
  auto curves = trace_singular_set(h, 64);
  auto a3 = classify_points(h, curves[0]);
  ASSERT_EQ(a3.size(), 1u);
  const int sign = a3_sign(h, a3[0]);
  const int oracle = sector_oracle([](double u, double v) { return std::pair{u * u * u - u * v, v}; },
                                   [](double u, double v) { return 3 * u * u - v; }, 1e-3);
  EXPECT_EQ(sign, oracle);
  EXPECT_EQ(sign, +1);
  // arc exponents are reported; on the cusp map both sides scale like ε
  EXPECT_NEAR(a3[0].k_minus, 1.0, 0.3);
  EXPECT_NEAR(a3[0].k_plus, 1.0, 0.3);
}

TEST(Singular, OrientationReversalFlipsSign) {
  const BundleHom h = whitney(cusp_window());
  const BundleHom r = reverse_orientation(h);
  EXPECT_NEAR(lambda(r, 0, {0.3, 0.1}, 0).value(), -lambda(h, 0, {0.3, 0.1}, 0).value(), 1e-15);
  auto ch = trace_singular_set(h, 64);
  auto cr = trace_singular_set(r, 64);
  auto ah = classify_points(h, ch[0]);
  auto ar = classify_points(r, cr[0]);
  ASSERT_EQ(ah.size(), 1u);
  ASSERT_EQ(ar.size(), 1u);
  EXPECT_EQ(a3_sign(h, ah[0]), -a3_sign(r, ar[0]));
}

TEST(Singular, SwallowtailFrontSign) {
  const Atlas w = Atlas::window(-0.41, 0.39, -0.42, 0.38);
  auto src = std::make_shared<FrontSource>(
      w, std::array<Expr, 3>{parse_expr("3*u^4 + u^2*v"), parse_expr("4*u^3 + 2*u*v"), parse_expr("v")},
      std::array<Expr, 3>{parse_expr("1"), parse_expr("-u"), parse_expr("u^2")});
  const BundleHom h(w, src);
  auto curves = trace_singular_set(h, 64);
  ASSERT_EQ(curves.size(), 1u);
  for (const auto& s : curves[0].points) EXPECT_LE(std::abs(s.at.p.v + 6 * s.at.p.u * s.at.p.u), 1e-10);
  auto a3 = classify_points(h, curves[0]);
  ASSERT_EQ(a3.size(), 1u);
  EXPECT_NEAR(norm(a3[0].at.p), 0.0, 1e-10);
  EXPECT_NO_THROW(cross_check_classification(h, curves[0]));
  const int sign = a3_sign(h, a3[0]);
  // limiting tangent plane at the origin is orthogonal to (1, 0, 0): image (y, z)
  const int oracle = sector_oracle(
      [](double u, double v) { return std::pair{4 * u * u * u + 2 * u * v, v}; },
      [&](double u, double v) { return lambda(h, 0, {u, v}, 0).value(); }, 1e-3);
  EXPECT_EQ(sign, oracle);
  const BundleHom r = reverse_orientation(h);
  auto cr = trace_singular_set(r, 64);
  auto ar = classify_points(r, cr[0]);
  EXPECT_EQ(a3_sign(r, ar[0]), -sign);
}

TEST(Singular, ConstantPsiSignHasNoA3) {
  // a fold along v = 0 with η = ∂v transversal everywhere
  const Atlas w = Atlas::window(-1, 1.1, -1, 1.1);
  const BundleHom h(w, expr_source(w, {"1", "0", "1"}, {"1", "0", "0", "v"}));
  auto curves = trace_singular_set(h, 32);
  ASSERT_EQ(curves.size(), 1u);
  EXPECT_TRUE(classify_points(h, curves[0]).empty());
  EXPECT_EQ(curves[0].a2_samples, static_cast<int>(curves[0].points.size()));
}

TEST(Singular, DegeneratePointAborts) {
  const Atlas w = Atlas::window(-1, 1.1, -1, 1.1);
  // λ = (v − 0.3)³ changes sign with dλ = 0 along the whole zero line
  const BundleHom h = synthetic_lambda(w, "(v - 0.3)^3");
  try {
    trace(h, 64);
    FAIL() << "expected DegeneratePoint";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegeneratePoint);
  }
}

TEST(Singular, HigherDegeneracyDetected) {
  // η = ∂u along v = u⁴, so ψ ∝ u³ changes sign with vanishing derivative
  const Atlas w = Atlas::window(-1, 1.1, -1, 1.1);
  const BundleHom h(w, expr_source(w, {"1", "0", "1"}, {"v - u^4", "0", "0", "1"}));
  auto curves = trace_singular_set(h, 64);
  ASSERT_EQ(curves.size(), 1u);
  try {
    classify_points(h, curves[0]);
    FAIL() << "expected HigherDegeneracy";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::HigherDegeneracy);
  }
}

namespace {

// Planar field X = (u − u³ − uv², v): rot X = 1 − 3u² − v², an ellipse of
// irrotational points.
TangentVectorField ellipse_field() {
  const Atlas w = Atlas::window(-1.5, 1.53, -1.5, 1.52);
  return TangentVectorField(w, {TangentVectorField::ChartData{
                                   {parse_expr("u - u^3 - u*v^2"), parse_expr("v")},
                                   {parse_expr("1"), parse_expr("0"), parse_expr("1")}}});
}

}  // namespace

TEST(Singular, SingularCurvatureMatchesIrrotationalCurvature) {
  const TangentVectorField X = ellipse_field();
  const BundleHom h = rotation_field(X);
  auto curves = trace_singular_set(h, 64);
  ASSERT_EQ(curves.size(), 1u);
  ASSERT_TRUE(curves[0].closed);
  int compared = 0;
  for (const auto& s : curves[0].points) {
    if (!s.kappa_s || std::abs(s.psi) < 1e-2) continue;
    const CurvePoint cp{s.at.chart, s.at.p, s.tangent, s.accel};
    const double ks = singular_curvature(h, cp);
    // irrotational curvature with the sign convention sgn(dλ(η)) = +1 on this orientation
    EXPECT_NEAR(ks, irrotational_curvature(X, cp), 1e-8 * std::max(1.0, std::abs(ks)));
    ++compared;
  }
  EXPECT_GT(compared, 20);
}

TEST(Singular, SingularCurvatureInvariances) {
  const TangentVectorField X = ellipse_field();
  const BundleHom h = rotation_field(X);
  auto curves = trace_singular_set(h, 64);
  const auto& s = curves[0].points[5];
  const CurvePoint cp{s.at.chart, s.at.p, s.tangent, s.accel};
  const double k = singular_curvature(h, cp);
  // γ(2t) at t/2: velocity doubles, acceleration quadruples
  EXPECT_NEAR(singular_curvature(h, {cp.chart, cp.pos, 2.0 * cp.vel, 4.0 * cp.acc}), k, 1e-8);
  // reversed traversal
  EXPECT_NEAR(singular_curvature(h, {cp.chart, cp.pos, -1.0 * cp.vel, cp.acc}), k, 1e-12);
  // flipping E's orientation flips both sgn dλ(η) and μ
  EXPECT_NEAR(singular_curvature(reverse_orientation(h), cp), k, 1e-12);
  // at an A3 point φ(γ̇) vanishes
  auto a3 = classify_points(h, curves[0]);
  ASSERT_FALSE(a3.empty());
  const CurvePoint at = curve_point(h, curves[0], a3[0].segment, a3[0].sigma);
  try {
    singular_curvature(h, at);
    FAIL() << "expected AtA3Point";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AtA3Point);
  }
}

TEST(Singular, KappaIntegralSelfConvergence) {
  const TangentVectorField X = ellipse_field();
  const BundleHom h = rotation_field(X);
  auto c1 = trace_singular_set(h, 64);
  auto c2 = trace_singular_set(h, 128);
  classify_points(h, c1[0]);
  classify_points(h, c2[0]);
  ASSERT_EQ(c1[0].a3.size(), c2[0].a3.size());
  EXPECT_EQ(c1[0].a3.size() % 2, 0u);
  const double i1 = integrate_kappa_s(h, c1[0]).value;
  const double i2 = integrate_kappa_s(h, c2[0]).value;
  // the tails are extrapolated, so across resolutions only their fit error remains
  EXPECT_NEAR(i1, i2, 1e-5);
  const double half = integrate_kappa_s(h, c2[0], 5e-4).value;
  EXPECT_NEAR(half, i2, 1e-3 * std::max(1.0, std::abs(i2)));
}

TEST(Singular, KappaIntegralWithoutA3) {
  // essential curves u ≈ ±π/2 on the torus with η = ∂u transversal to them
  const Atlas t = Atlas::torus();
  const BundleHom h(t, expr_source(t, {"1", "0", "1"}, {"cos(u) + 0.3*sin(v)", "0.2*cos(v)", "0", "1"}));
  auto c1 = trace_singular_set(h, 64);
  auto c2 = trace_singular_set(h, 128);
  ASSERT_EQ(c1.size(), 2u);
  ASSERT_EQ(c2.size(), 2u);
  double total1 = 0, total2 = 0;
  for (auto& c : c1) {
    EXPECT_TRUE(classify_points(h, c).empty());
    total1 += integrate_kappa_s(h, c).value;
  }
  for (auto& c : c2) {
    EXPECT_TRUE(classify_points(h, c).empty());
    total2 += integrate_kappa_s(h, c).value;
  }
  EXPECT_NEAR(total1, total2, 1e-8);
}

TEST(Singular, CuspsOnSamplesCountedOnce) {
  // the diagonal symmetry puts every ψ root exactly on a trace sample
  TangentVectorField X(Atlas::torus(), {{{parse_expr("sin(u) + 0.3*cos(v)"), parse_expr("sin(v) + 0.3*cos(u)")},
                                         {parse_expr("1"), parse_expr("0"), parse_expr("1")}}});
  const BundleHom h = rotation_field(X);
  for (int N : {32, 64}) {
    auto a = analyze_singular_set(h, N, false);
    const auto t = summarize(build_complex(a.set.mesh, h.atlas()));
    int total = 0;
    for (const auto& c : a.set.curves) {
      EXPECT_EQ(c.a3.size() % 2, c.eta_flips ? 1u : 0u);
      total += static_cast<int>(c.a3.size());
    }
    EXPECT_EQ(total, 4);
    EXPECT_EQ(2 * t.chi_minus, a.a3_positive - a.a3_negative);
  }
}

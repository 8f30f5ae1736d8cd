#include <gtest/gtest.h>

#include "gbsing/error.hpp"
#include "gbsing/singular.hpp"
#include "gbsing/topology.hpp"
#include "helpers.hpp"

using namespace gbs;
using gbs::testing::synthetic_lambda;

namespace {

RegionComplex complex_of(const BundleHom& h, int N) {
  return build_complex(trace(h, N).mesh, h.atlas());
}

}  // namespace

TEST(Topology, MeshEulerCharacteristic) {
  for (int N : {16, 32, 64}) {
    const Mesh s = build_mesh(Atlas::sphere(), N);
    EXPECT_EQ(static_cast<long>(s.vertices.size()) - static_cast<long>(s.edges.size()) +
                  static_cast<long>(s.triangles.size()),
              2);
    const Mesh t = build_mesh(Atlas::torus(), N);
    EXPECT_EQ(static_cast<long>(t.vertices.size()) - static_cast<long>(t.edges.size()) +
                  static_cast<long>(t.triangles.size()),
              0);
    const Mesh w = build_mesh(Atlas::window(-1, 1, -1, 1), N);
    EXPECT_EQ(static_cast<long>(w.vertices.size()) - static_cast<long>(w.edges.size()) +
                  static_cast<long>(w.triangles.size()),
              1);
    for (const Mesh* m : {&s, &t}) {
      for (const auto& e : m->edges) EXPECT_GE(e.tri[1], 0);
      for (const auto& tr : m->triangles) {
        EXPECT_GT(cross(tr.local[1] - tr.local[0], tr.local[2] - tr.local[0]), 0.0);
      }
    }
  }
}

TEST(Topology, NoSingularCurves) {
  const auto s = complex_of(synthetic_lambda(Atlas::sphere(), "1"), 32);
  EXPECT_EQ(s.euler_char(+1), 2);
  EXPECT_EQ(s.euler_char(-1), 0);
  EXPECT_EQ(s.component_count(+1), 1);
  EXPECT_EQ(s.component_count(-1), 0);
  const auto t = complex_of(synthetic_lambda(Atlas::torus(), "1"), 32);
  EXPECT_EQ(t.euler_char(+1), 0);
  EXPECT_EQ(t.component_count(+1), 1);
}

TEST(Topology, SmallMinusDisk) {
  const auto c = complex_of(synthetic_lambda(Atlas::sphere(), "0.2 - (1 - z)"), 64);
  EXPECT_EQ(c.euler_char(-1), 1);
  EXPECT_EQ(c.euler_char(+1), 1);
  EXPECT_EQ(c.curve_count(), 1);
}

// Enumeration oracle: each side is a sphere with holes or a union of disks
// and annuli; the χ values follow from counting disks.
TEST(Topology, ParallelCirclesOnTheSphere) {
  struct Case {
    const char* L;
    int chi_plus, chi_minus, comp_plus, comp_minus;
  };
  for (const Case& k : {Case{"z - 0.3", 1, 1, 1, 1}, Case{"(z - 0.5)*(z + 0.3)", 2, 0, 2, 1},
                        Case{"(z - 0.6)*z*(z + 0.6)", 1, 1, 2, 2}}) {
    const auto c = complex_of(synthetic_lambda(Atlas::sphere(), k.L), 64);
    SCOPED_TRACE(k.L);
    EXPECT_EQ(c.euler_char(+1), k.chi_plus);
    EXPECT_EQ(c.euler_char(-1), k.chi_minus);
    EXPECT_EQ(c.euler_char(+1) + c.euler_char(-1), 2);
    EXPECT_EQ(c.component_count(+1), k.comp_plus);
    EXPECT_EQ(c.component_count(-1), k.comp_minus);
  }
}

TEST(Topology, ThreeCapsAroundAxes) {
  // caps x > 0.8, y > 0.8, z > 0.8 are disjoint; their complement has χ = 2 − 3
  const auto c = complex_of(synthetic_lambda(Atlas::sphere(), "(x - 0.8)*(y - 0.8)*(z - 0.8)"), 64);
  EXPECT_EQ(c.euler_char(+1), 3);
  EXPECT_EQ(c.euler_char(-1), -1);
  EXPECT_EQ(c.component_count(+1), 3);
  EXPECT_EQ(c.component_count(-1), 1);
  EXPECT_EQ(c.curve_count(), 3);
  int sum = 0;
  for (const auto& r : c.regions()) sum += r.euler;
  EXPECT_EQ(sum, 2);
}

TEST(Topology, TorusBands) {
  // two essential circles split the torus into two annuli
  const auto c = complex_of(synthetic_lambda(Atlas::torus(), "cos(u)"), 32);
  EXPECT_EQ(c.euler_char(+1), 0);
  EXPECT_EQ(c.euler_char(-1), 0);
  EXPECT_EQ(c.curve_count(), 2);
  // a contractible disk of Minus
  const auto d = complex_of(synthetic_lambda(Atlas::torus(), "cos(u) + cos(v) + 1.5"), 32);
  EXPECT_EQ(d.euler_char(-1), 1);
  EXPECT_EQ(d.euler_char(+1), -1);
}

TEST(Topology, FaceLabelsMatchPointClass) {
  const BundleHom h = synthetic_lambda(Atlas::sphere(), "(z - 0.5)*(z + 0.3) + 0.1*x*y");
  const auto c = complex_of(h, 32);
  const auto& sm = c.signed_mesh();
  for (const auto& t : c.mesh().triangles) {
    const int s = sm.sign[t.v[0]];
    if (sm.sign[t.v[1]] != s || sm.sign[t.v[2]] != s) continue;
    const Point2 mid = (1.0 / 3.0) * (t.local[0] + t.local[1] + t.local[2]);
    const PointClass pc = classify_point(h, t.chart, mid, 0.0);
    EXPECT_EQ(pc, s > 0 ? PointClass::Plus : PointClass::Minus);
  }
}

TEST(Topology, LabelsIndependentOfChartAttribution) {
  // same function written in each chart's coordinates
  const BundleHom h = synthetic_lambda(Atlas::sphere(), "x + 0.2*y - 0.1");
  const auto c = complex_of(h, 32);
  const auto& sm = c.signed_mesh();
  for (std::size_t i = 0; i < sm.mesh.vertices.size(); ++i) {
    const ChartPoint& v = sm.mesh.vertices[i];
    if (std::abs(sm.vertex_lambda[i]) < 1e-9 || norm(v.p) < 0.25) continue;
    const ChartPoint other = h.atlas().to_chart(v, 1 - v.chart);
    if (norm(other.p) > 4.0) continue;
    const double l = lambda(h, other.chart, other.p, 0).value();
    EXPECT_EQ(l >= 0.0 ? 1 : -1, sm.sign[i]);
  }
}

TEST(Topology, RefineUntilStable) {
  const BundleHom h = synthetic_lambda(Atlas::sphere(), "(x - 0.8)*(y - 0.8)*(z - 0.8)");
  const StableResult r = refine_until_stable(h, 32, 4, false);
  EXPECT_LE(r.resolution, 128);
  EXPECT_EQ(r.complex.euler_char(-1), -1);
  const StableResult id = refine_until_stable(synthetic_lambda(Atlas::sphere(), "1"), 32, 4, false);
  EXPECT_EQ(id.resolution, 64);
  EXPECT_EQ(id.tried.size(), 2u);
}

TEST(Topology, NearTangentCirclesNeverSilentlyInconsistent) {
  // two caps that almost touch; either the counts settle or the loop reports it
  const BundleHom h = synthetic_lambda(Atlas::sphere(), "(x - 0.7072)*(y - 0.7072)");
  try {
    const StableResult r = refine_until_stable(h, 16, 2, false);
    EXPECT_EQ(r.complex.euler_char(+1) + r.complex.euler_char(-1), 2);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoStabilization) << e.what();
  }
}

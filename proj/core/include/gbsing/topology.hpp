#pragma once

/// Triangulations of the parameter surface and the region complex cut out by
/// the sign of λ.
///
/// The sphere mesh is two polar disks of radius 1 (one per stereographic
/// chart) glued along the unit circle; the torus mesh is a periodic grid; a
/// window is a plain grid with boundary. Every triangle is positively
/// oriented in its chart.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gbsing/atlas.hpp"

namespace gbs {

struct MeshTriangle {
  std::array<int, 3> v{};           // vertex ids, counter-clockwise in `chart`
  std::array<int, 3> e{};           // edge ids: (v0 v1), (v1 v2), (v2 v0)
  int chart = 0;
  std::array<Point2, 3> local;      // vertex coordinates in `chart` (unwrapped)
};

struct MeshEdge {
  std::array<int, 2> v{};
  int chart = 0;                    // owner chart: crossing points are computed here
  std::array<Point2, 2> local;
  std::array<int, 2> tri{-1, -1};
};

struct Mesh {
  Topology topology = Topology::Torus;
  int resolution = 0;
  std::vector<ChartPoint> vertices;
  std::vector<MeshEdge> edges;
  std::vector<MeshTriangle> triangles;

  bool closed() const { return topology != Topology::Window; }
};

/// Mesh at resolution N: sphere N/2 rings per chart (ring k has 6k vertices),
/// torus and window N × N squares split along one diagonal.
Mesh build_mesh(const Atlas& atlas, int N);

/// A PL zero set of λ on a mesh: sign per vertex (λ ≥ 0 counts as +), one
/// refined crossing per sign-changing edge, and directed segments with M⁺ on
/// their left (one per mixed triangle).
struct SignedMesh {
  Mesh mesh;
  std::vector<std::int8_t> sign;      // per vertex, ±1
  std::vector<double> vertex_lambda;
  std::vector<int> edge_crossing;     // crossing id per edge or −1
  std::vector<ChartPoint> crossings;  // refined points with |λ| tiny
  std::vector<int> crossing_edge;
  struct Segment {
    int from = -1, to = -1;  // crossing ids
    int triangle = -1;
  };
  std::vector<Segment> segments;
};

struct RegionInfo {
  int label = 0;        // +1 or −1
  int component = 0;    // index among regions of the same label
  int euler = 0;
  double area = 0.0;    // ∫ dA (PL estimate)
};

/// The split complex: each mixed triangle is cut along its segment.
class RegionComplex {
 public:
  explicit RegionComplex(SignedMesh m);

  const SignedMesh& signed_mesh() const { return m_; }
  const Mesh& mesh() const { return m_.mesh; }
  int resolution() const { return m_.mesh.resolution; }

  /// χ of the closed region with the given label, counted as V − E + F on the
  /// split complex (boundary vertices and edges counted for each side).
  int euler_char(int label) const;
  /// The same number from the full subcomplex spanned by vertices of that
  /// sign; it must agree with euler_char.
  int euler_char_subcomplex(int label) const;
  int euler_char_total() const;
  int component_count(int label) const;
  int curve_count() const { return curve_count_; }
  const std::vector<RegionInfo>& regions() const { return regions_; }

 private:
  void compute_components();
  SignedMesh m_;
  std::vector<int> component_;  // per vertex, within its label
  int components_plus_ = 0, components_minus_ = 0;
  int curve_count_ = 0;
  std::vector<RegionInfo> regions_;
};

/// Builds the complex and checks the gluing: every edge of a closed mesh
/// bounds two triangles and V − E + F = χ(M²); throws GluingError otherwise.
RegionComplex build_complex(SignedMesh m, const Atlas& atlas);

/// Integer invariants compared across resolutions.
struct TopologySummary {
  int chi_plus = 0, chi_minus = 0;
  int components_plus = 0, components_minus = 0;
  int curves = 0;
  bool operator==(const TopologySummary&) const = default;
  std::string str() const;
};
TopologySummary summarize(const RegionComplex& c);

}  // namespace gbs

#pragma once

/// Scene files: flat `key = value` lines grouped into `[sections]`.
///
///   scene    := line*
///   line     := blank | '#' comment | '[' section ']' | key '=' value
///   key      := name ('@' chart)?        per-chart override of a chart field
///
/// Lines before the first section set scene parameters:
///   name, atlas (sphere | torus | window(a, b, c, d)), grid, max_doublings,
///   jet_order, tol_global, tol_triangle, quadrature_rtol, chi_rounding.
/// Sections:
///   [defs]         name = expr; usable in every later expression
///   [surface]      x, y, z; mode = shape | blaschke; metric = first | blaschke
///   [blaschke]     [surface] with mode = blaschke
///   [vectorfield]  X1, X2; g11, g12, g22 (default flat, round on the sphere)
///   [bundle]       phi11, phi12, phi21, phi22; g11, g12, g22 (default 1, 0, 1);
///                  tangent = true | false; connection = levi-civita | flat
///   [connection]   beta_u, beta_v (chart 1-form) or ambient_x, ambient_y,
///                  ambient_z (ambient 1-form, sphere only); added to D
///   [triangle]     chart, a, b, c ("u, v" corners, counter-clockwise)
///   [output]       report, svg
/// Exactly one of [surface], [blaschke], [vectorfield], [bundle] must appear.
/// Comments occupy whole lines.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbsing/atlas.hpp"
#include "gbsing/blaschke.hpp"
#include "gbsing/bundle.hpp"
#include "gbsing/error.hpp"
#include "gbsing/fields3d.hpp"

namespace gbs::cli {

enum class SceneKind { Bundle, Surface, VectorField };
enum class SurfaceMode { Shape, Blaschke };

struct TriangleSpec {
  int chart = 0;
  std::array<Point2, 3> corners{};
};

struct Scene {
  std::string name = "scene";
  Topology topology = Topology::Sphere;
  std::array<double, 4> window{-1.0, 1.0, -1.0, 1.0};

  SceneKind kind = SceneKind::Surface;
  SurfaceMode mode = SurfaceMode::Shape;
  bool blaschke_metric = false;
  std::vector<std::array<Expr, 3>> surface;      // per chart
  std::vector<std::array<Expr, 2>> field;        // per chart
  std::vector<std::array<Expr, 3>> metric;       // per chart (vector field or bundle frame)
  std::vector<std::array<Expr, 4>> phi;          // per chart
  bool tangent = false;
  ConnectionKind connection = ConnectionKind::OrthonormalFlat;

  std::vector<std::array<Expr, 2>> beta;         // per chart, empty if unused
  std::optional<std::array<Expr, 3>> ambient_beta;

  std::vector<TriangleSpec> triangles;

  int grid = 32;
  int max_doublings = 3;
  int jet_order = kDefaultJetOrder;
  double tol_global = 1e-2;
  double tol_triangle = 1e-6;
  double quadrature_rtol = 1e-7;
  double chi_rounding = 0.05;

  std::string report_path, svg_path;

  Atlas atlas() const;
};

/// Structural equality; expressions compare by their canonical text.
bool operator==(const Scene& a, const Scene& b);

struct SceneIssue {
  int line = 0;
  int column = 0;
  std::string message;
};

/// All problems found in one scene text.
class SceneError : public Error {
 public:
  explicit SceneError(std::vector<SceneIssue> issues);
  const std::vector<SceneIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<SceneIssue> issues_;
};

/// Throws SceneError listing every problem, each with line and column.
Scene parse_scene(std::string_view text);
Scene load_scene(const std::string& path);
/// Canonical text; parse_scene(serialize_scene(s)) == s.
std::string serialize_scene(const Scene& s);

/// The objects a scene describes. Only the members matching its kind are set.
struct SceneModel {
  Atlas atlas;
  std::optional<SurfaceEmbedding> surface;
  std::optional<TangentVectorField> field;
  std::shared_ptr<const BlaschkeStructure> blaschke;
  std::shared_ptr<const BundleSource> source;  // φ for every kind but blaschke
  bool blaschke_metric = false;
  bool perturbed = false;
  /// φ for tracing and the global identities.
  BundleHom bundle(int jet_order) const;
};
SceneModel build_model(const Scene& s);

}  // namespace gbs::cli

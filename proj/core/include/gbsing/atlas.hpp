#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbsing/expr.hpp"
#include "gbsing/jet.hpp"

namespace gbs {

struct Point2 {
  double u = 0.0;
  double v = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.u + b.u, a.v + b.v}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.u - b.u, a.v - b.v}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.u, s * a.v}; }
inline double dot(Point2 a, Point2 b) { return a.u * b.u + a.v * b.v; }
inline double cross(Point2 a, Point2 b) { return a.u * b.v - a.v * b.u; }
double norm(Point2 a);

struct ChartPoint {
  int chart = 0;
  Point2 p;
};

enum class Topology { Sphere, Torus, Window };

std::string to_string(Topology t);

struct Chart {
  int id = 0;
  double a = 0.0, b = 1.0, c = 0.0, d = 1.0;  // domain [a,b] × [c,d]
  bool periodic_u = false;
  bool periodic_v = false;
  int orientation = +1;
};

/// Closed oriented surface presented by charts. Sphere: two stereographic
/// charts (0 projects from the north pole, 1 from the south pole) with
/// transition (u, v) ↦ (u, −v)/(u² + v²). Torus: one doubly periodic chart
/// [0, 2π)². Window: a single open rectangle of the plane, for local studies.
class Atlas {
 public:
  static Atlas sphere();
  static Atlas torus();
  static Atlas window(double a, double b, double c, double d);

  Topology topology() const { return topology_; }
  bool closed() const { return topology_ != Topology::Window; }
  const std::vector<Chart>& charts() const { return charts_; }
  const Chart& chart(int id) const { return charts_.at(id); }
  int euler_characteristic() const;

  /// Transition map between charts; nullopt outside the overlap.
  std::optional<Point2> transition(int from, int to, Point2 p) const;
  /// Jet of the transition map at p (components of the image point).
  std::pair<Jet, Jet> transition_jet(int from, int to, Point2 p, int order) const;
  /// Symbolic transition (for overlap checks and composition tests).
  std::pair<Expr, Expr> transition_expr(int from, int to) const;
  /// 2×2 Jacobian d(transition)/d(u,v) at p, row-major.
  std::array<double, 4> transition_jacobian(int from, int to, Point2 p) const;

  /// Wrap periodic coordinates into the fundamental domain.
  Point2 normalize(int chart, Point2 p) const;
  /// Preferred representation: sphere points with r > 1 move to the other chart.
  ChartPoint home(ChartPoint cp) const;
  /// Express cp in chart `to` (periodic charts: unchanged).
  ChartPoint to_chart(ChartPoint cp, int to) const;

  /// Partition-of-unity weight of `chart` at p (sums to 1 over charts).
  double weight(int chart, Point2 p) const;
  /// Square region outside which the chart's weight vanishes.
  std::array<double, 4> weight_support(int chart) const;

  /// Jets of the coordinate variables u, v and, on the sphere, the unit-sphere
  /// point x, y, z represented by p.
  VarValues<Jet> variables(int chart, Point2 p, int order) const;
  VarValues<double> variables(int chart, Point2 p) const;

 private:
  Topology topology_ = Topology::Torus;
  std::vector<Chart> charts_;
};

/// Resolution-n sample of a chart domain (nodes include both edges).
struct GridSample {
  int chart = 0;
  int n = 0;
  std::vector<Point2> nodes;
  std::vector<double> payload;
};

GridSample sample_grid(const Atlas& atlas, int chart, int n);

/// Value of a 2-form against du∧dv in the given chart.
using Density = std::function<double(int chart, Point2 p)>;

/// Region {g < 0} of a level-set function; returns (g, ∂g/∂u, ∂g/∂v).
using LevelSet = std::function<std::array<double, 3>(int chart, Point2 p)>;

struct IntegrateOptions {
  double rtol = 1e-6;
  int start_cells = 16;
  int max_cells = 256;
  int max_depth = 6;  // adaptive subdivision depth for cells cut by the mask boundary
};

struct IntegrationResult {
  double value = 0.0;
  double previous = 0.0;  // value at the previous resolution
  int cells = 0;          // per-axis cells at the returned resolution
  bool converged = false;
};

/// Partition-of-unity weighted composite Gauss–Legendre (4 × 4 per cell)
/// quadrature over the atlas, optionally restricted to {mask < 0}. Cells cut
/// by the mask boundary are subdivided; at the deepest level the mask is
/// linearized and the cell clipped exactly. Resolution doubles until two
/// successive values differ by less than rtol·(1 + |value|); throws
/// NoConvergence (reporting both values) otherwise.
IntegrationResult integrate(const Atlas& atlas, const Density& density,
                            const LevelSet* mask = nullptr, const IntegrateOptions& opts = {});

/// Integral at one fixed per-axis resolution (no convergence loop).
double integrate_fixed(const Atlas& atlas, const Density& density, const LevelSet* mask,
                       int cells, int max_depth = 6);

}  // namespace gbs

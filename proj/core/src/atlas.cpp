#include "gbsing/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gbsing/error.hpp"

namespace gbs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBlendOuter = 1.25;  // partition blends over 0.8 ≤ r ≤ 1.25
const double kSphereDomain = std::sqrt(2.0);

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// Inverse stereographic projections. Chart 0 projects from the north pole,
// chart 1 from the south pole with the v axis reflected, which makes the
// transition orientation-preserving.
template <class T>
std::array<T, 3> sphere_point(int chart, const T& u, const T& v) {
  const T r2 = u * u + v * v;
  const T inv = 1.0 / (1.0 + r2);
  if (chart == 0) return {2.0 * u * inv, 2.0 * v * inv, (r2 - 1.0) * inv};
  return {2.0 * u * inv, -2.0 * v * inv, (1.0 - r2) * inv};
}

}  // namespace

double norm(Point2 a) { return std::hypot(a.u, a.v); }

std::string to_string(Topology t) {
  switch (t) {
    case Topology::Sphere: return "sphere";
    case Topology::Torus: return "torus";
    case Topology::Window: return "window";
  }
  return "?";
}

Atlas Atlas::sphere() {
  Atlas a;
  a.topology_ = Topology::Sphere;
  for (int id = 0; id < 2; ++id) {
    a.charts_.push_back(Chart{id, -kSphereDomain, kSphereDomain, -kSphereDomain, kSphereDomain,
                              false, false, +1});
  }
  return a;
}

Atlas Atlas::torus() {
  Atlas a;
  a.topology_ = Topology::Torus;
  a.charts_.push_back(Chart{0, 0.0, kTwoPi, 0.0, kTwoPi, true, true, +1});
  return a;
}

Atlas Atlas::window(double lo_u, double hi_u, double lo_v, double hi_v) {
  if (!(hi_u > lo_u) || !(hi_v > lo_v)) {
    throw Error(ErrorKind::InvalidArgument, "window needs b > a and d > c");
  }
  Atlas a;
  a.topology_ = Topology::Window;
  a.charts_.push_back(Chart{0, lo_u, hi_u, lo_v, hi_v, false, false, +1});
  return a;
}

int Atlas::euler_characteristic() const {
  switch (topology_) {
    case Topology::Sphere: return 2;
    case Topology::Torus: return 0;
    case Topology::Window: return 1;
  }
  return 0;
}

std::optional<Point2> Atlas::transition(int from, int to, Point2 p) const {
  if (from == to) return normalize(from, p);
  if (topology_ != Topology::Sphere) return std::nullopt;
  // The inversion is defined away from the poles; the charts' sampled
  // domains overlap on the annulus 1/2 ≤ r² ≤ 2.
  const double r2 = p.u * p.u + p.v * p.v;
  if (!(r2 > 0.0)) return std::nullopt;
  return Point2{p.u / r2, -p.v / r2};
}

std::pair<Jet, Jet> Atlas::transition_jet(int from, int to, Point2 p, int order) const {
  const Jet u = Jet::variable(0, p.u, order);
  const Jet v = Jet::variable(1, p.v, order);
  if (from == to || topology_ != Topology::Sphere) return {u, v};
  const Jet inv = 1.0 / (u * u + v * v);
  return {u * inv, -(v * inv)};
}

std::pair<Expr, Expr> Atlas::transition_expr(int from, int to) const {
  const Expr u = Expr::u();
  const Expr v = Expr::v();
  if (from == to || topology_ != Topology::Sphere) return {u, v};
  const Expr r2 = u * u + v * v;
  return {u / r2, -v / r2};
}

std::array<double, 4> Atlas::transition_jacobian(int from, int to, Point2 p) const {
  auto [x, y] = transition_jet(from, to, p, 1);
  return {x.du(), x.dv(), y.du(), y.dv()};
}

Point2 Atlas::normalize(int chart, Point2 p) const {
  const Chart& c = charts_.at(chart);
  auto wrap = [](double x, double lo, double hi) {
    const double period = hi - lo;
    double r = std::fmod(x - lo, period);
    if (r < 0) r += period;
    if (r >= period) r -= period;
    return lo + r;
  };
  if (c.periodic_u) p.u = wrap(p.u, c.a, c.b);
  if (c.periodic_v) p.v = wrap(p.v, c.c, c.d);
  return p;
}

ChartPoint Atlas::home(ChartPoint cp) const {
  if (topology_ != Topology::Sphere) return {cp.chart, normalize(cp.chart, cp.p)};
  const double r2 = cp.p.u * cp.p.u + cp.p.v * cp.p.v;
  if (r2 > 1.0 || (cp.chart == 1 && r2 == 1.0)) {
    return {1 - cp.chart, Point2{cp.p.u / r2, -cp.p.v / r2}};
  }
  return cp;
}

ChartPoint Atlas::to_chart(ChartPoint cp, int to) const {
  if (cp.chart == to) return cp;
  const double r2 = cp.p.u * cp.p.u + cp.p.v * cp.p.v;
  if (!(r2 > 0.0)) throw Error(ErrorKind::Domain, "pole has no image in the other chart");
  return {to, Point2{cp.p.u / r2, -cp.p.v / r2}};
}

double Atlas::weight(int chart, Point2 p) const {
  if (topology_ != Topology::Sphere) return 1.0;
  (void)chart;
  const double r = norm(p);
  if (r <= 1.0 / kBlendOuter) return 1.0;
  if (r >= kBlendOuter) return 0.0;
  const double t = (std::log(r) + std::log(kBlendOuter)) / (2.0 * std::log(kBlendOuter));
  return 1.0 - smoothstep5(t);
}

std::array<double, 4> Atlas::weight_support(int chart) const {
  if (topology_ == Topology::Sphere) return {-kBlendOuter, kBlendOuter, -kBlendOuter, kBlendOuter};
  const Chart& c = charts_.at(chart);
  return {c.a, c.b, c.c, c.d};
}

VarValues<Jet> Atlas::variables(int chart, Point2 p, int order) const {
  const Jet u = Jet::variable(0, p.u, order);
  const Jet v = Jet::variable(1, p.v, order);
  if (topology_ != Topology::Sphere) {
    const Jet zero = Jet::constant(0.0, order);
    return {u, v, zero, zero, zero};
  }
  auto xyz = sphere_point(chart, u, v);
  return {u, v, xyz[0], xyz[1], xyz[2]};
}

VarValues<double> Atlas::variables(int chart, Point2 p) const {
  if (topology_ != Topology::Sphere) return {p.u, p.v, 0.0, 0.0, 0.0};
  auto xyz = sphere_point(chart, p.u, p.v);
  return {p.u, p.v, xyz[0], xyz[1], xyz[2]};
}

GridSample sample_grid(const Atlas& atlas, int chart, int n) {
  if (n < 16) throw Error(ErrorKind::InvalidArgument, "grid resolution must be at least 16");
  const Chart& c = atlas.chart(chart);
  GridSample g;
  g.chart = chart;
  g.n = n;
  g.nodes.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      g.nodes.push_back({c.a + (c.b - c.a) * i / n, c.c + (c.d - c.c) * j / n});
  g.payload.assign(g.nodes.size(), 0.0);
  return g;
}

// ---------------------------------------------------------------- quadrature

namespace {

constexpr double kGLNodes[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                0.8611363115940526};
constexpr double kGLWeights[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                  0.3478548451374538};

class CellIntegrator {
 public:
  CellIntegrator(const Atlas& atlas, int chart, const Density& density, const LevelSet* mask,
                 int max_depth)
      : atlas_(atlas), chart_(chart), density_(density), mask_(mask), max_depth_(max_depth) {}

  double cell(double x0, double y0, double h, int depth) const {
    if (!mask_) return gauss(x0, y0, h);
    const Point2 center{x0 + 0.5 * h, y0 + 0.5 * h};
    const auto gc = (*mask_)(chart_, center);
    int negatives = gc[0] < 0 ? 1 : 0;
    const Point2 corners[4] = {{x0, y0}, {x0 + h, y0}, {x0, y0 + h}, {x0 + h, y0 + h}};
    for (const Point2& q : corners) negatives += (*mask_)(chart_, q)[0] < 0 ? 1 : 0;
    const double slope = std::hypot(gc[1], gc[2]);
    const bool uniform = (negatives == 0 || negatives == 5) && std::abs(gc[0]) > 0.8 * slope * h;
    if (uniform) return negatives == 5 ? gauss(x0, y0, h) : 0.0;
    if (depth >= max_depth_) return clipped(x0, y0, h, gc, center);
    const double half = 0.5 * h;
    return cell(x0, y0, half, depth + 1) + cell(x0 + half, y0, half, depth + 1) +
           cell(x0, y0 + half, half, depth + 1) + cell(x0 + half, y0 + half, half, depth + 1);
  }

 private:
  double integrand(Point2 p) const {
    const double w = atlas_.weight(chart_, p);
    if (w == 0.0) return 0.0;
    return w * density_(chart_, p);
  }

  double gauss(double x0, double y0, double h) const {
    double sum = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const Point2 p{x0 + 0.5 * h * (1.0 + kGLNodes[i]), y0 + 0.5 * h * (1.0 + kGLNodes[j])};
        sum += kGLWeights[i] * kGLWeights[j] * integrand(p);
      }
    return sum * 0.25 * h * h;
  }

  // Clip the square by the mask and integrate over the clipped polygon with
  // a degree-2 triangle rule. Edge crossings are located on the true mask by
  // regula falsi; if the corners do not straddle the boundary the linearized
  // mask {g(c) + ∇g·(p − c) < 0} is used instead.
  double clipped(double x0, double y0, double h, const std::array<double, 3>& g,
                 Point2 center) const {
    const Point2 square[4] = {{x0, y0}, {x0 + h, y0}, {x0 + h, y0 + h}, {x0, y0 + h}};
    double gv[4];
    bool straddles = false;
    for (int k = 0; k < 4; ++k) {
      gv[k] = (*mask_)(chart_, square[k])[0];
      if ((gv[k] < 0) != (gv[0] < 0)) straddles = true;
    }
    auto linear = [&](Point2 p) {
      return g[0] + g[1] * (p.u - center.u) + g[2] * (p.v - center.v);
    };
    if (!straddles)
      for (int k = 0; k < 4; ++k) gv[k] = linear(square[k]);
    std::vector<Point2> poly;
    std::vector<Point2> crossings;
    for (int k = 0; k < 4; ++k) {
      const Point2 a = square[k];
      const Point2 b = square[(k + 1) % 4];
      const double la = gv[k];
      const double lb = gv[(k + 1) % 4];
      if (la < 0) poly.push_back(a);
      if ((la < 0) != (lb < 0)) {
        double ta = 0.0, tb = 1.0, fa = la, fb = lb;
        double t = fa / (fa - fb);
        if (straddles) {
          for (int it = 0; it < 6; ++it) {
            const double ft = (*mask_)(chart_, a + t * (b - a))[0];
            if (ft == 0.0) break;
            if ((ft < 0) == (fa < 0)) {
              ta = t;
              fa = ft;
            } else {
              tb = t;
              fb = ft;
            }
            t = ta + (tb - ta) * fa / (fa - fb);
          }
        }
        poly.push_back(a + t * (b - a));
        crossings.push_back(poly.back());
      }
    }
    double sum = 0.0;
    if (straddles && crossings.size() == 2) {
      // The boundary arc bulges from the chord by the sagitta s; the segment
      // between them has area ≈ (2/3)·|chord|·s.
      const Point2 m = 0.5 * (crossings[0] + crossings[1]);
      const auto gm = (*mask_)(chart_, m);
      const double grad = std::hypot(gm[1], gm[2]);
      if (grad > 0.0) {
        const double sagitta = -gm[0] / grad;
        sum += (2.0 / 3.0) * norm(crossings[1] - crossings[0]) * sagitta * integrand(m);
      }
    }
    if (poly.size() < 3) return sum;
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      const Point2 a = poly[0], b = poly[k], c = poly[k + 1];
      const double area = 0.5 * std::abs(cross(b - a, c - a));
      const Point2 q1 = (1.0 / 6.0) * (4.0 * a + b + c);
      const Point2 q2 = (1.0 / 6.0) * (a + 4.0 * b + c);
      const Point2 q3 = (1.0 / 6.0) * (a + b + 4.0 * c);
      sum += area * (integrand(q1) + integrand(q2) + integrand(q3)) / 3.0;
    }
    return sum;
  }

  const Atlas& atlas_;
  int chart_;
  const Density& density_;
  const LevelSet* mask_;
  int max_depth_;
};

}  // namespace

double integrate_fixed(const Atlas& atlas, const Density& density, const LevelSet* mask,
                       int cells, int max_depth) {
  double total = 0.0;
  for (const Chart& chart : atlas.charts()) {
    const auto box = atlas.weight_support(chart.id);
    const double hu = (box[1] - box[0]) / cells;
    const double hv = (box[3] - box[2]) / cells;
    if (std::abs(hu - hv) > 1e-12 * std::max(hu, hv)) {
      // Non-square domains: integrate in the unit square and rescale.
      const double su = box[1] - box[0];
      const double sv = box[3] - box[2];
      Density scaled = [&](int c, Point2 p) {
        return density(c, Point2{box[0] + su * p.u, box[2] + sv * p.v}) * su * sv;
      };
      LevelSet scaled_mask;
      if (mask) {
        scaled_mask = [&](int c, Point2 p) {
          auto g = (*mask)(c, Point2{box[0] + su * p.u, box[2] + sv * p.v});
          return std::array<double, 3>{g[0], g[1] * su, g[2] * sv};
        };
      }
      Atlas unit = Atlas::window(0.0, 1.0, 0.0, 1.0);
      CellIntegrator integ(unit, chart.id, scaled, mask ? &scaled_mask : nullptr, max_depth);
      const double h = 1.0 / cells;
      for (int j = 0; j < cells; ++j)
        for (int i = 0; i < cells; ++i) total += integ.cell(i * h, j * h, h, 0);
      continue;
    }
    CellIntegrator integ(atlas, chart.id, density, mask, max_depth);
    const double h = hu;
    const double reach = atlas.topology() == Topology::Sphere ? 1.25 : 1e300;
    for (int j = 0; j < cells; ++j) {
      for (int i = 0; i < cells; ++i) {
        const double x0 = box[0] + i * h;
        const double y0 = box[2] + j * h;
        // Skip cells entirely outside the partition support.
        const double nx = std::clamp(0.0, x0, x0 + h);
        const double ny = std::clamp(0.0, y0, y0 + h);
        if (std::hypot(nx, ny) >= reach) continue;
        total += integ.cell(x0, y0, h, 0);
      }
    }
  }
  return total;
}

IntegrationResult integrate(const Atlas& atlas, const Density& density, const LevelSet* mask,
                            const IntegrateOptions& opts) {
  IntegrationResult r;
  int n = opts.start_cells;
  double prev = integrate_fixed(atlas, density, mask, n, opts.max_depth);
  double older = prev;
  while (n * 2 <= opts.max_cells) {
    n *= 2;
    const double cur = integrate_fixed(atlas, density, mask, n, opts.max_depth);
    if (std::abs(cur - prev) < opts.rtol * (1.0 + std::abs(cur))) {
      r.value = cur;
      r.previous = prev;
      r.cells = n;
      r.converged = true;
      return r;
    }
    older = prev;
    prev = cur;
  }
  std::ostringstream os;
  os.precision(12);
  os << "quadrature did not converge by " << n << " cells per axis; last values " << older
     << " and " << prev << " (gap " << std::abs(prev - older) << ")";
  throw Error(ErrorKind::NoConvergence, os.str());
}

}  // namespace gbs

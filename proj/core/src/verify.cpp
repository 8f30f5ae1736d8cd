#include "gbsing/verify.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <tuple>

#include "gbsing/error.hpp"

namespace gbs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using GL = boost::math::quadrature::gauss<double, 20>;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

ReportRow integer_row(std::string name, int lhs, int rhs) {
  ReportRow r;
  r.name = std::move(name);
  r.integer = true;
  r.lhs = lhs;
  r.rhs = rhs;
  r.residual = lhs - rhs;
  r.pass = lhs == rhs;
  return r;
}

void fill_forensics(VerificationReport& rep, const BundleHom& h, const GlobalAnalysis& g) {
  const StableResult& s = g.stable;
  rep.provenance.resolution = s.resolution;
  rep.provenance.tried = s.tried;
  rep.provenance.jet_order = h.max_jet_order();
  rep.provenance.quadrature_cells = g.quadrature_cells;
  rep.provenance.source = h.source().description();
  rep.a3_points.clear();
  rep.curves.clear();
  const auto& curves = s.analysis.set.curves;
  rep.traced = curves;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const SingularCurve& c = curves[i];
    CurveForensics cf;
    cf.samples = c.points.size();
    cf.length = c.length();
    cf.eta_flips = c.eta_flips;
    cf.a3 = static_cast<int>(c.a3.size());
    if (i < s.analysis.per_curve.size()) {
      cf.kappa_integral = s.analysis.per_curve[i].value;
      cf.kappa_tails = s.analysis.per_curve[i].tails;
    }
    rep.curves.push_back(cf);
    for (const auto& p : c.a3) {
      rep.a3_points.push_back({static_cast<int>(i), p.at, p.sign, p.sign_margin, p.dpsi, p.k_minus, p.k_plus});
    }
  }
  IntegerBlock ib;
  ib.chi_plus = s.complex.euler_char(+1);
  ib.chi_minus = s.complex.euler_char(-1);
  ib.components_plus = s.complex.component_count(+1);
  ib.components_minus = s.complex.component_count(-1);
  ib.curves = s.complex.curve_count();
  ib.a3_plus = s.analysis.a3_positive;
  ib.a3_minus = s.analysis.a3_negative;
  ib.chi_E_measured = g.total_domega / kTwoPi;
  ib.chi_E = static_cast<int>(std::lround(ib.chi_E_measured));
  rep.integers = ib;
}

GlobalAnalysis finish_global(const BundleHom& h, StableResult stable, const VerifyOptions& opts) {
  GlobalAnalysis g{std::move(stable), 0.0, 0.0, 0.0, 0.0, 0.0, std::nullopt, 0};
  g.kappa = g.stable.analysis.kappa_s_integral;
  const auto& tried = g.stable.tried;
  if (opts.refine_floats && tried.size() >= 2) {
    try {
      g.kappa_coarse = analyze_singular_set(h, tried[tried.size() - 2], true).kappa_s_integral;
    } catch (const Error&) {
      // the coarse level did not support integration; the row reports no coarse value
    }
  }
  IntegrateOptions io;
  io.rtol = opts.quadrature_rtol;
  const Density domega = [&h](int c, Point2 p) { return curvature_density(h, c, p); };
  const IntegrationResult total = integrate(h.atlas(), domega, nullptr, io);
  g.total_domega = total.value;
  g.total_domega_coarse = total.previous;
  g.quadrature_cells = total.cells;
  if (g.stable.complex.component_count(-1) > 0) {
    const LevelSet minus = [&h](int c, Point2 p) -> std::array<double, 3> {
      const Jet l = lambda(h, c, p, 1);
      return {l.value(), l.du(), l.dv()};
    };
    const IntegrationResult m = integrate(h.atlas(), domega, &minus, io);
    g.minus_domega = m.value;
    g.minus_domega_coarse = m.previous;
  }
  return g;
}

void require_closed(const BundleHom& h) {
  if (!h.atlas().closed()) throw Error(ErrorKind::InvalidArgument, "global identities need a closed surface");
}

void require_tangent(const BundleHom& h) {
  if (!h.source().is_tangent()) throw Error(ErrorKind::InvalidArgument, "this identity needs E = TM²");
}

}  // namespace

ReportRow float_identity_row(std::string name, double lhs, double rhs, double tol, std::optional<double> coarse) {
  ReportRow r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.residual = lhs - rhs;
  r.tolerance = tol;
  r.coarse_residual = coarse;
  r.pass = std::abs(r.residual) <= tol;
  if (coarse) {
    const bool settled = std::abs(r.residual) <= std::abs(*coarse) || std::abs(r.residual) <= 0.01 * tol;
    r.pass = r.pass && std::abs(*coarse) <= tol && settled;
    if (!settled) r.note = "residual grew under refinement";
  }
  return r;
}

bool VerificationReport::all_pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

void VerificationReport::append(const VerificationReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  if (!integers) integers = other.integers;
  if (provenance.tried.empty()) provenance = other.provenance;
  if (a3_points.empty()) a3_points = other.a3_points;
  if (curves.empty()) curves = other.curves;
  if (traced.empty()) traced = other.traced;
  wall_seconds += other.wall_seconds;
}

GlobalAnalysis analyze_global(const BundleHom& h, const VerifyOptions& opts) {
  require_closed(h);
  StableResult stable = [&] {
    try {
      return refine_until_stable(h, opts.N0, opts.max_doublings, true);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::HigherDegeneracy) throw Error(ErrorKind::UnclassifiedSingularity, e.what());
      throw;
    }
  }();
  return finish_global(h, std::move(stable), opts);
}

VerificationReport check_global(const BundleHom& h, const GlobalAnalysis& g, const VerifyOptions& opts) {
  require_closed(h);
  VerificationReport rep;
  fill_forensics(rep, h, g);
  const IntegerBlock& ib = *rep.integers;
  const int chi_M = h.atlas().euler_characteristic();

  ReportRow euler = integer_row("euler_number", ib.chi_E, ib.chi_plus - ib.chi_minus + ib.a3_plus - ib.a3_minus);
  const double distance = std::abs(ib.chi_E_measured - ib.chi_E);
  euler.note = "measured ∫dω/2π = " + fmt(ib.chi_E_measured);
  if (!(distance < opts.chi_rounding)) {
    euler.pass = false;
    euler.note += " (not within " + fmt(opts.chi_rounding) + " of an integer)";
  }
  if (h.source().is_tangent() && ib.chi_E != chi_M) {
    euler.pass = false;
    euler.note += " (E = TM² but χ_E ≠ χ(M²))";
  }
  rep.rows.push_back(euler);

  auto rhs = [](double total, double minus, double kappa) { return total - 2.0 * minus + 2.0 * kappa; };
  std::optional<double> coarse;
  if (g.kappa_coarse) {
    coarse = kTwoPi * chi_M - rhs(g.total_domega_coarse, g.minus_domega_coarse, *g.kappa_coarse);
  }
  rep.rows.push_back(float_identity_row("gauss_bonnet_integral", kTwoPi * chi_M,
                                       rhs(g.total_domega, g.minus_domega, g.kappa),
                               opts.tol_global * kTwoPi, coarse));
  return rep;
}

VerificationReport check_global(const BundleHom& h, const VerifyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport rep = check_global(h, analyze_global(h, opts), opts);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

VerificationReport check_theorem1(const BundleHom& h, const GlobalAnalysis& g, const VerifyOptions& opts) {
  require_closed(h);
  require_tangent(h);
  VerificationReport rep;
  fill_forensics(rep, h, g);
  const IntegerBlock& ib = *rep.integers;
  rep.rows.push_back(integer_row("two_chi_minus", 2 * ib.chi_minus, ib.a3_plus - ib.a3_minus));
  std::optional<double> coarse;
  if (g.kappa_coarse) coarse = g.minus_domega_coarse - *g.kappa_coarse;
  rep.rows.push_back(float_identity_row("minus_curvature", g.minus_domega, g.kappa, opts.tol_global, coarse));
  return rep;
}

VerificationReport check_theorem1(const BundleHom& h, const VerifyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport rep = check_theorem1(h, analyze_global(h, opts), opts);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

VerificationReport relabel_integer_rows(VerificationReport rep, const std::string& a3_name,
                                        const std::string& integer_name) {
  if (rep.integers) rep.integers->a3_name = a3_name;
  for (auto& r : rep.rows)
    if (r.integer) r.name = integer_name;
  return rep;
}

VerificationReport check_rotation_proposition(const TangentVectorField& X, const VerifyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const BundleHom h = rotation_field(X, opts.jet_order);
  VerificationReport rep = relabel_integer_rows(check_theorem1(h, opts), "C", "irrotational_cusps");
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

VerificationReport check_bleeker_wilson(const SurfaceEmbedding& s, const VerifyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const BundleHom h = shape_operator(s, opts.jet_order);
  VerificationReport rep = relabel_integer_rows(check_theorem1(h, opts), "I", "inflections");
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

VerificationReport check_blaschke_theorem(std::shared_ptr<const BlaschkeStructure> b, const VerifyOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  CensusOptions co;
  co.N0 = opts.N0;
  co.max_doublings = opts.max_doublings;
  co.integrate = true;
  co.jet_order = opts.jet_order;
  SwallowtailCensus census = swallowtail_census(b, co);
  const BundleHom h = affine_shape_operator(b, false, opts.jet_order);
  const GlobalAnalysis g = finish_global(h, std::move(census.stable), opts);
  VerificationReport rep;
  fill_forensics(rep, h, g);
  rep.integers->a3_name = "S";
  rep.rows.push_back(integer_row("swallowtails", 2 * census.chi_minus, census.s_plus - census.s_minus));
  VerificationReport support = check_global(h, g, opts);
  for (const ReportRow& r : check_theorem1(h, g, opts).rows)
    if (!r.integer) support.rows.push_back(r);
  for (auto& r : support.rows) r.name = "alpha_" + r.name;
  rep.rows.insert(rep.rows.end(), support.rows.begin(), support.rows.end());
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

// ------------------------------------------------------------ triangles

Arc chart_segment(int chart, Point2 a, Point2 b) {
  return {[=](double t) { return CurvePoint{chart, a + t * (b - a), b - a, {0.0, 0.0}}; }};
}

Arc sphere_great_arc(int chart, const Vec3& a, const Vec3& b) {
  const double cos_th = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  const double th = std::acos(std::clamp(cos_th, -1.0, 1.0));
  if (!(th > 1e-12) || !(std::abs(std::sin(th)) > 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "great arc needs two distinct, non-antipodal points");
  }
  return {[=](double t) {
    const double s = std::sin(th);
    const double ca = std::sin((1 - t) * th) / s, cb = std::sin(t * th) / s;
    const double da = -th * std::cos((1 - t) * th) / s, db = th * std::cos(t * th) / s;
    const double dda = -th * th * ca, ddb = -th * th * cb;
    Vec3 x, dx, ddx;
    for (int k = 0; k < 3; ++k) {
      x[k] = ca * a[k] + cb * b[k];
      dx[k] = da * a[k] + db * b[k];
      ddx[k] = dda * a[k] + ddb * b[k];
    }
    // chart 0: (x, y)/(1 − z); chart 1: (x, −y)/(1 + z)
    const double sy = chart == 0 ? 1.0 : -1.0, sz = chart == 0 ? -1.0 : 1.0;
    const double w = 1.0 + sz * x[2], dw = sz * dx[2], ddw = sz * ddx[2];
    if (!(w > 1e-9)) throw Error(ErrorKind::Domain, "great arc passes through the chart's pole");
    auto comp = [&](double q, double dq, double ddq) {
      return std::array<double, 3>{q / w, dq / w - q * dw / (w * w),
                                   ddq / w - 2 * dq * dw / (w * w) - q * ddw / (w * w) + 2 * q * dw * dw / (w * w * w)};
    };
    const auto U = comp(x[0], dx[0], ddx[0]);
    const auto V = comp(sy * x[1], sy * dx[1], sy * ddx[1]);
    return CurvePoint{chart, {U[0], V[0]}, {U[1], V[1]}, {U[2], V[2]}};
  }};
}

TriangleTerms triangle_terms(const BundleHom& h, const Triangle& tri, int panels) {
  const int chart = tri.arcs[0].at(0.0).chart;
  const double tol = h.tol_sing();
  double lmin = 1e300, lmax = -1e300;
  auto track = [&](double l) {
    lmin = std::min(lmin, l);
    lmax = std::max(lmax, l);
  };
  auto touches = [&] { return lmin * lmax <= 0.0 || std::min(std::abs(lmin), std::abs(lmax)) <= tol; };

  TriangleTerms out;
  // interior angles: ccw ds² angle from the outgoing direction to the reversed incoming one
  for (int k = 0; k < 3; ++k) {
    const CurvePoint out_c = tri.arcs[k].at(0.0);
    const CurvePoint in_c = tri.arcs[(k + 2) % 3].at(1.0);
    const Point2 d1 = out_c.vel, d2 = -1.0 * in_c.vel;
    const auto g = pullback_metric(h, chart, out_c.pos);
    const double l = lambda(h, chart, out_c.pos, 0).value();
    track(l);
    const double ip = g[0] * d1.u * d2.u + g[1] * (d1.u * d2.v + d1.v * d2.u) + g[2] * d1.v * d2.v;
    double a = std::atan2(std::abs(l) * cross(d1, d2), ip);
    if (a < 0) a += kTwoPi;
    out.angles[k] = a;
  }
  out.angle_excess = out.angles[0] + out.angles[1] + out.angles[2] - std::numbers::pi;

  // ∮ κ_g dτ
  for (const Arc& arc : tri.arcs) {
    for (int p = 0; p < panels; ++p) {
      out.kappa_g += GL::integrate(
          [&](double t) {
            const CurvePoint c = arc.at(t);
            const GeodesicCurvatures k = geodesic_curvatures(h, c, false);
            track(k.lambda);
            if (!k.kappa_g) throw Error(ErrorKind::TriangleTouchesSigma, "κ_g undefined on the triangle boundary");
            return *k.kappa_g * k.speed;
          },
          static_cast<double>(p) / panels, static_cast<double>(p + 1) / panels);
    }
  }
  if (touches()) throw Error(ErrorKind::TriangleTouchesSigma, "λ vanishes on the triangle boundary");

  // ∬ K dA = ∬ sgn(λ) dω over a Coons patch collapsed at C
  const Arc& c0 = tri.arcs[0];
  const Arc& d1 = tri.arcs[1];
  const Arc& back = tri.arcs[2];
  const Point2 A = c0.at(0.0).pos, B = d1.at(0.0).pos, C = back.at(0.0).pos;
  double orientation = 0.0;
  auto patch = [&](double s, double t) {
    const CurvePoint bs = c0.at(s), rt = d1.at(t), lt = back.at(1.0 - t);
    const Point2 P = (1 - t) * bs.pos + t * C + (1 - s) * lt.pos + s * rt.pos -
                     ((1 - s) * (1 - t) * A + s * (1 - t) * B + (1 - s) * t * C + s * t * C);
    const Point2 Ps = (1 - t) * bs.vel - lt.pos + rt.pos + (1 - t) * A - (1 - t) * B;
    const Point2 Pt = -1.0 * bs.pos + C - (1 - s) * lt.vel + s * rt.vel + (1 - s) * A + s * B - C;
    return std::make_tuple(P, cross(Ps, Pt));
  };
  for (int i = 0; i < panels; ++i)
    for (int j = 0; j < panels; ++j) {
      out.curvature += GL::integrate(
          [&](double s) {
            return GL::integrate(
                [&](double t) {
                  const auto [P, jac] = patch(s, t);
                  orientation += jac;
                  const double l = lambda(h, chart, P, 0).value();
                  track(l);
                  return (l > 0 ? 1.0 : -1.0) * curvature_density(h, chart, P) * jac;
                },
                static_cast<double>(j) / panels, static_cast<double>(j + 1) / panels);
          },
          static_cast<double>(i) / panels, static_cast<double>(i + 1) / panels);
    }
  if (touches()) throw Error(ErrorKind::TriangleTouchesSigma, "λ vanishes inside the triangle");
  if (!(orientation > 0.0)) throw Error(ErrorKind::InvalidArgument, "triangle arcs must run counter-clockwise");
  return out;
}

ReportRow check_triangle(const BundleHom& h, const Triangle& t, const VerifyOptions& opts) {
  const TriangleTerms terms = triangle_terms(h, t);
  ReportRow r = float_identity_row("triangle", terms.angle_excess, terms.kappa_g + terms.curvature, opts.tol_triangle,
                          std::nullopt);
  r.note = "angles " + fmt(terms.angles[0]) + ", " + fmt(terms.angles[1]) + ", " + fmt(terms.angles[2]);
  return r;
}

}  // namespace gbs

#include "gbsing/singular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "gbsing/error.hpp"

namespace gbs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string where(const ChartPoint& cp) {
  std::ostringstream os;
  os.precision(10);
  os << "chart " << cp.chart << " at (" << cp.p.u << ", " << cp.p.v << ")";
  return os.str();
}

Point2 unit(Point2 a) { return (1.0 / norm(a)) * a; }

/// λ with gradient and Hessian.
struct LocalLambda {
  double value = 0.0;
  Point2 grad;
  double huu = 0.0, huv = 0.0, hvv = 0.0;
  double hess(Point2 a, Point2 b) const {
    return huu * a.u * b.u + huv * (a.u * b.v + a.v * b.u) + hvv * a.v * b.v;
  }
};

LocalLambda local_lambda(const BundleHom& h, int chart, Point2 p, int order = 2) {
  const Jet l = lambda(h, chart, p, order);
  LocalLambda out;
  out.value = l.value();
  out.grad = {l.du(), l.dv()};
  if (order >= 2) {
    out.huu = l.partial(2, 0);
    out.huv = l.partial(1, 1);
    out.hvv = l.partial(0, 2);
  }
  return out;
}

/// M⁺ on the left.
Point2 tangent_of(Point2 g) { return unit(Point2{g.v, -g.u}); }

/// Kernel direction from the row of larger norm; unnormalized sign.
Point2 row_kernel(const std::array<double, 4>& m) {
  const double n0 = std::hypot(m[0], m[1]);
  const double n1 = std::hypot(m[2], m[3]);
  const Point2 k = n0 >= n1 ? Point2{-m[1], m[0]} : Point2{-m[3], m[2]};
  return unit(k);
}

Point2 mat_apply(const std::array<double, 4>& m, Point2 x) {
  return {m[0] * x.u + m[1] * x.v, m[2] * x.u + m[3] * x.v};
}

Point2 transport(const Atlas& atlas, const ChartPoint& from, int to_chart, Point2 vec) {
  if (from.chart == to_chart) return vec;
  return mat_apply(atlas.transition_jacobian(from.chart, to_chart, from.p), vec);
}

template <class F>
double integrate_gl(F&& f, double a, double b) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss<double, 6>::integrate(f, a, b);
}

template <class F>
double root_on(F&& f, double a, double b, double fa, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iters = 200;
  boost::math::tools::eps_tolerance<double> tol(52);
  const auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
  const double x0 = r.first, x1 = r.second;
  return std::abs(f(x0)) <= std::abs(f(x1)) ? x0 : x1;
}

}  // namespace

// ------------------------------------------------------------ helpers

Point2 align_to(const Atlas& atlas, const ChartPoint& ref, const ChartPoint& q) {
  if (q.chart != ref.chart) return atlas.to_chart(q, ref.chart).p;
  Point2 p = q.p;
  const Chart& c = atlas.chart(ref.chart);
  if (c.periodic_u) {
    const double w = c.b - c.a;
    p.u += w * std::round((ref.p.u - p.u) / w);
  }
  if (c.periodic_v) {
    const double w = c.d - c.c;
    p.v += w * std::round((ref.p.v - p.v) / w);
  }
  return p;
}

Point2 null_direction(const BundleHom& h, int chart, Point2 p) {
  const auto m = h.phi(chart, p, 0).value();
  const double fro2 = m[0] * m[0] + m[1] * m[1] + m[2] * m[2] + m[3] * m[3];
  const double det = m[0] * m[3] - m[1] * m[2];
  // singular values from trace and determinant of ΦᵀΦ
  const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det));
  const double s1 = std::sqrt(0.5 * (fro2 + disc));
  const double s2 = std::abs(det) / std::max(s1, std::numeric_limits<double>::min());
  const double scale = std::sqrt(h.lambda_scale());
  if (s1 <= 1e-8 * scale) {
    throw Error(ErrorKind::RankZero, "φ vanishes at " + where({chart, p}));
  }
  if (s2 * 1e6 > s1) {
    throw Error(ErrorKind::SingularPoint, "φ has rank 2 at " + where({chart, p}));
  }
  return row_kernel(m);
}

CurvePoint curve_point(const BundleHom& h, const SingularCurve& curve, std::size_t k, double sigma) {
  const auto& pts = curve.points;
  const std::size_t n = pts.size();
  const ChartPoint& a = pts[k].at;
  const Point2 p1 = align_to(h.atlas(), a, pts[(k + 1) % n].at);
  const Point2 chord = p1 - a.p;
  const double L = norm(chord);
  const Point2 d = (1.0 / L) * chord;
  const Point2 nrm{-d.v, d.u};

  // Cubic Hermite guess for the offset from the endpoint tangents.
  auto slope = [&](Point2 t) {
    const double tu = dot(t, d);
    return std::abs(tu) > 1e-3 ? dot(t, nrm) / tu : 0.0;
  };
  const double m0 = slope(pts[k].tangent) * L;
  const double m1 = slope(transport(h.atlas(), pts[(k + 1) % n].at, a.chart, pts[(k + 1) % n].tangent)) * L;
  double y = (sigma * (1 - sigma) * (1 - sigma)) * m0 - (sigma * sigma * (1 - sigma)) * m1;
  const Point2 base = a.p + (sigma * L) * d;

  bool converged = false;
  for (int it = 0; it < 40; ++it) {
    const Jet l = lambda(h, a.chart, base + y * nrm, 1);
    const double ln = l.du() * nrm.u + l.dv() * nrm.v;
    if (ln == 0.0) break;
    const double step = l.value() / ln;
    y -= step;
    if (std::abs(step) <= 1e-15 * (L + std::abs(y))) {
      converged = true;
      break;
    }
    if (std::abs(y) > L) break;
  }
  if (!converged) {
    // bracket the zero along the normal line
    auto f = [&](double t) { return lambda(h, a.chart, base + t * nrm, 0).value(); };
    double lo = -0.5 * L, hi = 0.5 * L;
    double flo = f(lo), fhi = f(hi);
    if (flo * fhi > 0.0) {
      throw Error(ErrorKind::OpenCurve, "lost the singular curve between samples near " + where(a));
    }
    y = root_on(f, lo, hi, flo, fhi);
  }
  const Point2 x = base + y * nrm;
  const LocalLambda ll = local_lambda(h, a.chart, x, 2);
  const double ln = dot(ll.grad, nrm);
  const double yp = -dot(ll.grad, L * d) / ln;
  const Point2 vel = L * d + yp * nrm;
  const double ypp = -ll.hess(vel, vel) / ln;
  return CurvePoint{a.chart, x, vel, ypp * nrm};
}

// ------------------------------------------------------------ tracing

SingularSet trace(const BundleHom& h, int N, const TraceOptions& opts) {
  const Atlas& atlas = h.atlas();
  SingularSet out;
  SignedMesh& sm = out.mesh;
  sm.mesh = build_mesh(atlas, N);
  const Mesh& mesh = sm.mesh;
  const double scale = h.lambda_scale();
  const double tol_nondeg = opts.tol_nondeg_rel * scale;
  const double tol_lambda = 1e-10 * scale;

  const std::size_t nv = mesh.vertices.size();
  sm.vertex_lambda.resize(nv);
  sm.sign.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    const auto& v = mesh.vertices[i];
    const double l = lambda(h, v.chart, v.p, 0).value();
    if (!std::isfinite(l)) throw Error(ErrorKind::Domain, "λ is not finite at " + where(v));
    sm.vertex_lambda[i] = l;
    sm.sign[i] = l >= 0.0 ? 1 : -1;
  }

  // One refined crossing per sign-changing edge, in the edge's owner chart.
  sm.edge_crossing.assign(mesh.edges.size(), -1);
  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    const MeshEdge& me = mesh.edges[e];
    const int s0 = sm.sign[me.v[0]], s1 = sm.sign[me.v[1]];
    if (s0 == s1) continue;
    const Point2 a = me.local[0], b = me.local[1];
    auto f = [&](double t) { return lambda(h, me.chart, a + t * (b - a), 0).value(); };
    double f0 = f(0.0), f1 = f(1.0);
    double t;
    // endpoint values recomputed in the owner chart may straddle 0 differently
    if ((f0 >= 0.0) != (s0 > 0)) t = 0.0;
    else if ((f1 >= 0.0) != (s1 > 0)) t = 1.0;
    else t = root_on(f, 0.0, 1.0, f0, f1);
    const ChartPoint cp{me.chart, a + t * (b - a)};
    const LocalLambda ll = local_lambda(h, cp.chart, cp.p, 1);
    if (std::abs(ll.value) > tol_lambda) {
      throw Error(ErrorKind::DegeneratePoint,
                  "could not refine a zero of λ below 1e-10 at " + where(cp));
    }
    if (norm(ll.grad) < tol_nondeg) {
      throw Error(ErrorKind::DegeneratePoint, "dλ vanishes at the singular point " + where(cp));
    }
    sm.edge_crossing[e] = static_cast<int>(sm.crossings.size());
    sm.crossings.push_back(cp);
    sm.crossing_edge.push_back(static_cast<int>(e));
  }

  // Segments: walking counter-clockwise, from the +→− edge to the −→+ edge.
  const std::size_t nc = sm.crossings.size();
  std::vector<int> next(nc, -1), prev(nc, -1);
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const MeshTriangle& t = mesh.triangles[ti];
    int from = -1, to = -1;
    for (int k = 0; k < 3; ++k) {
      const int sa = sm.sign[t.v[k]], sb = sm.sign[t.v[(k + 1) % 3]];
      if (sa == sb) continue;
      const int c = sm.edge_crossing[t.e[k]];
      if (sa > 0) from = c;
      else to = c;
    }
    if (from < 0 && to < 0) continue;
    if (from < 0 || to < 0) throw Error(ErrorKind::GluingError, "inconsistent crossings in a triangle");
    if (next[from] != -1 || prev[to] != -1) {
      throw Error(ErrorKind::OpenCurve, "crossing used twice near " + where(sm.crossings[from]));
    }
    next[from] = to;
    prev[to] = from;
    sm.segments.push_back({from, to, static_cast<int>(ti)});
  }

  // Chain into curves: open ones first (window boundary), then cycles.
  std::vector<char> used(nc, 0);
  auto chain = [&](int start, bool closed) {
    SingularCurve curve;
    curve.closed = closed;
    std::vector<int> ids;
    int c = start;
    while (c != -1 && !used[c]) {
      used[c] = 1;
      ids.push_back(c);
      c = next[c];
    }
    if (closed && c != start) throw Error(ErrorKind::OpenCurve, "singular curve does not close");
    // drop repeated points (zeros of λ exactly at mesh vertices)
    std::vector<ChartPoint> pts;
    for (int id : ids) {
      const ChartPoint& q = sm.crossings[id];
      if (!pts.empty() && norm(align_to(atlas, pts.back(), q) - pts.back().p) < 1e-12) continue;
      pts.push_back(q);
    }
    if (closed && pts.size() > 1 && norm(align_to(atlas, pts.back(), pts.front()) - pts.back().p) < 1e-12)
      pts.pop_back();
    for (const ChartPoint& q : pts) {
      CurveSample s;
      s.at = q;
      const LocalLambda ll = local_lambda(h, q.chart, q.p, 2);
      s.lambda = ll.value;
      s.grad = ll.grad;
      s.tangent = tangent_of(ll.grad);
      s.accel = (-ll.hess(s.tangent, s.tangent) / dot(ll.grad, ll.grad)) * ll.grad;
      curve.points.push_back(s);
    }
    return curve;
  };
  for (std::size_t c = 0; c < nc; ++c) {
    if (prev[c] == -1) {
      if (mesh.closed()) throw Error(ErrorKind::OpenCurve, "singular curve ends at " + where(sm.crossings[c]));
      out.curves.push_back(chain(static_cast<int>(c), false));
    }
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (!used[c]) out.curves.push_back(chain(static_cast<int>(c), true));
  }

  // Null vectors, ψ, κ_s samples and the chart-length parameter.
  for (SingularCurve& curve : out.curves) {
    auto& pts = curve.points;
    if (pts.size() < 3 && curve.closed) throw Error(ErrorKind::OpenCurve, "singular curve below grid resolution");
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CurveSample& s = pts[i];
      s.eta = null_direction(h, s.at.chart, s.at.p);
      if (i > 0) {
        const Point2 prev_eta = transport(atlas, pts[i - 1].at, s.at.chart, pts[i - 1].eta);
        if (dot(prev_eta, s.eta) < 0.0) s.eta = -1.0 * s.eta;
      }
      s.psi = cross(s.tangent, s.eta);
      try {
        s.kappa_s = singular_curvature(h, CurvePoint{s.at.chart, s.at.p, s.tangent, s.accel});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::AtA3Point) throw;
      }
    }
    if (curve.closed && !pts.empty()) {
      const Point2 back = transport(atlas, pts.back().at, pts.front().at.chart, pts.back().eta);
      curve.eta_flips = dot(back, pts.front().eta) < 0.0;
    }
    curve.s.assign(1, 0.0);
    const std::size_t segs = curve.segment_count();
    for (std::size_t k = 0; k < segs; ++k) {
      const ChartPoint& a = pts[k].at;
      const CurveSample& nb = pts[(k + 1) % pts.size()];
      const Point2 b = align_to(atlas, a, nb.at);
      // a chain that turns sharply between samples has jumped across a
      // near-crossing of two branches; the grid does not resolve Σ there
      const Point2 chord = (1.0 / norm(b - a.p)) * (b - a.p);
      const Point2 tb = transport(atlas, nb.at, a.chart, nb.tangent);
      if (dot(chord, pts[k].tangent) < 0.5 || dot(chord, tb) < 0.5) {
        throw Error(ErrorKind::OpenCurve, "singular curve turns sharply between samples near " + where(a));
      }
      curve.s.push_back(curve.s.back() + norm(b - a.p));
    }
  }
  return out;
}

std::vector<SingularCurve> trace_singular_set(const BundleHom& h, int N, const TraceOptions& opts) {
  return trace(h, N, opts).curves;
}

// ------------------------------------------------------------ classification

namespace {

/// ψ and dψ/ds at a point of Σ with η oriented along `ref_eta`.
struct PsiJet {
  double psi = 0.0;
  double dpsi = 0.0;
  Point2 tangent, eta;
};

PsiJet psi_jet(const BundleHom& h, int chart, Point2 p, Point2 ref_eta) {
  const LocalLambda ll = local_lambda(h, chart, p, 2);
  const Mat2J phi = h.phi(chart, p, 1);
  const double gn = norm(ll.grad);
  const Point2 g = ll.grad;
  const Point2 t = tangent_of(g);
  const Point2 gp{ll.huu * t.u + ll.huv * t.v, ll.huv * t.u + ll.hvv * t.v};  // ∂_t ∇λ
  const Point2 rg{g.v, -g.u}, rgp{gp.v, -gp.u};
  const Point2 tp = (1.0 / gn) * rgp - (dot(g, gp) / (gn * gn * gn)) * rg;

  const double n0 = std::hypot(phi(0, 0).value(), phi(0, 1).value());
  const double n1 = std::hypot(phi(1, 0).value(), phi(1, 1).value());
  const int r = n0 >= n1 ? 0 : 1;
  const Jet& pj = phi(r, 0);
  const Jet& qj = phi(r, 1);
  const Point2 nu{-qj.value(), pj.value()};
  const Point2 nup{-(qj.du() * t.u + qj.dv() * t.v), pj.du() * t.u + pj.dv() * t.v};
  const double nn = norm(nu);
  double sgn = dot(nu, ref_eta) >= 0.0 ? 1.0 : -1.0;
  const Point2 eta = (sgn / nn) * nu;
  const Point2 etap = sgn * ((1.0 / nn) * nup - (dot(nu, nup) / (nn * nn * nn)) * nu);
  return {cross(t, eta), cross(tp, eta) + cross(t, etap), t, eta};
}

}  // namespace

std::vector<SingularPointRecord> classify_points(const BundleHom& h, SingularCurve& curve,
                                                 const ClassifyOptions& opts) {
  curve.a3.clear();
  curve.a2_samples = 0;
  const auto& pts = curve.points;
  const std::size_t n = pts.size();
  for (const auto& s : pts) curve.a2_samples += std::abs(s.psi) > opts.tol_psi;

  // ψ at every sample from one evaluation each, with zero counted as positive,
  // so a root sitting exactly on a sample is reported by one segment only
  const std::size_t segs = curve.segment_count();
  std::vector<double> at_sample(n);
  for (std::size_t k = 0; k < n; ++k) {
    at_sample[k] = psi_jet(h, pts[k].at.chart, pts[k].at.p, pts[k].eta).psi;
  }
  auto positive = [](double x) { return x >= 0.0; };
  for (std::size_t k = 0; k < segs; ++k) {
    const CurveSample& a = pts[k];
    const std::size_t kn = (k + 1) % n;
    const Point2 eta_b = transport(h.atlas(), pts[kn].at, a.at.chart, pts[kn].eta);
    // across the closing segment η may come back flipped; keep it continuous
    const double f0 = at_sample[k];
    const double f1 = dot(eta_b, a.eta) < 0.0 ? -at_sample[kn] : at_sample[kn];
    if (positive(f0) == positive(f1)) continue;

    auto psi_at = [&](double sigma) {
      const CurvePoint cp = curve_point(h, curve, k, sigma);
      return psi_jet(h, cp.chart, cp.pos, a.eta).psi;
    };
    const double sigma = root_on(psi_at, 0.0, 1.0, f0, f1);
    const CurvePoint cp = curve_point(h, curve, k, sigma);
    const PsiJet pj = psi_jet(h, cp.chart, cp.pos, a.eta);

    SingularPointRecord rec;
    rec.at = {cp.chart, cp.pos};
    rec.kind = PointKind::A3;
    rec.segment = static_cast<int>(k);
    rec.sigma = sigma;
    rec.s = curve.s[k] + sigma * (curve.s[k + 1] - curve.s[k]);
    rec.dpsi = pj.dpsi;
    if (std::abs(pj.dpsi) <= opts.tol_dpsi) {
      throw Error(ErrorKind::HigherDegeneracy,
                  "ψ vanishes to second order at " + where(rec.at) + " (neither A2 nor A3)");
    }
    curve.a3.push_back(rec);
  }
  return curve.a3;
}

std::pair<double, double> a3_arc_exponents(const BundleHom& h, const ChartPoint& p, double eps0) {
  constexpr int kLevels = 7;
  constexpr int kAngles = 720;
  std::array<std::vector<double>, 2> logs;  // [minus, plus]
  std::vector<double> log_eps;
  for (int k = 0; k < kLevels; ++k) {
    const double eps = eps0 * std::ldexp(1.0, -k);
    double len[2] = {0.0, 0.0};
    for (int j = 0; j < kAngles; ++j) {
      const double th = kTwoPi * (j + 0.5) / kAngles;
      const Point2 x = p.p + eps * Point2{std::cos(th), std::sin(th)};
      const Point2 dc = eps * Point2{-std::sin(th), std::cos(th)};
      const Mat2J phi = h.phi(p.chart, x, 0);
      const auto m = phi.value();
      const double l = phi.det().value();
      len[l >= 0.0 ? 1 : 0] += norm(mat_apply(m, dc)) * kTwoPi / kAngles;
    }
    log_eps.push_back(std::log(eps));
    for (int s = 0; s < 2; ++s) logs[s].push_back(len[s] > 0.0 ? std::log(len[s]) : std::nan(""));
  }
  auto slope = [&](const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (int i = 0; i < kLevels; ++i) mx += log_eps[i], my += y[i];
    mx /= kLevels;
    my /= kLevels;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < kLevels; ++i) {
      sxy += (log_eps[i] - mx) * (y[i] - my);
      sxx += (log_eps[i] - mx) * (log_eps[i] - mx);
    }
    return sxy / sxx;
  };
  return {slope(logs[0]), slope(logs[1])};
}

int a3_sign(const BundleHom& h, SingularPointRecord& rec) {
  const int chart = rec.at.chart;
  const Point2 p = rec.at.p;
  const LocalLambda ll = local_lambda(h, chart, p, 2);
  const Point2 g = ll.grad;
  const Point2 t = tangent_of(g);
  const Point2 acc = (-ll.hess(t, t) / dot(g, g)) * g;
  const Mat2J phi = h.phi(chart, p, 1);
  // a = d/ds (Φ γ̇) at the point, where Φ γ̇ = 0
  Point2 a{};
  for (int r = 0; r < 2; ++r) {
    const Jet& x = phi(r, 0);
    const Jet& y = phi(r, 1);
    const double dx = x.du() * t.u + x.dv() * t.v;
    const double dy = y.du() * t.u + y.dv() * t.v;
    const double val = dx * t.u + dy * t.v + x.value() * acc.u + y.value() * acc.v;
    (r == 0 ? a.u : a.v) = val;
  }
  const Point2 m = mat_apply(phi.value(), -1.0 * g);
  const double na = norm(a), nm = norm(m);
  const auto [km, kp] = a3_arc_exponents(h, rec.at);
  rec.k_minus = km;
  rec.k_plus = kp;
  if (!(na > 0.0) || !(nm > 0.0)) {
    throw Error(ErrorKind::Inconclusive, "degenerate cusp image at " + where(rec.at));
  }
  rec.sign_margin = dot(m, a) / (na * nm);
  if (std::abs(rec.sign_margin) < 1e-6) {
    std::ostringstream os;
    os << "cusp axis orthogonal to the M- image at " << where(rec.at) << " (exponents k-=" << km
       << ", k+=" << kp << ")";
    throw Error(ErrorKind::Inconclusive, os.str());
  }
  rec.sign = rec.sign_margin > 0.0 ? +1 : -1;
  return rec.sign;
}

double singular_curvature(const BundleHom& h, const CurvePoint& c) {
  const auto [dc, cv] = covariant_velocity(h, c);
  const double speed = std::hypot(cv[0], cv[1]);
  if (speed < 1e-8 * norm(c.vel)) {
    throw Error(ErrorKind::AtA3Point, "φ(γ̇) vanishes at " + where({c.chart, c.pos}));
  }
  const LocalLambda ll = local_lambda(h, c.chart, c.pos, 1);
  Point2 eta = row_kernel(h.phi(c.chart, c.pos, 0).value());
  if (cross(c.vel, eta) < 0.0) eta = -1.0 * eta;
  const double sgn = dot(ll.grad, eta) >= 0.0 ? 1.0 : -1.0;
  return sgn * (cv[0] * dc[1] - cv[1] * dc[0]) / (speed * speed * speed);
}

// ------------------------------------------------------------ κ_s integral

namespace {

/// μ(c, D c)/|c|² per unit of the chart-length parameter, for the curve
/// oriented with M⁺ on the left (there sgn dλ(η) = +1 for positive η).
double kappa_density(const BundleHom& h, const SingularCurve& curve, std::size_t k, double sigma) {
  const CurvePoint cp = curve_point(h, curve, k, sigma);
  const auto [dc, cv] = covariant_velocity(h, cp);
  const double c2 = cv[0] * cv[0] + cv[1] * cv[1];
  return (cv[0] * dc[1] - cv[1] * dc[0]) / c2 / (curve.s[k + 1] - curve.s[k]);
}

double density_at(const BundleHom& h, const SingularCurve& curve, double S) {
  const double L = curve.length();
  S = std::fmod(S, L);
  if (S < 0) S += L;
  auto it = std::upper_bound(curve.s.begin(), curve.s.end(), S);
  std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - curve.s.begin() - 1));
  k = std::min(k, curve.segment_count() - 1);
  const double sigma = (S - curve.s[k]) / (curve.s[k + 1] - curve.s[k]);
  return kappa_density(h, curve, k, std::clamp(sigma, 0.0, 1.0));
}

/// ∫ over [S0, S1] ⊂ [0, L] following segment boundaries.
double integrate_range(const BundleHom& h, const SingularCurve& curve, double S0, double S1) {
  double total = 0.0;
  for (std::size_t k = 0; k < curve.segment_count(); ++k) {
    const double a = std::max(S0, curve.s[k]);
    const double b = std::min(S1, curve.s[k + 1]);
    if (b <= a) continue;
    const double len = curve.s[k + 1] - curve.s[k];
    total += integrate_gl(
        [&](double S) { return kappa_density(h, curve, k, (S - curve.s[k]) / len); }, a, b);
  }
  return total;
}

/// ∫ of the density over S = s0 + side·d, d ∈ [0, δ]. With d = δw² an
/// endpoint singularity like d^(−1/2) becomes smooth; pieces break at samples,
/// where the S-density jumps with the chord parametrization.
double integrate_window(const BundleHom& h, const SingularCurve& curve, double s0, int side, double delta) {
  const double L = curve.length();
  std::vector<double> cuts{0.0, 0.25 * delta, delta};
  for (double sk : curve.s)
    for (double shift : {-L, 0.0, L}) {
      const double d = side * (sk + shift - s0);
      // a sample on top of the A₃ point would put quadrature nodes where c = 0
      if (d > 1e-6 * delta && d < delta) cuts.push_back(d);
    }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate_gl(
        [&](double w) { return density_at(h, curve, s0 + side * delta * w * w) * 2.0 * delta * w; },
        std::sqrt(cuts[i] / delta), std::sqrt(cuts[i + 1] / delta));
  }
  return total;
}

}  // namespace

KappaIntegral integrate_kappa_s(const BundleHom& h, const SingularCurve& curve, double delta_rel) {
  if (!curve.closed) throw Error(ErrorKind::OpenCurve, "∫κ_s dτ needs a closed curve");
  KappaIntegral out;
  const double L = curve.length();
  const double delta = delta_rel * L;

  // excised windows as intervals in [0, L]
  std::vector<std::pair<double, double>> cut;
  for (const auto& rec : curve.a3) {
    double a = rec.s - delta, b = rec.s + delta;
    if (a < 0) {
      cut.push_back({a + L, L});
      a = 0;
    }
    if (b > L) {
      cut.push_back({0, b - L});
      b = L;
    }
    cut.push_back({a, b});
  }
  std::sort(cut.begin(), cut.end());
  double S = 0.0;
  for (const auto& [a, b] : cut) {
    if (a > S) out.value += integrate_range(h, curve, S, a);
    S = std::max(S, b);
  }
  if (S < L) out.value += integrate_range(h, curve, S, L);

  // each side: integrability from a power law fitted on [δ/10, δ]
  for (const auto& rec : curve.a3) {
    for (int side : {-1, +1}) {
      ++out.windows;
      constexpr int kFit = 5;
      std::array<double, kFit> ld{}, lf{};
      bool same_sign = true;
      double first = 0.0;
      for (int j = 0; j < kFit; ++j) {
        const double d = delta * std::pow(10.0, -j / 4.0);
        const double f = density_at(h, curve, rec.s + side * d);
        if (!std::isfinite(f)) {
          throw Error(ErrorKind::TailFitFailure, "non-finite κ_s density near " + where(rec.at));
        }
        if (j == 0) first = f;
        if (f == 0.0 || (f > 0.0) != (first > 0.0)) same_sign = false;
        ld[j] = std::log(d);
        lf[j] = std::log(std::abs(f));
      }
      // the fit only vouches for integrability; the window itself is integrated
      if (!same_sign) {
        ++out.direct_windows;
      } else {
        double mx = 0, my = 0;
        for (int j = 0; j < kFit; ++j) mx += ld[j], my += lf[j];
        mx /= kFit;
        my /= kFit;
        double sxy = 0, sxx = 0;
        for (int j = 0; j < kFit; ++j) {
          sxy += (ld[j] - mx) * (lf[j] - my);
          sxx += (ld[j] - mx) * (ld[j] - mx);
        }
        const double p = sxy / sxx;
        if (!(p > -1.0 + 1e-6)) {
          throw Error(ErrorKind::TailFitFailure,
                      "κ_s density exponent " + std::to_string(p) + " is not integrable near " + where(rec.at));
        }
      }
      const double tail = integrate_window(h, curve, rec.s, side, delta);
      out.tails += tail;
    }
  }
  out.value += out.tails;
  return out;
}

// ------------------------------------------------------------ second classifier

NullFieldData null_field_from(const Jet& a, const Jet& b, const Jet& c, const Jet& l, Point2 ref) {
  const double amc = a.value() - c.value();
  const double th = 0.5 * std::atan2(2.0 * b.value(), amc) + 0.5 * std::numbers::pi;
  Point2 eta{std::cos(th), std::sin(th)};
  if (dot(eta, ref) < 0.0) eta = -1.0 * eta;
  const double den = amc * amc + 4.0 * b.value() * b.value();
  auto dtheta = [&](Point2 w) {
    const double da = a.du() * w.u + a.dv() * w.v;
    const double db = b.du() * w.u + b.dv() * w.v;
    const double dc = c.du() * w.u + c.dv() * w.v;
    return 0.5 * (amc * 2.0 * db - 2.0 * b.value() * (da - dc)) / den;
  };
  const Point2 g{l.du(), l.dv()};
  const double hess = l.partial(2, 0) * eta.u * eta.u + 2.0 * l.partial(1, 1) * eta.u * eta.v +
                      l.partial(0, 2) * eta.v * eta.v;
  const Point2 deta = dtheta(eta) * Point2{-eta.v, eta.u};
  return {eta, dot(g, eta) / norm(g), hess + dot(g, deta)};
}

namespace {

NullFieldData bundle_null_field(const BundleHom& h, int chart, Point2 p, Point2 ref) {
  const Mat2J phi = h.phi(chart, p, 2);
  const Mat2J p1 = phi.truncated(1);
  const Jet a = p1(0, 0) * p1(0, 0) + p1(1, 0) * p1(1, 0);
  const Jet b = p1(0, 0) * p1(0, 1) + p1(1, 0) * p1(1, 1);
  const Jet c = p1(0, 1) * p1(0, 1) + p1(1, 1) * p1(1, 1);
  return null_field_from(a, b, c, phi.det(), ref);
}

}  // namespace

std::vector<FrontCriterionPoint> criterion_zeros(const BundleHom& h, const SingularCurve& curve,
                                                 const NullFieldFn& field) {
  std::vector<FrontCriterionPoint> out;
  const auto& pts = curve.points;
  const std::size_t n = pts.size();
  if (n == 0) return out;
  std::vector<NullFieldData> fields;
  Point2 ref = pts[0].eta;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) ref = transport(h.atlas(), pts[i - 1].at, pts[i].at.chart, fields.back().eta);
    fields.push_back(field(pts[i].at.chart, pts[i].at.p, ref));
  }
  for (std::size_t k = 0; k < curve.segment_count(); ++k) {
    const Point2 ref_a = fields[k].eta;
    const std::size_t kn = (k + 1) % n;
    const Point2 eb = transport(h.atlas(), pts[kn].at, pts[k].at.chart, fields[kn].eta);
    // zero counts as positive so a root on a sample belongs to one segment
    const double ga = fields[k].eta_lambda;
    const double gb = dot(eb, ref_a) < 0 ? -fields[kn].eta_lambda : fields[kn].eta_lambda;
    if ((ga >= 0.0) == (gb >= 0.0)) continue;
    // plain bisection in σ
    double lo = 0.0, hi = 1.0, glo = ga;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const CurvePoint cp = curve_point(h, curve, k, mid);
      const double gm = field(cp.chart, cp.pos, ref_a).eta_lambda;
      if ((gm >= 0.0) == (glo >= 0.0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    const double sigma = 0.5 * (lo + hi);
    const CurvePoint cp = curve_point(h, curve, k, sigma);
    const NullFieldData nf = field(cp.chart, cp.pos, ref_a);
    out.push_back({{cp.chart, cp.pos}, curve.s[k] + sigma * (curve.s[k + 1] - curve.s[k]),
                   nf.eta_eta_lambda});
  }
  return out;
}

std::vector<FrontCriterionPoint> null_field_zeros(const BundleHom& h, const SingularCurve& curve) {
  return criterion_zeros(h, curve, [&h](int chart, Point2 p, Point2 ref) {
    return bundle_null_field(h, chart, p, ref);
  });
}

void match_criterion_points(const SingularCurve& curve, const std::vector<FrontCriterionPoint>& zeros,
                            double tol, double min_second) {
  if (zeros.size() != curve.a3.size()) {
    throw Error(ErrorKind::CriteriaMismatch,
                "ψ finds " + std::to_string(curve.a3.size()) + " A3 points, the null-field criterion " +
                    std::to_string(zeros.size()));
  }
  const double L = curve.length();
  for (const auto& rec : curve.a3) {
    bool matched = false;
    for (const auto& z : zeros) {
      double d = std::abs(z.s - rec.s);
      if (curve.closed) d = std::min(d, L - d);
      if (d <= tol * std::max(1.0, L)) {
        if (!(std::abs(z.eta_eta_lambda) > min_second)) {
          throw Error(ErrorKind::CriteriaMismatch, "second η-derivative of λ vanishes at " + where(z.at));
        }
        matched = true;
      }
    }
    if (!matched) throw Error(ErrorKind::CriteriaMismatch, "unmatched A3 point at " + where(rec.at));
  }
}

void cross_check_classification(const BundleHom& h, const SingularCurve& curve, double tol) {
  match_criterion_points(curve, null_field_zeros(h, curve), tol, 1e-8 * h.lambda_scale());
}

// ------------------------------------------------------------ pipeline

SingularAnalysis analyze_singular_set(const BundleHom& h, int N, bool integrate) {
  SingularAnalysis out;
  out.set = trace(h, N);
  for (std::size_t i = 0; i < out.set.curves.size(); ++i) {
    SingularCurve& c = out.set.curves[i];
    classify_points(h, c);
    for (auto& rec : c.a3) {
      rec.curve = static_cast<int>(i);
      a3_sign(h, rec);
      (rec.sign > 0 ? out.a3_positive : out.a3_negative) += 1;
    }
    if (integrate && c.closed) {
      out.per_curve.push_back(integrate_kappa_s(h, c));
      out.kappa_s_integral += out.per_curve.back().value;
    }
  }
  return out;
}

namespace {

class ReversedSource final : public BundleSource {
 public:
  explicit ReversedSource(std::shared_ptr<const BundleSource> base) : base_(std::move(base)) {}
  Mat2J phi(int chart, Point2 p, int order) const override {
    Mat2J m = base_->phi(chart, p, order);
    m(1, 0) = -m(1, 0);
    m(1, 1) = -m(1, 1);
    return m;
  }
  OneFormJ omega(int chart, Point2 p, int order) const override {
    OneFormJ w = base_->omega(chart, p, order);
    return {-w[0], -w[1]};
  }
  int order_overhead() const override { return base_->order_overhead(); }
  bool is_tangent() const override { return base_->is_tangent(); }
  std::string description() const override { return base_->description() + " (E reversed)"; }

 private:
  std::shared_ptr<const BundleSource> base_;
};

}  // namespace

BundleHom reverse_orientation(const BundleHom& h) {
  BundleHom r(h.atlas(), std::make_shared<ReversedSource>(h.source_ptr()), h.max_jet_order());
  r.set_tol_sing_relative(h.tol_sing_relative());
  return r;
}

StableResult refine_until_stable(const BundleHom& h, int N0, int max_doublings, bool integrate) {
  std::vector<int> tried;
  std::optional<std::pair<TopologySummary, std::pair<int, int>>> prev;
  std::string last_failure;
  int N = N0;
  for (int level = 0; level <= max_doublings; ++level, N *= 2) {
    tried.push_back(N);
    std::optional<SingularAnalysis> attempt;
    try {
      attempt = analyze_singular_set(h, N, false);
    } catch (const Error& e) {
      // the grid is too coarse to follow a curve; refine further
      if (e.kind() != ErrorKind::OpenCurve) throw;
      last_failure = e.what();
      prev.reset();
      continue;
    }
    SingularAnalysis a = std::move(*attempt);
    RegionComplex c = build_complex(a.set.mesh, h.atlas());
    const auto key = std::make_pair(summarize(c), std::make_pair(a.a3_positive, a.a3_negative));
    if (prev && *prev == key) {
      if (integrate) {
        for (auto& curve : a.set.curves) {
          if (!curve.closed) continue;
          a.per_curve.push_back(integrate_kappa_s(h, curve));
          a.kappa_s_integral += a.per_curve.back().value;
        }
      }
      return StableResult{std::move(a), std::move(c), N, tried};
    }
    prev = key;
  }
  std::ostringstream os;
  os << "counts changed at every resolution up to N=" << tried.back() << "; last: ";
  if (prev) {
    os << prev->first.str() << " A3+=" << prev->second.first << " A3-=" << prev->second.second;
  } else {
    os << last_failure;
  }
  throw Error(ErrorKind::NoStabilization, os.str());
}

}  // namespace gbs

#include "gbsing/cli/report.hpp"

#include <fstream>

namespace gbs::cli {

namespace {

Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

const char* topology_name(Topology t) {
  switch (t) {
    case Topology::Sphere: return "sphere";
    case Topology::Torus: return "torus";
    case Topology::Window: break;
  }
  return "window";
}

Json header(const Scene& s, const char* command) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["command"] = command;
  j["scene"] = s.name;
  j["atlas"] = topology_name(s.topology);
  return j;
}

Json a3_json(const SingularPointRecord& r) {
  Json j;
  j["curve"] = r.curve;
  j["at"] = point_json(r.at);
  j["sign"] = r.sign;
  j["s"] = r.s;
  j["dpsi"] = r.dpsi;
  j["margin"] = r.sign_margin;
  j["k_minus"] = r.k_minus;
  j["k_plus"] = r.k_plus;
  return j;
}

}  // namespace

Naming naming_for(const Scene& s) {
  switch (s.kind) {
    case SceneKind::Surface:
      if (s.mode == SurfaceMode::Blaschke) return {"S", "swallowtails", true};
      return {"I", "inflections", true};
    case SceneKind::VectorField:
      return {"C", "irrotational_cusps", true};
    case SceneKind::Bundle:
      break;
  }
  return {"S", "two_chi_minus", s.tangent};
}

Census take_census(const SceneModel& m, const Scene& s, int grid, int jet_order) {
  Census c = [&] {
    if (!m.blaschke) return Census(refine_until_stable(m.bundle(jet_order), grid, s.max_doublings, false));
    CensusOptions co;
    co.N0 = grid;
    co.max_doublings = s.max_doublings;
    co.blaschke_metric = m.blaschke_metric;
    co.jet_order = jet_order;
    return Census(swallowtail_census(m.blaschke, co).stable);
  }();
  const TopologySummary t = summarize(c.stable.complex);
  c.a3_plus = c.stable.analysis.a3_positive;
  c.a3_minus = c.stable.analysis.a3_negative;
  c.chi_plus = t.chi_plus;
  c.chi_minus = t.chi_minus;
  c.components_plus = t.components_plus;
  c.components_minus = t.components_minus;
  c.curves = t.curves;
  if (naming_for(s).tangent && m.atlas.closed()) c.identity_holds = 2 * c.chi_minus == c.a3_plus - c.a3_minus;
  return c;
}

Json point_json(const ChartPoint& p) { return Json{{"chart", p.chart}, {"u", p.p.u}, {"v", p.p.v}}; }

Json row_json(const ReportRow& r) {
  Json j;
  j["name"] = r.name;
  j["kind"] = r.integer ? "integer" : "float";
  if (r.integer) {
    j["lhs"] = static_cast<long long>(std::llround(r.lhs));
    j["rhs"] = static_cast<long long>(std::llround(r.rhs));
  } else {
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
  }
  j["residual"] = r.residual;
  j["tolerance"] = r.tolerance;
  j["coarse_residual"] = optional_number(r.coarse_residual);
  j["pass"] = r.pass;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json trace_json(const Scene& s, const SingularAnalysis& a, int grid) {
  Json j = header(s, "trace");
  j["grid"] = grid;
  Json curves = Json::array();
  for (std::size_t ci = 0; ci < a.set.curves.size(); ++ci) {
    const SingularCurve& c = a.set.curves[ci];
    Json jc;
    jc["closed"] = c.closed;
    jc["eta_flips"] = c.eta_flips;
    jc["length"] = c.length();
    if (ci < a.per_curve.size()) jc["kappa_s_integral"] = a.per_curve[ci].value;
    Json pts = Json::array();
    for (const CurveSample& p : c.points) {
      pts.push_back(Json{{"chart", p.at.chart},
                         {"u", p.at.p.u},
                         {"v", p.at.p.v},
                         {"lambda", p.lambda},
                         {"psi", p.psi},
                         {"kappa_s", optional_number(p.kappa_s)}});
    }
    jc["points"] = std::move(pts);
    Json a3 = Json::array();
    for (const auto& r : c.a3) a3.push_back(a3_json(r));
    jc["a3"] = std::move(a3);
    curves.push_back(std::move(jc));
  }
  j["curves"] = std::move(curves);
  j["a3_plus"] = a.a3_positive;
  j["a3_minus"] = a.a3_negative;
  if (!a.per_curve.empty()) j["kappa_s_integral"] = a.kappa_s_integral;
  return j;
}

Json census_json(const Scene& s, const Census& c) {
  const Naming n = naming_for(s);
  Json j = header(s, "census");
  j["a3_name"] = n.a3;
  j["S_plus"] = c.a3_plus;
  j["S_minus"] = c.a3_minus;
  j["chi_plus"] = c.chi_plus;
  j["chi_minus"] = c.chi_minus;
  j["components_plus"] = c.components_plus;
  j["components_minus"] = c.components_minus;
  j["curves"] = c.curves;
  j["identity"] = "2*chi_minus = S_plus - S_minus";
  j["identity_holds"] = c.identity_holds ? Json(*c.identity_holds) : Json(nullptr);
  j["resolution"] = c.stable.resolution;
  j["tried"] = c.stable.tried;
  Json a3 = Json::array();
  for (const auto& curve : c.stable.analysis.set.curves)
    for (const auto& r : curve.a3) a3.push_back(a3_json(r));
  j["a3"] = std::move(a3);
  return j;
}

Json verify_json(const Scene& s, const VerificationReport& rep, std::optional<FrontReport> front,
                 std::optional<double> coherence) {
  Json j = header(s, "verify");
  j["pass"] = rep.all_pass();
  Json rows = Json::array();
  for (const auto& r : rep.rows) rows.push_back(row_json(r));
  j["rows"] = std::move(rows);
  if (rep.integers) {
    const IntegerBlock& b = *rep.integers;
    j["integers"] = Json{{"a3_name", b.a3_name},
                         {"chi_plus", b.chi_plus},
                         {"chi_minus", b.chi_minus},
                         {"a3_plus", b.a3_plus},
                         {"a3_minus", b.a3_minus},
                         {"components_plus", b.components_plus},
                         {"components_minus", b.components_minus},
                         {"curves", b.curves},
                         {"chi_E", b.chi_E},
                         {"chi_E_measured", b.chi_E_measured}};
  }
  const Provenance& p = rep.provenance;
  j["provenance"] = Json{{"resolution", p.resolution},
                         {"tried", p.tried},
                         {"jet_order", p.jet_order},
                         {"delta_rel", p.delta_rel},
                         {"quadrature_cells", p.quadrature_cells},
                         {"source", p.source},
                         {"tol_global", s.tol_global},
                         {"tol_triangle", s.tol_triangle}};
  Json a3 = Json::array();
  for (const A3Forensics& f : rep.a3_points) {
    a3.push_back(Json{{"curve", f.curve},
                      {"at", point_json(f.at)},
                      {"sign", f.sign},
                      {"margin", f.margin},
                      {"dpsi", f.dpsi},
                      {"k_minus", f.k_minus},
                      {"k_plus", f.k_plus}});
  }
  j["a3"] = std::move(a3);
  Json curves = Json::array();
  for (const CurveForensics& c : rep.curves) {
    curves.push_back(Json{{"samples", c.samples},
                          {"length", c.length},
                          {"eta_flips", c.eta_flips},
                          {"a3", c.a3},
                          {"kappa_integral", c.kappa_integral},
                          {"kappa_tails", c.kappa_tails}});
  }
  j["curves"] = std::move(curves);
  if (front) {
    j["front"] = Json{{"samples", front->samples},
                      {"min_conormal_rank", front->min_conormal_rank},
                      {"min_front_det", front->min_front_det},
                      {"min_h_eigenvalue", front->min_h_eigenvalue},
                      {"max_conormal_residual", front->max_conormal_residual},
                      {"max_structure_residual", front->max_structure_residual},
                      {"max_duality_residual", front->max_duality_residual},
                      {"max_equiaffine_residual", front->max_equiaffine_residual}};
  }
  if (coherence) j["coherence_residual"] = *coherence;
  return j;
}

namespace {

ReportRow bound_row(std::string name, double value, double bound, bool upper) {
  ReportRow r;
  r.name = std::move(name);
  r.lhs = value;
  r.rhs = bound;
  r.tolerance = bound;
  r.residual = upper ? value : 0.0;
  r.pass = upper ? value <= bound : value > bound;
  r.note = upper ? "upper bound" : "lower bound";
  return r;
}

double max_coherence(const BundleHom& h) {
  double worst = 0.0;
  for (const Chart& ch : h.atlas().charts()) {
    const bool disk = h.atlas().topology() == Topology::Sphere;
    for (int i = 0; i < 9; ++i) {
      for (int j = 0; j < 9; ++j) {
        const Point2 p = disk ? Point2{-0.9 + 0.225 * i, -0.9 + 0.225 * j}
                              : Point2{ch.a + (ch.b - ch.a) * (i + 0.5) / 9, ch.c + (ch.d - ch.c) * (j + 0.5) / 9};
        if (disk && p.u * p.u + p.v * p.v > 1.0) continue;
        try {
          worst = std::max(worst, coherence_residual(h, ch.id, p));
        } catch (const Error&) {
        }
      }
    }
  }
  return worst;
}

}  // namespace

SceneVerification verify_scene(const Scene& s, const SceneModel& m, int grid, int jet_order) {
  VerifyOptions opts;
  opts.N0 = grid;
  opts.max_doublings = s.max_doublings;
  opts.tol_global = s.tol_global;
  opts.tol_triangle = s.tol_triangle;
  opts.quadrature_rtol = s.quadrature_rtol;
  opts.chi_rounding = s.chi_rounding;
  opts.jet_order = jet_order;

  const BundleHom h = m.bundle(jet_order);
  if (!m.atlas.closed() && s.triangles.empty()) {
    throw Error(ErrorKind::InvalidArgument, "a window scene has no global identities; add [triangle] sections");
  }
  VerificationReport rep;
  std::optional<FrontReport> front;
  if (m.blaschke) {
    rep = check_blaschke_theorem(m.blaschke, opts);
    std::vector<ReportRow> rows;
    try {
      front = front_checks(*m.blaschke, 32);
      rows.push_back(bound_row("front_det", front->min_front_det, 0.01, false));
      rows.push_back(bound_row("front_h_min_eigenvalue", front->min_h_eigenvalue, 0.0, false));
      rows.push_back(bound_row("front_conormal_residual", front->max_conormal_residual, 1e-8, true));
      rows.push_back(bound_row("front_equiaffine_residual", front->max_equiaffine_residual, 1e-8, true));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FrontConditionViolated) throw;
      ReportRow r;
      r.name = "front_conditions";
      r.note = e.what();
      rows.push_back(r);
    }
    rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
  } else if (m.atlas.closed()) {
    const GlobalAnalysis g = analyze_global(h, opts);
    rep = check_global(h, g, opts);
    const Naming n = naming_for(s);
    if (n.tangent) rep.append(relabel_integer_rows(check_theorem1(h, g, opts), n.a3, n.integer_row));
    if (rep.integers) rep.integers->a3_name = n.a3;
  }
  for (std::size_t i = 0; i < s.triangles.size(); ++i) {
    const TriangleSpec& t = s.triangles[i];
    const auto& c = t.corners;
    const Triangle tri{{chart_segment(t.chart, c[0], c[1]), chart_segment(t.chart, c[1], c[2]),
                        chart_segment(t.chart, c[2], c[0])}};
    ReportRow row = check_triangle(h, tri, opts);
    row.name = "triangle_" + std::to_string(i);
    rep.rows.push_back(row);
  }
  const std::optional<double> coherence =
      m.blaschke ? std::nullopt : std::optional<double>(max_coherence(h));
  return {std::move(rep), front, coherence};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text) || !out.flush()) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
}

}  // namespace gbs::cli

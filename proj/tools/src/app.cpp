#include "gbsing/cli/app.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "CLI11.hpp"
#include "gbsing/cli/report.hpp"
#include "gbsing/cli/scene.hpp"
#include "gbsing/cli/svg.hpp"
#include "gbsing/topology.hpp"

namespace gbs::cli {

namespace {

struct Flags {
  std::string scene;
  std::optional<int> grid, jet_order;
  std::string report, svg;
};

struct Loaded {
  Scene scene;
  SceneModel model;
  int grid = 0;
  int jet_order = 0;
};

Loaded load(const Flags& f) {
  Scene s = load_scene(f.scene);
  const int grid = f.grid.value_or(s.grid);
  const int order = f.jet_order.value_or(s.jet_order);
  if (grid < 4) throw Error(ErrorKind::InvalidArgument, "--grid must be at least 4");
  if (order < 2) throw Error(ErrorKind::InvalidArgument, "--jet-order must be at least 2");
  SceneModel m = build_model(s);
  return {std::move(s), std::move(m), grid, order};
}

void emit_json(const Json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) out << text;
  else write_text(path, text);
}

Figure figure(const Loaded& L, const BundleHom& h, std::vector<SingularCurve> curves) {
  Figure f;
  f.title = L.scene.name;
  f.atlas = L.model.atlas;
  f.lambda = [h](const ChartPoint& p) -> std::optional<double> {
    try {
      return lambda(h, p.chart, p.p, 0).value();
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  if (L.model.blaschke) {
    f.front = [b = L.model.blaschke](const ChartPoint& p) -> std::optional<Vec3> {
      try {
        return b->normal_map(p.chart, p.p);
      } catch (const Error&) {
        return std::nullopt;
      }
    };
  }
  f.curves = std::move(curves);
  return f;
}

std::string grid_line(int resolution, std::size_t curves) {
  return "grid " + std::to_string(resolution) + ", " + std::to_string(curves) + " singular curve" +
         (curves == 1 ? "" : "s");
}

int cmd_trace(const Flags& flags, std::ostream& out) {
  const Loaded L = load(flags);
  const BundleHom h = L.model.bundle(L.jet_order);
  const SingularAnalysis a = analyze_singular_set(h, L.grid, L.model.atlas.closed());
  emit_json(trace_json(L.scene, a, L.grid), flags.report.empty() ? L.scene.report_path : flags.report, out);
  const std::string svg = flags.svg.empty() ? L.scene.svg_path : flags.svg;
  if (!svg.empty()) {
    Figure f = figure(L, h, a.set.curves);
    const Naming n = naming_for(L.scene);
    const bool empty = a.set.curves.empty();
    int chi_plus = 0, chi_minus = 0;
    if (L.model.atlas.closed()) {
      const TopologySummary t = summarize(build_complex(a.set.mesh, L.model.atlas));
      chi_plus = t.chi_plus, chi_minus = t.chi_minus;
    }
    f.legend = {identity_legend(n.a3, n.tangent, L.model.atlas.closed(), chi_plus, chi_minus, a.a3_positive,
                                a.a3_negative, empty),
                grid_line(L.grid, a.set.curves.size())};
    write_text(svg, render_svg(f));
  }
  return kExitOk;
}

int cmd_census(const Flags& flags, std::ostream& out, bool render_only) {
  const Loaded L = load(flags);
  const BundleHom h = L.model.bundle(L.jet_order);
  const Census c = take_census(L.model, L.scene, L.grid, L.jet_order);
  if (!render_only) {
    emit_json(census_json(L.scene, c), flags.report.empty() ? L.scene.report_path : flags.report, out);
  }
  const std::string svg = flags.svg.empty() ? L.scene.svg_path : flags.svg;
  if (render_only && svg.empty()) throw Error(ErrorKind::InvalidArgument, "render needs --out or [output] svg");
  if (!svg.empty()) {
    const auto& curves = c.stable.analysis.set.curves;
    Figure f = figure(L, h, curves);
    const Naming n = naming_for(L.scene);
    f.legend = {identity_legend(n.a3, n.tangent, L.model.atlas.closed(), c.chi_plus, c.chi_minus, c.a3_plus,
                                c.a3_minus, curves.empty()),
                grid_line(c.stable.resolution, curves.size())};
    write_text(svg, render_svg(f));
  }
  if (c.identity_holds && !*c.identity_holds) return kExitFailed;
  return kExitOk;
}

int cmd_verify(const Flags& flags, std::ostream& out) {
  const Loaded L = load(flags);
  const Scene& s = L.scene;
  const SceneVerification v = verify_scene(s, L.model, L.grid, L.jet_order);
  emit_json(verify_json(s, v.report, v.front, v.coherence), flags.report.empty() ? s.report_path : flags.report,
            out);
  return v.pass() ? kExitOk : kExitFailed;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--scene", f.scene, "scene file")->required()->check(CLI::ExistingFile);
  sub->add_option("--grid", f.grid, "grid resolution N (N×N cells per chart)");
  sub->add_option("--jet-order", f.jet_order, "jet truncation order");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Singular sets of bundle homomorphisms and their Gauss–Bonnet identities", "gbsing"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* trace = app.add_subcommand("trace", "trace the singular curves and print them as JSON");
  add_common(trace, f);
  trace->add_option("--report", f.report, "write the JSON here instead of stdout");
  trace->add_option("--svg", f.svg, "also write an SVG figure");
  CLI::App* census = app.add_subcommand("census", "count A3 points and Euler characteristics on a stable grid");
  add_common(census, f);
  census->add_option("--report", f.report, "write the JSON here instead of stdout");
  census->add_option("--svg", f.svg, "also write an SVG figure");
  CLI::App* verify = app.add_subcommand("verify", "check every identity that applies to the scene");
  add_common(verify, f);
  verify->add_option("--report", f.report, "write the JSON here instead of stdout");
  CLI::App* render = app.add_subcommand("render", "draw the parameter domain with M+, M-, the singular set and A3 points");
  add_common(render, f);
  render->add_option("--out", f.svg, "SVG output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*trace) return cmd_trace(f, out);
    if (*census) return cmd_census(f, out, false);
    if (*verify) return cmd_verify(f, out);
    return cmd_census(f, out, true);
  } catch (const SceneError& e) {
    for (const SceneIssue& i : e.issues()) {
      err << f.scene << ":" << i.line << ":" << i.column << ": " << i.message << "\n";
    }
  } catch (const Error& e) {
    err << "gbsing: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "gbsing: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace gbs::cli

#include "gbsing/cli/svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace gbs::cli {

namespace {

constexpr double kPanel = 320.0;
constexpr double kMargin = 24.0;
constexpr double kTitle = 28.0;
constexpr double kLegendLine = 18.0;

const char* const kPlusFill = "#e6edf5";
const char* const kMinusFill = "#4a5563";
const char* const kCurve = "#d7301f";
const char* const kPlusMarker = "#ffd42a";
const char* const kMinusMarker = "#2ab7ca";

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return std::string(buf) == "-0.00" ? "0.00" : buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Panel {
  int chart = 0;
  double x0 = 0.0, y0 = 0.0;        // pixel origin (top left)
  double a = 0, b = 1, c = 0, d = 1;  // domain box
  bool disk = false;                // sphere charts show the unit disk only

  double px(double u) const { return x0 + (u - a) / (b - a) * kPanel; }
  double py(double v) const { return y0 + (d - v) / (d - c) * kPanel; }
  bool inside(Point2 p) const { return !disk || p.u * p.u + p.v * p.v <= 1.0; }
};

std::vector<Panel> panels_for(const Atlas& atlas) {
  std::vector<Panel> out;
  const double top = kMargin + kTitle;
  if (atlas.topology() == Topology::Sphere) {
    for (int c = 0; c < 2; ++c) {
      out.push_back({c, kMargin + c * (kPanel + kMargin), top, -1.05, 1.05, -1.05, 1.05, true});
    }
  } else {
    const Chart& ch = atlas.chart(0);
    out.push_back({0, kMargin, top, ch.a, ch.b, ch.c, ch.d, false});
  }
  return out;
}

void fill(std::ostream& os, const Figure& f, const Panel& P) {
  const int n = f.raster;
  const double du = (P.b - P.a) / n, dv = (P.d - P.c) / n;
  const double w = kPanel / n;
  os << "<g shape-rendering=\"crispEdges\">\n";
  for (int j = 0; j < n; ++j) {
    const double v = P.c + (j + 0.5) * dv;
    int run_sign = 0, run_start = 0;
    auto flush = [&](int end) {
      if (run_sign == 0) return;
      os << "<rect x=\"" << num(P.x0 + run_start * w) << "\" y=\"" << num(P.y0 + (n - 1 - j) * w) << "\" width=\""
         << num((end - run_start) * w) << "\" height=\"" << num(w) << "\" fill=\""
         << (run_sign > 0 ? kPlusFill : kMinusFill) << "\"/>\n";
    };
    for (int i = 0; i <= n; ++i) {
      int sign = 0;
      if (i < n) {
        const Point2 p{P.a + (i + 0.5) * du, v};
        if (P.inside(p)) {
          if (auto l = f.lambda({P.chart, p})) sign = *l >= 0.0 ? 1 : -1;
        }
      }
      if (sign != run_sign) {
        flush(i);
        run_sign = sign;
        run_start = i;
      }
    }
  }
  os << "</g>\n";
  if (P.disk) {
    os << "<circle cx=\"" << num(P.px(0)) << "\" cy=\"" << num(P.py(0)) << "\" r=\"" << num(P.px(1) - P.px(0))
       << "\" fill=\"none\" stroke=\"#222\" stroke-width=\"1\"/>\n";
  } else {
    os << "<rect x=\"" << num(P.x0) << "\" y=\"" << num(P.y0) << "\" width=\"" << num(kPanel) << "\" height=\""
       << num(kPanel) << "\" fill=\"none\" stroke=\"#222\" stroke-width=\"1\"/>\n";
  }
  os << "<text x=\"" << num(P.x0) << "\" y=\"" << num(P.y0 + kPanel + 14) << "\" font-size=\"11\">chart " << P.chart
     << "</text>\n";
}

/// Splits a curve into pieces that stay in one home chart without wrapping.
std::vector<std::vector<ChartPoint>> pieces(const Atlas& atlas, const SingularCurve& curve) {
  std::vector<std::vector<ChartPoint>> out;
  std::vector<ChartPoint> pts;
  for (const auto& s : curve.points) pts.push_back(atlas.home(s.at));
  if (curve.closed && !pts.empty()) pts.push_back(pts.front());
  const bool periodic = atlas.topology() == Topology::Torus;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    bool cut = out.empty();
    if (!cut) {
      const ChartPoint& q = out.back().back();
      cut = q.chart != pts[k].chart ||
            (periodic && (std::abs(q.p.u - pts[k].p.u) > M_PI || std::abs(q.p.v - pts[k].p.v) > M_PI));
    }
    if (cut) out.emplace_back();
    out.back().push_back(pts[k]);
  }
  return out;
}

void marker(std::ostream& os, double x, double y, int sign) {
  const double r = 6.0;
  const double s = sign > 0 ? -1.0 : 1.0;  // apex up for positive
  os << "<polygon points=\"" << num(x) << "," << num(y + s * r) << " " << num(x - r) << "," << num(y - s * r * 0.6)
     << " " << num(x + r) << "," << num(y - s * r * 0.6) << "\" fill=\"" << (sign > 0 ? kPlusMarker : kMinusMarker)
     << "\" stroke=\"#000\" stroke-width=\"0.8\"/>\n";
}

void polyline(std::ostream& os, const std::vector<std::pair<double, double>>& xy, const char* color, double width) {
  if (xy.size() < 2) return;
  os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << "\" points=\"";
  for (std::size_t i = 0; i < xy.size(); ++i) os << (i ? " " : "") << num(xy[i].first) << "," << num(xy[i].second);
  os << "\"/>\n";
}

/// Orthographic view of ξ̃ from a fixed oblique direction.
std::pair<double, double> project(const Vec3& x) {
  const double ca = std::cos(0.5), sa = std::sin(0.5), cb = std::cos(0.35), sb = std::sin(0.35);
  const double x1 = ca * x[0] - sa * x[1], y1 = sa * x[0] + ca * x[1];
  const double y2 = cb * y1 - sb * x[2], z2 = sb * y1 + cb * x[2];
  (void)y2;
  return {x1, z2};
}

void front_panel(std::ostream& os, const Figure& f, double x0, double y0) {
  std::vector<std::vector<Vec3>> mesh_lines;
  for (int c = 0; c < 2; ++c) {
    for (int ri = 1; ri <= 5; ++ri) {
      std::vector<Vec3> line;
      for (int k = 0; k <= 72; ++k) {
        const double t = 2 * M_PI * k / 72, r = 0.2 * ri;
        if (auto x = f.front({c, {r * std::cos(t), r * std::sin(t)}})) line.push_back(*x);
      }
      mesh_lines.push_back(std::move(line));
    }
    for (int k = 0; k < 12; ++k) {
      std::vector<Vec3> line;
      const double t = 2 * M_PI * k / 12;
      for (int i = 0; i <= 20; ++i) {
        if (auto x = f.front({c, {0.05 * i * std::cos(t), 0.05 * i * std::sin(t)}})) line.push_back(*x);
      }
      mesh_lines.push_back(std::move(line));
    }
  }
  std::vector<std::vector<Vec3>> edges;
  for (const auto& curve : f.curves) {
    for (const auto& piece : pieces(f.atlas, curve)) {
      std::vector<Vec3> line;
      for (const auto& p : piece)
        if (auto x = f.front(p)) line.push_back(*x);
      edges.push_back(std::move(line));
    }
  }
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  for (const auto* group : {&mesh_lines, &edges}) {
    for (const auto& line : *group) {
      for (const auto& x : line) {
        const auto [a, b] = project(x);
        lo_x = std::min(lo_x, a), hi_x = std::max(hi_x, a), lo_y = std::min(lo_y, b), hi_y = std::max(hi_y, b);
      }
    }
  }
  if (!(hi_x > lo_x && hi_y > lo_y)) return;
  const double scale = 0.92 * kPanel / std::max(hi_x - lo_x, hi_y - lo_y);
  const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
  auto to_px = [&](const std::vector<Vec3>& line) {
    std::vector<std::pair<double, double>> xy;
    for (const auto& x : line) {
      const auto [a, b] = project(x);
      xy.emplace_back(x0 + 0.5 * kPanel + scale * (a - cx), y0 + 0.5 * kPanel - scale * (b - cy));
    }
    return xy;
  };
  os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(kPanel) << "\" height=\""
     << num(kPanel) << "\" fill=\"#fff\" stroke=\"#222\" stroke-width=\"1\"/>\n";
  for (const auto& line : mesh_lines) polyline(os, to_px(line), "#9aa5b1", 0.6);
  for (const auto& line : edges) polyline(os, to_px(line), kCurve, 1.6);
  os << "<text x=\"" << num(x0) << "\" y=\"" << num(y0 + kPanel + 14) << "\" font-size=\"11\">front image</text>\n";
}

std::string signed_count(int x) { return x < 0 ? "(" + std::to_string(x) + ")" : std::to_string(x); }

}  // namespace

std::string identity_legend(const std::string& a3_name, bool tangent, bool closed, int chi_plus, int chi_minus,
                            int a3_plus, int a3_minus, bool empty) {
  if (empty) return "0 = 0";
  const std::string p = a3_name + "₊", m = a3_name + "₋";
  if (!closed) return p + " = " + std::to_string(a3_plus) + ", " + m + " = " + std::to_string(a3_minus);
  if (tangent) {
    return "2χ(M⁻) = " + p + " − " + m + " : " + std::to_string(2 * chi_minus) + " = " + std::to_string(a3_plus) +
           " − " + std::to_string(a3_minus);
  }
  return "χ(M⁺) − χ(M⁻) + " + p + " − " + m + " = " + signed_count(chi_plus) + " − " + signed_count(chi_minus) +
         " + " + std::to_string(a3_plus) + " − " + std::to_string(a3_minus) + " = " +
         std::to_string(chi_plus - chi_minus + a3_plus - a3_minus);
}

std::string render_svg(const Figure& f) {
  const std::vector<Panel> panels = panels_for(f.atlas);
  const int columns = static_cast<int>(panels.size()) + (f.front ? 1 : 0);
  const double width = kMargin + columns * (kPanel + kMargin);
  const double legend_top = kMargin + kTitle + kPanel + 30.0;
  const double height = legend_top + kLegendLine * static_cast<double>(f.legend.size() + 1) + kMargin;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n"
     << "<text x=\"" << num(kMargin) << "\" y=\"" << num(kMargin + 14) << "\" font-size=\"15\">" << escape(f.title)
     << "</text>\n";

  for (const Panel& P : panels) fill(os, f, P);

  auto panel_of = [&](int chart) -> const Panel& { return panels[std::min<std::size_t>(chart, panels.size() - 1)]; };
  for (const auto& curve : f.curves) {
    for (const auto& piece : pieces(f.atlas, curve)) {
      const Panel& P = panel_of(piece.front().chart);
      std::vector<std::pair<double, double>> xy;
      for (const auto& q : piece) xy.emplace_back(P.px(q.p.u), P.py(q.p.v));
      polyline(os, xy, kCurve, 1.6);
    }
  }
  for (const auto& curve : f.curves) {
    for (const auto& r : curve.a3) {
      const ChartPoint q = f.atlas.home(r.at);
      const Panel& P = panel_of(q.chart);
      marker(os, P.px(q.p.u), P.py(q.p.v), r.sign);
    }
  }
  if (f.front) front_panel(os, f, kMargin + panels.size() * (kPanel + kMargin), kMargin + kTitle);

  double y = legend_top;
  for (const auto& line : f.legend) {
    os << "<text x=\"" << num(kMargin) << "\" y=\"" << num(y) << "\" font-size=\"13\">" << escape(line)
       << "</text>\n";
    y += kLegendLine;
  }
  const double lx = kMargin;
  os << "<rect x=\"" << num(lx) << "\" y=\"" << num(y - 10) << "\" width=\"12\" height=\"12\" fill=\"" << kPlusFill
     << "\" stroke=\"#222\" stroke-width=\"0.5\"/>\n"
     << "<text x=\"" << num(lx + 16) << "\" y=\"" << num(y) << "\" font-size=\"11\">M⁺</text>\n"
     << "<rect x=\"" << num(lx + 50) << "\" y=\"" << num(y - 10) << "\" width=\"12\" height=\"12\" fill=\""
     << kMinusFill << "\"/>\n"
     << "<text x=\"" << num(lx + 66) << "\" y=\"" << num(y) << "\" font-size=\"11\">M⁻</text>\n";
  marker(os, lx + 112, y - 4, +1);
  os << "<text x=\"" << num(lx + 122) << "\" y=\"" << num(y) << "\" font-size=\"11\">positive A₃</text>\n";
  marker(os, lx + 202, y - 4, -1);
  os << "<text x=\"" << num(lx + 212) << "\" y=\"" << num(y) << "\" font-size=\"11\">negative A₃</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace gbs::cli

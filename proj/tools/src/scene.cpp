#include "gbsing/cli/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gbs::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Shortest %g text that reads back as the same double.
std::string fmt_number(double x) {
  char buf[32];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::optional<double> to_double(std::string_view s) {
  s = trim(s);
  double x = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

std::optional<int> to_int(std::string_view s) {
  s = trim(s);
  int x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

int chart_count(Topology t) { return t == Topology::Sphere ? 2 : 1; }

const std::set<std::string, std::less<>> kSections{"defs",       "surface", "blaschke", "vectorfield", "bundle",
                                                   "connection", "triangle", "output"};

struct Entry {
  std::string key;
  int chart = -1;  // -1: every chart
  std::string value;
  int line = 0, key_col = 0, value_col = 0;
};

struct Section {
  std::string name;  // empty for the header block
  int line = 0;
  std::vector<Entry> entries;
};

/// Chart-indexed expressions collected from one section.
template <std::size_t N>
struct ChartFields {
  std::array<std::string_view, N> names;
  std::map<std::pair<int, int>, Expr> given;  // (field, chart or −1)
};

class Reader {
 public:
  explicit Reader(std::string_view text) { split(text); }

  Scene read() {
    Scene s;
    header(s);
    const int nc = chart_count(s.topology);
    std::vector<const Section*> kinds;
    for (const Section& sec : sections_) {
      if (sec.name == "defs") defs(sec, s);
      else if (sec.name == "surface" || sec.name == "blaschke") surface(sec, s, nc), kinds.push_back(&sec);
      else if (sec.name == "vectorfield") vectorfield(sec, s, nc), kinds.push_back(&sec);
      else if (sec.name == "bundle") bundle(sec, s, nc), kinds.push_back(&sec);
      else if (sec.name == "connection") connection(sec, s, nc);
      else if (sec.name == "triangle") triangle(sec, s, nc);
      else if (sec.name == "output") output(sec, s);
    }
    if (kinds.empty()) {
      issue(1, 1, "scene needs one of [surface], [blaschke], [vectorfield], [bundle]");
    } else if (kinds.size() > 1) {
      issue(kinds[1]->line, 1, "only one of [surface], [blaschke], [vectorfield], [bundle] may appear");
    }
    if (s.kind == SceneKind::Surface && s.mode == SurfaceMode::Blaschke) {
      if (s.topology != Topology::Sphere) issue(kinds.empty() ? 1 : kinds[0]->line, 1, "blaschke mode needs atlas = sphere");
      if (connection_line_ > 0) issue(connection_line_, 1, "[connection] does not apply to blaschke mode");
    }
    if (!issues_.empty()) throw SceneError(issues_);
    return s;
  }

 private:
  void issue(int line, int col, std::string msg) { issues_.push_back({line, col, std::move(msg)}); }

  void split(std::string_view text) {
    sections_.push_back({"", 1, {}});
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      const std::string_view t = trim(raw);
      if (t.empty() || t.front() == '#') continue;
      const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
      if (t.front() == '[') {
        if (t.back() != ']') {
          issue(line_no, indent, "section header needs a closing ']'");
          continue;
        }
        const std::string name(trim(t.substr(1, t.size() - 2)));
        if (!kSections.count(name)) issue(line_no, indent + 1, "unknown section '" + name + "'");
        if (name != "triangle" && name != "defs") {
          for (const Section& sec : sections_)
            if (sec.name == name) issue(line_no, indent, "section [" + name + "] appears twice");
        }
        sections_.push_back({name, line_no, {}});
        continue;
      }
      const std::size_t eq = raw.find('=');
      if (eq == std::string_view::npos) {
        issue(line_no, indent, "expected 'key = value'");
        continue;
      }
      Entry e;
      e.line = line_no;
      e.key_col = indent;
      std::string_view key = trim(raw.substr(0, eq));
      const std::string_view after = raw.substr(eq + 1);
      const std::size_t lead = after.find_first_not_of(" \t");
      e.value_col = static_cast<int>(eq + 2 + (lead == std::string_view::npos ? 0 : lead));
      e.value = std::string(trim(after));
      if (const std::size_t at = key.find('@'); at != std::string_view::npos) {
        const auto c = to_int(key.substr(at + 1));
        if (!c || *c < 0) {
          issue(line_no, indent + static_cast<int>(at) + 1, "chart index must be a non-negative integer");
          continue;
        }
        e.chart = *c;
        key = trim(key.substr(0, at));
      }
      e.key = std::string(key);
      if (e.key.empty()) {
        issue(line_no, indent, "empty key");
        continue;
      }
      if (e.value.empty()) {
        issue(line_no, e.value_col, "empty value for '" + e.key + "'");
        continue;
      }
      for (const Entry& o : sections_.back().entries) {
        if (o.key == e.key && o.chart == e.chart && sections_.back().name != "defs") {
          issue(line_no, indent, "duplicate key '" + e.key + "'");
        }
      }
      sections_.back().entries.push_back(std::move(e));
    }
  }

  void unknown(const Entry& e, std::string_view section) {
    issue(e.line, e.key_col, "unknown key '" + e.key + "' in " + std::string(section));
  }

  bool no_chart(const Entry& e) {
    if (e.chart < 0) return true;
    issue(e.line, e.key_col, "'" + e.key + "' does not take a chart index");
    return false;
  }

  std::optional<Expr> expr(const Entry& e) {
    try {
      Expr x = parse_expr(e.value, symbols_);
      if (topology_ != Topology::Sphere && (x.uses(Var::X) || x.uses(Var::Y) || x.uses(Var::Z))) {
        issue(e.line, e.value_col, "x, y, z are only defined on the sphere atlas");
        return std::nullopt;
      }
      return x;
    } catch (const ExprParseError& err) {
      issue(e.line, e.value_col + static_cast<int>(err.column()) - 1, err.message());
    } catch (const Error& err) {
      issue(e.line, e.value_col, err.what());
    }
    return std::nullopt;
  }

  template <class T>
  void number(const Entry& e, T& out) {
    if (!no_chart(e)) return;
    if constexpr (std::is_same_v<T, int>) {
      if (auto v = to_int(e.value)) return void(out = *v);
      issue(e.line, e.value_col, "'" + e.key + "' needs an integer");
    } else {
      if (auto v = to_double(e.value)) return void(out = *v);
      issue(e.line, e.value_col, "'" + e.key + "' needs a number");
    }
  }

  std::optional<bool> boolean(const Entry& e) {
    if (!no_chart(e)) return std::nullopt;
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    issue(e.line, e.value_col, "'" + e.key + "' needs true or false");
    return std::nullopt;
  }

  void header(Scene& s) {
    for (const Entry& e : sections_.front().entries) {
      if (e.key == "name") {
        if (no_chart(e)) s.name = e.value;
      } else if (e.key == "atlas") {
        if (!no_chart(e)) continue;
        if (e.value == "sphere") {
          s.topology = Topology::Sphere;
        } else if (e.value == "torus") {
          s.topology = Topology::Torus;
        } else if (e.value.rfind("window", 0) == 0) {
          atlas_window(e, s);
        } else {
          issue(e.line, e.value_col, "atlas must be sphere, torus or window(a, b, c, d)");
        }
      } else if (e.key == "grid") {
        number(e, s.grid);
        if (s.grid < 4) issue(e.line, e.value_col, "grid must be at least 4");
      } else if (e.key == "max_doublings") {
        number(e, s.max_doublings);
        if (s.max_doublings < 1) issue(e.line, e.value_col, "max_doublings must be at least 1");
      } else if (e.key == "jet_order") {
        number(e, s.jet_order);
        if (s.jet_order < 2) issue(e.line, e.value_col, "jet_order must be at least 2");
      } else if (e.key == "tol_global") {
        number(e, s.tol_global);
      } else if (e.key == "tol_triangle") {
        number(e, s.tol_triangle);
      } else if (e.key == "quadrature_rtol") {
        number(e, s.quadrature_rtol);
      } else if (e.key == "chi_rounding") {
        number(e, s.chi_rounding);
      } else {
        unknown(e, "the scene header");
      }
    }
    topology_ = s.topology;
  }

  void atlas_window(const Entry& e, Scene& s) {
    const std::string_view v = e.value;
    const std::size_t open = v.find('('), close = v.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
        !trim(v.substr(close + 1)).empty()) {
      issue(e.line, e.value_col, "window needs four numbers: window(a, b, c, d)");
      return;
    }
    std::vector<double> xs;
    std::string_view inner = v.substr(open + 1, close - open - 1);
    while (true) {
      const std::size_t comma = inner.find(',');
      const auto x = to_double(inner.substr(0, comma));
      if (!x) {
        issue(e.line, e.value_col, "window bounds must be numbers");
        return;
      }
      xs.push_back(*x);
      if (comma == std::string_view::npos) break;
      inner.remove_prefix(comma + 1);
    }
    if (xs.size() != 4 || !(xs[0] < xs[1]) || !(xs[2] < xs[3])) {
      issue(e.line, e.value_col, "window needs a < b and c < d");
      return;
    }
    s.topology = Topology::Window;
    s.window = {xs[0], xs[1], xs[2], xs[3]};
  }

  void defs(const Section& sec, Scene&) {
    for (const Entry& e : sec.entries) {
      if (!no_chart(e)) continue;
      static const std::set<std::string, std::less<>> reserved{"u", "v", "t", "x", "y", "z", "pi",
                                                               "sqrt", "sin", "cos", "exp", "log"};
      if (reserved.count(e.key) || !(std::isalpha(static_cast<unsigned char>(e.key[0])) || e.key[0] == '_')) {
        issue(e.line, e.key_col, "'" + e.key + "' cannot be defined");
        continue;
      }
      if (auto x = expr(e)) symbols_[e.key] = *x;
    }
  }

  /// Reads the chart fields named in `names`, filling defaults for missing ones.
  template <std::size_t N>
  std::vector<std::array<Expr, N>> chart_fields(const Section& sec, const std::array<const char*, N>& names,
                                                const std::array<const char*, N>& defaults, int nc,
                                                std::vector<Entry>& rest) {
    std::map<std::pair<int, int>, Expr> given;
    std::set<int> failed;
    for (const Entry& e : sec.entries) {
      const auto it = std::find_if(names.begin(), names.end(), [&](const char* n) { return e.key == n; });
      if (it == names.end()) {
        rest.push_back(e);
        continue;
      }
      if (e.chart >= nc) {
        issue(e.line, e.key_col, "chart " + std::to_string(e.chart) + " does not exist");
        continue;
      }
      const int field = static_cast<int>(it - names.begin());
      if (auto x = expr(e)) given[{field, e.chart}] = *x;
      else failed.insert(field);
    }
    std::vector<std::array<Expr, N>> out(nc);
    for (std::size_t f = 0; f < N; ++f) {
      for (int c = 0; c < nc; ++c) {
        const int fi = static_cast<int>(f);
        if (auto it = given.find({fi, c}); it != given.end()) {
          out[c][f] = it->second;
        } else if (auto all = given.find({fi, -1}); all != given.end()) {
          out[c][f] = all->second;
        } else if (defaults[f]) {
          out[c][f] = parse_expr(defaults[f]);
        } else if (!failed.count(fi)) {
          issue(sec.line, 1, "[" + sec.name + "] is missing '" + names[f] + "'" +
                                 (nc > 1 ? " for chart " + std::to_string(c) : ""));
          break;
        }
      }
    }
    return out;
  }

  void surface(const Section& sec, Scene& s, int nc) {
    s.kind = SceneKind::Surface;
    s.mode = sec.name == "blaschke" ? SurfaceMode::Blaschke : SurfaceMode::Shape;
    std::vector<Entry> rest;
    s.surface = chart_fields<3>(sec, {"x", "y", "z"}, {nullptr, nullptr, nullptr}, nc, rest);
    for (const Entry& e : rest) {
      if (e.key == "mode" && no_chart(e)) {
        if (e.value == "shape" && sec.name == "surface") s.mode = SurfaceMode::Shape;
        else if (e.value == "blaschke") s.mode = SurfaceMode::Blaschke;
        else issue(e.line, e.value_col, "mode must be shape or blaschke");
      } else if (e.key == "metric" && no_chart(e)) {
        if (e.value == "first") s.blaschke_metric = false;
        else if (e.value == "blaschke") s.blaschke_metric = true;
        else issue(e.line, e.value_col, "metric must be first or blaschke");
      } else if (e.key != "mode" && e.key != "metric") {
        unknown(e, "[" + sec.name + "]");
      }
    }
    if (s.blaschke_metric && s.mode != SurfaceMode::Blaschke) {
      issue(sec.line, 1, "metric = blaschke needs mode = blaschke");
    }
  }

  void vectorfield(const Section& sec, Scene& s, int nc) {
    s.kind = SceneKind::VectorField;
    std::vector<Entry> rest;
    s.field = chart_fields<2>(sec, {"X1", "X2"}, {nullptr, nullptr}, nc, rest);
    const char* g = s.topology == Topology::Sphere ? "4/(1 + u^2 + v^2)^2" : "1";
    std::vector<Entry> extra;
    Section metric{sec.name, sec.line, rest};
    s.metric = chart_fields<3>(metric, {"g11", "g12", "g22"}, {g, "0", g}, nc, extra);
    for (const Entry& e : extra) unknown(e, "[vectorfield]");
  }

  void bundle(const Section& sec, Scene& s, int nc) {
    s.kind = SceneKind::Bundle;
    std::vector<Entry> rest, extra;
    s.phi = chart_fields<4>(sec, {"phi11", "phi12", "phi21", "phi22"}, {nullptr, nullptr, nullptr, nullptr}, nc,
                            rest);
    Section metric{sec.name, sec.line, rest};
    s.metric = chart_fields<3>(metric, {"g11", "g12", "g22"}, {"1", "0", "1"}, nc, extra);
    std::optional<ConnectionKind> conn;
    int conn_line = sec.line, conn_col = 1;
    for (const Entry& e : extra) {
      if (e.key == "tangent") {
        if (auto b = boolean(e)) s.tangent = *b;
      } else if (e.key == "connection" && no_chart(e)) {
        conn_line = e.line;
        conn_col = e.value_col;
        if (e.value == "levi-civita") conn = ConnectionKind::LeviCivita;
        else if (e.value == "flat") conn = ConnectionKind::OrthonormalFlat;
        else issue(e.line, e.value_col, "connection must be levi-civita or flat");
      } else if (e.key != "connection") {
        unknown(e, "[bundle]");
      }
    }
    s.connection = conn.value_or(s.tangent ? ConnectionKind::LeviCivita : ConnectionKind::OrthonormalFlat);
    if (s.connection == ConnectionKind::LeviCivita && !s.tangent) {
      issue(conn_line, conn_col, "the Levi-Civita connection needs tangent = true");
    }
  }

  void connection(const Section& sec, Scene& s, int nc) {
    connection_line_ = sec.line;
    std::vector<Entry> beta_entries, ambient_entries;
    for (const Entry& e : sec.entries) {
      if (e.key == "beta_u" || e.key == "beta_v") beta_entries.push_back(e);
      else if (e.key == "ambient_x" || e.key == "ambient_y" || e.key == "ambient_z") ambient_entries.push_back(e);
      else unknown(e, "[connection]");
    }
    if (!beta_entries.empty() && !ambient_entries.empty()) {
      issue(sec.line, 1, "[connection] takes either beta_u, beta_v or ambient_x, ambient_y, ambient_z");
      return;
    }
    std::vector<Entry> none;
    if (!beta_entries.empty()) {
      s.beta = chart_fields<2>({sec.name, sec.line, beta_entries}, {"beta_u", "beta_v"}, {"0", "0"}, nc, none);
    } else if (!ambient_entries.empty()) {
      if (s.topology != Topology::Sphere) issue(sec.line, 1, "an ambient 1-form needs atlas = sphere");
      const auto a = chart_fields<3>({sec.name, sec.line, ambient_entries}, {"ambient_x", "ambient_y", "ambient_z"},
                                     {"0", "0", "0"}, nc, none);
      for (const Entry& e : ambient_entries)
        if (e.chart >= 0) issue(e.line, e.key_col, "'" + e.key + "' does not take a chart index");
      s.ambient_beta = a[0];
    } else {
      issue(sec.line, 1, "[connection] is empty");
    }
  }

  std::optional<Point2> corner(const Entry& e) {
    const std::size_t comma = e.value.find(',');
    if (comma != std::string::npos) {
      const auto u = to_double(std::string_view(e.value).substr(0, comma));
      const auto v = to_double(std::string_view(e.value).substr(comma + 1));
      if (u && v) return Point2{*u, *v};
    }
    issue(e.line, e.value_col, "corner '" + e.key + "' needs 'u, v'");
    return std::nullopt;
  }

  void triangle(const Section& sec, Scene& s, int nc) {
    TriangleSpec t;
    std::array<bool, 3> have{};
    for (const Entry& e : sec.entries) {
      if (!no_chart(e)) continue;
      if (e.key == "chart") {
        number(e, t.chart);
        if (t.chart < 0 || t.chart >= nc) issue(e.line, e.value_col, "chart " + e.value + " does not exist");
      } else if (e.key == "a" || e.key == "b" || e.key == "c") {
        const int k = e.key[0] - 'a';
        if (auto p = corner(e)) t.corners[k] = *p, have[k] = true;
      } else {
        unknown(e, "[triangle]");
      }
    }
    for (int k = 0; k < 3; ++k)
      if (!have[k]) issue(sec.line, 1, std::string("[triangle] is missing corner '") + char('a' + k) + "'");
    s.triangles.push_back(t);
  }

  void output(const Section& sec, Scene& s) {
    for (const Entry& e : sec.entries) {
      if (!no_chart(e)) continue;
      if (e.key == "report") s.report_path = e.value;
      else if (e.key == "svg") s.svg_path = e.value;
      else unknown(e, "[output]");
    }
  }

  std::vector<Section> sections_;
  std::vector<SceneIssue> issues_;
  SymbolTable symbols_;
  Topology topology_ = Topology::Sphere;
  int connection_line_ = 0;
};

std::string issues_text(const std::vector<SceneIssue>& issues) {
  std::string out = "scene has " + std::to_string(issues.size()) + " error(s)";
  for (const auto& i : issues) out += "\n  " + std::to_string(i.line) + ":" + std::to_string(i.column) + ": " + i.message;
  return out;
}

template <std::size_t N>
bool same_exprs(const std::vector<std::array<Expr, N>>& a, const std::vector<std::array<Expr, N>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t c = 0; c < a.size(); ++c)
    for (std::size_t i = 0; i < N; ++i)
      if (a[c][i].str() != b[c][i].str()) return false;
  return true;
}

template <std::size_t N>
void write_fields(std::ostream& os, const std::vector<std::array<Expr, N>>& f, const std::array<const char*, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    bool uniform = true;
    for (const auto& chart : f) uniform = uniform && chart[i].str() == f[0][i].str();
    if (uniform) {
      os << names[i] << " = " << f[0][i].str() << "\n";
    } else {
      for (std::size_t c = 0; c < f.size(); ++c) os << names[i] << "@" << c << " = " << f[c][i].str() << "\n";
    }
  }
}

}  // namespace

Atlas Scene::atlas() const {
  switch (topology) {
    case Topology::Sphere:
      return Atlas::sphere();
    case Topology::Torus:
      return Atlas::torus();
    case Topology::Window:
      break;
  }
  return Atlas::window(window[0], window[1], window[2], window[3]);
}

bool operator==(const Scene& a, const Scene& b) {
  auto same_tri = [](const std::vector<TriangleSpec>& x, const std::vector<TriangleSpec>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].chart != y[i].chart) return false;
      for (int k = 0; k < 3; ++k)
        if (x[i].corners[k].u != y[i].corners[k].u || x[i].corners[k].v != y[i].corners[k].v) return false;
    }
    return true;
  };
  const bool ambient_same =
      a.ambient_beta.has_value() == b.ambient_beta.has_value() &&
      (!a.ambient_beta || same_exprs<3>(std::vector{*a.ambient_beta}, std::vector{*b.ambient_beta}));
  return a.name == b.name && a.topology == b.topology && a.window == b.window && a.kind == b.kind &&
         a.mode == b.mode && a.blaschke_metric == b.blaschke_metric && same_exprs(a.surface, b.surface) &&
         same_exprs(a.field, b.field) && same_exprs(a.metric, b.metric) && same_exprs(a.phi, b.phi) &&
         a.tangent == b.tangent && a.connection == b.connection && same_exprs(a.beta, b.beta) && ambient_same &&
         same_tri(a.triangles, b.triangles) && a.grid == b.grid && a.max_doublings == b.max_doublings &&
         a.jet_order == b.jet_order && a.tol_global == b.tol_global && a.tol_triangle == b.tol_triangle &&
         a.quadrature_rtol == b.quadrature_rtol && a.chi_rounding == b.chi_rounding &&
         a.report_path == b.report_path && a.svg_path == b.svg_path;
}

SceneError::SceneError(std::vector<SceneIssue> issues)
    : Error(ErrorKind::Parse, issues_text(issues)), issues_(std::move(issues)) {}

Scene parse_scene(std::string_view text) { return Reader(text).read(); }

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read scene file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

std::string serialize_scene(const Scene& s) {
  std::ostringstream os;
  os << "name = " << s.name << "\n";
  switch (s.topology) {
    case Topology::Sphere:
      os << "atlas = sphere\n";
      break;
    case Topology::Torus:
      os << "atlas = torus\n";
      break;
    case Topology::Window:
      os << "atlas = window(" << fmt_number(s.window[0]) << ", " << fmt_number(s.window[1]) << ", "
         << fmt_number(s.window[2]) << ", " << fmt_number(s.window[3]) << ")\n";
      break;
  }
  os << "grid = " << s.grid << "\n"
     << "max_doublings = " << s.max_doublings << "\n"
     << "jet_order = " << s.jet_order << "\n"
     << "tol_global = " << fmt_number(s.tol_global) << "\n"
     << "tol_triangle = " << fmt_number(s.tol_triangle) << "\n"
     << "quadrature_rtol = " << fmt_number(s.quadrature_rtol) << "\n"
     << "chi_rounding = " << fmt_number(s.chi_rounding) << "\n";
  switch (s.kind) {
    case SceneKind::Surface:
      os << "\n[surface]\nmode = " << (s.mode == SurfaceMode::Blaschke ? "blaschke" : "shape") << "\n";
      if (s.blaschke_metric) os << "metric = blaschke\n";
      write_fields<3>(os, s.surface, {"x", "y", "z"});
      break;
    case SceneKind::VectorField:
      os << "\n[vectorfield]\n";
      write_fields<2>(os, s.field, {"X1", "X2"});
      write_fields<3>(os, s.metric, {"g11", "g12", "g22"});
      break;
    case SceneKind::Bundle:
      os << "\n[bundle]\n";
      write_fields<4>(os, s.phi, {"phi11", "phi12", "phi21", "phi22"});
      write_fields<3>(os, s.metric, {"g11", "g12", "g22"});
      os << "tangent = " << (s.tangent ? "true" : "false") << "\n"
         << "connection = " << (s.connection == ConnectionKind::LeviCivita ? "levi-civita" : "flat") << "\n";
      break;
  }
  if (!s.beta.empty()) {
    os << "\n[connection]\n";
    write_fields<2>(os, s.beta, {"beta_u", "beta_v"});
  } else if (s.ambient_beta) {
    os << "\n[connection]\n";
    write_fields<3>(os, std::vector{*s.ambient_beta}, {"ambient_x", "ambient_y", "ambient_z"});
  }
  for (const TriangleSpec& t : s.triangles) {
    os << "\n[triangle]\nchart = " << t.chart << "\n";
    for (int k = 0; k < 3; ++k) {
      os << char('a' + k) << " = " << fmt_number(t.corners[k].u) << ", " << fmt_number(t.corners[k].v) << "\n";
    }
  }
  if (!s.report_path.empty() || !s.svg_path.empty()) {
    os << "\n[output]\n";
    if (!s.report_path.empty()) os << "report = " << s.report_path << "\n";
    if (!s.svg_path.empty()) os << "svg = " << s.svg_path << "\n";
  }
  return os.str();
}

BundleHom SceneModel::bundle(int jet_order) const {
  if (blaschke) return affine_shape_operator(blaschke, blaschke_metric, jet_order);
  return BundleHom(atlas, source, jet_order);
}

SceneModel build_model(const Scene& s) {
  SceneModel m{s.atlas(), std::nullopt, std::nullopt, nullptr, nullptr};
  std::shared_ptr<FramedSource> framed;
  switch (s.kind) {
    case SceneKind::Surface: {
      m.surface = SurfaceEmbedding(m.atlas, s.surface);
      if (s.mode == SurfaceMode::Blaschke) {
        m.blaschke = std::make_shared<BlaschkeStructure>(*m.surface);
        m.blaschke_metric = s.blaschke_metric;
        return m;
      }
      const double imm = m.surface->min_immersion();
      if (!(imm > 1e-8)) throw Error(ErrorKind::ImmersionFailure, "|f_u × f_v| drops to " + std::to_string(imm));
      framed = std::make_shared<ShapeOperatorSource>(*m.surface);
      break;
    }
    case SceneKind::VectorField: {
      std::vector<TangentVectorField::ChartData> data;
      for (std::size_t c = 0; c < s.field.size(); ++c) data.push_back({s.field[c], s.metric[c]});
      m.field = TangentVectorField(m.atlas, data);
      framed = std::make_shared<RotationSource>(*m.field);
      break;
    }
    case SceneKind::Bundle: {
      std::vector<ExprSource::ChartExprs> charts;
      for (std::size_t c = 0; c < s.phi.size(); ++c) charts.push_back({s.metric[c], s.phi[c]});
      framed = std::make_shared<ExprSource>(m.atlas, charts, s.tangent, s.connection);
      break;
    }
  }
  if (!s.beta.empty()) {
    framed->set_connection_perturbation(s.beta, m.atlas);
    m.perturbed = true;
  } else if (s.ambient_beta) {
    framed->set_ambient_connection_perturbation(*s.ambient_beta, m.atlas);
    m.perturbed = true;
  }
  m.source = framed;
  return m;
}

}  // namespace gbs::cli

#include "gbsing/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "gbsing/error.hpp"

namespace gbs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

class MeshBuilder {
 public:
  explicit MeshBuilder(Mesh& m) : m_(m) {}

  int vertex(ChartPoint cp) {
    m_.vertices.push_back(cp);
    return static_cast<int>(m_.vertices.size()) - 1;
  }

  void triangle(int chart, std::array<int, 3> v, std::array<Point2, 3> p) {
    if (cross(p[1] - p[0], p[2] - p[0]) < 0) {
      std::swap(v[1], v[2]);
      std::swap(p[1], p[2]);
    }
    MeshTriangle t;
    t.v = v;
    t.chart = chart;
    t.local = p;
    const int id = static_cast<int>(m_.triangles.size());
    for (int k = 0; k < 3; ++k) {
      const int a = v[k], b = v[(k + 1) % 3];
      const auto key = std::minmax(a, b);
      auto it = edge_ids_.find(key);
      int e;
      if (it == edge_ids_.end()) {
        e = static_cast<int>(m_.edges.size());
        MeshEdge me;
        me.v = {a, b};
        me.chart = chart;
        me.local = {p[k], p[(k + 1) % 3]};
        me.tri = {id, -1};
        m_.edges.push_back(me);
        edge_ids_.emplace(key, e);
      } else {
        e = it->second;
        if (m_.edges[e].tri[1] != -1) {
          throw Error(ErrorKind::GluingError, "edge shared by more than two triangles");
        }
        m_.edges[e].tri[1] = id;
      }
      t.e[k] = e;
    }
    m_.triangles.push_back(t);
  }

 private:
  Mesh& m_;
  std::map<std::pair<int, int>, int> edge_ids_;
};

void build_grid(Mesh& m, const Chart& c, int N, bool periodic) {
  MeshBuilder b(m);
  const int stride = periodic ? N : N + 1;
  auto id = [&](int i, int j) { return (j % stride) * stride + (i % stride); };
  auto at = [&](int i, int j) {
    return Point2{c.a + (c.b - c.a) * i / N, c.c + (c.d - c.c) * j / N};
  };
  for (int j = 0; j < stride; ++j)
    for (int i = 0; i < stride; ++i) b.vertex({c.id, at(i, j)});
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      const Point2 p00 = at(i, j), p10 = at(i + 1, j), p01 = at(i, j + 1), p11 = at(i + 1, j + 1);
      b.triangle(c.id, {v00, v10, v11}, {p00, p10, p11});
      b.triangle(c.id, {v00, v11, v01}, {p00, p11, p01});
    }
  }
}

void build_sphere(Mesh& m, int N) {
  MeshBuilder b(m);
  const int rings = std::max(2, N / 2);
  auto count = [](int k) { return k == 0 ? 1 : 6 * k; };
  auto pos = [&](int k, int j) {
    if (k == 0) return Point2{0.0, 0.0};
    const double r = static_cast<double>(k) / rings;
    const double th = kTwoPi * j / count(k);
    return Point2{r * std::cos(th), r * std::sin(th)};
  };
  // ring_ids[chart][k][j]
  std::vector<std::vector<std::vector<int>>> ids(2, std::vector<std::vector<int>>(rings + 1));
  for (int chart = 0; chart < 2; ++chart) {
    for (int k = 0; k <= rings; ++k) {
      const int n = count(k);
      ids[chart][k].resize(n);
      for (int j = 0; j < n; ++j) {
        if (chart == 1 && k == rings) {
          // the seam: chart-1 angle θ is chart-0 angle −θ
          ids[1][k][j] = ids[0][k][(n - j) % n];
        } else {
          ids[chart][k][j] = b.vertex({chart, pos(k, j)});
        }
      }
    }
  }
  for (int chart = 0; chart < 2; ++chart) {
    for (int k = 1; k <= rings; ++k) {
      const int a = count(k - 1), o = count(k);
      const auto& in = ids[chart][k - 1];
      const auto& out = ids[chart][k];
      int i = 0, j = 0;
      while (i < a || j < o) {
        const double next_in = (k == 1) ? 2.0 : static_cast<double>(i + 1) / a;
        const double next_out = static_cast<double>(j + 1) / o;
        const bool advance_out = k == 1 || i >= a || (j < o && next_out <= next_in);
        if (advance_out) {
          b.triangle(chart, {in[i % a], out[j % o], out[(j + 1) % o]},
                     {pos(k - 1, i % a), pos(k, j), pos(k, j + 1)});
          ++j;
        } else {
          b.triangle(chart, {in[i % a], out[j % o], in[(i + 1) % a]},
                     {pos(k - 1, i), pos(k, j), pos(k - 1, i + 1)});
          ++i;
        }
        if (k == 1 && j >= o) break;
      }
    }
  }
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

Mesh build_mesh(const Atlas& atlas, int N) {
  if (N < 16) throw Error(ErrorKind::InvalidArgument, "grid resolution must be at least 16");
  Mesh m;
  m.topology = atlas.topology();
  m.resolution = N;
  switch (atlas.topology()) {
    case Topology::Sphere: build_sphere(m, N); break;
    case Topology::Torus: build_grid(m, atlas.chart(0), N, true); break;
    case Topology::Window: build_grid(m, atlas.chart(0), N, false); break;
  }
  return m;
}

// ------------------------------------------------------------ RegionComplex

RegionComplex::RegionComplex(SignedMesh m) : m_(std::move(m)) { compute_components(); }

int RegionComplex::euler_char_total() const {
  return static_cast<int>(m_.mesh.vertices.size()) - static_cast<int>(m_.mesh.edges.size()) +
         static_cast<int>(m_.mesh.triangles.size());
}

int RegionComplex::euler_char(int label) const {
  // Split complex: the label's side of every mixed triangle is one face; the
  // cut adds the crossing vertices, the half edges and the segments.
  long V = 0, E = 0, F = 0;
  for (auto s : m_.sign) V += s == label;
  V += static_cast<long>(m_.crossings.size());
  for (const MeshEdge& e : m_.mesh.edges) {
    const int a = m_.sign[e.v[0]], b = m_.sign[e.v[1]];
    if (a == label && b == label) ++E;
    else if (a != b) ++E;  // the half edge on the label's side
  }
  E += static_cast<long>(m_.segments.size());
  for (const MeshTriangle& t : m_.mesh.triangles) {
    const int n = (m_.sign[t.v[0]] == label) + (m_.sign[t.v[1]] == label) + (m_.sign[t.v[2]] == label);
    if (n > 0) ++F;
  }
  return static_cast<int>(V - E + F);
}

int RegionComplex::euler_char_subcomplex(int label) const {
  long V = 0, E = 0, F = 0;
  for (auto s : m_.sign) V += s == label;
  for (const MeshEdge& e : m_.mesh.edges) E += m_.sign[e.v[0]] == label && m_.sign[e.v[1]] == label;
  for (const MeshTriangle& t : m_.mesh.triangles)
    F += m_.sign[t.v[0]] == label && m_.sign[t.v[1]] == label && m_.sign[t.v[2]] == label;
  return static_cast<int>(V - E + F);
}

void RegionComplex::compute_components() {
  const int nv = static_cast<int>(m_.mesh.vertices.size());
  UnionFind uf(nv);
  for (const MeshEdge& e : m_.mesh.edges)
    if (m_.sign[e.v[0]] == m_.sign[e.v[1]]) uf.unite(e.v[0], e.v[1]);
  component_.assign(nv, -1);
  std::map<int, int> plus_ids, minus_ids;
  for (int v = 0; v < nv; ++v) {
    auto& ids = m_.sign[v] > 0 ? plus_ids : minus_ids;
    const int root = uf.find(v);
    auto it = ids.find(root);
    if (it == ids.end()) it = ids.emplace(root, static_cast<int>(ids.size())).first;
    component_[v] = it->second;
  }
  components_plus_ = static_cast<int>(plus_ids.size());
  components_minus_ = static_cast<int>(minus_ids.size());

  // Curves: connected components of the segment graph.
  const int nc = static_cast<int>(m_.crossings.size());
  UnionFind cuf(std::max(nc, 1));
  for (const auto& s : m_.segments) cuf.unite(s.from, s.to);
  int curves = 0;
  for (int c = 0; c < nc; ++c) curves += cuf.find(c) == c;
  curve_count_ = curves;

  // Per-region χ and PL area estimate.
  regions_.clear();
  for (int label : {+1, -1}) {
    const int count = label > 0 ? components_plus_ : components_minus_;
    for (int k = 0; k < count; ++k) regions_.push_back({label, k, 0, 0.0});
  }
  auto region_index = [&](int label, int comp) {
    return label > 0 ? comp : components_plus_ + comp;
  };
  std::vector<long> V(regions_.size(), 0), E(regions_.size(), 0), F(regions_.size(), 0);
  for (int v = 0; v < nv; ++v) ++V[region_index(m_.sign[v], component_[v])];
  for (const MeshEdge& e : m_.mesh.edges) {
    const int a = m_.sign[e.v[0]], b = m_.sign[e.v[1]];
    if (a == b) {
      ++E[region_index(a, component_[e.v[0]])];
    } else {
      // crossing vertex and two half edges, one per side
      for (int k = 0; k < 2; ++k) {
        const int r = region_index(m_.sign[e.v[k]], component_[e.v[k]]);
        ++V[r];
        ++E[r];
      }
    }
  }
  for (const MeshTriangle& t : m_.mesh.triangles) {
    std::vector<int> seen;
    for (int k = 0; k < 3; ++k) {
      const int r = region_index(m_.sign[t.v[k]], component_[t.v[k]]);
      if (std::find(seen.begin(), seen.end(), r) == seen.end()) seen.push_back(r);
    }
    for (int r : seen) ++F[r];
    if (seen.size() == 2)
      for (int r : seen) ++E[r];  // the segment, counted on both sides
    // PL area of ∫|λ| du dv: centroid rule per triangle, split by vertex share
    const double area = 0.5 * std::abs(cross(t.local[1] - t.local[0], t.local[2] - t.local[0]));
    for (int k = 0; k < 3; ++k) {
      const int r = region_index(m_.sign[t.v[k]], component_[t.v[k]]);
      regions_[r].area += area * std::abs(m_.vertex_lambda[t.v[k]]) / 3.0;
    }
  }
  for (std::size_t r = 0; r < regions_.size(); ++r) regions_[r].euler = static_cast<int>(V[r] - E[r] + F[r]);
}

int RegionComplex::component_count(int label) const {
  return label > 0 ? components_plus_ : components_minus_;
}

RegionComplex build_complex(SignedMesh m, const Atlas& atlas) {
  if (m.sign.size() != m.mesh.vertices.size()) {
    throw Error(ErrorKind::GluingError, "vertex sign table does not match the mesh");
  }
  if (m.mesh.closed()) {
    for (const MeshEdge& e : m.mesh.edges) {
      if (e.tri[1] < 0) throw Error(ErrorKind::GluingError, "closed mesh has a boundary edge");
    }
  }
  RegionComplex c(std::move(m));
  if (c.mesh().closed() && c.euler_char_total() != atlas.euler_characteristic()) {
    throw Error(ErrorKind::GluingError, "mesh has χ = " + std::to_string(c.euler_char_total()) +
                                            ", expected " +
                                            std::to_string(atlas.euler_characteristic()));
  }
  for (int label : {+1, -1}) {
    const int split = c.euler_char(label);
    const int sub = c.euler_char_subcomplex(label);
    if (split != sub) {
      throw Error(ErrorKind::GluingError, "split-complex χ = " + std::to_string(split) +
                                              " disagrees with subcomplex χ = " + std::to_string(sub));
    }
    int per_region = 0;
    for (const auto& r : c.regions())
      if (r.label == label) per_region += r.euler;
    if (per_region != split) {
      throw Error(ErrorKind::GluingError, "per-region χ does not add up");
    }
  }
  return c;
}

std::string TopologySummary::str() const {
  std::ostringstream os;
  os << "χ(M+)=" << chi_plus << " χ(M-)=" << chi_minus << " components(+)=" << components_plus
     << " components(-)=" << components_minus << " curves=" << curves;
  return os.str();
}

TopologySummary summarize(const RegionComplex& c) {
  TopologySummary s;
  s.chi_plus = c.euler_char(+1);
  s.chi_minus = c.euler_char(-1);
  s.components_plus = c.component_count(+1);
  s.components_minus = c.component_count(-1);
  s.curves = c.curve_count();
  return s;
}

}  // namespace gbs

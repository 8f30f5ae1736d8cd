#include "gbsing/fields3d.hpp"

#include <algorithm>
#include <cmath>

#include "gbsing/error.hpp"

namespace gbs {

Jet dot(const Vec3J& a, const Vec3J& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3J cross(const Vec3J& a, const Vec3J& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Jet det3(const Vec3J& a, const Vec3J& b, const Vec3J& c) { return dot(a, cross(b, c)); }

Vec3J derivative(const Vec3J& a, int which) {
  return {a[0].derivative(which), a[1].derivative(which), a[2].derivative(which)};
}

Vec3J truncated(const Vec3J& a, int order) {
  return {a[0].truncated(order), a[1].truncated(order), a[2].truncated(order)};
}

Vec3J operator*(const Jet& s, const Vec3J& a) { return {s * a[0], s * a[1], s * a[2]}; }
Vec3J operator+(const Vec3J& a, const Vec3J& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3J operator-(const Vec3J& a, const Vec3J& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 value(const Vec3J& a) { return {a[0].value(), a[1].value(), a[2].value()}; }

// --------------------------------------------------------- SurfaceEmbedding

SurfaceEmbedding::SurfaceEmbedding(Atlas atlas, std::vector<std::array<Expr, 3>> per_chart)
    : atlas_(std::move(atlas)), exprs_(std::move(per_chart)) {
  if (exprs_.size() != atlas_.charts().size()) {
    throw Error(ErrorKind::InvalidArgument, "surface needs one expression triple per chart");
  }
  for (const auto& e : exprs_) compiled_.push_back({CompiledExpr(e[0]), CompiledExpr(e[1]), CompiledExpr(e[2])});
}

SurfaceEmbedding SurfaceEmbedding::uniform(Atlas atlas, std::array<Expr, 3> f) {
  std::vector<std::array<Expr, 3>> per(atlas.charts().size(), f);
  return SurfaceEmbedding(std::move(atlas), std::move(per));
}

Vec3J SurfaceEmbedding::jets(int chart, Point2 p, int order) const {
  const auto vars = atlas_.variables(chart, p, order);
  const auto& c = compiled_.at(chart);
  return {c[0].eval(vars), c[1].eval(vars), c[2].eval(vars)};
}

Vec3 SurfaceEmbedding::position(int chart, Point2 p) const {
  const auto vars = atlas_.variables(chart, p);
  const auto& c = compiled_.at(chart);
  return {c[0].eval(vars), c[1].eval(vars), c[2].eval(vars)};
}

SurfaceEmbedding SurfaceEmbedding::transformed(const std::array<double, 9>& A, const Vec3& b) const {
  std::vector<std::array<Expr, 3>> out;
  for (const auto& f : exprs_) {
    std::array<Expr, 3> g;
    for (int i = 0; i < 3; ++i) {
      g[i] = Expr::constant(b[i]);
      for (int j = 0; j < 3; ++j)
        if (A[3 * i + j] != 0.0) g[i] = g[i] + Expr::constant(A[3 * i + j]) * f[j];
    }
    out.push_back(g);
  }
  return SurfaceEmbedding(atlas_, std::move(out));
}

double SurfaceEmbedding::min_immersion(int n) const {
  double best = 1e300;
  for (const Chart& c : atlas_.charts()) {
    const auto box = atlas_.weight_support(c.id);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Point2 p{box[0] + (box[1] - box[0]) * (i + 0.5) / n, box[2] + (box[3] - box[2]) * (j + 0.5) / n};
        if (atlas_.weight(c.id, p) <= 0.0) continue;
        const Vec3J f = jets(c.id, p, 1);
        const Vec3 N = value(cross(derivative(f, 0), derivative(f, 1)));
        best = std::min(best, std::sqrt(N[0] * N[0] + N[1] * N[1] + N[2] * N[2]));
      }
  }
  return best;
}

namespace {

Sym2J first_fundamental_form(const Vec3J& f) {
  const Vec3J fu = derivative(f, 0);
  const Vec3J fv = derivative(f, 1);
  return {dot(fu, fu), dot(fu, fv), dot(fv, fv)};
}

Vec3J unit(const Vec3J& n) {
  const Jet len2 = dot(n, n);
  if (!(len2.value() > 1e-24)) throw Error(ErrorKind::ImmersionFailure, "normal vector vanishes");
  return reciprocal(sqrt(len2)) * n;
}

}  // namespace

// ------------------------------------------------------ ShapeOperatorSource

ShapeOperatorSource::ShapeOperatorSource(SurfaceEmbedding s, ConnectionKind connection)
    : FramedSource(true, connection), s_(std::move(s)) {}

Sym2J ShapeOperatorSource::frame_metric(int chart, Point2 p, int order) const {
  return first_fundamental_form(s_.jets(chart, p, order + 1));
}

Mat2J ShapeOperatorSource::frame_phi(int chart, Point2 p, int order) const {
  const Vec3J f = s_.jets(chart, p, order + 2);
  const Vec3J fu = derivative(f, 0), fv = derivative(f, 1);
  const Vec3J fuu = derivative(fu, 0), fuv = derivative(fu, 1), fvv = derivative(fv, 1);
  const Vec3J nu = unit(cross(truncated(fu, order), truncated(fv, order)));
  const Sym2J g = first_fundamental_form(f).truncated(order);
  const Mat2J II{{dot(nu, fuu), dot(nu, fuv), dot(nu, fuv), dot(nu, fvv)}};
  return inverse(g.full()) * II;
}

// ------------------------------------------------------- TangentVectorField

TangentVectorField::TangentVectorField(Atlas atlas, std::vector<ChartData> charts)
    : atlas_(std::move(atlas)) {
  if (charts.size() != atlas_.charts().size()) {
    throw Error(ErrorKind::InvalidArgument, "vector field needs data for every chart");
  }
  for (const auto& c : charts) {
    X_.push_back({CompiledExpr(c.X[0]), CompiledExpr(c.X[1])});
    g_.push_back({CompiledExpr(c.metric[0]), CompiledExpr(c.metric[1]), CompiledExpr(c.metric[2])});
  }
}

TangentVectorField::TangentVectorField(SurfaceEmbedding embedding, std::array<Expr, 3> ambient)
    : embedding_(std::move(embedding)), atlas_(embedding_->atlas()) {
  for (int i = 0; i < 3; ++i) V_[i] = CompiledExpr(ambient[i]);
}

const Atlas& TangentVectorField::atlas() const { return atlas_; }

Sym2J TangentVectorField::metric(int chart, Point2 p, int order) const {
  if (embedding_) return first_fundamental_form(embedding_->jets(chart, p, order + 1));
  const auto vars = atlas_.variables(chart, p, order);
  const auto& g = g_.at(chart);
  return {g[0].eval(vars), g[1].eval(vars), g[2].eval(vars)};
}

std::array<Jet, 2> TangentVectorField::components(int chart, Point2 p, int order) const {
  const auto vars = atlas_.variables(chart, p, order);
  if (!embedding_) {
    const auto& x = X_.at(chart);
    return {x[0].eval(vars), x[1].eval(vars)};
  }
  // X = g⁻¹ (⟨f_u, V⟩, ⟨f_v, V⟩)
  const Vec3J f = embedding_->jets(chart, p, order + 1);
  const Vec3J V{V_[0].eval(vars), V_[1].eval(vars), V_[2].eval(vars)};
  const Jet a = dot(derivative(f, 0), V);
  const Jet b = dot(derivative(f, 1), V);
  const Mat2J ginv = inverse(first_fundamental_form(f).full());
  return {ginv(0, 0) * a + ginv(0, 1) * b, ginv(1, 0) * a + ginv(1, 1) * b};
}

// ----------------------------------------------------------- RotationSource

RotationSource::RotationSource(TangentVectorField X, ConnectionKind connection)
    : FramedSource(true, connection), field_(std::move(X)) {}

Sym2J RotationSource::frame_metric(int chart, Point2 p, int order) const {
  return field_.metric(chart, p, order);
}

Mat2J RotationSource::frame_phi(int chart, Point2 p, int order) const {
  // column k: ∇_k X = ∂_k X + Γ_k X
  const auto X = field_.components(chart, p, order + 1);
  const auto gamma = christoffel(field_.metric(chart, p, order + 1));
  const Jet x0 = X[0].truncated(order), x1 = X[1].truncated(order);
  Mat2J P;
  for (int k = 0; k < 2; ++k)
    for (int a = 0; a < 2; ++a) P(a, k) = X[a].derivative(k) + gamma[k](a, 0) * x0 + gamma[k](a, 1) * x1;
  return P;
}

// -------------------------------------------------------------- FrontSource

FrontSource::FrontSource(Atlas atlas, std::array<Expr, 3> f, std::array<Expr, 3> normal)
    : FramedSource(false, ConnectionKind::FrameSupplied), atlas_(std::move(atlas)) {
  for (int i = 0; i < 3; ++i) {
    f_[i] = CompiledExpr(f[i]);
    n_[i] = CompiledExpr(normal[i]);
  }
  // Project the coordinate axis least aligned with n at the domain centre.
  const Chart& c = atlas_.chart(0);
  const Point2 mid{0.5 * (c.a + c.b), 0.5 * (c.c + c.d)};
  const Vec3 n = value(unit_normal(0, mid, 0));
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n[i]) < std::abs(n[best])) best = i;
  reference_ = {0, 0, 0};
  reference_[best] = 1.0;
}

Vec3J FrontSource::position(int chart, Point2 p, int order) const {
  const auto vars = atlas_.variables(chart, p, order);
  return {f_[0].eval(vars), f_[1].eval(vars), f_[2].eval(vars)};
}

Vec3J FrontSource::unit_normal(int chart, Point2 p, int order) const {
  const auto vars = atlas_.variables(chart, p, order);
  return unit({n_[0].eval(vars), n_[1].eval(vars), n_[2].eval(vars)});
}

Vec3J FrontSource::frame_vector(int which, int chart, Point2 p, int order) const {
  const Vec3J n = unit_normal(chart, p, order);
  Vec3J r;
  for (int i = 0; i < 3; ++i) r[i] = Jet::constant(reference_[i], order);
  const Vec3J s1 = r - dot(r, n) * n;
  return which == 0 ? s1 : cross(n, s1);
}

Sym2J FrontSource::frame_metric(int chart, Point2 p, int order) const {
  const Vec3J s1 = frame_vector(0, chart, p, order);
  const Vec3J s2 = frame_vector(1, chart, p, order);
  return {dot(s1, s1), dot(s1, s2), dot(s2, s2)};
}

Mat2J FrontSource::frame_phi(int chart, Point2 p, int order) const {
  const Vec3J f = position(chart, p, order + 1);
  const Vec3J s[2] = {frame_vector(0, chart, p, order), frame_vector(1, chart, p, order)};
  Mat2J inner;
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) inner(i, k) = dot(s[i], derivative(f, k));
  const Mat2J G{{dot(s[0], s[0]), dot(s[0], s[1]), dot(s[0], s[1]), dot(s[1], s[1])}};
  return inverse(G) * inner;
}

std::array<Mat2J, 2> FrontSource::frame_connection(int chart, Point2 p, int order) const {
  const Vec3J s_full[2] = {frame_vector(0, chart, p, order + 1), frame_vector(1, chart, p, order + 1)};
  const Vec3J s[2] = {truncated(s_full[0], order), truncated(s_full[1], order)};
  const Mat2J G{{dot(s[0], s[0]), dot(s[0], s[1]), dot(s[0], s[1]), dot(s[1], s[1])}};
  const Mat2J Ginv = inverse(G);
  std::array<Mat2J, 2> C;
  for (int k = 0; k < 2; ++k) {
    Mat2J inner;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) inner(i, j) = dot(s[i], derivative(s_full[j], k));
    C[k] = Ginv * inner;
  }
  return C;
}

// ------------------------------------------------------------- entry points

BundleHom shape_operator(const SurfaceEmbedding& s, int max_jet_order) {
  const double m = s.min_immersion();
  if (!(m > 1e-8)) {
    throw Error(ErrorKind::ImmersionFailure, "|f_u × f_v| drops to " + std::to_string(m));
  }
  return BundleHom(s.atlas(), std::make_shared<ShapeOperatorSource>(s), max_jet_order);
}

BundleHom rotation_field(const TangentVectorField& X, int max_jet_order) {
  return BundleHom(X.atlas(), std::make_shared<RotationSource>(X), max_jet_order);
}

double rot(const BundleHom& h, int chart, Point2 p) {
  const auto* src = dynamic_cast<const FramedSource*>(&h.source());
  if (!src || !h.source().is_tangent()) {
    throw Error(ErrorKind::InvalidArgument, "rot(X) needs a homomorphism into TM");
  }
  const double det_g = src->frame_metric(chart, p, 0).det().value();
  return lambda(h, chart, p, 0).value() / std::sqrt(det_g);
}

double irrotational_curvature(const TangentVectorField& X, const CurvePoint& c) {
  const auto x = X.components(c.chart, c.pos, 2);
  const Sym2J g2 = X.metric(c.chart, c.pos, 2);
  const auto gamma = christoffel(g2);  // order 1
  const double vel[2] = {c.vel.u, c.vel.v};
  const double acc[2] = {c.acc.u, c.acc.v};
  // ∇_k X^a as order-1 jets
  Jet nabla[2][2];
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 2; ++k)
      nabla[a][k] = x[a].derivative(k) + gamma[k](a, 0) * x[0].truncated(1) + gamma[k](a, 1) * x[1].truncated(1);
  double Xd[2], Xdd[2];
  for (int a = 0; a < 2; ++a) {
    Xd[a] = nabla[a][0].value() * vel[0] + nabla[a][1].value() * vel[1];
  }
  for (int a = 0; a < 2; ++a) {
    double d = 0.0;
    for (int k = 0; k < 2; ++k) {
      d += (nabla[a][k].du() * vel[0] + nabla[a][k].dv() * vel[1]) * vel[k];
      d += nabla[a][k].value() * acc[k];
    }
    for (int j = 0; j < 2; ++j)
      for (int b = 0; b < 2; ++b) d += gamma[j](a, b).value() * vel[j] * Xd[b];
    Xdd[a] = d;
  }
  const double g11 = g2.g11.value(), g12 = g2.g12.value(), g22 = g2.g22.value();
  const double len2 = g11 * Xd[0] * Xd[0] + 2 * g12 * Xd[0] * Xd[1] + g22 * Xd[1] * Xd[1];
  const double len = std::sqrt(len2);
  if (len < 1e-8) throw Error(ErrorKind::AtA3Point, "|D_γ̇ X| vanishes (irrotational cusp)");
  const double mu = std::sqrt(g11 * g22 - g12 * g12) * (Xd[0] * Xdd[1] - Xd[1] * Xdd[0]);
  return mu / (len2 * len);
}

double gaussian_curvature(const SurfaceEmbedding& s, int chart, Point2 p) {
  const Vec3J f = s.jets(chart, p, 2);
  const Vec3J fu = derivative(f, 0), fv = derivative(f, 1);
  const Vec3 N = value(cross(fu, fv));
  const double len = std::sqrt(N[0] * N[0] + N[1] * N[1] + N[2] * N[2]);
  auto second = [&](const Vec3J& d) {
    const Vec3 w = value(d);
    return (w[0] * N[0] + w[1] * N[1] + w[2] * N[2]) / len;
  };
  const double L = second(derivative(fu, 0)), M = second(derivative(fu, 1)), Nn = second(derivative(fv, 1));
  const Vec3 a = value(fu), b = value(fv);
  const double E = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
  const double F = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  const double G = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
  return (L * Nn - M * M) / (E * G - F * F);
}

}  // namespace gbs

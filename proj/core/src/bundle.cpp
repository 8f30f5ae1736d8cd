#include "gbsing/bundle.hpp"

#include <algorithm>
#include <cmath>

#include "gbsing/error.hpp"

namespace gbs {

Mat2J Mat2J::truncated(int order) const {
  Mat2J r;
  for (int i = 0; i < 4; ++i) r.m[i] = m[i].truncated(order);
  return r;
}

Mat2J Mat2J::derivative(int which) const {
  Mat2J r;
  for (int i = 0; i < 4; ++i) r.m[i] = m[i].derivative(which);
  return r;
}

std::array<double, 4> Mat2J::value() const {
  return {m[0].value(), m[1].value(), m[2].value(), m[3].value()};
}

Mat2J operator+(const Mat2J& a, const Mat2J& b) {
  Mat2J r;
  for (int i = 0; i < 4; ++i) r.m[i] = a.m[i] + b.m[i];
  return r;
}

Mat2J operator*(const Mat2J& a, const Mat2J& b) {
  Mat2J r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
  return r;
}

Mat2J inverse(const Mat2J& a) {
  const Jet inv = reciprocal(a.det());
  return Mat2J{{a(1, 1) * inv, -(a(0, 1) * inv), -(a(1, 0) * inv), a(0, 0) * inv}};
}

std::array<Mat2J, 2> christoffel(const Sym2J& g) {
  const int n = g.g11.order() - 1;
  if (n < 0) throw Error(ErrorKind::OrderExceeded, "Christoffel symbols need a metric of order ≥ 1");
  const Mat2J G = g.full();
  const Mat2J dG[2] = {G.derivative(0), G.derivative(1)};
  const Mat2J Ginv = inverse(G.truncated(n));
  std::array<Mat2J, 2> gamma;
  for (int k = 0; k < 2; ++k) {
    for (int b = 0; b < 2; ++b) {
      // first-kind symbols Γ_{c,kb} for c = 0, 1
      Jet first[2];
      for (int c = 0; c < 2; ++c) first[c] = 0.5 * (dG[k](c, b) + dG[b](c, k) - dG[c](k, b));
      for (int a = 0; a < 2; ++a) gamma[k](a, b) = Ginv(a, 0) * first[0] + Ginv(a, 1) * first[1];
    }
  }
  return gamma;
}

// ------------------------------------------------------------- FramedSource

FramedSource::FramedSource(bool tangent, ConnectionKind connection)
    : tangent_(tangent), connection_(connection) {
  if (connection == ConnectionKind::LeviCivita && !tangent) {
    throw Error(ErrorKind::InvalidArgument, "Levi-Civita connection requires E = TM");
  }
}

void FramedSource::set_connection_perturbation(std::vector<std::array<Expr, 2>> beta_per_chart,
                                               const Atlas& atlas) {
  beta_.clear();
  for (const auto& b : beta_per_chart) beta_.push_back({CompiledExpr(b[0]), CompiledExpr(b[1])});
  beta_atlas_ = atlas;
}

void FramedSource::set_ambient_connection_perturbation(std::array<Expr, 3> form,
                                                       const Atlas& atlas) {
  for (int i = 0; i < 3; ++i) ambient_[i] = CompiledExpr(form[i]);
  has_ambient_ = true;
  beta_atlas_ = atlas;
}

Mat2J FramedSource::gram_schmidt_inverse(const Sym2J& g) {
  if (!(g.g11.value() > 0.0) || !(g.det().value() > 0.0)) {
    throw Error(ErrorKind::DegenerateFrame, "frame metric is not positive definite");
  }
  const Jet a = sqrt(g.g11);
  const Jet b = g.g12 / a;
  const Jet c = sqrt(g.det()) / a;
  const int order = a.order();
  return Mat2J{{a, b, Jet::constant(0.0, order), c}};
}

std::array<Mat2J, 2> FramedSource::frame_connection(int, Point2, int) const {
  throw Error(ErrorKind::InvalidArgument, "source does not supply its own connection");
}

Mat2J FramedSource::phi(int chart, Point2 p, int order) const {
  const Sym2J g = frame_metric(chart, p, order);
  const Mat2J P = frame_phi(chart, p, order);
  return gram_schmidt_inverse(g) * P;
}

OneFormJ FramedSource::base_omega(int chart, Point2 p, int order) const {
  if (connection_ == ConnectionKind::OrthonormalFlat) {
    return {Jet::constant(0.0, order), Jet::constant(0.0, order)};
  }
  // e = s T with T = (T⁻¹)⁻¹; D_k e = e · T⁻¹(∂_k T + Γ_k T), ω_k is the (1,2) entry.
  const Sym2J g = frame_metric(chart, p, order + 1);
  const Mat2J tinv_full = gram_schmidt_inverse(g);
  const Mat2J t_full = inverse(tinv_full);
  const Mat2J tinv = tinv_full.truncated(order);
  const Mat2J t = t_full.truncated(order);
  const auto gamma = connection_ == ConnectionKind::LeviCivita ? christoffel(g)
                                                                : frame_connection(chart, p, order);
  OneFormJ omega;
  for (int k = 0; k < 2; ++k) {
    const Mat2J a = tinv * (t_full.derivative(k) + gamma[k] * t);
    omega[k] = a(0, 1);
  }
  return omega;
}

OneFormJ FramedSource::omega(int chart, Point2 p, int order) const {
  OneFormJ w = base_omega(chart, p, order);
  if (!beta_.empty()) {
    const auto vars = beta_atlas_.variables(chart, p, order);
    const auto& b = beta_.at(std::min<std::size_t>(chart, beta_.size() - 1));
    w[0] += b[0].eval(vars);
    w[1] += b[1].eval(vars);
  }
  if (has_ambient_) {
    const auto vars = beta_atlas_.variables(chart, p, order + 1);
    for (int i = 0; i < 3; ++i) {
      const Jet a = ambient_[i].eval(vars).truncated(order);
      const Jet& xi = vars[2 + i];
      w[0] += a * xi.d_du();
      w[1] += a * xi.d_dv();
    }
  }
  return w;
}

// --------------------------------------------------------------- ExprSource

ExprSource::ExprSource(const Atlas& atlas, std::vector<ChartExprs> charts, bool tangent,
                       ConnectionKind connection)
    : FramedSource(tangent, connection), atlas_(atlas) {
  if (charts.size() != atlas.charts().size()) {
    throw Error(ErrorKind::InvalidArgument, "expression source needs one entry per chart");
  }
  for (const auto& c : charts) {
    Compiled cc;
    for (int i = 0; i < 3; ++i) cc.metric[i] = CompiledExpr(c.metric[i]);
    for (int i = 0; i < 4; ++i) cc.phi[i] = CompiledExpr(c.phi[i]);
    charts_.push_back(std::move(cc));
  }
}

std::string ExprSource::description() const {
  return is_tangent() ? "expression bundle on TM" : "expression bundle on a trivial E";
}

Sym2J ExprSource::frame_metric(int chart, Point2 p, int order) const {
  const auto vars = atlas_.variables(chart, p, order);
  const auto& c = charts_.at(chart);
  return {c.metric[0].eval(vars), c.metric[1].eval(vars), c.metric[2].eval(vars)};
}

Mat2J ExprSource::frame_phi(int chart, Point2 p, int order) const {
  const auto vars = atlas_.variables(chart, p, order);
  const auto& c = charts_.at(chart);
  return Mat2J{{c.phi[0].eval(vars), c.phi[1].eval(vars), c.phi[2].eval(vars), c.phi[3].eval(vars)}};
}

// ---------------------------------------------------------------- BundleHom

std::string to_string(PointClass c) {
  switch (c) {
    case PointClass::Plus: return "plus";
    case PointClass::Minus: return "minus";
    case PointClass::Singular: return "singular";
  }
  return "?";
}

BundleHom::BundleHom(Atlas atlas, std::shared_ptr<const BundleSource> source, int max_jet_order)
    : atlas_(std::move(atlas)), source_(std::move(source)), max_order_(max_jet_order) {
  if (!source_) throw Error(ErrorKind::InvalidArgument, "bundle homomorphism needs a source");
  if (max_order_ < 1 || max_order_ > kMaxJetOrder) {
    throw Error(ErrorKind::InvalidArgument,
                "jet order must lie in [1, " + std::to_string(kMaxJetOrder) + "]");
  }
}

namespace {
void check_budget(const BundleHom& h, int order) {
  const int need = order + h.source().order_overhead();
  if (need > h.max_jet_order()) {
    throw Error(ErrorKind::OrderExceeded,
                "pipeline needs jets of order " + std::to_string(need) + " but the jet order is " +
                    std::to_string(h.max_jet_order()));
  }
}
}  // namespace

Mat2J BundleHom::phi(int chart, Point2 p, int order) const {
  check_budget(*this, order);
  return source_->phi(chart, p, order);
}

OneFormJ BundleHom::omega(int chart, Point2 p, int order) const {
  check_budget(*this, order);
  return source_->omega(chart, p, order);
}

double BundleHom::lambda_scale() const {
  if (lambda_scale_ >= 0.0) return lambda_scale_;
  std::vector<double> values;
  for (const Chart& c : atlas_.charts()) {
    const auto box = atlas_.weight_support(c.id);
    constexpr int n = 16;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const Point2 p{box[0] + (box[1] - box[0]) * (i + 0.5) / n,
                       box[2] + (box[3] - box[2]) * (j + 0.5) / n};
        if (atlas_.weight(c.id, p) <= 0.0) continue;
        values.push_back(std::abs(source_->phi(c.id, p, 0).det().value()));
      }
    }
  }
  double median = 0.0;
  if (!values.empty()) {
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    median = *mid;
  }
  lambda_scale_ = median > 0.0 ? median : 1.0;
  return lambda_scale_;
}

double BundleHom::tol_sing() const { return tol_rel_ * lambda_scale(); }

void BundleHom::set_tol_sing_relative(double rel) {
  if (!(rel > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol_sing must be positive");
  tol_rel_ = rel;
}

// ------------------------------------------------------------ point queries

Jet lambda(const BundleHom& h, int chart, Point2 p, int order) {
  return h.phi(chart, p, order).det();
}

PointClass classify_point(const BundleHom& h, int chart, Point2 p, double tol_sing) {
  const double l = lambda(h, chart, p, 0).value();
  if (l > tol_sing) return PointClass::Plus;
  if (l < -tol_sing) return PointClass::Minus;
  return PointClass::Singular;
}

OneFormJ connection_form(const BundleHom& h, int chart, Point2 p, int order) {
  return h.omega(chart, p, order);
}

double curvature_density(const BundleHom& h, int chart, Point2 p) {
  const OneFormJ w = h.omega(chart, p, 1);
  return w[1].du() - w[0].dv();
}

double gaussian_curvature_K(const BundleHom& h, int chart, Point2 p) {
  const double l = lambda(h, chart, p, 0).value();
  if (std::abs(l) <= h.tol_sing()) {
    throw Error(ErrorKind::SingularPoint, "K is undefined on the singular set (λ = " +
                                              std::to_string(l) + ")");
  }
  return curvature_density(h, chart, p) / l;
}

std::array<double, 3> pullback_metric(const BundleHom& h, int chart, Point2 p) {
  const auto m = h.phi(chart, p, 0).value();
  return {m[0] * m[0] + m[2] * m[2], m[0] * m[1] + m[2] * m[3], m[1] * m[1] + m[3] * m[3]};
}

double coherence_residual(const BundleHom& h, int chart, Point2 p) {
  const Mat2J phi = h.phi(chart, p, 1);
  const OneFormJ w = h.omega(chart, p, 0);
  // D_j s for s = x e1 + y e2 is (∂_j x + ω_j y, ∂_j y − ω_j x).
  auto cov = [&](int j, int col) -> std::array<double, 2> {
    const Jet& x = phi(0, col);
    const Jet& y = phi(1, col);
    const double dx = j == 0 ? x.du() : x.dv();
    const double dy = j == 0 ? y.du() : y.dv();
    const double wj = w[j].value();
    return {dx + wj * y.value(), dy - wj * x.value()};
  };
  const auto a = cov(0, 1);
  const auto b = cov(1, 0);
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

std::pair<std::array<double, 2>, std::array<double, 2>> covariant_velocity(const BundleHom& h,
                                                                           const CurvePoint& c) {
  const Mat2J phi = h.phi(c.chart, c.pos, 1);
  const OneFormJ w = h.omega(c.chart, c.pos, 0);
  std::array<double, 2> v{}, dv{};
  for (int r = 0; r < 2; ++r) {
    const Jet& a = phi(r, 0);
    const Jet& b = phi(r, 1);
    v[r] = a.value() * c.vel.u + b.value() * c.vel.v;
    // d/dt (Φ σ̇) = (∂_{σ̇}Φ) σ̇ + Φ σ̈
    const double da = a.du() * c.vel.u + a.dv() * c.vel.v;
    const double db = b.du() * c.vel.u + b.dv() * c.vel.v;
    dv[r] = da * c.vel.u + db * c.vel.v + a.value() * c.acc.u + b.value() * c.acc.v;
  }
  const double wt = w[0].value() * c.vel.u + w[1].value() * c.vel.v;
  return {{dv[0] + wt * v[1], dv[1] - wt * v[0]}, v};
}

GeodesicCurvatures geodesic_curvatures(const BundleHom& h, const CurvePoint& c,
                                       bool require_arclength) {
  const auto [dc, cv] = covariant_velocity(h, c);
  GeodesicCurvatures out;
  out.speed = std::hypot(cv[0], cv[1]);
  out.lambda = lambda(h, c.chart, c.pos, 0).value();
  if (!(out.speed > 0.0)) {
    throw Error(ErrorKind::SingularPoint, "φ(σ̇) vanishes; the curve is tangent to the null direction");
  }
  if (require_arclength && std::abs(out.speed - 1.0) > 1e-6) {
    throw Error(ErrorKind::NotArclength,
                "|φ(σ̇)| = " + std::to_string(out.speed) + " is not 1 within 1e-6");
  }
  const double s2 = out.speed * out.speed;
  // κ̂_g: n̂ is the positive rotation of φ(σ̇) in E.
  out.kappa_hat = (cv[0] * dc[1] - cv[1] * dc[0]) / (s2 * out.speed);

  if (std::abs(out.lambda) > h.tol_sing()) {
    // κ_g on TM: n ⟂ σ̇ for ds², ds²-unit, (σ̇, n) positive in the chart.
    const auto g = pullback_metric(h, c.chart, c.pos);
    const double q1 = g[0] * c.vel.u + g[1] * c.vel.v;
    const double q2 = g[1] * c.vel.u + g[2] * c.vel.v;
    Point2 n{-q2, q1};
    const double nn = g[0] * n.u * n.u + 2.0 * g[1] * n.u * n.v + g[2] * n.v * n.v;
    n = (1.0 / std::sqrt(nn)) * n;
    const auto m = h.phi(c.chart, c.pos, 0).value();
    const double pn0 = m[0] * n.u + m[1] * n.v;
    const double pn1 = m[2] * n.u + m[3] * n.v;
    // ds²(D̄_t σ̇, n) = ⟨D_t φσ̇, φ n⟩ for the pull-back connection
    out.kappa_g = (dc[0] * pn0 + dc[1] * pn1) / s2;
  }
  return out;
}

}  // namespace gbs

#include "gbsing/blaschke.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "gbsing/error.hpp"

namespace gbs {

namespace {

std::string where(int chart, Point2 p) {
  std::ostringstream os;
  os << "chart " << chart << " (" << p.u << ", " << p.v << ")";
  return os.str();
}

double length(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }
double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Everything below takes the jets of f and the requested output order; f
// must carry the documented number of extra orders.

std::pair<Sym2J, int> convexity_of(const Vec3J& f, int order, int chart, Point2 p) {
  const Vec3J fu = derivative(f, 0), fv = derivative(f, 1);
  const Vec3J a = truncated(fu, order), b = truncated(fv, order);
  Sym2J L{det3(a, b, truncated(derivative(fu, 0), order)), det3(a, b, truncated(derivative(fu, 1), order)),
          det3(a, b, truncated(derivative(fv, 1), order))};
  if (!(L.det().value() > 0.0)) {
    throw Error(ErrorKind::NotConvex, "det L = " + std::to_string(L.det().value()) + " at " + where(chart, p));
  }
  const int sign = L.g11.value() + L.g22.value() > 0.0 ? 1 : -1;
  if (sign < 0) L = {-L.g11, -L.g12, -L.g22};
  return {L, sign};
}

Sym2J blaschke_h(const Vec3J& f, int order, int chart, Point2 p) {
  const Sym2J L = convexity_of(f, order, chart, p).first;
  const Jet scale = pow(L.det(), -0.25);
  return {L.g11 * scale, L.g12 * scale, L.g22 * scale};
}

// ξ = ½ (1/√H) ∂_i(√H h^{ij} ∂_j f); f at order + 3
Vec3J affine_xi(const Vec3J& f, int order, int chart, Point2 p) {
  const int m1 = order + 1;
  const Sym2J h = blaschke_h(truncated(f, m1 + 2), m1, chart, p);
  const Mat2J hinv = inverse(h.full());
  const Jet root = sqrt(h.det());
  const Vec3J f1[2] = {truncated(derivative(f, 0), m1), truncated(derivative(f, 1), m1)};
  Vec3J xi;
  for (int k = 0; k < 3; ++k) {
    const Jet V0 = root * (hinv(0, 0) * f1[0][k] + hinv(0, 1) * f1[1][k]);
    const Jet V1 = root * (hinv(1, 0) * f1[0][k] + hinv(1, 1) * f1[1][k]);
    xi[k] = 0.5 * (V0.d_du() + V1.d_dv()) / root.truncated(order);
  }
  return xi;
}

Vec3J conormal_of(const Vec3J& f, int order, int chart, Point2 p) {
  const Vec3J xi = affine_xi(truncated(f, order + 3), order, chart, p);
  const Vec3J fu = truncated(derivative(f, 0), order), fv = truncated(derivative(f, 1), order);
  return reciprocal(det3(fu, fv, xi)) * cross(fu, fv);
}

BlaschkeStructure::ShapeOperator alpha_of(const Vec3J& f, int order, int chart, Point2 p) {
  const Vec3J xi1 = affine_xi(truncated(f, order + 4), order + 1, chart, p);
  const Vec3J xi = truncated(xi1, order);
  const Vec3J fu = truncated(derivative(f, 0), order), fv = truncated(derivative(f, 1), order);
  const Jet D = det3(fu, fv, xi);
  const double vol = length(value(fu)) * length(value(fv)) * length(value(xi));
  if (!(std::abs(D.value()) > 1e-12 * vol)) {
    throw Error(ErrorKind::LinearSolveFailure, "det(f_u, f_v, ξ) vanishes at " + where(chart, p));
  }
  const Jet Dinv = reciprocal(D);
  BlaschkeStructure::ShapeOperator out;
  for (int i = 0; i < 2; ++i) {
    const Vec3J dxi = derivative(xi1, i);
    out.alpha(0, i) = -(det3(dxi, fv, xi) * Dinv);
    out.alpha(1, i) = -(det3(fu, dxi, xi) * Dinv);
    const double x3 = det3(fu, fv, dxi).value() / D.value();
    const double len = length(value(dxi));
    out.normal_residual[i] = len > 0.0 ? std::abs(x3) * length(value(xi)) / len : 0.0;
  }
  return out;
}

Eigen::Vector3d eig(const Vec3& a) { return {a[0], a[1], a[2]}; }

template <typename F>
void for_each_sample(const Atlas& atlas, int n, F&& fn) {
  for (const Chart& c : atlas.charts()) {
    const auto box = atlas.weight_support(c.id);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Point2 p{box[0] + (box[1] - box[0]) * (i + 0.5) / n, box[2] + (box[3] - box[2]) * (j + 0.5) / n};
        if (atlas.weight(c.id, p) <= 0.0) continue;
        fn(c.id, p);
      }
  }
}

double min_eigenvalue(double a, double b, double c) {
  return 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
}

}  // namespace

// ------------------------------------------------------------ structure

BlaschkeStructure::BlaschkeStructure(SurfaceEmbedding s, int convexity_grid) : s_(std::move(s)) {
  if (s_.atlas().topology() != Topology::Sphere) {
    throw Error(ErrorKind::InvalidArgument, "the Blaschke structure needs the sphere atlas");
  }
  const double m = min_convexity_eigenvalue(convexity_grid);
  if (!(m > 0.0)) {
    throw Error(ErrorKind::NotConvex, "L has eigenvalue " + std::to_string(m) + " on the sample grid");
  }
}

std::pair<Sym2J, int> BlaschkeStructure::convexity_form(int chart, Point2 p, int order) const {
  return convexity_of(s_.jets(chart, p, order + 2), order, chart, p);
}

double BlaschkeStructure::min_convexity_eigenvalue(int n) const {
  double best = 1e300;
  for_each_sample(s_.atlas(), n, [&](int chart, Point2 p) {
    const Vec3J f = s_.jets(chart, p, 2);
    const Vec3J fu = derivative(f, 0), fv = derivative(f, 1);
    const Vec3J a = truncated(fu, 0), b = truncated(fv, 0);
    double L11 = det3(a, b, derivative(fu, 0)).value();
    double L12 = det3(a, b, derivative(fu, 1)).value();
    double L22 = det3(a, b, derivative(fv, 1)).value();
    if (L11 + L22 < 0.0) L11 = -L11, L12 = -L12, L22 = -L22;
    best = std::min(best, min_eigenvalue(L11, L12, L22));
  });
  return best;
}

Sym2J BlaschkeStructure::metric(int chart, Point2 p, int order) const {
  return blaschke_h(s_.jets(chart, p, order + 2), order, chart, p);
}

Vec3J BlaschkeStructure::affine_normal(int chart, Point2 p, int order) const {
  return affine_xi(s_.jets(chart, p, order + 3), order, chart, p);
}

Vec3 BlaschkeStructure::normal_map(int chart, Point2 p) const { return value(affine_normal(chart, p, 0)); }

Vec3J BlaschkeStructure::conormal(int chart, Point2 p, int order) const {
  return conormal_of(s_.jets(chart, p, order + 3), order, chart, p);
}

BlaschkeStructure::ShapeOperator BlaschkeStructure::shape_operator(int chart, Point2 p, int order) const {
  return alpha_of(s_.jets(chart, p, order + 4), order, chart, p);
}

// ------------------------------------------------------------ bundle

BlaschkeSource::BlaschkeSource(std::shared_ptr<const BlaschkeStructure> b, bool blaschke_metric)
    : FramedSource(true, ConnectionKind::LeviCivita), b_(std::move(b)), blaschke_metric_(blaschke_metric) {}

std::string BlaschkeSource::description() const {
  return blaschke_metric_ ? "affine shape operator (Blaschke metric)" : "affine shape operator";
}

Sym2J BlaschkeSource::frame_metric(int chart, Point2 p, int order) const {
  if (blaschke_metric_) return b_->metric(chart, p, order);
  const Vec3J f = b_->base().jets(chart, p, order + 1);
  const Vec3J fu = derivative(f, 0), fv = derivative(f, 1);
  return {dot(fu, fu), dot(fu, fv), dot(fv, fv)};
}

Mat2J BlaschkeSource::frame_phi(int chart, Point2 p, int order) const {
  return b_->shape_operator(chart, p, order).alpha;
}

BundleHom affine_shape_operator(std::shared_ptr<const BlaschkeStructure> b, bool blaschke_metric,
                                int max_jet_order) {
  Atlas atlas = b->atlas();
  return BundleHom(std::move(atlas), std::make_shared<BlaschkeSource>(std::move(b), blaschke_metric),
                   max_jet_order);
}

// ------------------------------------------------------------ checks

namespace {

double smallest_singular_value(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace

RankCrossCheck blaschke_rank_check(const BlaschkeStructure& b, int n, double tol) {
  RankCrossCheck out;
  const Atlas& atlas = b.atlas();
  for (const Chart& c : atlas.charts()) {
    const auto box = atlas.weight_support(c.id);
    std::vector<double> det_alpha(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<char> active(det_alpha.size(), 0), bad(det_alpha.size(), 0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const Point2 p{box[0] + (box[1] - box[0]) * (i + 0.5) / n, box[2] + (box[3] - box[2]) * (j + 0.5) / n};
        if (atlas.weight(c.id, p) <= 0.0) continue;
        const std::size_t k = static_cast<std::size_t>(j) * n + i;
        const Vec3J f = b.base().jets(c.id, p, 4);
        const Vec3J xi = affine_xi(f, 1, c.id, p);
        const Vec3 xu = value(derivative(xi, 0)), xv = value(derivative(xi, 1));
        Eigen::MatrixXd dxi(3, 2);
        dxi.col(0) = eig(xu);
        dxi.col(1) = eig(xv);
        const double da = alpha_of(f, 0, c.id, p).alpha.det().value();
        const Vec3 N = value(cross(truncated(derivative(f, 0), 0), truncated(derivative(f, 1), 0)));
        const double front = eig(xu).cross(eig(xv)).dot(eig(N));
        const bool small_xi = smallest_singular_value(dxi) < tol;
        const bool small_alpha = std::abs(da) < tol;
        const bool same_sign = (front > 0.0) == (da > 0.0);
        out.nodes += 1;
        out.small_agree += small_xi == small_alpha;
        out.sign_agree += same_sign;
        det_alpha[k] = da;
        active[k] = 1;
        bad[k] = small_xi != small_alpha || !same_sign;
      }
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * n + i;
        if (!bad[k]) continue;
        bool near_sigma = false;
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int ii = i + di, jj = j + dj;
            if (ii < 0 || jj < 0 || ii >= n || jj >= n) continue;
            const std::size_t q = static_cast<std::size_t>(jj) * n + ii;
            if (active[q] && (det_alpha[q] > 0.0) != (det_alpha[k] > 0.0)) near_sigma = true;
          }
        out.disagreements_off_sigma += !near_sigma;
      }
  }
  return out;
}

FrontReport front_checks(const BlaschkeStructure& b, int n, const FrontTolerances& tol) {
  FrontReport r;
  r.min_conormal_rank = r.min_front_det = r.min_h_eigenvalue = 1e300;
  for_each_sample(b.atlas(), n, [&](int chart, Point2 p) {
    const Vec3J f = b.base().jets(chart, p, 4);
    const Vec3J nu1 = conormal_of(f, 1, chart, p);
    const Vec3 nu = value(nu1), nu_u = value(derivative(nu1, 0)), nu_v = value(derivative(nu1, 1));
    Eigen::MatrixXd dn(2, 3);
    dn.row(0) = eig(nu_u).transpose();
    dn.row(1) = eig(nu_v).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dn);
    const auto sv = svd.singularValues();
    r.min_conormal_rank = std::min(r.min_conormal_rank, sv.minCoeff() / sv.maxCoeff());
    const double d = eig(nu).dot(eig(nu_u).cross(eig(nu_v)));
    r.min_front_det = std::min(r.min_front_det, std::abs(d) / (length(nu) * length(nu_u) * length(nu_v)));

    const Sym2J h = blaschke_h(truncated(f, 2), 0, chart, p);
    const double h11 = h.g11.value(), h12 = h.g12.value(), h22 = h.g22.value();
    r.min_h_eigenvalue = std::min(r.min_h_eigenvalue, min_eigenvalue(h11, h12, h22));
    const double hmax = std::max({std::abs(h11), std::abs(h12), std::abs(h22)});

    const Vec3 fu = value(derivative(f, 0)), fv = value(derivative(f, 1));
    const Vec3 fij[3] = {value(derivative(derivative(f, 0), 0)), value(derivative(derivative(f, 0), 1)),
                         value(derivative(derivative(f, 1), 1))};
    const double hij[3] = {h11, h12, h22};
    // ν_{u_i}(f_{u_j}) + h_ij for (i, j) = (1,1), (1,2), (2,1), (2,2)
    const double conormal_res[4] = {dot3(nu_u, fu) + h11, dot3(nu_u, fv) + h12, dot3(nu_v, fu) + h12,
                                    dot3(nu_v, fv) + h22};
    for (double x : conormal_res) r.max_conormal_residual = std::max(r.max_conormal_residual, std::abs(x) / hmax);
    for (int k = 0; k < 3; ++k) {
      r.max_structure_residual = std::max(r.max_structure_residual, std::abs(dot3(nu, fij[k]) - hij[k]) / hmax);
    }
    const Vec3 xi = value(affine_xi(truncated(f, 3), 0, chart, p));
    r.max_duality_residual = std::max({r.max_duality_residual, std::abs(dot3(nu, xi) - 1.0),
                                       std::abs(dot3(nu, fu)) / (length(nu) * length(fu)),
                                       std::abs(dot3(nu, fv)) / (length(nu) * length(fv))});
    const auto a = alpha_of(f, 0, chart, p);
    r.max_equiaffine_residual =
        std::max({r.max_equiaffine_residual, a.normal_residual[0], a.normal_residual[1]});
    r.samples += 1;
  });
  auto fail = [](const std::string& what, double v) {
    throw Error(ErrorKind::FrontConditionViolated, what + " = " + std::to_string(v));
  };
  if (!(r.min_conormal_rank > tol.rank)) fail("smallest singular value of (ν_u; ν_v)", r.min_conormal_rank);
  if (!(r.min_front_det > tol.det)) fail("|det(ν, ν_u, ν_v)|", r.min_front_det);
  if (!(r.min_h_eigenvalue > 0.0)) fail("smallest eigenvalue of h", r.min_h_eigenvalue);
  if (!(r.max_conormal_residual <= tol.residual)) fail("|ν_{u_i}(f_{u_j}) + h_ij|", r.max_conormal_residual);
  if (!(r.max_structure_residual <= tol.residual)) fail("|ν(f_ij) − h_ij|", r.max_structure_residual);
  if (!(r.max_duality_residual <= tol.residual)) fail("conormal duality residual", r.max_duality_residual);
  if (!(r.max_equiaffine_residual <= tol.residual)) fail("equiaffine residual", r.max_equiaffine_residual);
  return r;
}

// ------------------------------------------------------------ census

NullFieldData front_null_field(const BlaschkeStructure& b, int chart, Point2 p, Point2 ref) {
  const Vec3J f = b.base().jets(chart, p, 6);
  const Vec3J xi = affine_xi(f, 3, chart, p);
  const Vec3J xu = derivative(xi, 0), xv = derivative(xi, 1);
  const Vec3J nu = conormal_of(truncated(f, 5), 2, chart, p);
  const Jet lf = det3(xu, xv, nu);
  const Vec3J a1 = truncated(xu, 1), a2 = truncated(xv, 1);
  return null_field_from(dot(a1, a1), dot(a1, a2), dot(a2, a2), lf, ref);
}

namespace {

double front_lambda_scale(const BlaschkeStructure& b) {
  std::vector<double> samples;
  for_each_sample(b.atlas(), 8, [&](int chart, Point2 p) {
    const Vec3J f = b.base().jets(chart, p, 4);
    const Vec3J xi = affine_xi(f, 1, chart, p);
    const Vec3J nu = conormal_of(truncated(f, 3), 0, chart, p);
    samples.push_back(std::abs(det3(truncated(derivative(xi, 0), 0), truncated(derivative(xi, 1), 0), nu).value()));
  });
  std::nth_element(samples.begin(), samples.begin() + samples.size() / 2, samples.end());
  return samples[samples.size() / 2];
}

}  // namespace

SwallowtailCensus swallowtail_census(std::shared_ptr<const BlaschkeStructure> b, const CensusOptions& opts) {
  const BundleHom h = affine_shape_operator(b, opts.blaschke_metric, opts.jet_order);
  SwallowtailCensus out{refine_until_stable(h, opts.N0, opts.max_doublings, opts.integrate)};
  const double front_scale = front_lambda_scale(*b);
  for (const SingularCurve& curve : out.stable.analysis.set.curves) {
    cross_check_classification(h, curve, opts.match_tol);
    const auto zeros = criterion_zeros(h, curve, [&b](int chart, Point2 p, Point2 ref) {
      return front_null_field(*b, chart, p, ref);
    });
    match_criterion_points(curve, zeros, opts.match_tol, 1e-8 * front_scale);
  }
  const RegionComplex& c = out.stable.complex;
  out.s_plus = out.stable.analysis.a3_positive;
  out.s_minus = out.stable.analysis.a3_negative;
  out.chi_plus = c.euler_char(+1);
  out.chi_minus = c.euler_char(-1);
  out.components_minus = c.component_count(-1);
  out.curves = c.curve_count();
  return out;
}

}  // namespace gbs

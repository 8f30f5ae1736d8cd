#pragma once

/// Bundle homomorphisms φ: TM² → E into an oriented rank-2 bundle with a
/// metric and a metric connection D.
///
/// Every source reports φ and D in an oriented orthonormal frame (e1, e2) of E,
/// obtained internally by oriented Gram–Schmidt of whatever frame the input
/// is presented in. With μ(e1, e2) = 1 the signed area density is
/// λ = det Φ, where column k of Φ holds the components of φ(∂_k). The
/// connection form ω satisfies D e1 = −ω e2 and D e2 = ω e1.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gbsing/atlas.hpp"
#include "gbsing/expr.hpp"
#include "gbsing/jet.hpp"

namespace gbs {

/// 2×2 matrix of jets, row-major: (m[0] m[1]; m[2] m[3]).
struct Mat2J {
  std::array<Jet, 4> m;
  const Jet& operator()(int r, int c) const { return m[2 * r + c]; }
  Jet& operator()(int r, int c) { return m[2 * r + c]; }
  Jet det() const { return m[0] * m[3] - m[1] * m[2]; }
  int order() const { return m[0].order(); }
  Mat2J truncated(int order) const;
  Mat2J derivative(int which) const;
  std::array<double, 4> value() const;
};

Mat2J operator+(const Mat2J& a, const Mat2J& b);
Mat2J operator*(const Mat2J& a, const Mat2J& b);
Mat2J inverse(const Mat2J& a);

/// Symmetric 2×2 jet matrix (g11, g12, g22).
struct Sym2J {
  Jet g11, g12, g22;
  Jet det() const { return g11 * g22 - g12 * g12; }
  Sym2J truncated(int order) const { return {g11.truncated(order), g12.truncated(order), g22.truncated(order)}; }
  Mat2J full() const { return Mat2J{{g11, g12, g12, g22}}; }
};

using OneFormJ = std::array<Jet, 2>;

enum class ConnectionKind {
  LeviCivita,       // Levi-Civita connection of the metric on E = TM
  OrthonormalFlat,  // the Gram–Schmidt frame of the given frame is parallel
  FrameSupplied,    // the source supplies D s_b = Σ_a C^a_{kb} s_a itself
};

/// Local model of (E, ⟨,⟩, D, φ) on each chart.
class BundleSource {
 public:
  virtual ~BundleSource() = default;

  /// Orthonormal-frame matrix Φ of φ, exact through `order`.
  virtual Mat2J phi(int chart, Point2 p, int order) const = 0;
  /// Connection form (ω(∂u), ω(∂v)) in the same frame.
  virtual OneFormJ omega(int chart, Point2 p, int order) const = 0;
  /// Extra derivative orders the source consumes from its inputs.
  virtual int order_overhead() const = 0;
  /// True when E = TM² (needed for Theorem-1 style checks where χ_E = χ(M²)).
  virtual bool is_tangent() const = 0;
  virtual std::string description() const = 0;
};

/// Sources presented by a frame (s1, s2) of E with Gram matrix G and the
/// frame components P of φ(∂_k). On E = TM the frame is (∂u, ∂v).
class FramedSource : public BundleSource {
 public:
  FramedSource(bool tangent, ConnectionKind connection);

  Mat2J phi(int chart, Point2 p, int order) const override;
  OneFormJ omega(int chart, Point2 p, int order) const override;
  bool is_tangent() const override { return tangent_; }
  ConnectionKind connection() const { return connection_; }

  /// Perturb the connection by a 1-form β: ω ↦ ω + β. Any metric connection
  /// differs from the base one by such a term.
  void set_connection_perturbation(std::vector<std::array<Expr, 2>> beta_per_chart,
                                   const Atlas& atlas);
  /// Perturbation by the pull-back of an ambient 1-form a·dx + b·dy + c·dz
  /// (coefficients in x, y, z). Global on the sphere atlas by construction.
  void set_ambient_connection_perturbation(std::array<Expr, 3> form, const Atlas& atlas);
  bool perturbed() const { return !beta_.empty() || has_ambient_; }

  virtual Sym2J frame_metric(int chart, Point2 p, int order) const = 0;
  virtual Mat2J frame_phi(int chart, Point2 p, int order) const = 0;
  /// Connection matrices C_k of D in the frame (s1, s2), exact through `order`.
  /// Only consulted for ConnectionKind::FrameSupplied.
  virtual std::array<Mat2J, 2> frame_connection(int chart, Point2 p, int order) const;

 protected:
  /// Upper-triangular T⁻¹ with (s1, s2) = (e1, e2) T⁻¹ (oriented Gram–Schmidt).
  static Mat2J gram_schmidt_inverse(const Sym2J& g);
  OneFormJ base_omega(int chart, Point2 p, int order) const;

 private:
  bool tangent_;
  ConnectionKind connection_;
  std::vector<std::array<CompiledExpr, 2>> beta_;
  std::array<CompiledExpr, 3> ambient_;
  bool has_ambient_ = false;
  Atlas beta_atlas_ = Atlas::torus();
};

/// Christoffel symbols Γ^a_{kb} of a metric given with one extra order:
/// result[k] is the matrix (Γ^a_{kb})_{ab}, exact through g.order() − 1.
std::array<Mat2J, 2> christoffel(const Sym2J& g);

/// Fully symbolic source (scene `[bundle]` section).
class ExprSource final : public FramedSource {
 public:
  struct ChartExprs {
    std::array<Expr, 3> metric;  // g11, g12, g22
    std::array<Expr, 4> phi;     // P11, P12, P21, P22 (column k = φ(∂_k))
  };
  ExprSource(const Atlas& atlas, std::vector<ChartExprs> charts, bool tangent,
             ConnectionKind connection);

  int order_overhead() const override { return 1; }
  std::string description() const override;
  Sym2J frame_metric(int chart, Point2 p, int order) const override;
  Mat2J frame_phi(int chart, Point2 p, int order) const override;

 private:
  struct Compiled {
    std::array<CompiledExpr, 3> metric;
    std::array<CompiledExpr, 4> phi;
  };
  Atlas atlas_;
  std::vector<Compiled> charts_;
};

enum class PointClass { Plus, Minus, Singular };
std::string to_string(PointClass c);

/// φ together with its atlas and numerical policy.
class BundleHom {
 public:
  BundleHom(Atlas atlas, std::shared_ptr<const BundleSource> source,
            int max_jet_order = kDefaultJetOrder);

  const Atlas& atlas() const { return atlas_; }
  const BundleSource& source() const { return *source_; }
  std::shared_ptr<const BundleSource> source_ptr() const { return source_; }
  int max_jet_order() const { return max_order_; }

  /// Φ at `order`; throws OrderExceeded if order + source overhead > max jet order.
  Mat2J phi(int chart, Point2 p, int order) const;
  OneFormJ omega(int chart, Point2 p, int order) const;

  /// Absolute singular tolerance: tol_sing_rel × median |λ| over a coarse sample.
  double tol_sing() const;
  void set_tol_sing_relative(double rel);
  double tol_sing_relative() const { return tol_rel_; }
  double lambda_scale() const;

 private:
  Atlas atlas_;
  std::shared_ptr<const BundleSource> source_;
  int max_order_;
  double tol_rel_ = 1e-9;
  mutable double lambda_scale_ = -1.0;
};

/// Jet of λ with dÂ = φ*μ = λ du∧dv.
Jet lambda(const BundleHom& h, int chart, Point2 p, int order);
PointClass classify_point(const BundleHom& h, int chart, Point2 p, double tol_sing);
OneFormJ connection_form(const BundleHom& h, int chart, Point2 p, int order);
/// Density of dω against du∧dv: ∂u ω_v − ∂v ω_u. Smooth across Σ_φ.
double curvature_density(const BundleHom& h, int chart, Point2 p);
/// K_{φ,D} = (∂u ω_v − ∂v ω_u)/λ; throws SingularPoint on Σ_φ.
double gaussian_curvature_K(const BundleHom& h, int chart, Point2 p);
/// ds² = φ*⟨,⟩ as (g11, g12, g22).
std::array<double, 3> pullback_metric(const BundleHom& h, int chart, Point2 p);
/// |D_{∂u}φ(∂v) − D_{∂v}φ(∂u)|; a diagnostic only, never required to vanish.
double coherence_residual(const BundleHom& h, int chart, Point2 p);

/// Position, velocity and acceleration of a chart curve at one parameter value.
struct CurvePoint {
  int chart = 0;
  Point2 pos, vel, acc;
};

struct GeodesicCurvatures {
  std::optional<double> kappa_g;  // absent on Σ_φ
  double kappa_hat = 0.0;         // ⟨D_t φ(σ̇), n̂⟩ for unit |φσ̇|; defined on Σ_φ too
  double speed = 0.0;             // |φ(σ̇)|
  double lambda = 0.0;
};

/// Both geodesic curvatures. κ_g is computed intrinsically on TM from ds²
/// and the pull-back connection (n is the ds²-unit normal with (σ̇, n)
/// positive); κ̂_g from E alone. Throws NotArclength if `require_arclength`
/// and |φσ̇| deviates from 1 by more than 1e-6. For other speeds both are
/// normalized to curvature per unit ds²-length.
GeodesicCurvatures geodesic_curvatures(const BundleHom& h, const CurvePoint& c,
                                       bool require_arclength = true);

/// Covariant derivative D_t φ(σ̇) in the orthonormal frame and φ(σ̇) itself.
std::pair<std::array<double, 2>, std::array<double, 2>> covariant_velocity(const BundleHom& h,
                                                                           const CurvePoint& c);

}  // namespace gbs

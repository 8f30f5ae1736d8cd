#pragma once

/// Concrete bundle homomorphisms from Euclidean geometry: shape operators of
/// immersed surfaces in ℝ³, covariant differentials of tangent vector fields,
/// and fronts in ℝ³ with their limiting tangent planes.

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "gbsing/atlas.hpp"
#include "gbsing/bundle.hpp"
#include "gbsing/expr.hpp"
#include "gbsing/jet.hpp"

namespace gbs {

using Vec3J = std::array<Jet, 3>;
using Vec3 = std::array<double, 3>;

Jet dot(const Vec3J& a, const Vec3J& b);
Vec3J cross(const Vec3J& a, const Vec3J& b);
Jet det3(const Vec3J& a, const Vec3J& b, const Vec3J& c);
Vec3J derivative(const Vec3J& a, int which);
Vec3J truncated(const Vec3J& a, int order);
Vec3J operator*(const Jet& s, const Vec3J& a);
Vec3J operator+(const Vec3J& a, const Vec3J& b);
Vec3J operator-(const Vec3J& a, const Vec3J& b);
Vec3 value(const Vec3J& a);

/// Immersion f: M² → ℝ³ given per chart by Expr triples (in u, v and, on the
/// sphere atlas, the unit-sphere coordinates x, y, z).
class SurfaceEmbedding {
 public:
  SurfaceEmbedding(Atlas atlas, std::vector<std::array<Expr, 3>> per_chart);
  /// One triple for every chart.
  static SurfaceEmbedding uniform(Atlas atlas, std::array<Expr, 3> f);

  const Atlas& atlas() const { return atlas_; }
  const std::vector<std::array<Expr, 3>>& exprs() const { return exprs_; }
  Vec3J jets(int chart, Point2 p, int order) const;
  Vec3 position(int chart, Point2 p) const;

  /// x ↦ A x + b applied to the image.
  SurfaceEmbedding transformed(const std::array<double, 9>& A, const Vec3& b) const;

  /// Smallest |f_u × f_v| over an n×n sample of every chart's partition support.
  double min_immersion(int n = 32) const;

 private:
  Atlas atlas_;
  std::vector<std::array<Expr, 3>> exprs_;
  std::vector<std::array<CompiledExpr, 3>> compiled_;
};

/// Weingarten map v ↦ −dν(v) on E = TM² with the first fundamental form.
class ShapeOperatorSource final : public FramedSource {
 public:
  explicit ShapeOperatorSource(SurfaceEmbedding s,
                               ConnectionKind connection = ConnectionKind::LeviCivita);
  int order_overhead() const override { return 2; }
  std::string description() const override { return "shape operator"; }
  Sym2J frame_metric(int chart, Point2 p, int order) const override;
  Mat2J frame_phi(int chart, Point2 p, int order) const override;
  const SurfaceEmbedding& surface() const { return s_; }

 private:
  SurfaceEmbedding s_;
};

/// Tangent vector field X with a Riemannian metric. Either symbolic per chart
/// (coefficients of X and of the metric), or the tangential part of an
/// ambient field V(x, y, z) along an embedding with its induced metric.
class TangentVectorField {
 public:
  struct ChartData {
    std::array<Expr, 2> X;
    std::array<Expr, 3> metric;  // g11, g12, g22
  };
  TangentVectorField(Atlas atlas, std::vector<ChartData> charts);
  TangentVectorField(SurfaceEmbedding embedding, std::array<Expr, 3> ambient);

  const Atlas& atlas() const;
  bool ambient() const { return embedding_.has_value(); }
  int order_overhead() const { return ambient() ? 2 : 1; }
  /// Coordinate components of X, exact through `order`.
  std::array<Jet, 2> components(int chart, Point2 p, int order) const;
  Sym2J metric(int chart, Point2 p, int order) const;

 private:
  std::optional<SurfaceEmbedding> embedding_;
  Atlas atlas_;
  std::vector<std::array<CompiledExpr, 2>> X_;
  std::vector<std::array<CompiledExpr, 3>> g_;
  std::array<CompiledExpr, 3> V_;
};

/// φ(v) = D_v X on E = TM² with the field's metric.
class RotationSource final : public FramedSource {
 public:
  explicit RotationSource(TangentVectorField X,
                          ConnectionKind connection = ConnectionKind::LeviCivita);
  int order_overhead() const override { return field_.order_overhead(); }
  std::string description() const override { return "covariant differential of a vector field"; }
  Sym2J frame_metric(int chart, Point2 p, int order) const override;
  Mat2J frame_phi(int chart, Point2 p, int order) const override;
  const TangentVectorField& field() const { return field_; }

 private:
  TangentVectorField field_;
};

/// A front f: M² → ℝ³ with unit normal direction n (normalized internally),
/// viewed as φ = df: TM² → E = n^⊥ with the tangential projection of the flat
/// connection. E is oriented so that (s1, s2, n) is positive.
class FrontSource final : public FramedSource {
 public:
  FrontSource(Atlas atlas, std::array<Expr, 3> f, std::array<Expr, 3> normal);
  int order_overhead() const override { return 1; }
  std::string description() const override { return "front"; }
  Sym2J frame_metric(int chart, Point2 p, int order) const override;
  Mat2J frame_phi(int chart, Point2 p, int order) const override;
  std::array<Mat2J, 2> frame_connection(int chart, Point2 p, int order) const override;

  Vec3J position(int chart, Point2 p, int order) const;
  Vec3J unit_normal(int chart, Point2 p, int order) const;

 private:
  Vec3J frame_vector(int which, int chart, Point2 p, int order) const;
  Atlas atlas_;
  std::array<CompiledExpr, 3> f_, n_;
  Vec3 reference_;  // constant vector projected to build s1
};

BundleHom shape_operator(const SurfaceEmbedding& s, int max_jet_order = kDefaultJetOrder);
BundleHom rotation_field(const TangentVectorField& X, int max_jet_order = kDefaultJetOrder);

/// rot(X) = μ(D_{e1}X, D_{e2}X) for an oriented orthonormal frame; equals λ/√det g.
double rot(const BundleHom& h, int chart, Point2 p);

/// μ(Ẋ, Ẍ)/|Ẋ|³ with Ẋ = D_{γ̇}X and Ẍ = D_{γ̇}Ẋ, computed in coordinates with
/// Christoffel symbols (independently of the orthonormal-frame route).
/// Throws AtA3Point when |Ẋ| < 1e-8.
double irrotational_curvature(const TangentVectorField& X, const CurvePoint& c);

/// Gaussian curvature of the embedding from its fundamental forms.
double gaussian_curvature(const SurfaceEmbedding& s, int chart, Point2 p);

}  // namespace gbs

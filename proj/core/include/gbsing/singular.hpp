#pragma once

/// The singular set Σ = {λ = 0}: tracing, null directions, A₂/A₃
/// classification, A₃ signs and singular curvature.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gbsing/atlas.hpp"
#include "gbsing/bundle.hpp"
#include "gbsing/topology.hpp"

namespace gbs {

struct CurveSample {
  ChartPoint at;
  double lambda = 0.0;
  Point2 grad;     // ∇λ in chart coordinates
  Point2 tangent;  // unit chart tangent with M⁺ on the left: (λ_v, −λ_u)/|∇λ|
  Point2 accel;    // γ̈ for the chart-arclength parametrization
  Point2 eta;      // unit null vector, sign propagated along the curve
  double psi = 0.0;                // det(tangent, η)
  std::optional<double> kappa_s;   // absent where |φ(γ̇)| < 1e-8
};

enum class PointKind { A2, A3 };

struct SingularPointRecord {
  ChartPoint at;
  PointKind kind = PointKind::A3;
  int curve = -1;
  int segment = -1;          // the sample index k with the point on [k, k+1]
  double sigma = 0.0;        // position on that segment, in [0, 1]
  double s = 0.0;            // cumulative chart-length parameter along the curve
  double dpsi = 0.0;         // dψ/ds at the point
  int sign = 0;              // +1 positive (M⁻ has zero angle), −1 negative
  double sign_margin = 0.0;  // cosine between the M⁻ image direction and the cusp axis
  double k_minus = 0.0, k_plus = 0.0;  // arc-length vanishing exponents (diagnostic)
};

struct SingularCurve {
  std::vector<CurveSample> points;
  bool closed = true;
  bool eta_flips = false;  // η returns with the opposite sign after one loop
  std::vector<SingularPointRecord> a3;
  int a2_samples = 0;

  /// Chart-length parameter: segment k spans [s[k], s[k+1]].
  std::vector<double> s;
  double length() const { return s.empty() ? 0.0 : s.back(); }
  std::size_t segment_count() const {
    return closed ? points.size() : (points.empty() ? 0 : points.size() - 1);
  }
};

struct SingularSet {
  SignedMesh mesh;
  std::vector<SingularCurve> curves;
};

struct TraceOptions {
  double tol_nondeg_rel = 1e-6;  // relative to the chart scale of λ
};

/// Marching triangles on the mesh of resolution N; every crossing is a root of
/// λ on its mesh edge with |λ| ≤ 1e-10 (relative to the λ scale). Curves are
/// closed on closed atlases and oriented with M⁺ on the left.
/// Throws DegeneratePoint or OpenCurve.
SingularSet trace(const BundleHom& h, int N, const TraceOptions& opts = {});
std::vector<SingularCurve> trace_singular_set(const BundleHom& h, int N,
                                              const TraceOptions& opts = {});

/// Kernel of φ_p, unit in chart coordinates. Throws RankZero when φ_p is
/// (numerically) zero and SingularPoint when φ_p has rank 2.
Point2 null_direction(const BundleHom& h, int chart, Point2 p);

struct ClassifyOptions {
  double tol_psi = 1e-6;
  double tol_dpsi = 1e-6;
};

/// Finds the simple zeros of ψ along the curve, fills curve.a3 (without signs)
/// and curve.a2_samples, and returns the A₃ records. Throws HigherDegeneracy.
std::vector<SingularPointRecord> classify_points(const BundleHom& h, SingularCurve& curve,
                                                 const ClassifyOptions& opts = {});

/// Sign of an A₃ point from the image of the curve through φ: c = φ(γ̇)
/// vanishes at the point with c′ = a ≠ 0, and M⁻ has zero angle exactly when
/// φ of the M⁻ side points along a. Also fills the arc-length exponents.
/// Throws Inconclusive when the two directions are orthogonal within 1e-6.
int a3_sign(const BundleHom& h, SingularPointRecord& record);

/// Ratio test: ds²-length of the chart circle of radius ε around p lying in
/// M^±, fitted as C ε^k on a dyadic ladder. Returns (k⁻, k⁺).
std::pair<double, double> a3_arc_exponents(const BundleHom& h, const ChartPoint& p,
                                           double eps0 = 0.05);

/// κ_s at an A₂ point: sgn(dλ(η)) μ(c, D_t c)/|c|³ with c = φ(γ̇) and η chosen
/// so that (γ̇, η) is positive. Throws AtA3Point when |c| < 1e-8.
double singular_curvature(const BundleHom& h, const CurvePoint& c);

struct KappaIntegral {
  double value = 0.0;
  double tails = 0.0;   // contribution of the excised windows
  int windows = 0;
  int direct_windows = 0;  // windows where the density changes sign, so no power law was fitted
};

/// ∫ κ_s dτ over a closed classified curve. Each A₃ point is excised over a
/// parameter window of half width `delta_rel` times the curve length. A power
/// law fitted on the window's last decade must be integrable (else
/// TailFitFailure); the window is then integrated in w with d = δw².
KappaIntegral integrate_kappa_s(const BundleHom& h, const SingularCurve& curve,
                                double delta_rel = 1e-3);

/// Second classifier: zeros of dλ(η̃) along the curve, with η̃ the extended
/// null field (least singular direction of φ). Each zero reports η̃η̃λ.
struct FrontCriterionPoint {
  ChartPoint at;
  double s = 0.0;
  double eta_eta_lambda = 0.0;
};
std::vector<FrontCriterionPoint> null_field_zeros(const BundleHom& h, const SingularCurve& curve);

/// A least-singular direction field η̃ of some rank-≤2 differential with Gram
/// matrix (a, b, c) = (A₁·A₁, A₁·A₂, A₂·A₂) and a function λ vanishing on Σ.
struct NullFieldData {
  Point2 eta;
  double eta_lambda = 0.0;      // dλ(η̃)/|∇λ|
  double eta_eta_lambda = 0.0;  // η̃(η̃λ)
};
/// a, b, c need order ≥ 1 and λ order ≥ 2; η̃ is oriented along `ref`.
NullFieldData null_field_from(const Jet& a, const Jet& b, const Jet& c, const Jet& lambda, Point2 ref);
using NullFieldFn = std::function<NullFieldData(int chart, Point2 p, Point2 ref)>;
/// Zeros of dλ(η̃) along a traced curve of h (bisection on each sign change).
std::vector<FrontCriterionPoint> criterion_zeros(const BundleHom& h, const SingularCurve& curve,
                                                 const NullFieldFn& field);
/// Matches criterion zeros against curve.a3 within `tol` (relative to the
/// curve length) and requires |η̃η̃λ| > min_second. Throws CriteriaMismatch.
void match_criterion_points(const SingularCurve& curve, const std::vector<FrontCriterionPoint>& zeros,
                            double tol, double min_second);

/// Compares classify_points with null_field_zeros: same number of points,
/// matched within `tol` in chart length, and η̃η̃λ ≠ 0 at each. Throws
/// CriteriaMismatch.
void cross_check_classification(const BundleHom& h, const SingularCurve& curve, double tol = 1e-6);

/// Trace, classify, sign and integrate all in one pass.
struct SingularAnalysis {
  SingularSet set;
  int a3_positive = 0, a3_negative = 0;
  double kappa_s_integral = 0.0;  // Σ over curves (closed atlases only)
  std::vector<KappaIntegral> per_curve;
};
SingularAnalysis analyze_singular_set(const BundleHom& h, int N, bool integrate = true);

/// The same φ into E with the opposite orientation: Φ ↦ diag(1, −1) Φ,
/// ω ↦ −ω. Exchanges M⁺ and M⁻.
BundleHom reverse_orientation(const BundleHom& h);

/// Point on segment k of a curve at σ ∈ [0, 1], with chart derivatives with
/// respect to σ. The segment is the graph over the chord between samples k
/// and k+1, projected onto {λ = 0}.
CurvePoint curve_point(const BundleHom& h, const SingularCurve& curve, std::size_t segment,
                       double sigma);

/// Expresses q in ref's chart near ref (periodic unwrap or chart change).
Point2 align_to(const Atlas& atlas, const ChartPoint& ref, const ChartPoint& q);

/// Refinement loop shared by the integer checks: doubles N from N0 until the
/// topology summary and the A₃ counts agree on two successive resolutions.
struct StableResult {
  SingularAnalysis analysis;
  RegionComplex complex;
  int resolution = 0;
  std::vector<int> tried;
};
StableResult refine_until_stable(const BundleHom& h, int N0, int max_doublings = 4,
                                 bool integrate = true);

}  // namespace gbs

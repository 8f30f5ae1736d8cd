#pragma once

/// Both sides of the Gauss–Bonnet type identities, with residuals, exact
/// integer checks and enough forensics to diagnose a miss.

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gbsing/blaschke.hpp"
#include "gbsing/bundle.hpp"
#include "gbsing/fields3d.hpp"
#include "gbsing/singular.hpp"

namespace gbs {

struct ReportRow {
  std::string name;
  bool integer = false;
  double lhs = 0.0, rhs = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
  std::optional<double> coarse_residual;  // same identity one grid level down
  bool pass = false;
  std::string note;
};

struct IntegerBlock {
  std::string a3_name = "S";  // S, C or I depending on the instantiation
  int chi_plus = 0, chi_minus = 0;
  int a3_plus = 0, a3_minus = 0;
  int components_plus = 0, components_minus = 0;
  int curves = 0;
  int chi_E = 0;
  double chi_E_measured = 0.0;
};

struct A3Forensics {
  int curve = -1;
  ChartPoint at;
  int sign = 0;
  double margin = 0.0;
  double dpsi = 0.0;
  double k_minus = 0.0, k_plus = 0.0;
};

struct CurveForensics {
  std::size_t samples = 0;
  double length = 0.0;
  bool eta_flips = false;
  int a3 = 0;
  double kappa_integral = 0.0;
  double kappa_tails = 0.0;
};

struct Provenance {
  int resolution = 0;
  std::vector<int> tried;
  int jet_order = 0;
  double delta_rel = 1e-3;
  int quadrature_cells = 0;
  std::string source;
};

struct VerificationReport {
  std::vector<ReportRow> rows;
  std::optional<IntegerBlock> integers;
  Provenance provenance;
  std::vector<A3Forensics> a3_points;
  std::vector<CurveForensics> curves;
  std::vector<SingularCurve> traced;  // the stable trace the integers came from
  double wall_seconds = 0.0;  // not part of any serialized artifact

  bool all_pass() const;
  void append(const VerificationReport& other);
};

struct VerifyOptions {
  int N0 = 32;
  int max_doublings = 3;
  double tol_global = 1e-2;    // absolute, for global integrals
  double tol_triangle = 1e-6;
  double quadrature_rtol = 1e-7;
  double chi_rounding = 0.05;
  bool refine_floats = true;   // also evaluate float identities one level down
  int jet_order = kDefaultJetOrder;  // for the checks that build their own BundleHom
};

/// A float identity row. With a coarse residual it passes only if both levels
/// are within `tol` and the residual did not grow, unless the fine residual is
/// already under tol/100.
ReportRow float_identity_row(std::string name, double lhs, double rhs, double tol,
                             std::optional<double> coarse);

/// Singular census plus the integrals shared by the global checks. Closed
/// atlases only.
struct GlobalAnalysis {
  StableResult stable;
  double total_domega = 0.0, total_domega_coarse = 0.0;  // ∫ dω
  double minus_domega = 0.0, minus_domega_coarse = 0.0;  // ∫_{M⁻} dω
  double kappa = 0.0;
  std::optional<double> kappa_coarse;
  int quadrature_cells = 0;
};
/// Throws UnclassifiedSingularity when a singular point is neither A₂ nor A₃.
GlobalAnalysis analyze_global(const BundleHom& h, const VerifyOptions& opts = {});

/// χ_E − [χ(M⁺) − χ(M⁻) + S₊ − S₋] (exact) and 2πχ(M²) − ∫K dA − 2∫κ_s dτ.
VerificationReport check_global(const BundleHom& h, const GlobalAnalysis& g, const VerifyOptions& opts = {});
VerificationReport check_global(const BundleHom& h, const VerifyOptions& opts = {});

/// 2χ(M⁻) = S₊ − S₋ (exact) and ∫_{M⁻} K dÂ = ∫ κ_s dτ. Needs E = TM².
VerificationReport check_theorem1(const BundleHom& h, const GlobalAnalysis& g, const VerifyOptions& opts = {});
VerificationReport check_theorem1(const BundleHom& h, const VerifyOptions& opts = {});

/// Names the A₃ points and the integer rows of a check_theorem1 report after
/// the structure it was instantiated for.
VerificationReport relabel_integer_rows(VerificationReport rep, const std::string& a3_name,
                                        const std::string& integer_name);

/// 2χ(M⁻) = C₊ − C₋ for φ = DX, with M⁻ = {rot X < 0}.
VerificationReport check_rotation_proposition(const TangentVectorField& X, const VerifyOptions& opts = {});
/// 2χ(M⁻) = I₊ − I₋ for the shape operator of an immersed sphere or torus.
VerificationReport check_bleeker_wilson(const SurfaceEmbedding& s, const VerifyOptions& opts = {});
/// 2χ(M⁻) = S₊ − S₋ for the affine shape operator, with the global rows and
/// the integral row of check_theorem1 for φ = α as supporting evidence.
VerificationReport check_blaschke_theorem(std::shared_ptr<const BlaschkeStructure> b,
                                          const VerifyOptions& opts = {});

/// A chart curve on t ∈ [0, 1].
struct Arc {
  std::function<CurvePoint(double)> at;
};
Arc chart_segment(int chart, Point2 a, Point2 b);
/// Great-circle arc between unit vectors a and b of the round sphere, in the
/// stereographic chart `chart` (neither endpoint may be that chart's pole).
Arc sphere_great_arc(int chart, const Vec3& a, const Vec3& b);

/// Arcs A→B, B→C, C→A in one chart, counter-clockwise.
struct Triangle {
  std::array<Arc, 3> arcs;
};

struct TriangleTerms {
  std::array<double, 3> angles{};  // interior ds² angles at A, B, C
  double angle_excess = 0.0;       // Σ∠ − π
  double kappa_g = 0.0;            // ∮ κ_g dτ (left normal)
  double curvature = 0.0;          // ∬ K_{φ,D} dA
};
/// Throws TriangleTouchesSigma when λ vanishes or changes sign on the
/// triangle and InvalidArgument when the arcs are clockwise.
TriangleTerms triangle_terms(const BundleHom& h, const Triangle& t, int panels = 8);
/// ∠A + ∠B + ∠C − π − ∮κ_g dτ − ∬K_{φ,D} dA.
ReportRow check_triangle(const BundleHom& h, const Triangle& t, const VerifyOptions& opts = {});

}  // namespace gbs

#pragma once

/// Equiaffine (Blaschke) structure of a strictly convex embedding
/// f: S² → ℝ³: Blaschke metric h, affine normal ξ, conormal ν, affine shape
/// operator α with ∂ᵢξ = −α(∂ᵢ), and the Blaschke normal map ξ̃ = ξ viewed as
/// a map S² → ℝ³.
///
/// Recipe: L_ij = det(f_u, f_v, f_ij), sign-fixed so that L is positive
/// definite; h = L / |det L|^{1/4}; ξ = ½ Δ_h f. Derivative budget: h uses
/// f at order + 2, ξ at order + 3, α at order + 4.

#include <memory>
#include <vector>

#include "gbsing/bundle.hpp"
#include "gbsing/fields3d.hpp"
#include "gbsing/singular.hpp"

namespace gbs {

class BlaschkeStructure {
 public:
  /// Scans an n×n grid of every chart for det L > 0; throws NotConvex.
  explicit BlaschkeStructure(SurfaceEmbedding s, int convexity_grid = 64);

  const SurfaceEmbedding& base() const { return s_; }
  const Atlas& atlas() const { return s_.atlas(); }

  /// h_ij, exact through `order`. Throws NotConvex where det L ≤ 0.
  Sym2J metric(int chart, Point2 p, int order) const;
  /// The affine normal ξ.
  Vec3J affine_normal(int chart, Point2 p, int order) const;
  /// ξ̃(p), the Blaschke normal map.
  Vec3 normal_map(int chart, Point2 p) const;
  /// Conormal ν = (f_u × f_v) / det(f_u, f_v, ξ): ν(f_u) = ν(f_v) = 0, ν(ξ) = 1.
  Vec3J conormal(int chart, Point2 p, int order) const;

  struct ShapeOperator {
    Mat2J alpha;                  // columns: −(f_u, f_v)-components of ∂_u ξ, ∂_v ξ
    std::array<double, 2> normal_residual{};  // |ξ-component of ∂ᵢξ| · |ξ| / |∂ᵢξ|
  };
  /// α at `order`. Throws NotConvex or LinearSolveFailure.
  ShapeOperator shape_operator(int chart, Point2 p, int order) const;

  /// L with its per-point sign fixed (order ≥ 0) and the sign used.
  std::pair<Sym2J, int> convexity_form(int chart, Point2 p, int order) const;
  /// Smallest eigenvalue of the sign-fixed L over an n×n sample of each chart.
  double min_convexity_eigenvalue(int n) const;

 private:
  SurfaceEmbedding s_;
};

/// E = TS² with the first fundamental form (or the Blaschke metric) and its
/// Levi-Civita connection; φ = α.
class BlaschkeSource final : public FramedSource {
 public:
  explicit BlaschkeSource(std::shared_ptr<const BlaschkeStructure> b, bool blaschke_metric = false);
  int order_overhead() const override { return 4; }
  std::string description() const override;
  Sym2J frame_metric(int chart, Point2 p, int order) const override;
  Mat2J frame_phi(int chart, Point2 p, int order) const override;
  const BlaschkeStructure& structure() const { return *b_; }

 private:
  std::shared_ptr<const BlaschkeStructure> b_;
  bool blaschke_metric_;
};

BundleHom affine_shape_operator(std::shared_ptr<const BlaschkeStructure> b,
                                bool blaschke_metric = false,
                                int max_jet_order = kDefaultJetOrder);

/// Singular points of ξ̃ against those of α on an n×n sample of each chart.
struct RankCrossCheck {
  int nodes = 0;
  int small_agree = 0;       // {σ_min(dξ̃) < tol} ⇔ {|λ_α| < tol}
  int sign_agree = 0;        // sgn det(ξ_u, ξ_v, f_u × f_v) = sgn det α
  int disagreements_off_sigma = 0;  // disagreements with no sign change of λ in the cell
};
RankCrossCheck blaschke_rank_check(const BlaschkeStructure& b, int n, double tol = 1e-6);

struct FrontReport {
  int samples = 0;
  double min_conormal_rank = 0.0;   // σ_min/σ_max of the 2×3 matrix (ν_u; ν_v)
  double min_front_det = 0.0;       // |det(ν, ν_u, ν_v)| / (|ν| |ν_u| |ν_v|)
  double min_h_eigenvalue = 0.0;
  double max_conormal_residual = 0.0;   // |ν_{u_i}(f_{u_j}) + h_ij| / max|h|
  double max_structure_residual = 0.0;  // |ν(f_ij) − h_ij| / max|h|
  double max_duality_residual = 0.0;    // |ν(ξ) − 1|, |ν(f_u)|, |ν(f_v)| (scaled)
  double max_equiaffine_residual = 0.0;
};
struct FrontTolerances {
  double rank = 1e-8;
  double det = 1e-8;
  double residual = 1e-8;
};
/// Legendrian/front conditions of ξ̃ on an n×n sample of each chart.
/// Throws FrontConditionViolated when a minimum drops to its tolerance or a
/// residual exceeds it.
FrontReport front_checks(const BlaschkeStructure& b, int n = 32, const FrontTolerances& tol = {});

/// Null-field data of the front ξ̃: λ_f = det(ξ_u, ξ_v, ν) and η̃ the least
/// singular direction of dξ̃.
NullFieldData front_null_field(const BlaschkeStructure& b, int chart, Point2 p, Point2 ref);

struct SwallowtailCensus {
  StableResult stable;
  int s_plus = 0, s_minus = 0;
  int chi_plus = 0, chi_minus = 0;
  int components_minus = 0;
  int curves = 0;
  bool identity_holds() const { return s_plus - s_minus == 2 * chi_minus; }
};
struct CensusOptions {
  int N0 = 32;
  int max_doublings = 3;
  bool blaschke_metric = false;
  bool integrate = false;
  double match_tol = 1e-6;
  int jet_order = kDefaultJetOrder;
};
/// Trace, classify and sign the singular set of α, then confirm every verdict
/// with the front criteria on ξ̃ and with the null-field route on α.
/// Throws CriteriaMismatch, HigherDegeneracy, NoStabilization.
SwallowtailCensus swallowtail_census(std::shared_ptr<const BlaschkeStructure> b,
                                     const CensusOptions& opts = {});

}  // namespace gbs

#pragma once

/// JSON artifacts of the subcommands. Every document carries "schema": 1 and
/// nothing that depends on the wall clock, so equal inputs give equal bytes.

#include <optional>
#include <string>

#include "gbsing/cli/scene.hpp"
#include "gbsing/verify.hpp"
#include "json.hpp"

namespace gbs::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// How the A₃ points and the integer identity are named for a scene.
struct Naming {
  std::string a3 = "S";
  std::string integer_row = "two_chi_minus";
  bool tangent = false;  // E = TM², so 2χ(M⁻) = A₃₊ − A₃₋ applies
};
Naming naming_for(const Scene& s);

/// Census of the singular set from a grid-stable complex.
struct Census {
  explicit Census(StableResult s) : stable(std::move(s)) {}
  StableResult stable;
  int a3_plus = 0, a3_minus = 0;
  int chi_plus = 0, chi_minus = 0;
  int components_plus = 0, components_minus = 0;
  int curves = 0;
  std::optional<bool> identity_holds;  // set for tangent bundles
};
Census take_census(const SceneModel& m, const Scene& s, int grid, int jet_order);

struct SceneVerification {
  VerificationReport report;
  std::optional<FrontReport> front;   // blaschke scenes
  std::optional<double> coherence;    // max coherence_residual over a sample
  bool pass() const { return report.all_pass(); }
};
/// Every identity that applies to the scene: the global rows on closed
/// atlases, the A₃ identity for tangent bundles, front rows for blaschke
/// scenes and one row per [triangle].
SceneVerification verify_scene(const Scene& s, const SceneModel& m, int grid, int jet_order);

Json trace_json(const Scene& s, const SingularAnalysis& a, int grid);
Json census_json(const Scene& s, const Census& c);
/// `front` is present for blaschke scenes.
Json verify_json(const Scene& s, const VerificationReport& rep, std::optional<FrontReport> front,
                 std::optional<double> coherence);

Json point_json(const ChartPoint& p);
Json row_json(const ReportRow& r);

/// Writes `text` to `path`; throws Io on failure.
void write_text(const std::string& path, const std::string& text);

}  // namespace gbs::cli

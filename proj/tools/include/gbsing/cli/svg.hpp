#pragma once

/// Static SVG 1.1 figures of the parameter domain: M⁺ light, M⁻ dark, Σ
/// stroked, A₃ points as triangles (up positive, down negative) and a legend
/// carrying the integer identity. Output depends only on the inputs.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gbsing/atlas.hpp"
#include "gbsing/fields3d.hpp"
#include "gbsing/singular.hpp"

namespace gbs::cli {

struct Figure {
  std::string title;
  Atlas atlas = Atlas::torus();
  /// λ at a point, or nothing where it cannot be evaluated.
  std::function<std::optional<double>(const ChartPoint&)> lambda;
  std::vector<SingularCurve> curves;
  std::vector<std::string> legend;
  /// ξ̃ for an extra orthographic panel of the front image.
  std::function<std::optional<Vec3>(const ChartPoint&)> front;
  int raster = 96;  // fill cells per panel side
};

std::string render_svg(const Figure& f);

/// "2χ(M⁻) = S₊ − S₋ : 2·χ = a − b", or "0 = 0" when Σ is empty.
std::string identity_legend(const std::string& a3_name, bool tangent, bool closed, int chi_plus, int chi_minus,
                            int a3_plus, int a3_minus, bool empty);

}  // namespace gbs::cli

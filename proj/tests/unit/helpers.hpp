#pragma once

#include <array>
#include <memory>
#include <vector>

#include "gbsing/bundle.hpp"

namespace gbs::testing {

/// The same symbolic frame metric and Φ in every chart.
inline std::shared_ptr<ExprSource> expr_source(const Atlas& atlas, std::array<const char*, 3> metric,
                                               std::array<const char*, 4> phi, bool tangent = false,
                                               ConnectionKind kind = ConnectionKind::OrthonormalFlat) {
  std::vector<ExprSource::ChartExprs> charts;
  for (std::size_t c = 0; c < atlas.charts().size(); ++c) {
    ExprSource::ChartExprs e;
    for (int i = 0; i < 3; ++i) e.metric[i] = parse_expr(metric[i]);
    for (int i = 0; i < 4; ++i) e.phi[i] = parse_expr(phi[i]);
    charts.push_back(e);
  }
  return std::make_shared<ExprSource>(atlas, charts, tangent, kind);
}

/// A flat trivial bundle with Φ = diag(L, 1), so λ = L.
inline BundleHom synthetic_lambda(const Atlas& atlas, const char* L) {
  return BundleHom(atlas, expr_source(atlas, {"1", "0", "1"}, {L, "0", "0", "1"}));
}

}  // namespace gbs::testing

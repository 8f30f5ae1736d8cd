#include <benchmark/benchmark.h>

#include <memory>

#include "gbsing/blaschke.hpp"
#include "gbsing/fields3d.hpp"
#include "gbsing/singular.hpp"
#include "gbsing/verify.hpp"

using namespace gbs;

namespace {

SurfaceEmbedding bumpy_sphere() {
  const char* r = "(1 + 0.7*z^4*(x^2 - y^2))";
  return SurfaceEmbedding::uniform(Atlas::sphere(), {parse_expr(std::string(r) + "*x"),
                                                     parse_expr(std::string(r) + "*y"),
                                                     parse_expr(std::string(r) + "*z")});
}

BundleHom torus_field() {
  std::vector<TangentVectorField::ChartData> charts(1);
  charts[0].X = {parse_expr("sin(u) + 0.3*cos(v)"), parse_expr("sin(v) + 0.3*cos(u)")};
  charts[0].metric = {parse_expr("1"), parse_expr("0"), parse_expr("1")};
  return rotation_field(TangentVectorField(Atlas::torus(), charts));
}

void BM_LambdaJet(benchmark::State& state) {
  const BundleHom h = shape_operator(bumpy_sphere());
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lambda(h, 0, {0.3, -0.4}, order));
}
BENCHMARK(BM_LambdaJet)->DenseRange(0, 4, 2);

void BM_AffineShapeOperator(benchmark::State& state) {
  auto b = std::make_shared<BlaschkeStructure>(SurfaceEmbedding::uniform(
      Atlas::sphere(), {parse_expr("x"), parse_expr("1.2*y"), parse_expr("0.9*z")}));
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(b->shape_operator(0, {0.3, -0.4}, order));
}
BENCHMARK(BM_AffineShapeOperator)->DenseRange(0, 2, 1);

void BM_TraceTorusField(benchmark::State& state) {
  const BundleHom h = torus_field();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(analyze_singular_set(h, n, false));
}
BENCHMARK(BM_TraceTorusField)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TraceBumpySphere(benchmark::State& state) {
  const BundleHom h = shape_operator(bumpy_sphere());
  for (auto _ : state) benchmark::DoNotOptimize(analyze_singular_set(h, 64, false));
}
BENCHMARK(BM_TraceBumpySphere)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_GlobalCheckTorusField(benchmark::State& state) {
  const BundleHom h = torus_field();
  for (auto _ : state) benchmark::DoNotOptimize(check_global(h));
}
BENCHMARK(BM_GlobalCheckTorusField)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

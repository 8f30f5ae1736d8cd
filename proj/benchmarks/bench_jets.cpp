#include <benchmark/benchmark.h>

#include "gbsing/expr.hpp"
#include "gbsing/jet.hpp"

using namespace gbs;

namespace {

void BM_JetProduct(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const Jet a = parse_expr("exp(u + 0.3*v)").jet(0.2, -0.1, order);
  const Jet b = parse_expr("sin(u*v) + 2").jet(0.2, -0.1, order);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_JetProduct)->DenseRange(2, 8, 2);

void BM_JetDivide(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const Jet a = parse_expr("exp(u + 0.3*v)").jet(0.2, -0.1, order);
  const Jet b = parse_expr("sin(u*v) + 2").jet(0.2, -0.1, order);
  for (auto _ : state) benchmark::DoNotOptimize(a / b);
}
BENCHMARK(BM_JetDivide)->DenseRange(2, 8, 2);

void BM_ExprJet(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  const Expr e = parse_expr("(1 + 0.7*u^4*(u^2 - v^2))*sqrt(1 + u^2 + v^2)/(2 + cos(v))");
  for (auto _ : state) benchmark::DoNotOptimize(e.jet(0.3, 0.4, order));
}
BENCHMARK(BM_ExprJet)->DenseRange(2, 8, 2);

}  // namespace

// libbenchmark_main.a on some distributions carries LTO bytecode from another
// compiler release, so main comes from here.
BENCHMARK_MAIN();

#include <vector>

#include <benchmark/benchmark.h>

#include <tauspec/basis.hpp>
#include <tauspec/opalg.hpp>

using namespace tauspec;

namespace {

const BasisSpec kCheb(Family::ChebyshevT, 0.0, 1.0);
const BasisSpec kLeg(Family::LegendreP, 0.0, 1.0);

void BM_BuildN(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_N(kCheb, n));
}
BENCHMARK(BM_BuildN)->RangeMultiplier(2)->Range(16, 256);

void BM_BuildO(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_O(kLeg, n));
}
BENCHMARK(BM_BuildO)->RangeMultiplier(2)->Range(16, 256);

void BM_PolyOfM(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> p(n / 2, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = 1.0 / (1.0 + static_cast<double>(i * i));
  for (auto _ : state) benchmark::DoNotOptimize(poly_of_M(kCheb, p, n));
}
BENCHMARK(BM_PolyOfM)->RangeMultiplier(2)->Range(16, 128);

void BM_Product(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n, 0.5), b(n, -0.25);
  const Series p(kLeg, a), q(kLeg, b);
  const LinearizationTable table(Family::LegendreP, static_cast<int>(n));
  for (auto _ : state) benchmark::DoNotOptimize(product(p, q, table));
}
BENCHMARK(BM_Product)->RangeMultiplier(2)->Range(16, 256);

}  // namespace

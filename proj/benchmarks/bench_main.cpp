// Kernel timings: Clifford products, Lame C-surface solves, conjugate-net solves.

#include <benchmark/benchmark.h>

#include <memory>
#include <numbers>
#include <random>

#include "dlame/analysis.hpp"
#include "dlame/clifford.hpp"
#include "dlame/conjugate.hpp"
#include "dlame/orthogonal.hpp"

namespace {

using namespace dlame;

template <int N>
Multivector<N> random_multivector(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Multivector<N> m;
  for (unsigned b = 0; b < Multivector<N>::kBlades; ++b) m[b] = u(rng);
  return m;
}

template <int N>
void BM_GeometricProduct(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto a = random_multivector<N>(rng), b = random_multivector<N>(rng);
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_GeometricProduct<2>);
BENCHMARK(BM_GeometricProduct<3>);

template <int N>
void BM_Adjoint(benchmark::State& state) {
  const auto psi = frame_from_euclidean<N>(EVec<N>::Constant(0.3), {EVec<N>::Unit(0), EVec<N>::Unit(1)});
  const auto v = MinkowskiVector<N>::e0();
  for (auto _ : state) benchmark::DoNotOptimize(adjoint(psi, v));
}
BENCHMARK(BM_Adjoint<2>);
BENCHMARK(BM_Adjoint<3>);

// Elliptic C-surface at eps = pi / range(0).
void BM_CSurfaceSolve(benchmark::State& state) {
  const double eps = std::numbers::pi / static_cast<double>(state.range(0));
  const auto F = std::make_shared<EllipticOracle>();
  const auto data = oracle_csurface_data<2>(F, eps, false);
  const double r = 0.3 * std::numbers::pi;
  for (auto _ : state) benchmark::DoNotOptimize(csurface_solve<2>(data, eps, r).x.data().data());
  state.counters["sites"] = static_cast<double>(MeshSpec::uniform(2, eps, r).site_count());
}
BENCHMARK(BM_CSurfaceSolve)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

// Flat-metric conjugate net with constant small coefficients, M = 3.
void BM_ConjugateSolve(benchmark::State& state) {
  const int R = static_cast<int>(state.range(0));
  const double eps = 1.0 / R;
  const MeshSpec mesh = MeshSpec::uniform(3, eps, 1.0);
  std::vector<CurveFn> curves;
  for (int i = 0; i < 3; ++i) curves.push_back([i](double t) { return Vec(t * Vec::Unit(3, i)); });
  const CoeffFn coeff = [](int i, int j, std::span<const double>) { return 0.05 * (i + 1) - 0.03 * j; };
  const auto data = conjugate_data_from_curves(Vec::Zero(3), curves, {}, coeff, mesh);
  for (auto _ : state) benchmark::DoNotOptimize(solve_conjugate_net(data, mesh, 3).x.data().data());
  state.counters["sites"] = static_cast<double>(mesh.site_count());
}
BENCHMARK(BM_ConjugateSolve)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_OrthoSystemAssemble(benchmark::State& state) {
  const double eps = 0.6 / static_cast<double>(state.range(0));
  const auto F = std::make_shared<SphericalOracle>();
  const auto data = oracle_ortho_data<3>(F);
  for (auto _ : state) benchmark::DoNotOptimize(orthosys_assemble<3>(data, eps, 0.6).net.x.data().data());
}
BENCHMARK(BM_OrthoSystemAssemble)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

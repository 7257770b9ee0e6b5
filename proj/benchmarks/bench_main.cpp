#include <benchmark/benchmark.h>

#include "heatlab/contour.hpp"
#include "heatlab/estimators.hpp"
#include "heatlab/kernel.hpp"
#include "heatlab/spectral.hpp"

using namespace heatlab;

namespace {

std::shared_ptr<const fem::FeSystem> make_system(const std::string& domain, int level) {
  return fem::FeSystem::create(estimators::make_mesh(domain, level), 1);
}

void BM_AssembleSystem(benchmark::State& state) {
  const auto mesh = estimators::make_mesh("lshape", static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fem::FeSystem::create(mesh, 1));
  state.counters["dofs"] = static_cast<double>(fem::FeSpace(mesh, 1).num_free());
}
BENCHMARK(BM_AssembleSystem)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state) {
  const auto sys = make_system("square", static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(spectral::SpectralDecomposition::decompose(sys->mass(), sys->stiffness()));
  }
  state.counters["dofs"] = static_cast<double>(sys->size());
}
BENCHMARK(BM_Decompose)->DenseRange(3, 4)->Unit(benchmark::kMillisecond);

void BM_ContourPropagate(benchmark::State& state) {
  const auto sys = make_system("lshape", static_cast<int>(state.range(0)));
  const spectral::ContourPropagator prop(sys);
  const Eigen::MatrixXd loads = sys->mass() * Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sys->size()));
  const std::vector<double> times{1e-4, 2e-4, 1e-3, 3e-3};
  for (auto _ : state) {
    double sum = 0.0;
    prop.propagate(loads, times, 1, [&](std::size_t, const std::vector<Eigen::MatrixXd>& d) { sum += d[0](0, 0); });
    benchmark::DoNotOptimize(sum);
  }
  state.counters["dofs"] = static_cast<double>(sys->size());
}
BENCHMARK(BM_ContourPropagate)->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

void BM_KernelBankSlices(benchmark::State& state) {
  const auto sys = make_system("square", 4);
  const auto spec = std::make_shared<const spectral::SpectralDecomposition>(
      spectral::SpectralDecomposition::decompose(sys->mass(), sys->stiffness()));
  const kernel::KernelBank bank(sys, spec, estimators::kernel_probe_points(sys->space().mesh()));
  for (auto _ : state) benchmark::DoNotOptimize(bank.l1_norms(1e-3, 1));
}
BENCHMARK(BM_KernelBankSlices)->Unit(benchmark::kMillisecond);

void BM_BumpLoads(benchmark::State& state) {
  const auto coarse = estimators::make_mesh("square", 3);
  const auto fine = make_system("square", static_cast<int>(state.range(0)));
  const auto bump = kernel::RegularizedBump::inside_element(*coarse, mesh::Point(0.3, 0.4));
  for (auto _ : state) benchmark::DoNotOptimize(kernel::bump_loads(fine->space(), bump));
}
BENCHMARK(BM_BumpLoads)->DenseRange(5, 7)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "mechent/integrator.hpp"
#include "mechent/lindblad.hpp"
#include "mechent/local_picture.hpp"
#include "mechent/measures.hpp"

using namespace mechent;

namespace {

FockLayout layout_of(const benchmark::State& state) {
  return FockLayout{static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                    static_cast<int>(state.range(1))};
}

Operator random_state(int n) {
  std::srand(1);
  Operator g = Operator::Random(n, n);
  Operator r = g * g.adjoint();
  return r / r.trace();
}

void BM_local_rhs(benchmark::State& state) {
  const FockLayout layout = layout_of(state);
  const LocalPictureGenerator gen(SystemParams::reference_defaults(), layout);
  const Operator rho = random_state(layout.total());
  Operator drho(layout.total(), layout.total());
  gen.apply(1e-9, rho, drho);  // warm the propagator cache
  for (auto _ : state) {
    gen.apply(1e-9, rho, drho);
    benchmark::DoNotOptimize(drho.data());
  }
}
BENCHMARK(BM_local_rhs)->Args({3, 8})->Args({4, 10})->Unit(benchmark::kMillisecond);

void BM_sparse_rhs(benchmark::State& state) {
  const FockLayout layout = layout_of(state);
  const LindbladGenerator gen(full_model(SystemParams::reference_defaults(), layout));
  const Operator rho = random_state(layout.total());
  Operator drho(layout.total(), layout.total());
  for (auto _ : state) {
    gen.apply(1e-9, rho, drho);
    benchmark::DoNotOptimize(drho.data());
  }
}
BENCHMARK(BM_sparse_rhs)->Args({3, 8})->Args({4, 10})->Unit(benchmark::kMillisecond);

void BM_transmon_propagator(benchmark::State& state) {
  SystemParams p = SystemParams::reference_defaults();
  const Operator a = annihilation(3);
  const Operator h0 = -p.lambda_anh * (a.adjoint() * a.adjoint() * a * a);
  const TransmonPropagator prop(h0, [p](double t) { return drive_amplitude(t, p); }, 2 * p.amp1);
  double t = 0.0;
  const double dt = p.tau() / 300.0;  // roughly one RHS evaluation apart
  for (auto _ : state) {
    t += dt;
    benchmark::DoNotOptimize(prop.at(t).data());
  }
}
BENCHMARK(BM_transmon_propagator)->Unit(benchmark::kMicrosecond);

void BM_measures(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const DensityMatrix rho = DensityMatrix::trusted(random_state(d * d));
  for (auto _ : state) benchmark::DoNotOptimize(measure_bipartition(rho, {d, d}));
}
BENCHMARK(BM_measures)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_health_report(benchmark::State& state) {
  const FockLayout layout = layout_of(state);
  const Operator rho = random_state(layout.total());
  for (auto _ : state) benchmark::DoNotOptimize(health_report(rho, layout));
}
BENCHMARK(BM_health_report)->Args({3, 8})->Args({4, 10})->Unit(benchmark::kMillisecond);

void BM_partial_trace(benchmark::State& state) {
  const FockLayout layout = layout_of(state);
  const DensityMatrix rho = DensityMatrix::trusted(random_state(layout.total()));
  for (auto _ : state) benchmark::DoNotOptimize(partial_trace(rho, layout, {slot::mr1, slot::mr2}));
}
BENCHMARK(BM_partial_trace)->Args({3, 8})->Args({4, 10})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <cmath>

#include "hopfcl/amplitude.hpp"
#include "hopfcl/approximation.hpp"
#include "hopfcl/models.hpp"
#include "hopfcl/rd_solver.hpp"
#include "hopfcl/spectral.hpp"

using namespace hopfcl;

static void BM_FftRoundTrip(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SpectralGrid g = make_grid(n, 2.0 * M_PI);
  const Field f = Field::from_function(g, [](double x) { return cplx(std::sin(x), std::cos(3 * x)); });
  for (auto _ : state) {
    Field h = f.to_fourier();
    benchmark::DoNotOptimize(h.to_physical());
  }
}
BENCHMARK(BM_FftRoundTrip)->Arg(64)->Arg(256)->Arg(1024)->Arg(4096);

static void BM_RdStepToy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RDModel m = toy_model(1.0, 0.1);
  const SpectralGrid g = make_grid(n, 2.0 * M_PI / 0.1);
  RDSolver solver(m, g, 0.02);
  std::vector<Field> u{random_band_field(g, 1.0, 1), random_band_field(g, 1.0, 2)};
  for (auto& f : u) f *= 0.1;
  RDState s = RDState::make(std::move(u), cplx(0.01, 0.0) * random_band_field(g, 1.0, 3));
  for (auto _ : state) solver.step(s);
}
BENCHMARK(BM_RdStepToy)->Arg(256)->Arg(1024);

static void BM_AmplitudeStep(benchmark::State& state) {
  const SpectralGrid g = slow_grid(static_cast<int>(state.range(0)));
  const NormalizedCoefficients n = normalize(derive_coefficients_toy(1.0));
  AmplitudeSolver solver(n.as_raw(), g, 1e-3);
  AmplitudeState s{random_band_field(g, 3.0, 4) + cplx(0.0, 1.0) * random_band_field(g, 3.0, 5),
                   random_band_field(g, 3.0, 6), 0.0};
  for (auto _ : state) solver.step(s);
}
BENCHMARK(BM_AmplitudeStep)->Arg(64)->Arg(256);

static void BM_ModeSplit(benchmark::State& state) {
  const RDModel m = toy_model(1.0, 0.1);
  const ModelLinearization lin = m.linearization();
  const SpectralGrid g = make_grid(static_cast<int>(state.range(0)), 2.0 * M_PI / 0.1);
  const std::vector<Field> u{random_band_field(g, 2.0, 7), random_band_field(g, 2.0, 8)};
  for (auto _ : state) benchmark::DoNotOptimize(mode_split(u, lin, 0.5));
}
BENCHMARK(BM_ModeSplit)->Arg(256)->Arg(1024);

static void BM_HierarchyAdvance(benchmark::State& state) {
  AnsatzSpec spec;
  spec.theta = static_cast<int>(state.range(0));
  const SpectralGrid g = slow_grid(64);
  ToyHierarchy h(spec, g);
  const Field A = Field::from_function(g, [](double X) { return cplx(0.8 + 0.3 * std::cos(X), 0.2 * std::sin(X)); });
  const Field B = Field::from_function(g, [](double X) { return cplx(0.3 * std::cos(X), 0.0); });
  ToyHierarchy::State s = h.initial(A, B);
  for (auto _ : state) h.advance(s, 1, 1e-3);
}
BENCHMARK(BM_HierarchyAdvance)->Arg(1)->Arg(2)->Arg(3);
BENCHMARK_MAIN();

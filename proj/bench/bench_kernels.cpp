#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <random>

#include "anisokit/grid.hpp"

using namespace anisokit;

namespace {

struct Fixture {
  DiscreteEnergy energy;
  std::vector<double> u, v, f, g;

  explicit Fixture(int N)
      : energy(make_spec(), N), u(field(N, 1)), v(field(N, 2)), f(field(N, 3)), g(u.size()) {}

  static OperatorSpec make_spec() {
    OperatorSpec s;
    s.phi = AnisotropicFunction::radial(2, YoungFunction::catalog("power:p=3"));
    return s;
  }

  static std::vector<double> field(int N, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return GridField::from_function(N, [&](double, double) { return d(rng); }).values();
  }
};

Fixture& fixture(int N) {
  static std::map<int, std::unique_ptr<Fixture>> cache;
  auto& p = cache[N];
  if (!p) p = std::make_unique<Fixture>(N);
  return *p;
}

void BM_gradient_parallel(benchmark::State& st) {
  auto& fx = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    fx.energy.gradient(fx.u, fx.f, fx.g);
    benchmark::DoNotOptimize(fx.g.data());
  }
}

void BM_gradient_serial(benchmark::State& st) {
  auto& fx = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    fx.energy.gradient_serial(fx.u, fx.f, fx.g);
    benchmark::DoNotOptimize(fx.g.data());
  }
}

void BM_difference_parallel(benchmark::State& st) {
  auto& fx = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(fx.energy.difference(fx.v, fx.u, fx.f));
}

void BM_difference_serial(benchmark::State& st) {
  auto& fx = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(fx.energy.difference_serial(fx.v, fx.u, fx.f));
}

void BM_preconditioner(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  auto& fx = fixture(N);
  LaplacePreconditioner P(N);
  for (auto _ : st) {
    P.apply(fx.u, fx.g);
    benchmark::DoNotOptimize(fx.g.data());
  }
}

}  // namespace

BENCHMARK(BM_gradient_parallel)->Arg(65)->Arg(129)->Arg(257);
BENCHMARK(BM_gradient_serial)->Arg(65)->Arg(129)->Arg(257);
BENCHMARK(BM_difference_parallel)->Arg(65)->Arg(129)->Arg(257);
BENCHMARK(BM_difference_serial)->Arg(65)->Arg(129)->Arg(257);
BENCHMARK(BM_preconditioner)->Arg(65)->Arg(129)->Arg(257);

BENCHMARK_MAIN();

// OpenMP kernels against their serial references on the workloads that use them.

#include <benchmark/benchmark.h>

#include <variant>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/identity.hpp"
#include "gelfand/parallel.hpp"

using namespace gelfand;

namespace {

// The closing-integrand scan over [0, 5]^2.
template <bool Parallel>
void quadrant(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double step = 5.0 / static_cast<double>(n - 1);
  auto fn = [&](std::size_t i, std::size_t j) { return quadrant_integrand(i * step, j * step, 0.01, 0.5, 6.0); };
  auto skip = [](std::size_t i, std::size_t j) { return i == 0 && j == 0; };
  for (auto _ : state) {
    const auto m = Parallel ? kernels::grid_min(n, n, fn, skip) : kernels::grid_min_serial(n, n, fn, skip);
    benchmark::DoNotOptimize(m.value);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

// Row minima behind the exponential scaling threshold.
template <bool Parallel>
void exp_scaling(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const double t0 = Parallel ? exp_scaling_threshold(n, n) : exp_scaling_threshold_serial(n, n);
    benchmark::DoNotOptimize(t0);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

// Independent minimal solves, as in a parameter sweep.
template <bool Parallel>
void sweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const ProblemSpec spec = make_problem(Order::FourthNavier, 5, Nonlinearity::exponential(), 128);
  MonotoneOptions opt;
  opt.eigenvalue = false;
  std::vector<double> sup(n);
  auto task = [&](std::size_t k) {
    const auto o = minimal_solution(spec, 100.0 * static_cast<double>(k + 1) / static_cast<double>(n), opt);
    sup[k] = std::holds_alternative<BranchPoint>(o) ? std::get<BranchPoint>(o).sup_norm : -1.0;
  };
  for (auto _ : state) {
    if (Parallel) {
      kernels::parallel_tasks(n, task);
    } else {
      kernels::serial_tasks(n, task);
    }
    benchmark::DoNotOptimize(sup.data());
  }
}

}  // namespace

BENCHMARK(quadrant<false>)->Name("grid_min/serial")->Arg(201)->Arg(801);
BENCHMARK(quadrant<true>)->Name("grid_min/openmp")->Arg(201)->Arg(801);
BENCHMARK(exp_scaling<false>)->Name("row_min/serial")->Arg(1001)->Arg(2001);
BENCHMARK(exp_scaling<true>)->Name("row_min/openmp")->Arg(1001)->Arg(2001);
BENCHMARK(sweep<false>)->Name("tasks/serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(sweep<true>)->Name("tasks/openmp")->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

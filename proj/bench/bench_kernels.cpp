// Parallel kernels against their serial reference implementations.

#include <benchmark/benchmark.h>

#include "shellcap/caps.hpp"
#include "shellcap/lattice.hpp"
#include "shellcap/norms.hpp"

using namespace shellcap;

namespace {

const QuadraticForm& form3() {
  static const QuadraticForm q = identity_form(3);
  return q;
}

void BM_ShellPruned(benchmark::State& state) {
  const ShellSpec spec{static_cast<double>(state.range(0)), 0.5, Cutoff::Sharp};
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_shell(form3(), spec).points.size());
}

void BM_ShellBoxScan(benchmark::State& state) {
  const ShellSpec spec{static_cast<double>(state.range(0)), 0.5, Cutoff::Sharp};
  for (auto _ : state) benchmark::DoNotOptimize(reference::enumerate_shell_box(form3(), spec).points.size());
}

LatticeShell cap_shell() {
  const double lambda = 60.0;
  return enumerate_shell(form3(), {lambda, 1.0 / std::sqrt(lambda), Cutoff::Sharp});
}

void BM_AssignGrid(benchmark::State& state) {
  const LatticeShell shell = cap_shell();
  const auto net = build_cap_net(form3(), shell.spec);
  for (auto _ : state) benchmark::DoNotOptimize(assign_points(shell, net).caps.size());
}

void BM_AssignBrute(benchmark::State& state) {
  const LatticeShell shell = cap_shell();
  const auto net = build_cap_net(form3(), shell.spec);
  for (auto _ : state) benchmark::DoNotOptimize(reference::assign_points_brute(shell, net).caps.size());
}

CoefficientVector radial(double lambda) {
  const QuadraticForm q = identity_form(2);
  return CoefficientVector::unit_on(enumerate_shell(q, {lambda, 0.5, Cutoff::Sharp}).points);
}

void BM_EnergyChunked(benchmark::State& state) {
  const CoefficientVector c = radial(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(l4_fourth(c));
}

void BM_EnergySerial(benchmark::State& state) {
  const CoefficientVector c = radial(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::l4_fourth_serial(c));
}

void BM_GridFft(benchmark::State& state) {
  const CoefficientVector c = radial(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lp_norm_grid(c, 6.0).value);
}

void BM_GridDirect(benchmark::State& state) {
  const CoefficientVector c = radial(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reference::lp_norm_direct(c, 6.0).value);
}

}  // namespace

BENCHMARK(BM_ShellPruned)->Arg(20)->Arg(40);
BENCHMARK(BM_ShellBoxScan)->Arg(20)->Arg(40);
BENCHMARK(BM_AssignGrid);
BENCHMARK(BM_AssignBrute);
BENCHMARK(BM_EnergyChunked)->Arg(50)->Arg(200);
BENCHMARK(BM_EnergySerial)->Arg(50)->Arg(200);
BENCHMARK(BM_GridFft)->Arg(10)->Arg(20);
BENCHMARK(BM_GridDirect)->Arg(10)->Arg(20);

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "shilnikov/bvp.hpp"
#include "shilnikov/glued_system.hpp"

using namespace shilnikov;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec s(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) s[i++] = x;
  return s;
}

ChartPtr cubic_chart(int order) {
  ModelSpec spec = ModelSpec::linear(Dims{1, 1}, 1.0);
  spec.cubic = {{{2, 1}, 0.1}, {{1, 2}, 0.1}};
  ChartParams p;
  p.center = Vec::Zero(2);
  p.order = order;
  return fit_local_graphs(build_model(spec), p);
}

void BM_IntegrateGlued(benchmark::State& st) {
  auto sys = std::make_shared<GluedSystem>();
  const Vec s0 = vec({0.1, -0.05, 0.3, 0.2, -0.1, 0.25});
  const double tol = std::pow(10.0, -static_cast<double>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(flow(*sys, s0, 10.0, tol));
}
BENCHMARK(BM_IntegrateGlued)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_VariationalGlued(benchmark::State& st) {
  auto sys = std::make_shared<GluedSystem>();
  const Vec s0 = vec({0.1, -0.05, 0.3, 0.2, -0.1, 0.25});
  for (auto _ : st) benchmark::DoNotOptimize(flow_variational(*sys, s0, 5.0, 1e-12).stm);
}
BENCHMARK(BM_VariationalGlued)->Unit(benchmark::kMillisecond);

void BM_FitLocalGraphs(benchmark::State& st) {
  auto sys = std::make_shared<GluedSystem>();
  const int order = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(LocalGraphs(*sys, vec({0.05, -0.02}), order).data().structure_defect);
}
BENCHMARK(BM_FitLocalGraphs)->DenseRange(3, 6)->Unit(benchmark::kMillisecond);

void BM_FixedTimeBvp(benchmark::State& st) {
  auto chart = cubic_chart(5);
  const double T = static_cast<double>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(solve_fixed_time(*chart, vec({0, 0}), vec({0.1}), vec({-0.1}), T).mu);
}
BENCHMARK(BM_FixedTimeBvp)->Arg(3)->Arg(7)->Arg(11)->Unit(benchmark::kMillisecond);

void BM_FixedEnergyBvp(benchmark::State& st) {
  auto chart = cubic_chart(5);
  const double mu = std::pow(10.0, -static_cast<double>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(solve_fixed_energy(*chart, vec({0, 0}), vec({0.1}), vec({-0.1}), mu).T);
}
BENCHMARK(BM_FixedEnergyBvp)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

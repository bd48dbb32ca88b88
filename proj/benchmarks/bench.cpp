#include "roughflow/certificates.hpp"
#include "roughflow/gallery.hpp"
#include "roughflow/noise.hpp"
#include "roughflow/paths.hpp"
#include "roughflow/rough.hpp"
#include "roughflow/solvers.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace roughflow;

namespace {

DriverSpec bm_spec(int level, int dim = 1) {
  DriverSpec s;
  s.dim = dim;
  s.mesh = std::ldexp(1.0, -level);
  s.seed = 1;
  return s;
}

void BM_Brownian(benchmark::State& st) {
  const auto s = bm_spec(static_cast<int>(st.range(0)), 2);
  for (auto _ : st) benchmark::DoNotOptimize(brownian(s));
  st.SetItemsProcessed(st.iterations() * (std::int64_t{1} << st.range(0)));
}
BENCHMARK(BM_Brownian)->Arg(10)->Arg(14);

void BM_Fbm(benchmark::State& st) {
  auto s = bm_spec(static_cast<int>(st.range(0)));
  s.kind = DriverKind::fbm;
  s.hurst = {0.3};
  for (auto _ : st) benchmark::DoNotOptimize(fbm(s));
}
BENCHMARK(BM_Fbm)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_PVariation(benchmark::State& st) {
  const auto p = brownian(bm_spec(static_cast<int>(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(p_variation(p, 2.5));
}
BENCHMARK(BM_PVariation)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_HolderNorm(benchmark::State& st) {
  const auto p = brownian(bm_spec(static_cast<int>(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(holder_norm(p, 0.4));
}
BENCHMARK(BM_HolderNorm)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_ItoLift(benchmark::State& st) {
  const auto s = bm_spec(12, 2);
  for (auto _ : st) benchmark::DoNotOptimize(ito_lift(s, static_cast<int>(st.range(0))));
}
BENCHMARK(BM_ItoLift)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_RdeSolveElworthy(benchmark::State& st) {
  const auto e = registry("elworthy");
  const auto rp = ito_lift(bm_spec(static_cast<int>(st.range(0)), 2), 8);
  for (auto _ : st) benchmark::DoNotOptimize(rde_solve(e.system, rp, e.x0, 1.0));
}
BENCHMARK(BM_RdeSolveElworthy)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_OdeSolveBlowUp(benchmark::State& st) {
  const auto e = registry("complex-square");
  const auto g = uniform_grid(2.0, 1.0 / 1024);
  const SampledPath zero(g, Mat::Zero(2, static_cast<Eigen::Index>(g.size())));
  Vec x0(2);
  x0 << 1.0, 0.0;
  for (auto _ : st) benchmark::DoNotOptimize(ode_solve(e.system, zero, x0, 2.0));
}
BENCHMARK(BM_OdeSolveBlowUp)->Unit(benchmark::kMillisecond);

void BM_CrossingAudit(benchmark::State& st) {
  const auto e = registry("linear-growth");
  auto s = bm_spec(10, 2);
  s.horizon = 5.0;
  const auto w = brownian(s);
  GrowthSpec g;
  g.b_a_T = 1.0;
  const double K = estimate_K(w, g.beta);
  const double R = 1.01 * compute_R0(K, g.b_a_T);
  StepControl c;
  c.radii = StepControl::ladder(R, 64);
  Vec x0(2);
  x0 << 1.0, 0.0;
  const auto tr = ode_solve(e.system, w, x0, 5.0, c);
  for (auto _ : st) benchmark::DoNotOptimize(crossing_audit(tr, tr.eta, g, R, K));
}
BENCHMARK(BM_CrossingAudit)->Unit(benchmark::kMillisecond);

void BM_SharpCounterexample(benchmark::State& st) {
  Vec z0(2);
  z0 << 2.0, 0.0;
  for (auto _ : st) benchmark::DoNotOptimize(sharp_counterexample(0.2, 0.15, z0));
}
BENCHMARK(BM_SharpCounterexample)->Unit(benchmark::kMillisecond);

void BM_FlowGrid(benchmark::State& st) {
  const auto e = registry("double-well");
  const auto w = brownian(bm_spec(10));
  std::vector<Vec> starts;
  for (int i = 0; i < 64; ++i) starts.push_back(Vec::Constant(1, -2.0 + i / 16.0));
  for (auto _ : st) benchmark::DoNotOptimize(flow_grid(e.system, w, starts, 1.0, {}, static_cast<unsigned>(st.range(0))));
}
BENCHMARK(BM_FlowGrid)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();

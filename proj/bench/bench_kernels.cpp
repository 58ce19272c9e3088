// Serial reference kernels vs. their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "../tests/corpus.hpp"
#include "rampsched/kernels.hpp"
#include "rampsched/oracle.hpp"

using namespace rampsched;
using namespace rampsched::testing;

namespace {

struct SweepFixture {
  Scenario sc;
  SegmentPlan plan;
  std::vector<PmpState> starts;

  explicit SweepFixture(std::size_t n) : sc(make_case(duck(n), 120.0, 150.0, 0.1, {1e3})), plan(shooting_plan(sc)) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(60.0, 180.0), ul(-1.0, 1.0);
    starts.resize(plan.segments());
    for (auto& s : starts) s = {ux(rng), ul(rng)};
  }
};

void BM_sweep(benchmark::State& st, ExecPolicy policy) {
  const SweepFixture fx(static_cast<std::size_t>(st.range(0)));
  const Dynamics f = fx.sc.dynamics();
  SegmentSweep out;
  for (auto _ : st) {
    sweep_segments(policy, f, fx.plan, fx.starts, true, out);
    benchmark::DoNotOptimize(out.end.data());
  }
  st.counters["segments"] = static_cast<double>(fx.plan.segments());
}

void BM_qp_gradient(benchmark::State& st, ExecPolicy policy) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const Scenario sc = make_case(two_peak(n), 150.0, 120.0, 1.0, {1.0});
  const auto cm = sampled_revenue_rate(sc);
  const QpData q{sc.load.values(), cm, sc.load.dt(), sc.cost.g, sc.cost.d, sc.cost.pbar_kw};
  std::vector<double> pm(n, 40.0), grad(n);
  for (auto _ : st) {
    qp_gradient(policy, q, pm, grad);
    benchmark::DoNotOptimize(grad.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}

void BM_solve_batch(benchmark::State& st, ExecPolicy policy) {
  std::vector<Scenario> batch;
  for (const auto& e : corpus(96)) batch.push_back(e.scenario);
  for (auto _ : st) {
    auto sols = solve_batch(batch, policy);
    benchmark::DoNotOptimize(sols.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_sweep, serial, ExecPolicy::serial)->Arg(96)->Arg(1536)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_sweep, parallel, ExecPolicy::parallel)->Arg(96)->Arg(1536)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_qp_gradient, serial, ExecPolicy::serial)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK_CAPTURE(BM_qp_gradient, parallel, ExecPolicy::parallel)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK_CAPTURE(BM_solve_batch, serial, ExecPolicy::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_solve_batch, parallel, ExecPolicy::parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

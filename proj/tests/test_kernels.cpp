#include <cstring>
#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "rampsched/kernels.hpp"
#include "rampsched/oracle.hpp"

using namespace rampsched;
using namespace rampsched::testing;

namespace {

bool bits_equal(const SegmentSweep& a, const SegmentSweep& b) {
  return a.failed == b.failed && a.end.size() == b.end.size() && a.jacobian.size() == b.jacobian.size() &&
         std::memcmp(a.end.data(), b.end.data(), a.end.size() * sizeof(PmpState)) == 0 &&
         std::memcmp(a.jacobian.data(), b.jacobian.data(), a.jacobian.size() * sizeof(Sensitivity)) == 0;
}

}  // namespace

TEST_CASE("segment plan covers the period") {
  const SegmentPlan p = SegmentPlan::make(96, 0.25, 7, 50);
  CHECK(p.total_steps() == 672);
  std::size_t k = 0;
  for (std::size_t s = 0; s < p.segments(); ++s) {
    CHECK(p.first[s] == k);
    CHECK(p.steps[s] <= 50);
    k += p.steps[s];
  }
  CHECK(k == p.total_steps());
  const auto [lo, hi] = std::minmax_element(p.steps.begin(), p.steps.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("sweep kernels") {
  const Scenario sc = make_case(duck(96), 120.0, 150.0, 0.1, {1e3});
  const SegmentPlan plan = shooting_plan(sc);
  REQUIRE(plan.segments() > 8);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> ux(60.0, 180.0), ul(-1.0, 1.0);
  std::vector<PmpState> starts(plan.segments());
  for (auto& s : starts) s = {ux(rng), ul(rng)};
  const Dynamics f = sc.dynamics();

  for (auto mode : {JacobianMode::variational, JacobianMode::finite_difference}) {
    SegmentSweep a, b;
    sweep_segments_serial(f, plan, starts, true, a, mode);
    sweep_segments_omp(f, plan, starts, true, b, mode);
    CHECK(bits_equal(a, b));
  }

  SUBCASE("tangent map matches finite differences away from kinks") {
    SegmentSweep v, d;
    sweep_segments_serial(f, plan, starts, true, v, JacobianMode::variational);
    sweep_segments_serial(f, plan, starts, true, d, JacobianMode::finite_difference);
    int close = 0;
    for (std::size_t s = 0; s < plan.segments(); ++s) {
      bool ok = true;
      for (int k = 0; k < 4; ++k) ok = ok && std::abs(v.jacobian[s][k] - d.jacobian[s][k]) <= 1e-4 * (1 + std::abs(v.jacobian[s][k]));
      close += ok;
    }
    // Segments whose trajectory crosses a band edge may differ; most do not.
    CHECK(close >= static_cast<int>(plan.segments()) * 9 / 10);
  }
  SUBCASE("propagated state is the same with and without the tangent") {
    SegmentSweep a, b;
    sweep_segments_serial(f, plan, starts, true, a, JacobianMode::variational);
    sweep_segments_serial(f, plan, starts, false, b);
    CHECK(std::memcmp(a.end.data(), b.end.data(), a.end.size() * sizeof(PmpState)) == 0);
  }
}

TEST_CASE("QP kernels") {
  const Scenario sc = make_case(two_peak(8192), 150.0, 120.0, 1.0, {1.0});
  const auto cm = sampled_revenue_rate(sc);
  const QpData q{sc.load.values(), cm, sc.load.dt(), sc.cost.g, sc.cost.d, sc.cost.pbar_kw};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-20.0, 140.0);
  std::vector<double> pm(8192);
  for (auto& v : pm) v = u(rng);
  std::vector<double> ga(8192), gb(8192), pa(8192), pb(8192);
  qp_gradient_serial(q, pm, ga);
  qp_gradient_omp(q, pm, gb);
  CHECK(ga == gb);
  qp_project_step_serial(q, pm, ga, 1e-3, pa);
  qp_project_step_omp(q, pm, ga, 1e-3, pb);
  CHECK(pa == pb);
  for (double v : pa) {
    CHECK(v >= 0.0);
    CHECK(v <= q.pbar);
  }
}

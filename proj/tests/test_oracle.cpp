#include <cmath>
#include <random>

#include "corpus.hpp"
#include "doctest.h"
#include "rampsched/errors.hpp"
#include "rampsched/oracle.hpp"

using namespace rampsched;
using namespace rampsched::testing;

TEST_CASE("discretize_objective") {
  const Scenario flat = make_case(constant(48, 100.0), 150.0, 100.0, 1.0, {1.0});
  const std::size_t n = 48;
  SUBCASE("idle miners on a constant load") {
    CHECK(discretize_objective(flat, std::vector<double>(n, 0.0)) ==
          doctest::Approx(kG * 100.0 * 100.0 * 24.0).epsilon(1e-13));
  }
  SUBCASE("a constant shift leaves the ramp term unchanged") {
    const Scenario sc = make_case(duck(n), 120.0, 150.0, 1.0, {1.0});
    std::vector<double> zero(n, 0.0), full(n, 150.0);
    const auto b0 = evaluate_schedule(zero, sc);
    const auto b1 = evaluate_schedule(full, sc);
    CHECK(b1.ramping == doctest::Approx(b0.ramping).epsilon(1e-12));
  }
  SUBCASE("agrees with evaluate on interior solutions") {
    for (const auto& e : corpus(96)) {
      if (!e.interior) continue;
      const PmpSolution s = solve(e.scenario);
      REQUIRE(s.converged);
      const double jd = discretize_objective(e.scenario, s.pm_clipped);
      const double je = evaluate(s, e.scenario).optimized.total;
      CHECK(std::abs(jd - je) <= 1e-6 * (1.0 + std::abs(je)));
    }
  }
  CHECK_THROWS_AS(discretize_objective(flat, std::vector<double>(n - 1, 0.0)), DimensionError);
}

TEST_CASE("analytic gradient") {
  std::mt19937_64 rng(31);
  for (const auto& e : corpus(48)) {
    CAPTURE(e.name);
    const Scenario& sc = e.scenario;
    std::uniform_real_distribution<double> u(0.0, sc.cost.pbar_kw);
    std::vector<double> pm(sc.load.size());
    for (auto& v : pm) v = u(rng);
    const auto grad = objective_gradient(sc, pm);
    const double dt = sc.load.dt();
    for (std::size_t i = 0; i < pm.size(); i += 5) {
      auto a = pm, b = pm;
      const double h = 1e-3;
      a[i] += h;
      b[i] -= h;
      const double fd = (discretize_objective(sc, a) - discretize_objective(sc, b)) / (2 * h) / dt;
      CHECK(std::abs(fd - grad[i]) <= 1e-6 * std::max(1.0, std::abs(grad[i])));
    }
  }
}

TEST_CASE("convexity along random segments") {
  std::mt19937_64 rng(32);
  const Scenario sc = make_case(two_peak(48), 150.0, 120.0, 1.0, {1.0});
  std::uniform_real_distribution<double> u(-200.0, 300.0), th(0.05, 0.95);
  for (int k = 0; k < 200; ++k) {
    std::vector<double> a(48), b(48), m(48);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    const double t = th(rng);
    for (std::size_t i = 0; i < 48; ++i) m[i] = (1 - t) * a[i] + t * b[i];
    const double fa = discretize_objective(sc, a), fb = discretize_objective(sc, b);
    CHECK(discretize_objective(sc, m) <= (1 - t) * fa + t * fb + 1e-9 * (std::abs(fa) + std::abs(fb)));
  }
}

TEST_CASE("projected gradient") {
  SUBCASE("constant scenario hits the KKT closed form") {
    for (double xs : {50.0, 150.0, 250.0}) {
      const Scenario sc = make_case(constant(48, 100.0), xs, 100.0, 1.0, {1.0});
      // The stopping test bounds the gradient density, so pm accuracy is tol_grad / 2g.
      ProjectedGradientOptions opt;
      opt.tol_grad = 1e-10;
      const DiscreteSolution s = solve_projected_gradient(sc, std::vector<double>(48, 30.0), opt);
      CHECK(s.converged);
      const double expect = std::clamp(xs - 100.0, 0.0, 100.0);
      for (double v : s.pm) CHECK(std::abs(v - expect) <= 1e-6);
    }
  }
  SUBCASE("plain iteration never increases the objective") {
    const Scenario sc = make_case(duck(48), 120.0, 150.0, 10.0, {1.0});
    ProjectedGradientOptions opt;
    opt.accelerate = false;
    opt.record_history = true;
    opt.max_iters = 3000;
    const DiscreteSolution s = solve_projected_gradient(sc, std::vector<double>(48, 0.0), opt);
    REQUIRE(s.objective_history.size() > 10);
    for (std::size_t k = 1; k < s.objective_history.size(); ++k) {
      CHECK(s.objective_history[k] <= s.objective_history[k - 1] + 1e-12 * std::abs(s.objective_history[k - 1]));
    }
  }
  SUBCASE("accelerated iteration is monotone too") {
    const Scenario sc = make_case(duck(96), 120.0, 150.0, 1.0, {1.0});
    ProjectedGradientOptions opt;
    opt.record_history = true;
    const DiscreteSolution s = solve_projected_gradient(sc, opt);
    CHECK(s.converged);
    for (std::size_t k = 1; k < s.objective_history.size(); ++k) {
      CHECK(s.objective_history[k] <= s.objective_history[k - 1]);
    }
  }
  SUBCASE("KKT conditions at convergence") {
    for (const auto& e : corpus(96)) {
      CAPTURE(e.name);
      const Scenario& sc = e.scenario;
      const DiscreteSolution s = solve_projected_gradient(sc);
      REQUIRE(s.converged);
      const double tol = 1e-8 * sc.cost.pbar_kw;
      const auto g = objective_gradient(sc, s.pm);
      for (std::size_t i = 0; i < s.pm.size(); ++i) {
        CHECK(s.pm[i] >= 0.0);
        CHECK(s.pm[i] <= sc.cost.pbar_kw);
        if (s.pm[i] == 0.0) {
          CHECK(g[i] >= -tol);
        } else if (s.pm[i] == sc.cost.pbar_kw) {
          CHECK(g[i] <= tol);
        } else {
          CHECK(std::abs(g[i]) <= tol);
        }
      }
    }
  }
  SUBCASE("serial and OpenMP kernels agree bit for bit") {
    const Scenario sc = make_case(two_peak(192), 150.0, 120.0, 1.0, {1.0});
    ProjectedGradientOptions a, b;
    a.exec = ExecPolicy::serial;
    b.exec = ExecPolicy::parallel;
    const auto sa = solve_projected_gradient(sc, a);
    const auto sb = solve_projected_gradient(sc, b);
    CHECK(sa.iterations == sb.iterations);
    CHECK(sa.pm == sb.pm);
  }
  CHECK(lipschitz_bound(make_case(constant(48, 1.0), 1.0, 1.0, 2.0, {1.0})) == doctest::Approx(2 * kG + 16.0 / 0.25));
}

TEST_CASE("oracle agrees with the shooting solver") {
  for (std::size_t n : {48u, 96u}) {
    for (const auto& e : corpus(n)) {
      CAPTURE(e.name);
      CAPTURE(n);
      const Scenario& sc = e.scenario;
      const PmpSolution p = solve(sc);
      REQUIRE(p.converged);
      const DiscreteSolution q = solve_projected_gradient(sc);
      REQUIRE(q.converged);
      const double jp = discretize_objective(sc, p.pm_clipped);
      CHECK(std::abs(jp - q.objective) / (1 + std::abs(q.objective)) <= 0.005);
      double gap = 0.0;
      for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(p.pm_clipped[i] - q.pm[i]));
      CHECK(gap <= 0.02 * sc.cost.pbar_kw);
    }
  }
}

#include "rampsched/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "rampsched/errors.hpp"

namespace rampsched {

namespace {

void check_length(const Scenario& sc, std::span<const double> pm) {
  if (pm.size() != sc.load.size()) {
    throw DimensionError("schedule has " + std::to_string(pm.size()) + " nodes, grid has " +
                         std::to_string(sc.load.size()));
  }
}

QpData qp_data(const Scenario& sc, const std::vector<double>& cm) {
  return {sc.load.values(), cm, sc.load.dt(), sc.cost.g, sc.cost.d, sc.cost.pbar_kw};
}

}  // namespace

std::vector<double> sampled_revenue_rate(const Scenario& sc) {
  std::vector<double> cm(sc.load.size());
  for (std::size_t i = 0; i < cm.size(); ++i) cm[i] = sc.cost.cm_at(sc.load.dt() * static_cast<double>(i));
  return cm;
}

double discretize_objective(const Scenario& sc, std::span<const double> pm) {
  check_length(sc, pm);
  const std::size_t n = pm.size();
  const double dt = sc.load.dt();
  const auto pl = sc.load.values();
  double j = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n;
    const double pg = pl[i] + pm[i];
    const double ramp = (pl[ip] + pm[ip] - pg) / dt;
    j += (sc.cost.g * pg * pg + sc.cost.d * ramp * ramp - sc.cost.cm_at(dt * static_cast<double>(i)) * pm[i]) * dt;
  }
  return j;
}

std::vector<double> objective_gradient(const Scenario& sc, std::span<const double> pm) {
  check_length(sc, pm);
  const auto cm = sampled_revenue_rate(sc);
  std::vector<double> grad(pm.size());
  qp_gradient_serial(qp_data(sc, cm), pm, grad);
  return grad;
}

double lipschitz_bound(const Scenario& sc) {
  const double dt = sc.load.dt();
  return 2.0 * sc.cost.g + 8.0 * sc.cost.d / (dt * dt);
}

double projected_gradient_norm(std::span<const double> pm, std::span<const double> grad, double pbar) {
  double m = 0.0;
  for (std::size_t i = 0; i < pm.size(); ++i) {
    double gi = grad[i];
    if (pm[i] <= 0.0) gi = std::min(gi, 0.0);
    else if (pm[i] >= pbar) gi = std::max(gi, 0.0);
    m = std::max(m, std::abs(gi));
  }
  return m;
}

std::vector<double> default_oracle_start(const Scenario& sc) {
  const auto pl = sc.load.values();
  std::vector<double> pm(pl.size());
  for (std::size_t i = 0; i < pm.size(); ++i) {
    const double target = sc.cost.cm_at(sc.load.dt() * static_cast<double>(i)) / gen_cost_prime(1.0, sc.cost);
    pm[i] = std::clamp(target - pl[i], 0.0, sc.cost.pbar_kw);
  }
  return pm;
}

DiscreteSolution solve_projected_gradient(const Scenario& sc, std::span<const double> pm0,
                                          const ProjectedGradientOptions& opt) {
  sc.cost.validate();
  check_length(sc, pm0);
  const double lip = lipschitz_bound(sc);
  const double step = opt.step > 0.0 ? opt.step : 0.9 / lip;
  if (step > 1.0 / lip * (1.0 + 1e-12)) throw ValidationError("projected-gradient step exceeds 1/L");
  const double tol = opt.tol_grad > 0.0 ? opt.tol_grad : 1e-8 * sc.cost.pbar_kw;

  const auto cm = sampled_revenue_rate(sc);
  const QpData q = qp_data(sc, cm);
  const std::size_t n = pm0.size();

  std::vector<double> x(n), y(n), xn(n), grad(n);
  qp_project_step_serial(q, pm0, std::vector<double>(n, 0.0), 0.0, x);
  y = x;
  double fx = discretize_objective(sc, x);
  double momentum = 1.0;

  DiscreteSolution out;
  if (opt.record_history) out.objective_history.push_back(fx);

  qp_gradient(opt.exec, q, x, grad);
  double gnorm = projected_gradient_norm(x, grad, q.pbar);
  int it = 0;
  while (gnorm > tol && it < opt.max_iters) {
    double fn = 0.0;
    if (opt.accelerate) {
      qp_gradient(opt.exec, q, y, grad);
      qp_project_step(opt.exec, q, y, grad, step, xn);
      fn = discretize_objective(sc, xn);
      if (fn > fx) {
        // Restart: drop the momentum and take a plain step from x.
        momentum = 1.0;
        qp_gradient(opt.exec, q, x, grad);
        qp_project_step(opt.exec, q, x, grad, step, xn);
        fn = discretize_objective(sc, xn);
      }
      const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next;
      for (std::size_t i = 0; i < n; ++i) y[i] = xn[i] + beta * (xn[i] - x[i]);
      momentum = next;
    } else {
      qp_project_step(opt.exec, q, x, grad, step, xn);
      fn = discretize_objective(sc, xn);
    }
    x.swap(xn);
    fx = fn;
    ++it;
    if (opt.record_history) out.objective_history.push_back(fx);
    qp_gradient(opt.exec, q, x, grad);
    gnorm = projected_gradient_norm(x, grad, q.pbar);
  }

  out.pm = std::move(x);
  out.objective = fx;
  out.iterations = it;
  out.grad_norm = gnorm;
  out.converged = gnorm <= tol;
  return out;
}

DiscreteSolution solve_projected_gradient(const Scenario& sc, const ProjectedGradientOptions& opt) {
  const auto pm0 = default_oracle_start(sc);
  return solve_projected_gradient(sc, pm0, opt);
}

}  // namespace rampsched

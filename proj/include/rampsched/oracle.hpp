#pragma once

#include <span>
#include <vector>

#include "rampsched/kernels.hpp"
#include "rampsched/pmp.hpp"

namespace rampsched {

/// Time-discretized problem solved directly over the miner schedule:
///   J(pm) = sum_i (g p_g[i]^2 + d ((p_g[i+1] - p_g[i]) / dt)^2 - c_m[i] pm[i]) dt
/// with p_g = p_L + pm, periodic indices, and 0 <= pm <= P̄ enforced by
/// projection. No penalty term is involved.

struct DiscreteSolution {
  std::vector<double> pm;
  double objective = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;  // inf-norm of the projected gradient
  bool converged = false;
  std::vector<double> objective_history;  // filled when requested
};

struct ProjectedGradientOptions {
  double step = 0.0;      // 0 = 0.9 / lipschitz_bound
  int max_iters = 200000;
  double tol_grad = 0.0;  // 0 = 1e-8 * P̄
  /// Nesterov momentum with function-value restart. The accepted iterate
  /// never increases the objective; disable for the plain projected step.
  bool accelerate = true;
  bool record_history = false;
  ExecPolicy exec = ExecPolicy::parallel;
};

/// Revenue rate sampled on the scenario's grid nodes.
std::vector<double> sampled_revenue_rate(const Scenario& sc);

double discretize_objective(const Scenario& sc, std::span<const double> pm);

/// Gradient density (dJ/dpm_i) / dt.
std::vector<double> objective_gradient(const Scenario& sc, std::span<const double> pm);

/// Lipschitz constant of the gradient density: 2 g + 8 d / dt^2.
double lipschitz_bound(const Scenario& sc);

/// Projected gradient: components at a bound only count when they push into the box.
double projected_gradient_norm(std::span<const double> pm, std::span<const double> grad, double pbar);

/// clip(c_m / 2g - p_L, 0, P̄): the pointwise optimum when ramps are free.
std::vector<double> default_oracle_start(const Scenario& sc);

DiscreteSolution solve_projected_gradient(const Scenario& sc, std::span<const double> pm0,
                                          const ProjectedGradientOptions& opt = {});
DiscreteSolution solve_projected_gradient(const Scenario& sc, const ProjectedGradientOptions& opt = {});

}  // namespace rampsched

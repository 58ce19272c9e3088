#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rampsched/costmodel.hpp"
#include "rampsched/kernels.hpp"
#include "rampsched/profiles.hpp"

namespace rampsched {

struct Tolerances {
  double tol_bc = 1e-8;    // periodicity defect, kW (and costate units)
  double tol_stat = 1e-6;  // sup |c_d'(u) + lambda|
  int newton_max_iters = 50;
};

/// Numerical knobs of the shooting solver.
struct ShootingOptions {
  /// Upper bound on sqrt((g + alpha)/d) * h for one RK4 step; sets the
  /// substep count when `substeps` is 0.
  double max_step_stiffness = 0.5;
  /// Upper bound on sqrt((g + alpha)/d) * (segment length); sets the
  /// segment count when `segments` is 0.
  double max_segment_growth = 3.0;
  std::size_t substeps = 0;  // 0 = automatic
  std::size_t segments = 0;  // 0 = automatic, 1 = single shooting
  int max_halvings = 8;
  JacobianMode jacobian = JacobianMode::variational;
  ExecPolicy exec = ExecPolicy::parallel;
};

std::vector<double> default_alpha_schedule();

/// Everything a solve needs. `load` is p_L; cost.pbar_kw must equal the fleet rating.
struct Scenario {
  SampledProfile load;
  CostModel cost;
  FleetSpec fleet;
  Tolerances tolerances{};
  std::vector<double> alpha_schedule{1.0};
  ShootingOptions shooting{};

  /// Checks grids, cost invariants and that the schedule is strictly
  /// increasing and ends at cost.alpha.
  void validate() const;
  Dynamics dynamics() const noexcept { return {&load, &cost}; }
};

/// One-machine fleet rated at `pbar_kw`, for scenarios defined directly by P̄.
FleetSpec fleet_for_bound(double pbar_kw);

/// Scenario with the cost model's alpha as the single schedule entry.
Scenario make_scenario(SampledProfile load, CostModel cost, FleetSpec fleet);

/// States on the grid nodes t_i = i dt for i = 0..N (node N is t = T).
struct Trajectory {
  double dt = 0.0;
  std::vector<PmpState> nodes;
};

struct StageReport {
  double alpha = 0.0;
  bool converged = false;
  int newton_iters = 0;
  double periodic_residual = 0.0;
  double max_violation_kw = 0.0;
};

struct PmpSolution {
  double dt = 0.0;
  std::vector<double> pl;         // p_L at the nodes
  std::vector<double> x_traj;     // p_g
  std::vector<double> lambda_traj;
  std::vector<double> u_traj;     // dp_g/dt
  std::vector<double> pm_traj;    // x - p_L (raw, may leave the box by the penalty slack)
  std::vector<double> pm_clipped; // pm clipped to [0, P̄]
  bool converged = false;
  double periodic_residual = 0.0;
  double stationarity_residual = 0.0;
  int newton_iters = 0;
  double alpha_used = 0.0;
  std::size_t segments = 0;
  std::size_t substeps = 0;
  std::vector<StageReport> stages;
  /// Index into `stages` of the last converged stage, -1 if none.
  int last_converged_stage = -1;
  /// Segment start states of the converged shooting solution (warm start data).
  std::vector<double> seg_times;
  std::vector<PmpState> seg_states;

  std::size_t size() const noexcept { return x_traj.size(); }
  double period() const noexcept { return dt * static_cast<double>(x_traj.size()); }
  /// max(0, -pm, pm - P̄) over the nodes.
  double max_violation(double pbar_kw) const noexcept;
};

/// H = c_g(x) + c_d(u) - c_m(t)(x - p_L(t)) + xi(x - p_L(t)) + lambda u.
double hamiltonian(const PmpState& s, double u, double t_h, const Scenario& sc);

/// (dx/dt, dlambda/dt) with the optimal control substituted.
PmpState pmp_rhs(const PmpState& s, double t_h, const Scenario& sc);

/// Substeps per grid interval used for the scenario's current alpha.
std::size_t auto_substeps(const Scenario& sc);
SegmentPlan shooting_plan(const Scenario& sc);

/// RK4 over one period from `s0`. `substeps` = 0 picks auto_substeps().
/// Throws DivergenceError with the failing time.
Trajectory integrate(const PmpState& s0, const Scenario& sc, std::size_t substeps = 0);

/// Newton shooting for x(0) = x(T), lambda(0) = lambda(T) at the scenario's
/// alpha. Every segment node starts from `guess`. Returns converged=false
/// when the iteration cap is hit.
PmpSolution shoot_periodic(const Scenario& sc, const PmpState& guess);
/// Warm-started variant: segment nodes interpolated from a previous solution.
PmpSolution shoot_periodic(const Scenario& sc, const PmpSolution& warm);

/// Alpha continuation over sc.alpha_schedule.
PmpSolution solve(const Scenario& sc);

/// Independent solves of many scenarios (each single-threaded inside when run in parallel).
std::vector<PmpSolution> solve_batch(std::span<const Scenario> scenarios, ExecPolicy policy = ExecPolicy::parallel);

/// Unconstrained constant optimum c_m / (2 g). Requires a constant c_m.
double stationary_point(const Scenario& sc);

/// First-stage guess: c_m(0)/2g clamped into [min p_L, max p_L + P̄], lambda = 0.
PmpState initial_guess(const Scenario& sc);

struct CostBreakdown {
  double generation = 0.0;
  double ramping = 0.0;
  double revenue = 0.0;
  double penalty = 0.0;
  double total = 0.0;  // generation + ramping - revenue + penalty
};

struct Evaluation {
  CostBreakdown optimized;
  CostBreakdown baseline;  // pm = 0
};

/// Period integrals (trapezoid on the periodic grid) of each cost term of
/// the solution, plus the pm = 0 baseline. Uses the scenario's final alpha.
Evaluation evaluate(const PmpSolution& sol, const Scenario& sc);

/// Cost of an arbitrary miner schedule on the scenario grid; ramps are
/// forward differences of p_L + pm (the exact slope of the linear interpolant).
CostBreakdown evaluate_schedule(std::span<const double> pm, const Scenario& sc);

}  // namespace rampsched

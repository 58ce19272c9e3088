#include "rampsched/pmp.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "rampsched/errors.hpp"

namespace rampsched {

namespace {

double stiffness(const CostModel& c) { return std::sqrt((c.g + c.alpha) / c.d); }

double inf_norm(std::span<const double> r) {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

double two_norm(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return std::sqrt(s);
}

// Continuity defects end_j - start_{j+1}, wrapping the last segment onto the first.
void defects(const SegmentSweep& sw, std::span<const PmpState> starts, std::vector<double>& r) {
  const std::size_t m = starts.size();
  r.resize(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    const PmpState& next = starts[(j + 1) % m];
    r[2 * j] = sw.end[j].x - next.x;
    r[2 * j + 1] = sw.end[j].lambda - next.lambda;
  }
}

// Newton step for the cyclic block-bidiagonal shooting system
//   G_j delta_j - delta_{j+1} = -r_j.
bool newton_direction(const SegmentSweep& sw, std::span<const double> r, std::vector<double>& delta) {
  const auto m = static_cast<Eigen::Index>(sw.jacobian.size());
  const Eigen::Index n = 2 * m;
  const Eigen::Map<const Eigen::VectorXd> rhs(r.data(), n);
  Eigen::VectorXd sol;

  if (n <= 64) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& g = sw.jacobian[static_cast<std::size_t>(j)];
      a(2 * j, 2 * j) += g[0];
      a(2 * j, 2 * j + 1) += g[1];
      a(2 * j + 1, 2 * j) += g[2];
      a(2 * j + 1, 2 * j + 1) += g[3];
      const Eigen::Index k = (j + 1) % m;
      a(2 * j, 2 * k) -= 1.0;
      a(2 * j + 1, 2 * k + 1) -= 1.0;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) return false;
    sol = lu.solve(-rhs);
  } else {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(6 * m));
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& g = sw.jacobian[static_cast<std::size_t>(j)];
      trip.emplace_back(2 * j, 2 * j, g[0]);
      trip.emplace_back(2 * j, 2 * j + 1, g[1]);
      trip.emplace_back(2 * j + 1, 2 * j, g[2]);
      trip.emplace_back(2 * j + 1, 2 * j + 1, g[3]);
      const Eigen::Index k = (j + 1) % m;
      trip.emplace_back(2 * j, 2 * k, -1.0);
      trip.emplace_back(2 * j + 1, 2 * k + 1, -1.0);
    }
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) return false;
    sol = lu.solve(-rhs);
    if (lu.info() != Eigen::Success) return false;
  }
  if (!sol.allFinite()) return false;
  delta.assign(sol.data(), sol.data() + n);
  return true;
}

PmpState interpolate_states(std::span<const double> times, std::span<const PmpState> states, double period,
                            double t) {
  // times are increasing within [0, period)
  const std::size_t n = times.size();
  if (n == 1) return states[0];
  t = t - period * std::floor(t / period);
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t hi = it == times.end() ? 0 : static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi == 0 ? n - 1 : hi - 1;
  double t_lo = times[lo];
  double t_hi = hi == 0 ? times[0] + period : times[hi];
  if (t < t_lo) t += period;  // wrapped interval before the first node
  const double w = (t_hi > t_lo) ? (t - t_lo) / (t_hi - t_lo) : 0.0;
  return {states[lo].x + w * (states[hi].x - states[lo].x),
          states[lo].lambda + w * (states[hi].lambda - states[lo].lambda)};
}

// States at every grid node, each segment integrated from its own start.
std::vector<PmpState> record_nodes(const Dynamics& f, const SegmentPlan& plan, std::span<const PmpState> starts) {
  std::vector<PmpState> nodes(plan.grid_nodes + 1);
  for (std::size_t s = 0; s < plan.segments(); ++s) {
    PmpState st = starts[s];
    const std::size_t k0 = plan.first[s];
    if (k0 % plan.substeps == 0) nodes[k0 / plan.substeps] = st;
    for (std::size_t k = k0; k < k0 + plan.steps[s]; ++k) {
      st = rk4_step(f, st, plan.h * static_cast<double>(k), plan.h);
      if ((k + 1) % plan.substeps == 0) nodes[(k + 1) / plan.substeps] = st;
    }
  }
  return nodes;
}

PmpSolution shoot_from(const Scenario& sc, const SegmentPlan& plan, std::vector<PmpState> starts) {
  const Dynamics f = sc.dynamics();
  const Tolerances& tol = sc.tolerances;
  const ExecPolicy exec = sc.shooting.exec;
  const std::size_t m = plan.segments();

  SegmentSweep sw;
  std::vector<double> r;
  sweep_segments(exec, f, plan, starts, true, sw, sc.shooting.jacobian);
  if (sw.failed >= 0) {
    const auto& s0 = starts[static_cast<std::size_t>(sw.failed)];
    throw DivergenceError("state became non-finite at t = " + std::to_string(sw.fail_time) + " h", sw.fail_time, s0.x,
                          s0.lambda);
  }
  defects(sw, starts, r);

  int iters = 0;
  bool converged = false;
  std::vector<double> delta;
  std::vector<PmpState> trial(m);
  SegmentSweep trial_sw;
  std::vector<double> trial_r;

  for (;;) {
    const double rinf = inf_norm(r);
    spdlog::debug("shooting alpha={} iter {}: |R|inf = {:.3e}", sc.cost.alpha, iters, rinf);
    if (rinf <= tol.tol_bc) {
      converged = true;
      break;
    }
    if (iters >= tol.newton_max_iters) break;
    if (!newton_direction(sw, r, delta)) {
      spdlog::debug("shooting: singular Newton system at iteration {}", iters);
      break;
    }
    const double r2 = two_norm(r);
    double step = 1.0;
    bool accepted = false;
    bool finite_trial = false;
    for (int h = 0; h <= sc.shooting.max_halvings; ++h, step *= 0.5) {
      for (std::size_t j = 0; j < m; ++j) {
        trial[j] = {starts[j].x + step * delta[2 * j], starts[j].lambda + step * delta[2 * j + 1]};
      }
      sweep_segments(exec, f, plan, trial, false, trial_sw);
      if (trial_sw.failed >= 0) continue;
      defects(trial_sw, trial, trial_r);
      finite_trial = true;
      if (two_norm(trial_r) < r2) {
        accepted = true;
        break;
      }
    }
    if (!finite_trial) break;
    spdlog::debug("shooting: step {}", step);
    if (!accepted) spdlog::debug("shooting: no decrease after {} halvings, taking smallest step", sc.shooting.max_halvings);
    starts.swap(trial);
    ++iters;
    sweep_segments(exec, f, plan, starts, true, sw, sc.shooting.jacobian);
    if (sw.failed >= 0) break;
    defects(sw, starts, r);
  }

  PmpSolution sol;
  sol.dt = sc.load.dt();
  sol.converged = converged;
  sol.newton_iters = iters;
  sol.periodic_residual = sw.failed >= 0 ? INFINITY : inf_norm(r);
  sol.alpha_used = sc.cost.alpha;
  sol.segments = m;
  sol.substeps = plan.substeps;

  const auto nodes = record_nodes(f, plan, starts);
  const std::size_t n = plan.grid_nodes;
  const auto pl = sc.load.values();
  sol.pl.assign(pl.begin(), pl.end());
  sol.x_traj.resize(n);
  sol.lambda_traj.resize(n);
  sol.u_traj.resize(n);
  sol.pm_traj.resize(n);
  sol.pm_clipped.resize(n);
  double stat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sol.x_traj[i] = nodes[i].x;
    sol.lambda_traj[i] = nodes[i].lambda;
    sol.u_traj[i] = control_from_costate(nodes[i].lambda, sc.cost);
    stat = std::max(stat, std::abs(ramp_cost_prime(sol.u_traj[i], sc.cost) + sol.lambda_traj[i]));
    sol.pm_traj[i] = sol.x_traj[i] - pl[i];
    sol.pm_clipped[i] = std::clamp(sol.pm_traj[i], 0.0, sc.cost.pbar_kw);
  }
  sol.stationarity_residual = stat;
  if (converged && stat > tol.tol_stat) sol.converged = false;

  sol.seg_times.resize(m);
  for (std::size_t j = 0; j < m; ++j) sol.seg_times[j] = plan.start_time(j);
  sol.seg_states = std::move(starts);

  StageReport rep{sc.cost.alpha, sol.converged, iters, sol.periodic_residual, sol.max_violation(sc.cost.pbar_kw)};
  sol.stages = {rep};
  sol.last_converged_stage = sol.converged ? 0 : -1;
  return sol;
}

}  // namespace

std::vector<double> default_alpha_schedule() { return {1.0, 10.0, 100.0, 1e3, 1e4}; }

double PmpSolution::max_violation(double pbar_kw) const noexcept {
  double v = 0.0;
  for (double pm : pm_traj) v = std::max({v, -pm, pm - pbar_kw});
  return v;
}

void Scenario::validate() const {
  cost.validate();
  fleet.validate();
  if (load.quantity() != Quantity::power) throw ValidationError("scenario load must be a power profile");
  if (std::abs(cost.pbar_kw - fleet.pbar_kw()) > 1e-9 * fleet.pbar_kw()) {
    throw ValidationError("cost model P̄ does not match the fleet rating");
  }
  if (const auto* p = cost.cm_profile(); p && !p->same_grid(load)) {
    throw ValidationError("revenue-rate profile and load profile must share a grid");
  }
  if (alpha_schedule.empty()) throw ValidationError("alpha schedule is empty");
  for (std::size_t i = 0; i < alpha_schedule.size(); ++i) {
    if (!(alpha_schedule[i] >= 0.0) || !std::isfinite(alpha_schedule[i])) {
      throw ValidationError("alpha schedule entries must be finite and >= 0");
    }
    if (i > 0 && !(alpha_schedule[i] > alpha_schedule[i - 1])) {
      throw ValidationError("alpha schedule must be strictly increasing");
    }
  }
  if (alpha_schedule.back() != cost.alpha) throw ValidationError("alpha schedule must end at the cost model's alpha");
  if (!(tolerances.tol_bc > 0.0) || !(tolerances.tol_stat > 0.0) || tolerances.newton_max_iters < 0) {
    throw ValidationError("invalid solver tolerances");
  }
  if (!(shooting.max_step_stiffness > 0.0) || !(shooting.max_segment_growth > 0.0) || shooting.max_halvings < 0) {
    throw ValidationError("invalid shooting options");
  }
}

FleetSpec fleet_for_bound(double pbar_kw) {
  FleetSpec f;
  f.machine.name = "aggregate";
  f.machine.demand_w = pbar_kw * 1000.0;
  f.count = 1;
  return f;
}

Scenario make_scenario(SampledProfile load, CostModel cost, FleetSpec fleet) {
  const double a = cost.alpha;
  Scenario sc{std::move(load), std::move(cost), std::move(fleet)};
  sc.alpha_schedule = {a};
  return sc;
}

double hamiltonian(const PmpState& s, double u, double t_h, const Scenario& sc) {
  const CostModel& c = sc.cost;
  const double pm = s.x - sc.load.at(t_h);
  const double running = gen_cost(s.x, c) + ramp_cost(u, c) - c.cm_at(t_h) * pm + penalty_xi(pm, c);
  return running + s.lambda * u;
}

PmpState pmp_rhs(const PmpState& s, double t_h, const Scenario& sc) { return sc.dynamics()(s, t_h); }

std::size_t auto_substeps(const Scenario& sc) {
  if (sc.shooting.substeps > 0) return sc.shooting.substeps;
  const double steps = std::ceil(sc.load.dt() * stiffness(sc.cost) / sc.shooting.max_step_stiffness);
  return static_cast<std::size_t>(std::max(1.0, steps));
}

SegmentPlan shooting_plan(const Scenario& sc) {
  const std::size_t sub = auto_substeps(sc);
  const std::size_t total = sc.load.size() * sub;
  std::size_t max_steps = 0;
  if (sc.shooting.segments > 0) {
    const std::size_t segs = std::min(sc.shooting.segments, total);
    max_steps = (total + segs - 1) / segs;
  } else {
    const double h = sc.load.dt() / static_cast<double>(sub);
    const double fit = std::floor(sc.shooting.max_segment_growth / (stiffness(sc.cost) * h));
    max_steps = static_cast<std::size_t>(std::clamp(fit, 1.0, static_cast<double>(total)));
  }
  return SegmentPlan::make(sc.load.size(), sc.load.dt(), sub, max_steps);
}

Trajectory integrate(const PmpState& s0, const Scenario& sc, std::size_t substeps) {
  if (substeps == 0) substeps = auto_substeps(sc);
  const Dynamics f = sc.dynamics();
  const std::size_t n = sc.load.size();
  const double h = sc.load.dt() / static_cast<double>(substeps);
  Trajectory tr;
  tr.dt = sc.load.dt();
  tr.nodes.reserve(n + 1);
  tr.nodes.push_back(s0);
  PmpState s = s0;
  for (std::size_t i = 0; i < n; ++i) {
    double fail = 0.0;
    if (!propagate(f, s, i * substeps, substeps, h, &fail)) {
      throw DivergenceError("state became non-finite at t = " + std::to_string(fail) + " h", fail, s0.x, s0.lambda);
    }
    tr.nodes.push_back(s);
  }
  return tr;
}

PmpSolution shoot_periodic(const Scenario& sc, const PmpState& guess) {
  sc.validate();
  if (!std::isfinite(guess.x) || !std::isfinite(guess.lambda)) throw ValidationError("shooting guess must be finite");
  const SegmentPlan plan = shooting_plan(sc);
  return shoot_from(sc, plan, std::vector<PmpState>(plan.segments(), guess));
}

PmpSolution shoot_periodic(const Scenario& sc, const PmpSolution& warm) {
  sc.validate();
  if (warm.seg_states.empty()) throw ValidationError("warm start solution carries no shooting nodes");
  const SegmentPlan plan = shooting_plan(sc);
  std::vector<PmpState> starts(plan.segments());
  const double period = sc.load.period();
  for (std::size_t j = 0; j < starts.size(); ++j) {
    starts[j] = interpolate_states(warm.seg_times, warm.seg_states, period, plan.start_time(j));
  }
  return shoot_from(sc, plan, std::move(starts));
}

PmpState initial_guess(const Scenario& sc) {
  const double x = sc.cost.cm_initial() / gen_cost_prime(1.0, sc.cost);
  return {std::clamp(x, sc.load.min(), sc.load.max() + sc.cost.pbar_kw), 0.0};
}

PmpSolution solve(const Scenario& sc) {
  sc.validate();
  std::vector<StageReport> stages;
  PmpSolution prev;
  for (std::size_t k = 0; k < sc.alpha_schedule.size(); ++k) {
    Scenario stage = sc;
    stage.cost = sc.cost.with_alpha(sc.alpha_schedule[k]);
    stage.alpha_schedule = {stage.cost.alpha};
    PmpSolution sol;
    if (k == 0) {
      sol = shoot_periodic(stage, initial_guess(stage));
    } else {
      try {
        sol = shoot_periodic(stage, prev);
      } catch (const DivergenceError& e) {
        spdlog::warn("alpha stage {} diverged: {}", stage.cost.alpha, e.what());
        prev.converged = false;
        stages.push_back({stage.cost.alpha, false, 0, INFINITY, INFINITY});
        prev.stages = std::move(stages);
        prev.last_converged_stage = static_cast<int>(k) - 1;
        return prev;
      }
    }
    spdlog::debug("alpha {:g}: converged={} iters={} residual={:.3e} violation={:.3e}", stage.cost.alpha,
                  sol.converged, sol.newton_iters, sol.periodic_residual, sol.max_violation(sc.cost.pbar_kw));
    stages.push_back(sol.stages.front());
    if (!sol.converged) {
      sol.stages = std::move(stages);
      sol.last_converged_stage = static_cast<int>(k) - 1;
      return sol;
    }
    prev = std::move(sol);
  }
  prev.stages = std::move(stages);
  prev.last_converged_stage = static_cast<int>(prev.stages.size()) - 1;
  return prev;
}

std::vector<PmpSolution> solve_batch(std::span<const Scenario> scenarios, ExecPolicy policy) {
  const auto n = static_cast<std::int64_t>(scenarios.size());
  std::vector<PmpSolution> out(scenarios.size());
  if (policy == ExecPolicy::serial) {
    for (std::size_t i = 0; i < scenarios.size(); ++i) out[i] = solve(scenarios[i]);
    return out;
  }
  std::vector<std::exception_ptr> errors(scenarios.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      Scenario sc = scenarios[u];
      sc.shooting.exec = ExecPolicy::serial;
      out[u] = solve(sc);
    } catch (...) {
      errors[u] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double stationary_point(const Scenario& sc) {
  if (!sc.cost.cm_is_constant()) throw ValidationError("stationary_point requires a constant revenue rate");
  return std::get<double>(sc.cost.cm) / gen_cost_prime(1.0, sc.cost);
}

CostBreakdown evaluate_schedule(std::span<const double> pm, const Scenario& sc) {
  const std::size_t n = sc.load.size();
  if (pm.size() != n) {
    throw DimensionError("schedule has " + std::to_string(pm.size()) + " nodes, grid has " + std::to_string(n));
  }
  const double dt = sc.load.dt();
  const auto pl = sc.load.values();
  CostBreakdown c;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = (i + 1) % n;
    const double pg = pl[i] + pm[i];
    const double ramp = (pl[ip] + pm[ip] - pg) / dt;
    c.generation += gen_cost(pg, sc.cost) * dt;
    c.ramping += ramp_cost(ramp, sc.cost) * dt;
    c.revenue += sc.cost.cm_at(dt * static_cast<double>(i)) * pm[i] * dt;
    c.penalty += penalty_xi(pm[i], sc.cost) * dt;
  }
  c.total = c.generation + c.ramping - c.revenue + c.penalty;
  return c;
}

Evaluation evaluate(const PmpSolution& sol, const Scenario& sc) {
  const std::size_t n = sc.load.size();
  if (sol.size() != n) throw DimensionError("solution and scenario grids differ");
  if (!sol.converged) spdlog::warn("evaluating a non-converged solution");
  const double dt = sc.load.dt();
  Evaluation ev;
  CostBreakdown& c = ev.optimized;
  for (std::size_t i = 0; i < n; ++i) {
    c.generation += gen_cost(sol.x_traj[i], sc.cost) * dt;
    c.ramping += ramp_cost(sol.u_traj[i], sc.cost) * dt;
    c.revenue += sc.cost.cm_at(dt * static_cast<double>(i)) * sol.pm_traj[i] * dt;
    c.penalty += penalty_xi(sol.pm_traj[i], sc.cost) * dt;
  }
  c.total = c.generation + c.ramping - c.revenue + c.penalty;
  ev.baseline = evaluate_schedule(std::vector<double>(n, 0.0), sc);
  return ev;
}

}  // namespace rampsched

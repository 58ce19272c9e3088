#include <algorithm>
#include <cmath>

#include "rampsched/errors.hpp"
#include "rampsched/kernels.hpp"

namespace rampsched {

SegmentPlan SegmentPlan::make(std::size_t grid_nodes, double dt, std::size_t substeps, std::size_t max_steps) {
  if (grid_nodes == 0 || substeps == 0 || max_steps == 0) throw ValidationError("invalid segment plan");
  SegmentPlan plan;
  plan.substeps = substeps;
  plan.grid_nodes = grid_nodes;
  plan.h = dt / static_cast<double>(substeps);
  const std::size_t total = grid_nodes * substeps;
  const std::size_t count = (total + max_steps - 1) / max_steps;
  // Spread the remainder so segment lengths differ by at most one step.
  std::size_t k = 0;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t len = total / count + (s < total % count ? 1 : 0);
    plan.first.push_back(k);
    plan.steps.push_back(len);
    k += len;
  }
  return plan;
}

bool propagate(const Dynamics& f, PmpState& s, std::size_t k0, std::size_t steps, double h, double* fail_time) {
  for (std::size_t k = k0; k < k0 + steps; ++k) {
    s = rk4_step(f, s, h * static_cast<double>(k), h);
    if (!std::isfinite(s.x) || !std::isfinite(s.lambda)) {
      if (fail_time) *fail_time = h * static_cast<double>(k + 1);
      return false;
    }
  }
  return true;
}

namespace detail {

// One work item of the segment sweep; shared by the serial and OpenMP drivers.
bool sweep_one(const Dynamics& f, const SegmentPlan& plan, const PmpState& start, std::size_t seg, bool with_jacobian,
               JacobianMode mode, PmpState& end, Sensitivity& jac, double& fail_time) {
  const std::size_t k0 = plan.first[seg];
  const std::size_t n = plan.steps[seg];
  end = start;
  if (with_jacobian && mode == JacobianMode::variational) {
    jac = {1.0, 0.0, 0.0, 1.0};
    for (std::size_t k = k0; k < k0 + n; ++k) {
      end = rk4_step_tangent(f, end, plan.h * static_cast<double>(k), plan.h, jac);
      if (!std::isfinite(end.x) || !std::isfinite(end.lambda)) {
        fail_time = plan.h * static_cast<double>(k + 1);
        return false;
      }
    }
    return true;
  }
  if (!propagate(f, end, k0, n, plan.h, &fail_time)) return false;
  if (!with_jacobian) return true;

  const double ex = fd_perturbation(start.x);
  PmpState px{start.x + ex, start.lambda};
  if (!propagate(f, px, k0, n, plan.h, &fail_time)) return false;
  const double el = fd_perturbation(start.lambda);
  PmpState pl{start.x, start.lambda + el};
  if (!propagate(f, pl, k0, n, plan.h, &fail_time)) return false;

  jac = {(px.x - end.x) / ex, (pl.x - end.x) / el, (px.lambda - end.lambda) / ex, (pl.lambda - end.lambda) / el};
  return true;
}

}  // namespace detail

void sweep_segments_serial(const Dynamics& f, const SegmentPlan& plan, std::span<const PmpState> starts,
                           bool with_jacobian, SegmentSweep& out,
                    JacobianMode mode) {
  const std::size_t m = plan.segments();
  out.end.resize(m);
  out.jacobian.resize(with_jacobian ? m : 0);
  out.failed = -1;
  Sensitivity scratch{};
  for (std::size_t s = 0; s < m; ++s) {
    double ft = 0.0;
    auto& jac = with_jacobian ? out.jacobian[s] : scratch;
    if (!detail::sweep_one(f, plan, starts[s], s, with_jacobian, mode, out.end[s], jac, ft)) {
      out.failed = static_cast<std::ptrdiff_t>(s);
      out.fail_time = ft;
      return;
    }
  }
}

void sweep_segments(ExecPolicy policy, const Dynamics& f, const SegmentPlan& plan, std::span<const PmpState> starts,
                    bool with_jacobian, SegmentSweep& out,
                    JacobianMode mode) {
  if (policy == ExecPolicy::parallel) {
    sweep_segments_omp(f, plan, starts, with_jacobian, out, mode);
  } else {
    sweep_segments_serial(f, plan, starts, with_jacobian, out, mode);
  }
}

void qp_gradient_serial(const QpData& q, std::span<const double> pm, std::span<double> grad) {
  const std::size_t n = pm.size();
  const double c = 2.0 * q.d / (q.dt * q.dt);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ip = i + 1 == n ? 0 : i + 1;
    const std::size_t im = i == 0 ? n - 1 : i - 1;
    const double p = q.load[i] + pm[i];
    const double pp = q.load[ip] + pm[ip];
    const double pmv = q.load[im] + pm[im];
    grad[i] = 2.0 * q.g * p + c * ((p - pmv) - (pp - p)) - q.cm[i];
  }
}

void qp_gradient(ExecPolicy policy, const QpData& q, std::span<const double> pm, std::span<double> grad) {
  if (policy == ExecPolicy::parallel) {
    qp_gradient_omp(q, pm, grad);
  } else {
    qp_gradient_serial(q, pm, grad);
  }
}

void qp_project_step_serial(const QpData& q, std::span<const double> from, std::span<const double> grad, double step,
                            std::span<double> out) {
  for (std::size_t i = 0; i < from.size(); ++i) out[i] = std::clamp(from[i] - step * grad[i], 0.0, q.pbar);
}

void qp_project_step(ExecPolicy policy, const QpData& q, std::span<const double> from, std::span<const double> grad,
                     double step, std::span<double> out) {
  if (policy == ExecPolicy::parallel) {
    qp_project_step_omp(q, from, grad, step, out);
  } else {
    qp_project_step_serial(q, from, grad, step, out);
  }
}

}  // namespace rampsched

#pragma once

// Data-parallel kernels behind the PMP shooting solver and the QP oracle.
//
// Every kernel has a serial reference (`*_serial`) and an OpenMP version
// (`*_omp`). Work items are independent and each writes only its own output
// slot, so both produce bit-identical results for any thread count.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "rampsched/costmodel.hpp"
#include "rampsched/profiles.hpp"

namespace rampsched {

enum class ExecPolicy { serial, parallel };

/// Generation level x (= p_g, kW) and costate lambda.
struct PmpState {
  double x = 0.0;
  double lambda = 0.0;
};

/// Right-hand side of the state/costate system for one penalty weight.
///   dx/dt      = -lambda / (2 d)
///   dlambda/dt = -2 g x + c_m(t) - xi'(x - p_L(t))
struct Dynamics {
  const SampledProfile* load = nullptr;
  const CostModel* cost = nullptr;

  PmpState operator()(const PmpState& s, double t_h) const noexcept {
    const double pm = s.x - load->at(t_h);
    return {control_from_costate(s.lambda, *cost),
            -gen_cost_prime(s.x, *cost) + cost->cm_at(t_h) - penalty_xi_prime(pm, *cost)};
  }

  /// d(dlambda/dt)/dx; dx/dt depends on lambda alone with slope -1/(2d).
  /// The penalty curvature is taken as zero on the closed band, matching xi'.
  double dlambda_dx(double x, double t_h) const noexcept {
    const double pm = x - load->at(t_h);
    const bool outside = pm < 0.0 || pm > cost->pbar_kw;
    return -2.0 * cost->g - (outside ? 2.0 * cost->alpha : 0.0);
  }
};

/// Sensitivity of the end state to the start state, row-major
/// {dx/dx0, dx/dlambda0, dlambda/dx0, dlambda/dlambda0}.
using Sensitivity = std::array<double, 4>;

/// How segment Jacobians are formed.
enum class JacobianMode {
  /// Exact derivative of the RK4 map, carried along with the state.
  variational,
  /// Forward differences with perturbation fd_perturbation(v).
  finite_difference,
};

/// One RK4 step of the state together with its tangent matrix.
inline PmpState rk4_step_tangent(const Dynamics& f, const PmpState& s, double t, double h, Sensitivity& phi) noexcept {
  const double h2 = 0.5 * h;
  const double a = -1.0 / (2.0 * f.cost->d);
  // K = A(s) Phi with A = [[0, a], [b, 0]].
  auto tangent = [a](double b, const Sensitivity& p) -> Sensitivity {
    return {a * p[2], a * p[3], b * p[0], b * p[1]};
  };
  auto axpy = [](const Sensitivity& p, double c, const Sensitivity& k) -> Sensitivity {
    return {p[0] + c * k[0], p[1] + c * k[1], p[2] + c * k[2], p[3] + c * k[3]};
  };
  const PmpState k1 = f(s, t);
  const Sensitivity q1 = tangent(f.dlambda_dx(s.x, t), phi);
  const PmpState s2{s.x + h2 * k1.x, s.lambda + h2 * k1.lambda};
  const PmpState k2 = f(s2, t + h2);
  const Sensitivity q2 = tangent(f.dlambda_dx(s2.x, t + h2), axpy(phi, h2, q1));
  const PmpState s3{s.x + h2 * k2.x, s.lambda + h2 * k2.lambda};
  const PmpState k3 = f(s3, t + h2);
  const Sensitivity q3 = tangent(f.dlambda_dx(s3.x, t + h2), axpy(phi, h2, q2));
  const PmpState s4{s.x + h * k3.x, s.lambda + h * k3.lambda};
  const PmpState k4 = f(s4, t + h);
  const Sensitivity q4 = tangent(f.dlambda_dx(s4.x, t + h), axpy(phi, h, q3));
  for (int i = 0; i < 4; ++i) phi[i] += h / 6.0 * (q1[i] + 2.0 * (q2[i] + q3[i]) + q4[i]);
  return {s.x + h / 6.0 * (k1.x + 2.0 * (k2.x + k3.x) + k4.x),
          s.lambda + h / 6.0 * (k1.lambda + 2.0 * (k2.lambda + k3.lambda) + k4.lambda)};
}

inline PmpState rk4_step(const Dynamics& f, const PmpState& s, double t, double h) noexcept {
  const double h2 = 0.5 * h;
  const PmpState k1 = f(s, t);
  const PmpState k2 = f({s.x + h2 * k1.x, s.lambda + h2 * k1.lambda}, t + h2);
  const PmpState k3 = f({s.x + h2 * k2.x, s.lambda + h2 * k2.lambda}, t + h2);
  const PmpState k4 = f({s.x + h * k3.x, s.lambda + h * k3.lambda}, t + h);
  return {s.x + h / 6.0 * (k1.x + 2.0 * (k2.x + k3.x) + k4.x),
          s.lambda + h / 6.0 * (k1.lambda + 2.0 * (k2.lambda + k3.lambda) + k4.lambda)};
}

/// Partition of one period into shooting segments on a fine RK4 grid.
/// Fine step k covers [k h, (k+1) h); grid node i sits at fine index i * substeps.
struct SegmentPlan {
  double h = 0.0;
  std::size_t substeps = 1;
  std::size_t grid_nodes = 0;
  std::vector<std::size_t> first;  // first fine step of each segment
  std::vector<std::size_t> steps;  // fine steps in each segment

  std::size_t segments() const noexcept { return first.size(); }
  std::size_t total_steps() const noexcept { return grid_nodes * substeps; }
  double start_time(std::size_t seg) const noexcept { return h * static_cast<double>(first[seg]); }

  /// Evenly sized segments of at most `max_steps` fine steps each.
  static SegmentPlan make(std::size_t grid_nodes, double dt, std::size_t substeps, std::size_t max_steps);
};

/// Integrate `steps` RK4 steps from fine index `k0`. Returns false (and the
/// time of the first non-finite state) on divergence.
bool propagate(const Dynamics& f, PmpState& s, std::size_t k0, std::size_t steps, double h, double* fail_time);

struct SegmentSweep {
  std::vector<PmpState> end;
  /// d(end)/d(start) by forward differences, row-major
  /// {dx/dx0, dx/dlambda0, dlambda/dx0, dlambda/dlambda0}.
  std::vector<Sensitivity> jacobian;
  /// Index of the first diverged segment, or -1.
  std::ptrdiff_t failed = -1;
  double fail_time = 0.0;
};

/// Forward-difference perturbation used for shooting Jacobians.
inline double fd_perturbation(double v) noexcept { return 1e-6 * (1.0 + (v < 0 ? -v : v)); }

void sweep_segments_serial(const Dynamics& f, const SegmentPlan& plan, std::span<const PmpState> starts,
                           bool with_jacobian, SegmentSweep& out,
                    JacobianMode mode = JacobianMode::variational);
void sweep_segments_omp(const Dynamics& f, const SegmentPlan& plan, std::span<const PmpState> starts,
                        bool with_jacobian, SegmentSweep& out,
                    JacobianMode mode = JacobianMode::variational);
void sweep_segments(ExecPolicy policy, const Dynamics& f, const SegmentPlan& plan,
                    std::span<const PmpState> starts, bool with_jacobian, SegmentSweep& out,
                    JacobianMode mode = JacobianMode::variational);

/// Discrete periodic box-QP data: p_g = p_L + pm on N nodes of step dt.
struct QpData {
  std::span<const double> load;
  std::span<const double> cm;
  double dt = 0.0;
  double g = 0.0;
  double d = 0.0;
  double pbar = 0.0;
};

/// Gradient density (dJ/dpm_i) / dt of the discrete objective.
void qp_gradient_serial(const QpData& q, std::span<const double> pm, std::span<double> grad);
void qp_gradient_omp(const QpData& q, std::span<const double> pm, std::span<double> grad);
void qp_gradient(ExecPolicy policy, const QpData& q, std::span<const double> pm, std::span<double> grad);

/// out = clip(from - step * grad, 0, pbar)
void qp_project_step_serial(const QpData& q, std::span<const double> from, std::span<const double> grad, double step,
                            std::span<double> out);
void qp_project_step_omp(const QpData& q, std::span<const double> from, std::span<const double> grad, double step,
                         std::span<double> out);
void qp_project_step(ExecPolicy policy, const QpData& q, std::span<const double> from, std::span<const double> grad,
                     double step, std::span<double> out);

}  // namespace rampsched

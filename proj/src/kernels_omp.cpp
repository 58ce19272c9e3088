#include <omp.h>

#include <algorithm>
#include <cstdint>

#include "rampsched/kernels.hpp"

namespace rampsched {

namespace detail {
bool sweep_one(const Dynamics& f, const SegmentPlan& plan, const PmpState& start, std::size_t seg, bool with_jacobian,
               JacobianMode mode, PmpState& end, Sensitivity& jac, double& fail_time);
}

namespace {
// Below this many nodes the fork/join cost outweighs the QP loop body.
constexpr std::int64_t kQpParallelThreshold = 4096;
}  // namespace

void sweep_segments_omp(const Dynamics& f, const SegmentPlan& plan, std::span<const PmpState> starts,
                        bool with_jacobian, SegmentSweep& out,
                    JacobianMode mode) {
  const auto m = static_cast<std::int64_t>(plan.segments());
  out.end.resize(static_cast<std::size_t>(m));
  out.jacobian.resize(with_jacobian ? static_cast<std::size_t>(m) : 0);
  out.failed = -1;

  std::vector<double> fail_time(static_cast<std::size_t>(m), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(m), 1);

#pragma omp parallel for schedule(static) if (m > 1)
  for (std::int64_t s = 0; s < m; ++s) {
    const auto u = static_cast<std::size_t>(s);
    Sensitivity scratch{};
    auto& jac = with_jacobian ? out.jacobian[u] : scratch;
    ok[u] = detail::sweep_one(f, plan, starts[u], u, with_jacobian, mode, out.end[u], jac, fail_time[u]) ? 1 : 0;
  }

  // Report the lowest failing segment, as the serial sweep would.
  const auto it = std::find(ok.begin(), ok.end(), 0);
  if (it != ok.end()) {
    out.failed = it - ok.begin();
    out.fail_time = fail_time[static_cast<std::size_t>(out.failed)];
  }
}

void qp_gradient_omp(const QpData& q, std::span<const double> pm, std::span<double> grad) {
  const auto n = static_cast<std::int64_t>(pm.size());
  const double c = 2.0 * q.d / (q.dt * q.dt);
#pragma omp parallel for schedule(static) if (n >= kQpParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t ip = i + 1 == n ? 0 : i + 1;
    const std::int64_t im = i == 0 ? n - 1 : i - 1;
    const double p = q.load[i] + pm[i];
    const double pp = q.load[ip] + pm[ip];
    const double pmv = q.load[im] + pm[im];
    grad[i] = 2.0 * q.g * p + c * ((p - pmv) - (pp - p)) - q.cm[i];
  }
}

void qp_project_step_omp(const QpData& q, std::span<const double> from, std::span<const double> grad, double step,
                         std::span<double> out) {
  const auto n = static_cast<std::int64_t>(from.size());
#pragma omp parallel for schedule(static) if (n >= kQpParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) out[i] = std::clamp(from[i] - step * grad[i], 0.0, q.pbar);
}

}  // namespace rampsched

#include "rampsched/costmodel.hpp"

#include <cmath>

#include "rampsched/errors.hpp"

namespace rampsched {

void MachineSpec::validate() const {
  if (!(demand_w > 0.0)) throw ValidationError("machine demand_w must be > 0");
  if (!(income_usd_day >= 0.0)) throw ValidationError("machine income_usd_day must be >= 0");
  if (!(price_usd >= 0.0)) throw ValidationError("machine price_usd must be >= 0");
  if (!(lifespan_years > 0.0)) throw ValidationError("machine lifespan_years must be > 0");
  if (!(k_const > 0.0)) throw ValidationError("machine k must be > 0");
}

void FleetSpec::validate() const {
  machine.validate();
  if (count < 1) throw ValidationError("fleet count must be a positive integer");
  if (!(pbar_kw() > 0.0)) throw ValidationError("fleet bound must be > 0");
}

double CostModel::cm_at(double t_h) const noexcept {
  if (const auto* c = std::get_if<double>(&cm)) return *c;
  return std::get<SampledProfile>(cm).at(t_h);
}

double CostModel::cm_initial() const noexcept {
  if (const auto* c = std::get_if<double>(&cm)) return *c;
  return std::get<SampledProfile>(cm).values().front();
}

CostModel CostModel::with_alpha(double a) const {
  CostModel copy = *this;
  copy.alpha = a;
  return copy;
}

void CostModel::validate() const {
  if (!(g > 0.0) || !std::isfinite(g)) throw ValidationError("cost model requires g > 0");
  if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("cost model requires d > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ValidationError("cost model requires alpha >= 0");
  if (!(pbar_kw > 0.0) || !std::isfinite(pbar_kw)) throw ValidationError("cost model requires pbar_kw > 0");
  if (const auto* c = std::get_if<double>(&cm)) {
    if (!(*c >= 0.0) || !std::isfinite(*c)) throw ValidationError("revenue rate c_m must be >= 0");
  } else {
    const auto& p = std::get<SampledProfile>(cm);
    if (p.min() < 0.0) throw ValidationError("revenue rate profile has negative samples");
  }
}

double gen_cost(double x_kw, const CostModel& m) noexcept { return m.g * x_kw * x_kw; }
double gen_cost_prime(double x_kw, const CostModel& m) noexcept { return 2.0 * m.g * x_kw; }

double ramp_cost(double u_kw_per_h, const CostModel& m) noexcept { return m.d * u_kw_per_h * u_kw_per_h; }
double ramp_cost_prime(double u_kw_per_h, const CostModel& m) noexcept { return 2.0 * m.d * u_kw_per_h; }

double penalty_xi(double pm_kw, const CostModel& m) noexcept {
  if (pm_kw < 0.0) return m.alpha * pm_kw * pm_kw;
  if (pm_kw > m.pbar_kw) {
    const double e = pm_kw - m.pbar_kw;
    return m.alpha * e * e;
  }
  return 0.0;
}

double penalty_xi_prime(double pm_kw, const CostModel& m) noexcept {
  if (pm_kw < 0.0) return 2.0 * m.alpha * pm_kw;
  if (pm_kw > m.pbar_kw) return 2.0 * m.alpha * (pm_kw - m.pbar_kw);
  return 0.0;
}

double instantaneous_cost(double pg_kw, double dpg_dt, double pm_kw, double t_h, const CostModel& m) noexcept {
  return gen_cost(pg_kw, m) + ramp_cost(dpg_dt, m) - m.cm_at(t_h) * pm_kw + penalty_xi(pm_kw, m);
}

double control_from_costate(double lambda, const CostModel& m) noexcept { return -lambda / (2.0 * m.d); }

double compute_g(const MachineSpec& machine) {
  if (!(machine.demand_w > 0.0)) throw ValidationError("compute_g: demand_w must be > 0");
  const double kw = machine.demand_kw();
  return machine.k_const * machine.elec_cost_coeff / (kw * kw);
}

double compute_cm(const MachineSpec& machine) {
  if (!(machine.demand_w > 0.0)) throw ValidationError("compute_cm: demand_w must be > 0");
  return machine.income_usd_day / (machine.demand_kw() * 24.0);
}

MachineSpec reference_machine(const std::string& label) {
  if (label == "1") return {"1", 5360.0, 335.0, 15.0, 0.1, 7400.0, 2.0, 0.0014};
  if (label == "2") return {"2", 7283.0, 334.0, 14.49, 0.1, 5200.0, 2.0, 0.0012};
  if (label == "3") return {"3", 3250.0, 110.0, 5.05, 0.06, 6500.0, 2.0, 0.0014};
  throw ValidationError("unknown reference machine '" + label + "'");
}

long reference_fleet_count(const std::string& label) {
  if (label == "1") return 2853;
  if (label == "2") return 2175;
  if (label == "3") return 2924;
  throw ValidationError("unknown reference machine '" + label + "'");
}

}  // namespace rampsched

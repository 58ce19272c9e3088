#pragma once

#include <string>
#include <variant>

#include "rampsched/profiles.hpp"

namespace rampsched {

/// Per-unit parameters of one mining machine.
///
/// `elec_cost_coeff` is the "electricity cost" figure published alongside
/// machine specs. Its unit is ambiguous in the sources ($/day vs $/W), so
/// it is only used as the unitless coefficient of compute_g(); set
/// CostModel::g directly when a calibrated generation cost is known.
struct MachineSpec {
  std::string name;
  double demand_w = 0.0;
  double hashrate_ths = 0.0;
  double income_usd_day = 0.0;
  double elec_cost_coeff = 0.0;
  double price_usd = 0.0;
  double lifespan_years = 2.0;
  double k_const = 0.0014;

  double demand_kw() const noexcept { return demand_w / 1000.0; }
  void validate() const;
};

/// A fleet of identical machines; its aggregate rating is the miner bound P̄.
struct FleetSpec {
  MachineSpec machine;
  long count = 1;

  double pbar_kw() const noexcept { return static_cast<double>(count) * machine.demand_kw(); }
  void validate() const;
};

/// Revenue rate c_m in $/kWh: a constant or a price-like profile.
using RevenueRate = std::variant<double, SampledProfile>;

/// Quadratic generation and ramping costs, penalty weight and miner bound.
///
/// Units: kW for power, hours for time, $ for money. c_g(x) = g x^2 in $/h,
/// c_d(u) = d u^2 in $/h with u in kW/h.
struct CostModel {
  double g = 0.0;
  double d = 1.0;
  double alpha = 1.0;
  double pbar_kw = 0.0;
  RevenueRate cm = 0.0;

  double cm_at(double t_h) const noexcept;
  bool cm_is_constant() const noexcept { return std::holds_alternative<double>(cm); }
  /// Value of a constant rate, or the first sample of a profile.
  double cm_initial() const noexcept;
  const SampledProfile* cm_profile() const noexcept { return std::get_if<SampledProfile>(&cm); }

  CostModel with_alpha(double a) const;
  void validate() const;
};

double gen_cost(double x_kw, const CostModel& m) noexcept;
double gen_cost_prime(double x_kw, const CostModel& m) noexcept;

double ramp_cost(double u_kw_per_h, const CostModel& m) noexcept;
double ramp_cost_prime(double u_kw_per_h, const CostModel& m) noexcept;

/// Exterior quadratic penalty for 0 <= pm <= P̄; zero on the closed band.
double penalty_xi(double pm_kw, const CostModel& m) noexcept;
/// C0 derivative of penalty_xi, zero on the closed band (including both kinks).
double penalty_xi_prime(double pm_kw, const CostModel& m) noexcept;

/// Running cost in $/h: c_g(pg) + c_d(dpg/dt) - c_m(t) pm + xi(pm).
double instantaneous_cost(double pg_kw, double dpg_dt, double pm_kw, double t_h, const CostModel& m) noexcept;

/// Minimizer of c_d(u) + lambda u, i.e. the inverse of c_d' at -lambda.
double control_from_costate(double lambda, const CostModel& m) noexcept;

/// g = k * elec_cost / demand_kw^2.
double compute_g(const MachineSpec& machine);
/// c_m = income per day / (demand_kw * 24 h), in $/kWh.
double compute_cm(const MachineSpec& machine);

/// The three reference machines ("1", "2", "3"). Throws ValidationError otherwise.
MachineSpec reference_machine(const std::string& label);
/// Reference fleet sizes for machines "1", "2", "3".
long reference_fleet_count(const std::string& label);

}  // namespace rampsched

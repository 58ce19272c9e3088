#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "rampsched/costmodel.hpp"

namespace rampsched {

/// Contents of a `key = value` machine/fleet/cost file.
///
/// Recognised keys: name, demand_w, hashrate_ths, income_usd_day, elec_cost,
/// price_usd, lifespan_years, k, count, g_override, d, alpha. `#` starts a
/// comment. Unknown keys and duplicate keys are rejected.
struct MachineConfig {
  FleetSpec fleet;
  std::optional<double> g_override;
  double d = 1.0;
  std::optional<double> alpha;
};

MachineConfig parse_machine_config(std::istream& in);
MachineConfig load_machine_config(const std::string& path);

/// Cost model for a fleet: g from compute_g unless overridden, c_m from
/// compute_cm, P̄ from the fleet rating.
CostModel make_cost_model(const MachineConfig& cfg, double alpha);

}  // namespace rampsched

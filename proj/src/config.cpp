#include "rampsched/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "rampsched/errors.hpp"

namespace rampsched {

namespace {

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& key, const std::string& value, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw ValidationError("config line " + std::to_string(line_no) + ": key '" + key + "' needs a number, got '" +
                          value + "'");
  }
  return v;
}

}  // namespace

MachineConfig parse_machine_config(std::istream& in) {
  MachineConfig cfg;
  cfg.fleet.machine.name = "custom";
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ValidationError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    auto& m = cfg.fleet.machine;
    if (key == "name") {
      m.name = value;
      continue;
    }
    const double v = to_number(key, value, line_no);
    if (key == "demand_w") m.demand_w = v;
    else if (key == "hashrate_ths") m.hashrate_ths = v;
    else if (key == "income_usd_day") m.income_usd_day = v;
    else if (key == "elec_cost") m.elec_cost_coeff = v;
    else if (key == "price_usd") m.price_usd = v;
    else if (key == "lifespan_years") m.lifespan_years = v;
    else if (key == "k") m.k_const = v;
    else if (key == "count") {
      if (v < 1.0 || v != std::floor(v)) {
        throw ValidationError("config line " + std::to_string(line_no) + ": count must be a positive integer");
      }
      cfg.fleet.count = static_cast<long>(v);
    } else if (key == "g_override") cfg.g_override = v;
    else if (key == "d") cfg.d = v;
    else if (key == "alpha") cfg.alpha = v;
    else throw ValidationError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  for (const char* required : {"demand_w", "income_usd_day"}) {
    if (!seen.count(required)) throw ValidationError(std::string("config is missing required key '") + required + "'");
  }
  if (!seen.count("elec_cost") && !cfg.g_override) {
    throw ValidationError("config needs either 'elec_cost' or 'g_override'");
  }
  cfg.fleet.validate();
  return cfg;
}

MachineConfig load_machine_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open machine config '" + path + "'");
  return parse_machine_config(in);
}

CostModel make_cost_model(const MachineConfig& cfg, double alpha) {
  CostModel m;
  m.g = cfg.g_override ? *cfg.g_override : compute_g(cfg.fleet.machine);
  m.d = cfg.d;
  m.alpha = alpha;
  m.pbar_kw = cfg.fleet.pbar_kw();
  m.cm = compute_cm(cfg.fleet.machine);
  m.validate();
  return m;
}

}  // namespace rampsched

#include "rampsched/econ.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "rampsched/errors.hpp"

namespace rampsched {

void ProfitModel::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0)) throw ValidationError("profit model requires a >= 0 and b >= 0");
}

double profit_vs_price(double price, const ProfitModel& pm) noexcept { return pm.a - pm.b * price; }

double amortized_daily_msrp(double price_usd, double lifespan_years) {
  if (!(lifespan_years > 0.0)) throw ValidationError("lifespan must be > 0");
  return price_usd / (365.0 * lifespan_years);
}

double breakeven_max_machine_price(double daily_profit, const BreakevenRule& rule) {
  return rule.lifespan_days * (daily_profit - rule.reference_profit_per_day + rule.reference_msrp_per_day);
}

LinearFit fit_price_trend(std::span<const TrendPoint> points) {
  const auto n = static_cast<double>(points.size());
  if (points.size() < 2) throw DegenerateFitError("price trend needs at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.share_pct;
    my += p.value;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.share_pct - mx) * (p.share_pct - mx);
    sxy += (p.share_pct - mx) * (p.value - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFitError("price trend needs at least two distinct shares");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = p.value - (f.intercept + f.slope * p.share_pct);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  f.slope_stderr = points.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  return f;
}

QuadraticFit fit_ramp_trend(std::span<const TrendPoint> points) {
  if (points.size() < 3) throw DegenerateFitError("ramp trend needs at least three points");
  double num = 0.0, den = 0.0;
  for (const auto& p : points) {
    const double s2 = p.share_pct * p.share_pct;
    num += s2 * p.value;
    den += s2 * s2;
  }
  if (!(den > 0.0)) throw DegenerateFitError("ramp trend needs a non-zero share");
  QuadraticFit f;
  f.coeff = num / den;
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = p.value - f.coeff * p.share_pct * p.share_pct;
    ss += r * r;
  }
  f.rms = std::sqrt(ss / static_cast<double>(points.size()));
  return f;
}

std::vector<TrendPoint> read_trend_csv(std::istream& in) {
  std::vector<TrendPoint> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  auto num = [&](const std::string& s, double& v) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return false;
    const char* first = s.data() + b;
    const char* last = s.data() + e + 1;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    return ec == std::errc{} && ptr == last && std::isfinite(v);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header) {
      if (line.rfind("share_pct", 0) != 0) throw ValidationError("trend CSV must start with 'share_pct,value'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    TrendPoint p;
    if (comma == std::string::npos || !num(line.substr(0, comma), p.share_pct) ||
        !num(line.substr(comma + 1), p.value)) {
      throw ValidationError("trend CSV line " + std::to_string(line_no) + ": expected two numbers");
    }
    if (p.share_pct < 0.0 || p.share_pct > 100.0) {
      throw ValidationError("trend CSV line " + std::to_string(line_no) + ": share must lie in [0, 100]");
    }
    out.push_back(p);
  }
  if (!header) throw ValidationError("trend CSV is empty");
  return out;
}

void write_trend_csv(std::ostream& out, std::span<const TrendPoint> points) {
  out << "share_pct,value\n";
  char a[32], b[32];
  for (const auto& p : points) {
    const auto ra = std::to_chars(a, a + sizeof(a), p.share_pct);
    const auto rb = std::to_chars(b, b + sizeof(b), p.value);
    out << std::string_view(a, static_cast<std::size_t>(ra.ptr - a)) << ','
        << std::string_view(b, static_cast<std::size_t>(rb.ptr - b)) << '\n';
  }
}

EconReport daily_report(const PmpSolution& sol, const Scenario& sc, const MachineSpec& machine,
                        const ReportOptions& opt) {
  if (!sol.converged) throw ReportOnUnconvergedError("economics report requested for a non-converged solution");
  if (sol.size() != sc.load.size()) throw DimensionError("solution and scenario grids differ");
  machine.validate();

  const double dt = sol.dt;
  const double period = sol.period();
  const double per_day = 24.0 / period;
  const auto count = static_cast<double>(sc.fleet.count);
  const double energy_weight = opt.attribution == CostAttribution::marginal ? 2.0 : 1.0;

  double energy = 0.0, gross = 0.0, operating = 0.0;
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const double pm = sol.pm_clipped[i];
    energy += pm * dt;
    gross += sc.cost.cm_at(dt * static_cast<double>(i)) * pm * dt;
    operating += energy_weight * sc.cost.g * sol.x_traj[i] * pm * dt;
  }
  const Evaluation ev = evaluate(sol, sc);

  EconReport r;
  r.machine = machine.name;
  r.fleet_count = sc.fleet.count;
  r.duty_factor = energy / (sc.cost.pbar_kw * period);
  r.msrp_per_day = amortized_daily_msrp(machine.price_usd, machine.lifespan_years);
  r.gross_mining = gross / count * per_day;
  r.operating_cost = operating / count * per_day;
  r.net_profit = r.gross_mining - r.operating_cost - r.msrp_per_day;
  r.ramping_saved_fleet = (ev.baseline.ramping - ev.optimized.ramping) * per_day;
  r.ramping_saved = r.ramping_saved_fleet / count;
  r.breakeven_machine_price = (r.gross_mining - r.operating_cost) * 365.0 * machine.lifespan_years;

  if (r.ramping_saved <= 0.0) r.flags.emplace_back("no_ramping_saving");
  if (energy <= 0.0) r.flags.emplace_back("miners_idle");
  if (r.net_profit < 0.0) r.flags.emplace_back("net_loss");
  return r;
}

Projection project_net_profit(const MachineSpec& machine, const ProfitModel& profit, const TrendModel& trend,
                              int years, const ScheduleStats& stats) {
  if (years < 1) throw ValidationError("projection needs at least one year");
  const double msrp = amortized_daily_msrp(machine.price_usd, machine.lifespan_years);
  const double ramp0 = trend.ramp_at(trend.share0_pct);

  Projection out;
  for (int y = 1; y <= years; ++y) {
    ProjectionPoint p;
    p.year = y;
    p.share_pct = std::clamp(trend.share0_pct + y * trend.share_per_year, 0.0, 100.0);
    p.price = trend.price_at(p.share_pct);
    p.mining = profit_vs_price(p.price, profit);
    p.ramping_saved = ramp0 > 0.0 ? stats.ramping_saved_per_day * trend.ramp_at(p.share_pct) / ramp0
                                  : stats.ramping_saved_per_day;
    p.msrp_per_day = msrp;
    p.net = p.mining + p.ramping_saved - msrp;
    if (!out.first_loss_year && p.net < 0.0) out.first_loss_year = y;
    out.series.push_back(p);
  }
  return out;
}

}  // namespace rampsched

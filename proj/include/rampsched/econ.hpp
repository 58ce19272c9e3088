#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rampsched/costmodel.hpp"
#include "rampsched/pmp.hpp"

namespace rampsched {

/// Daily mining profit as a linear function of the electricity price.
/// The slope is tied to whatever price unit the caller's data uses.
struct ProfitModel {
  double a = 14.0;
  double b = 0.1;

  void validate() const;
};

double profit_vs_price(double price, const ProfitModel& pm) noexcept;

/// Purchase price spread linearly over the lifespan, in $/day.
double amortized_daily_msrp(double price_usd, double lifespan_years);

/// Break-even rule C / (lifespan_days) - reference_msrp <= V - reference_profit,
/// with the reference values of the published three-machine study.
struct BreakevenRule {
  double lifespan_days = 2.0 * 365.0;
  double reference_msrp_per_day = 8.9;
  double reference_profit_per_day = 5.0;
};

/// Largest machine price C satisfying the break-even rule for daily profit V.
double breakeven_max_machine_price(double daily_profit, const BreakevenRule& rule = {});

struct TrendPoint {
  double share_pct = 0.0;
  double value = 0.0;
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rms = 0.0;
  double slope_stderr = 0.0;
};

struct QuadraticFit {
  double coeff = 0.0;  // value = coeff * share^2
  double rms = 0.0;
};

/// Price and ramping-cost trends against renewable share, plus the share growth assumption.
struct TrendModel {
  LinearFit price;
  QuadraticFit ramp;
  double share0_pct = 0.0;
  double share_per_year = 0.0;

  double price_at(double share_pct) const noexcept { return price.intercept + price.slope * share_pct; }
  double ramp_at(double share_pct) const noexcept { return ramp.coeff * share_pct * share_pct; }
};

/// Ordinary least squares line. Throws DegenerateFitError unless at least two distinct shares.
LinearFit fit_price_trend(std::span<const TrendPoint> points);
/// Least squares through the origin on share^2. Needs >= 3 points and a non-zero share.
QuadraticFit fit_ramp_trend(std::span<const TrendPoint> points);

std::vector<TrendPoint> read_trend_csv(std::istream& in);
void write_trend_csv(std::ostream& out, std::span<const TrendPoint> points);

/// How mining energy is charged for generation.
enum class CostAttribution {
  marginal,  // 2 g p_g per kWh of mining energy
  average,   // g p_g per kWh (average cost of the generator's output)
};

struct ReportOptions {
  CostAttribution attribution = CostAttribution::marginal;
};

/// Per-machine daily economics of a schedule (all money in $/day per machine).
struct EconReport {
  std::string machine;
  long fleet_count = 0;
  double duty_factor = 0.0;      // mining energy / (P̄ T)
  double msrp_per_day = 0.0;
  double operating_cost = 0.0;
  double gross_mining = 0.0;
  double net_profit = 0.0;       // gross - operating - msrp
  double ramping_saved = 0.0;    // per machine
  double ramping_saved_fleet = 0.0;
  double breakeven_machine_price = 0.0;  // price at which net_profit = 0
  std::vector<std::string> flags;
};

/// Builds the report from the clipped schedule. Throws ReportOnUnconvergedError.
EconReport daily_report(const PmpSolution& sol, const Scenario& sc, const MachineSpec& machine,
                        const ReportOptions& opt = {});

/// Inputs that tie a projection to a solved schedule.
struct ScheduleStats {
  double ramping_saved_per_day = 0.0;  // per machine, at the trend's share0
};

struct ProjectionPoint {
  int year = 0;
  double share_pct = 0.0;
  double price = 0.0;
  double mining = 0.0;
  double ramping_saved = 0.0;
  double msrp_per_day = 0.0;
  double net = 0.0;
};

struct Projection {
  std::vector<ProjectionPoint> series;
  std::optional<int> first_loss_year;
};

/// Year-by-year net profit (years 1..n) under the trend model, without re-solving schedules.
Projection project_net_profit(const MachineSpec& machine, const ProfitModel& profit, const TrendModel& trend,
                              int years, const ScheduleStats& stats);

}  // namespace rampsched

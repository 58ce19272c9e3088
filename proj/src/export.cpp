#include "rampsched/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "rampsched/errors.hpp"

namespace rampsched {

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

namespace {

void csv_row(std::ostream& out, std::initializer_list<double> vals) {
  bool first = true;
  for (double v : vals) {
    if (!first) out << ',';
    out << format_number(v);
    first = false;
  }
  out << '\n';
}

constexpr const char* kSolutionHeader = "t_h,x_kw,lambda,u_kw_per_h,pm_kw,pm_clipped_kw,pl_kw";

}  // namespace

void write_solution_csv(std::ostream& out, const PmpSolution& sol) {
  out << kSolutionHeader << '\n';
  for (std::size_t i = 0; i < sol.size(); ++i) {
    csv_row(out, {sol.dt * static_cast<double>(i), sol.x_traj[i], sol.lambda_traj[i], sol.u_traj[i], sol.pm_traj[i],
                  sol.pm_clipped[i], sol.pl[i]});
  }
}

PmpSolution read_solution_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("solution CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSolutionHeader) throw ValidationError(std::string("line 1: expected header ") + kSolutionHeader);

  PmpSolution sol;
  std::vector<double> t;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[7];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int k = 0; k < 7; ++k) {
      const auto r = std::from_chars(p, end, v[k]);
      const bool last = k == 6;
      if (r.ec != std::errc{} || !std::isfinite(v[k]) || (last ? r.ptr != end : (r.ptr == end || *r.ptr != ','))) {
        throw ValidationError("line " + std::to_string(line_no) + ": expected 7 numeric fields");
      }
      p = r.ptr + (last ? 0 : 1);
    }
    t.push_back(v[0]);
    sol.x_traj.push_back(v[1]);
    sol.lambda_traj.push_back(v[2]);
    sol.u_traj.push_back(v[3]);
    sol.pm_traj.push_back(v[4]);
    sol.pm_clipped.push_back(v[5]);
    sol.pl.push_back(v[6]);
  }
  if (t.size() < SampledProfile::kMinSamples) throw ShortSeriesError("solution CSV has fewer than 4 rows");
  sol.dt = t[1] - t[0];
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double expect = sol.dt * static_cast<double>(i);
    if (std::abs(t[i] - expect) > 1e-9 * (1.0 + std::abs(expect)) || !(sol.dt > 0.0)) {
      throw SpacingError("line " + std::to_string(i + 2) + ": solution rows are not uniformly spaced");
    }
  }
  return sol;
}

void write_oracle_csv(std::ostream& out, const DiscreteSolution& sol, const Scenario& sc) {
  const auto pl = sc.load.values();
  const std::size_t n = pl.size();
  if (sol.pm.size() != n) throw DimensionError("oracle schedule and scenario grids differ");
  const double dt = sc.load.dt();
  out << kSolutionHeader << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double x = pl[i] + sol.pm[i];
    const double u = (pl[j] + sol.pm[j] - x) / dt;
    csv_row(out, {dt * static_cast<double>(i), x, -2.0 * sc.cost.d * u, u, sol.pm[i], sol.pm[i], pl[i]});
  }
}

Json breakdown_json(const CostBreakdown& c) {
  return Json{{"generation", c.generation},
              {"ramping", c.ramping},
              {"revenue", c.revenue},
              {"penalty", c.penalty},
              {"total", c.total}};
}

Json diagnostics_json(const PmpSolution& sol, const Scenario& sc) {
  const Evaluation ev = evaluate(sol, sc);
  Json stages = Json::array();
  for (const auto& s : sol.stages) {
    stages.push_back({{"alpha", s.alpha},
                      {"converged", s.converged},
                      {"newton_iters", s.newton_iters},
                      {"periodic_residual", s.periodic_residual},
                      {"max_violation_kw", s.max_violation_kw}});
  }
  return Json{{"converged", sol.converged},
              {"periodic_residual", sol.periodic_residual},
              {"stationarity_residual", sol.stationarity_residual},
              {"newton_iters", sol.newton_iters},
              {"alpha_used", sol.alpha_used},
              {"objective_breakdown", {{"optimized", breakdown_json(ev.optimized)}, {"baseline", breakdown_json(ev.baseline)}}},
              {"segments", sol.segments},
              {"substeps", sol.substeps},
              {"last_converged_stage", sol.last_converged_stage},
              {"stages", stages}};
}

Json oracle_diagnostics_json(const DiscreteSolution& sol, const Scenario& sc) {
  CostBreakdown c = evaluate_schedule(sol.pm, sc);
  return Json{{"oracle_converged", sol.converged},
              {"oracle_objective", sol.objective},
              {"oracle_iterations", sol.iterations},
              {"oracle_grad_norm", sol.grad_norm},
              {"oracle_objective_breakdown", breakdown_json(c)}};
}

Json report_json(const EconReport& r) {
  return Json{{"machine", r.machine},
              {"basis", "per machine, $/day"},
              {"fleet_count", r.fleet_count},
              {"duty_factor", r.duty_factor},
              {"msrp_per_day", r.msrp_per_day},
              {"operating_cost", r.operating_cost},
              {"gross_mining", r.gross_mining},
              {"net_profit", r.net_profit},
              {"ramping_saved", r.ramping_saved},
              {"ramping_saved_fleet", r.ramping_saved_fleet},
              {"breakeven_machine_price", r.breakeven_machine_price},
              {"flags", r.flags}};
}

void write_report_table(std::ostream& out, std::span<const EconReport> reports) {
  // Rows are quantities, columns are machines.
  struct Row {
    const char* label;
    double EconReport::*field;
  };
  static const Row rows[] = {{"MSRP [$/day]", &EconReport::msrp_per_day},
                             {"Electricity cost [$/day]", &EconReport::operating_cost},
                             {"Gross mining [$/day]", &EconReport::gross_mining},
                             {"Net profit [$/day]", &EconReport::net_profit},
                             {"Ramping saved [$/day]", &EconReport::ramping_saved},
                             {"Break-even price [$]", &EconReport::breakeven_machine_price}};
  std::size_t label_w = 8;
  for (const auto& r : rows) label_w = std::max(label_w, std::string(r.label).size());
  constexpr int col_w = 14;
  out << std::left << std::setw(static_cast<int>(label_w)) << "Machine" << std::right;
  for (const auto& rep : reports) out << std::setw(col_w) << rep.machine;
  out << '\n';
  std::ostringstream cell;
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(label_w)) << r.label << std::right;
    for (const auto& rep : reports) {
      cell.str("");
      cell << std::fixed << std::setprecision(2) << rep.*r.field;
      out << std::setw(col_w) << cell.str();
    }
    out << '\n';
  }
}

void write_projection_csv(std::ostream& out, const Projection& p) {
  out << "year,share_pct,price,mining,ramping_saved,msrp_per_day,net\n";
  for (const auto& pt : p.series) {
    csv_row(out, {static_cast<double>(pt.year), pt.share_pct, pt.price, pt.mining, pt.ramping_saved, pt.msrp_per_day,
                  pt.net});
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw Error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rampsched

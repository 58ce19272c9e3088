#include "rampsched/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "rampsched/config.hpp"
#include "rampsched/econ.hpp"
#include "rampsched/errors.hpp"
#include "rampsched/export.hpp"
#include "rampsched/log.hpp"
#include "rampsched/oracle.hpp"
#include "rampsched/pmp.hpp"
#include "rampsched/profiles.hpp"

namespace fs = std::filesystem;

namespace rampsched::cli {
namespace {

// Oracle-check gates.
constexpr double kObjectiveGap = 0.005;
constexpr double kPmGapOfPbar = 0.02;
constexpr double kGateResidual = 1e-8;
constexpr double kGateStationarity = 1e-6;

struct ScenarioFlags {
  std::string load;
  std::string machine;
  std::optional<long> fleet_count;
  std::string alpha_schedule;
  std::optional<double> dt;
  int smooth = 1;
  double power_scale = 1.0;
  Tolerances tol;
  bool serial = false;
};

struct OutputFlags {
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
  cmd->add_option("--load", f.load, "Load CSV (timestamp,load_kw[,pv_kw][,price_usd_kwh])")->required();
  cmd->add_option("--machine", f.machine, "Machine config file, or reference machine 1|2|3")->required();
  cmd->add_option("--fleet-count", f.fleet_count, "Number of machines (overrides the config)");
  cmd->add_option("--alpha-schedule", f.alpha_schedule, "Comma-separated increasing penalty weights");
  cmd->add_option("--dt", f.dt, "Resample the load to this step [h]");
  cmd->add_option("--smooth", f.smooth, "Moving-average window applied when resampling (odd)");
  cmd->add_option("--power-scale", f.power_scale, "Multiplier applied to power columns on input");
  cmd->add_option("--tol-bc", f.tol.tol_bc, "Periodicity tolerance");
  cmd->add_option("--tol-stat", f.tol.tol_stat, "Stationarity tolerance");
  cmd->add_flag("--serial", f.serial, "Use the serial kernels");
}

void add_output_flags(CLI::App* cmd, OutputFlags& o, bool with_format) {
  cmd->add_option("--out", o.out, "Output directory")->required();
  if (with_format) cmd->add_option("--format", o.format, "Solution file format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", o.seed, "Seed for any randomized step (outputs are deterministic for a fixed seed)");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("not a number in list: '" + item + "'");
    }
  }
  if (v.empty()) throw ValidationError("empty list");
  return v;
}

MachineConfig machine_config(const std::string& spec) {
  if (!fs::exists(spec) && (spec == "1" || spec == "2" || spec == "3")) {
    MachineConfig cfg;
    cfg.fleet = {reference_machine(spec), reference_fleet_count(spec)};
    return cfg;
  }
  if (!fs::exists(spec)) throw ValidationError("machine config not found: " + spec);
  return load_machine_config(spec);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

/// Load (or net load when PV is present) with resampling applied.
SampledProfile read_load(const ScenarioFlags& f) {
  auto in = open_input(f.load);
  CsvReadOptions opt;
  opt.power_scale = f.power_scale;
  ProfileTable table;
  try {
    table = load_csv(in, default_column_map(), opt);
  } catch (const ValidationError& e) {
    throw ValidationError(f.load + ": " + e.what());
  }
  if (!table.contains("load_kw")) throw ValidationError(f.load + ": no load_kw column");
  SampledProfile load = table.at("load_kw");
  if (table.contains("pv_kw")) {
    const auto l = load.values();
    const auto p = table.at("pv_kw").values();
    std::vector<double> net(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) net[i] = std::max(l[i] - p[i], 0.0);
    load = SampledProfile(load.dt(), std::move(net));
  }
  if (f.dt && std::abs(*f.dt - load.dt()) > 1e-12 * load.dt()) {
    load = resample_periodic(load, *f.dt, f.smooth);
  } else if (f.smooth != 1) {
    load = resample_periodic(load, load.dt(), f.smooth);
  }
  return load;
}

std::vector<double> resolve_schedule(const ScenarioFlags& f, const MachineConfig& cfg) {
  if (!f.alpha_schedule.empty()) return parse_list(f.alpha_schedule);
  std::vector<double> s;
  const double final_alpha = cfg.alpha.value_or(default_alpha_schedule().back());
  for (double a : default_alpha_schedule()) {
    if (a < final_alpha) s.push_back(a);
  }
  s.push_back(final_alpha);
  return s;
}

Scenario build_scenario(const ScenarioFlags& f, SampledProfile load, MachineConfig* cfg_out = nullptr) {
  MachineConfig cfg = machine_config(f.machine);
  if (f.fleet_count) cfg.fleet.count = *f.fleet_count;
  cfg.fleet.validate();
  const auto schedule = resolve_schedule(f, cfg);
  Scenario sc{std::move(load), make_cost_model(cfg, schedule.back()), cfg.fleet};
  sc.alpha_schedule = schedule;
  sc.tolerances = f.tol;
  sc.shooting.exec = f.serial ? ExecPolicy::serial : ExecPolicy::parallel;
  sc.validate();
  if (cfg_out) *cfg_out = cfg;
  return sc;
}

void prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ValidationError("cannot create output directory " + dir);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json solution_json(const PmpSolution& sol) {
  std::vector<double> t(sol.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = sol.dt * static_cast<double>(i);
  return Json{{"t_h", t},          {"x_kw", sol.x_traj},   {"lambda", sol.lambda_traj},
              {"u_kw_per_h", sol.u_traj}, {"pm_kw", sol.pm_traj}, {"pm_clipped_kw", sol.pm_clipped},
              {"pl_kw", sol.pl}};
}

void write_solution(const fs::path& dir, const std::string& prefix, const PmpSolution& sol, const std::string& format) {
  if (format == "json") {
    write_file_atomic(dir / (prefix + "solution.json"), dump(solution_json(sol)));
  } else {
    std::ostringstream s;
    write_solution_csv(s, sol);
    write_file_atomic(dir / (prefix + "solution.csv"), s.str());
  }
}

Json divergence_json(const DivergenceError& e) {
  return Json{{"converged", false},
              {"error", e.what()},
              {"divergence_time_h", e.time_h()},
              {"divergence_x0", e.x0()},
              {"divergence_lambda0", e.lambda0()}};
}

// ---- solve ---------------------------------------------------------------

int cmd_solve(const ScenarioFlags& f, const OutputFlags& o, std::ostream& out) {
  Scenario sc = build_scenario(f, read_load(f));
  prepare_out(o.out);
  const fs::path dir = o.out;
  PmpSolution sol;
  try {
    sol = solve(sc);
  } catch (const DivergenceError& e) {
    write_file_atomic(dir / "diagnostics.json", dump(divergence_json(e)));
    out << "diverged: " << e.what() << '\n';
    return kNotConverged;
  }
  write_solution(dir, "", sol, o.format);
  write_file_atomic(dir / "diagnostics.json", dump(diagnostics_json(sol, sc)));
  out << (sol.converged ? "converged" : "not converged") << ": alpha=" << format_number(sol.alpha_used)
      << " newton_iters=" << sol.newton_iters << " periodic_residual=" << format_number(sol.periodic_residual)
      << " stationarity_residual=" << format_number(sol.stationarity_residual) << '\n';
  return sol.converged ? kOk : kNotConverged;
}

// ---- oracle-check --------------------------------------------------------

int cmd_oracle_check(ScenarioFlags f, const OutputFlags& o, std::optional<std::size_t> nodes, std::ostream& out) {
  SampledProfile load = read_load(f);
  if (nodes) {
    if (*nodes < SampledProfile::kMinSamples) throw ValidationError("--nodes must be >= 4");
    load = resample_periodic(load, load.period() / static_cast<double>(*nodes), 1);
  }
  Scenario sc = build_scenario(f, std::move(load));
  prepare_out(o.out);
  const fs::path dir = o.out;

  ProjectedGradientOptions qopt;
  qopt.exec = sc.shooting.exec;
  // The two solvers share only immutable inputs.
  PmpSolution sol;
  DiscreteSolution qp;
  std::optional<DivergenceError> diverged;
#pragma omp parallel sections num_threads(2)
  {
#pragma omp section
    {
      try {
        sol = solve(sc);
      } catch (const DivergenceError& e) {
        diverged.emplace(e);
      }
    }
#pragma omp section
    { qp = solve_projected_gradient(sc, qopt); }
  }

  {
    std::ostringstream s;
    write_oracle_csv(s, qp, sc);
    write_file_atomic(dir / "oracle_solution.csv", s.str());
    write_file_atomic(dir / "oracle_diagnostics.json", dump(oracle_diagnostics_json(qp, sc)));
  }
  if (diverged) {
    write_file_atomic(dir / "diagnostics.json", dump(divergence_json(*diverged)));
    out << "diverged: " << diverged->what() << '\n';
    return kNotConverged;
  }
  write_solution(dir, "", sol, o.format);
  write_file_atomic(dir / "diagnostics.json", dump(diagnostics_json(sol, sc)));

  const double j_pmp = discretize_objective(sc, sol.pm_clipped);
  const double j_qp = qp.objective;
  const double obj_gap = std::abs(j_pmp - j_qp) / (1.0 + std::abs(j_qp));
  double pm_gap = 0.0;
  for (std::size_t i = 0; i < qp.pm.size(); ++i) pm_gap = std::max(pm_gap, std::abs(sol.pm_clipped[i] - qp.pm[i]));
  const double pbar = sc.cost.pbar_kw;

  const bool ok_obj = obj_gap <= kObjectiveGap;
  const bool ok_pm = pm_gap <= kPmGapOfPbar * pbar;
  const bool ok_res = sol.periodic_residual <= kGateResidual;
  const bool ok_stat = sol.stationarity_residual <= kGateStationarity;
  const bool pass = ok_obj && ok_pm && ok_res && ok_stat;

  Json cmp{{"nodes", sc.load.size()},
           {"pmp_converged", sol.converged},
           {"oracle_converged", qp.converged},
           {"objective_pmp", j_pmp},
           {"objective_oracle", j_qp},
           {"objective_gap_rel", obj_gap},
           {"pm_gap_linf_kw", pm_gap},
           {"pm_gap_fraction_of_pbar", pm_gap / pbar},
           {"periodic_residual", sol.periodic_residual},
           {"stationarity_residual", sol.stationarity_residual},
           {"gates",
            {{"objective_gap_rel", kObjectiveGap},
             {"pm_gap_fraction_of_pbar", kPmGapOfPbar},
             {"periodic_residual", kGateResidual},
             {"stationarity_residual", kGateStationarity}}},
           {"pass", pass}};
  write_file_atomic(dir / "comparison.json", dump(cmp));

  out << (pass ? "PASS" : "GAP") << ": objective_gap=" << format_number(obj_gap)
      << " pm_gap_kw=" << format_number(pm_gap) << " periodic_residual=" << format_number(sol.periodic_residual)
      << '\n';
  if (!sol.converged && pass) return kNotConverged;
  return pass ? kOk : kVerificationGap;
}

// ---- econ ----------------------------------------------------------------

struct EconFlags {
  std::string solution;
  std::string diagnostics;
  std::string machine;
  std::optional<long> fleet_count;
  std::string attribution = "marginal";
  double profit_a = ProfitModel{}.a;
  double profit_b = ProfitModel{}.b;
  std::string price_trend;
  std::string ramp_trend;
  double share0 = 0.0;
  double share_per_year = 0.0;
  std::optional<int> project;
  bool breakeven = false;
  std::optional<double> daily_profit;
  std::string out;
};

std::vector<TrendPoint> read_trend(const std::string& path) {
  auto in = open_input(path);
  try {
    return read_trend_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

int cmd_econ(const EconFlags& f, std::ostream& out) {
  if (f.breakeven) {
    if (!f.daily_profit) throw ValidationError("--breakeven needs --daily-profit");
    out << format_number(breakeven_max_machine_price(*f.daily_profit)) << '\n';
    if (f.machine.empty()) return kOk;
  }
  if (f.machine.empty()) throw ValidationError("--machine is required");
  if (f.project && (f.price_trend.empty() || f.ramp_trend.empty())) {
    throw ValidationError("--project needs --price-trend and --ramp-trend");
  }
  MachineConfig cfg = machine_config(f.machine);
  if (f.fleet_count) cfg.fleet.count = *f.fleet_count;
  cfg.fleet.validate();
  const MachineSpec& machine = cfg.fleet.machine;
  const std::string name = machine.name.empty() ? f.machine : machine.name;
  ProfitModel profit{f.profit_a, f.profit_b};
  profit.validate();

  std::optional<fs::path> dir;
  if (!f.out.empty()) {
    prepare_out(f.out);
    dir = f.out;
  }

  Json doc{{"machine", name}, {"msrp_per_day", amortized_daily_msrp(machine.price_usd, machine.lifespan_years)}};
  ScheduleStats stats;
  if (!f.solution.empty()) {
    auto in = open_input(f.solution);
    PmpSolution sol;
    try {
      sol = read_solution_csv(in);
    } catch (const ValidationError& e) {
      throw ValidationError(f.solution + ": " + e.what());
    }
    const std::string diag_path =
        f.diagnostics.empty() ? (fs::path(f.solution).parent_path() / "diagnostics.json").string() : f.diagnostics;
    auto din = open_input(diag_path);
    Json diag;
    try {
      diag = Json::parse(din);
      sol.converged = diag.at("converged").get<bool>();
      sol.alpha_used = diag.at("alpha_used").get<double>();
    } catch (const Json::exception& e) {
      throw ValidationError(diag_path + ": " + e.what());
    }
    MachineConfig scfg = cfg;
    Scenario sc{SampledProfile(sol.dt, sol.pl), make_cost_model(scfg, sol.alpha_used), cfg.fleet};
    sc.alpha_schedule = {sol.alpha_used};
    ReportOptions ropt;
    ropt.attribution = f.attribution == "average" ? CostAttribution::average : CostAttribution::marginal;
    EconReport rep;
    try {
      rep = daily_report(sol, sc, machine, ropt);
    } catch (const ReportOnUnconvergedError& e) {
      out << e.what() << '\n';
      return kNotConverged;
    }
    rep.machine = name;
    stats.ramping_saved_per_day = rep.ramping_saved;
    doc = report_json(rep);
    std::ostringstream table;
    write_report_table(table, std::span<const EconReport>(&rep, 1));
    out << table.str();
    if (dir) write_file_atomic(*dir / "report.txt", table.str());
  } else {
    out << "MSRP [$/day] " << format_number(doc["msrp_per_day"].get<double>()) << '\n';
  }
  if (f.daily_profit) doc["breakeven_machine_price_at_daily_profit"] = breakeven_max_machine_price(*f.daily_profit);

  if (f.project) {
    const auto pp = read_trend(f.price_trend);
    const auto rp = read_trend(f.ramp_trend);
    TrendModel trend{fit_price_trend(pp), fit_ramp_trend(rp), f.share0, f.share_per_year};
    const Projection proj = project_net_profit(machine, profit, trend, *f.project, stats);
    doc["trend"] = {{"price_intercept", trend.price.intercept},
                    {"price_slope", trend.price.slope},
                    {"price_rms", trend.price.rms},
                    {"ramp_coeff", trend.ramp.coeff},
                    {"ramp_rms", trend.ramp.rms},
                    {"share0_pct", trend.share0_pct},
                    {"share_per_year", trend.share_per_year}};
    doc["first_loss_year"] = proj.first_loss_year ? Json(*proj.first_loss_year) : Json(nullptr);
    std::ostringstream s;
    write_projection_csv(s, proj);
    if (dir) {
      write_file_atomic(*dir / "projection.csv", s.str());
    } else {
      out << s.str();
    }
  }
  if (dir) write_file_atomic(*dir / "report.json", dump(doc));
  return kOk;
}

// ---- synth ---------------------------------------------------------------

struct SynthFlags {
  double base = 100.0;
  double peak = 50.0;
  double pv = 120.0;
  double dt = 0.25;
  double noise = 0.0;
  std::string start = "2024-01-01T00:00:00";
};

int cmd_synth(const SynthFlags& f, const OutputFlags& o, std::ostream& out) {
  if (!(f.base >= 0.0) || !(f.peak >= 0.0) || !(f.pv >= 0.0) || !(f.noise >= 0.0)) {
    throw ValidationError("synth magnitudes must be >= 0");
  }
  DuckCurve dc = synth_duck_curve(f.base, f.peak, f.pv, f.dt);
  if (f.noise > 0.0) {
    std::mt19937_64 rng(o.seed);
    std::normal_distribution<double> noise(0.0, f.noise);
    auto l = std::vector<double>(dc.load.values().begin(), dc.load.values().end());
    for (auto& v : l) v = std::max(0.0, v + noise(rng));
    const auto p = dc.pv.values();
    std::vector<double> n(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) n[i] = std::max(0.0, l[i] - p[i]);
    dc.load = SampledProfile(f.dt, std::move(l));
    dc.net = SampledProfile(f.dt, std::move(n));
  }
  const double t0 = parse_timestamp(f.start);
  prepare_out(o.out);
  const fs::path dir = o.out;
  auto emit = [&](const std::string& file, const std::string& col, const SampledProfile& p) {
    std::ostringstream s;
    const std::pair<std::string, const SampledProfile*> cols[] = {{col, &p}};
    write_csv(s, cols, t0);
    write_file_atomic(dir / file, s.str());
  };
  emit("load.csv", "load_kw", dc.load);
  emit("pv.csv", "pv_kw", dc.pv);
  emit("net.csv", "load_kw", dc.net);
  out << "wrote load.csv pv.csv net.csv (" << dc.net.size() << " samples)\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal miner dispatch schedules and mining economics"};
  app.require_subcommand(1);

  ScenarioFlags sflags;
  OutputFlags oflags;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the periodic schedule");
  add_scenario_flags(solve_cmd, sflags);
  add_output_flags(solve_cmd, oflags, true);

  ScenarioFlags cflags;
  OutputFlags coflags;
  std::optional<std::size_t> nodes;
  auto* check_cmd = app.add_subcommand("oracle-check", "Compare the schedule against the discrete QP oracle");
  add_scenario_flags(check_cmd, cflags);
  add_output_flags(check_cmd, coflags, true);
  check_cmd->add_option("--nodes", nodes, "Resample the load to this many nodes first");

  EconFlags eflags;
  auto* econ_cmd = app.add_subcommand("econ", "Economics report, break-even price and projections");
  econ_cmd->add_option("--solution", eflags.solution, "solution.csv written by solve");
  econ_cmd->add_option("--diagnostics", eflags.diagnostics, "diagnostics.json (default: next to the solution)");
  econ_cmd->add_option("--machine", eflags.machine, "Machine config file, or reference machine 1|2|3");
  econ_cmd->add_option("--fleet-count", eflags.fleet_count, "Number of machines (overrides the config)");
  econ_cmd->add_option("--attribution", eflags.attribution, "Operating-cost attribution")
      ->check(CLI::IsMember({"marginal", "average"}));
  econ_cmd->add_option("--profit-a", eflags.profit_a, "Profit at zero electricity price [$/day]");
  econ_cmd->add_option("--profit-b", eflags.profit_b, "Profit slope per unit electricity price");
  econ_cmd->add_option("--price-trend", eflags.price_trend, "CSV share_pct,value of electricity prices");
  econ_cmd->add_option("--ramp-trend", eflags.ramp_trend, "CSV share_pct,value of daily ramping cost");
  econ_cmd->add_option("--share0", eflags.share0, "Renewable share in year 0 [%]");
  econ_cmd->add_option("--share-per-year", eflags.share_per_year, "Renewable share growth [%/year]");
  econ_cmd->add_option("--project", eflags.project, "Project net profit over this many years")
      ->check(CLI::PositiveNumber);
  econ_cmd->add_flag("--breakeven", eflags.breakeven, "Print the break-even machine price for --daily-profit");
  econ_cmd->add_option("--daily-profit", eflags.daily_profit, "Daily mining profit V [$/day]");
  econ_cmd->add_option("--out", eflags.out, "Output directory");
  std::uint64_t econ_seed = 0;
  econ_cmd->add_option("--seed", econ_seed, "Accepted for uniformity; econ is not randomized");

  SynthFlags yflags;
  OutputFlags yoflags;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic duck-curve day");
  synth_cmd->add_option("--base", yflags.base, "Base load [kW]");
  synth_cmd->add_option("--peak", yflags.peak, "Evening bump height [kW]");
  synth_cmd->add_option("--pv", yflags.pv, "PV peak [kW]");
  synth_cmd->add_option("--dt", yflags.dt, "Sample step [h]");
  synth_cmd->add_option("--noise", yflags.noise, "Gaussian noise on the load, std dev [kW]");
  synth_cmd->add_option("--start", yflags.start, "Timestamp of the first sample");
  add_output_flags(synth_cmd, yoflags, false);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  configure_logging_from_env();
  try {
    if (*solve_cmd) return cmd_solve(sflags, oflags, out);
    if (*check_cmd) return cmd_oracle_check(cflags, coflags, nodes, out);
    if (*econ_cmd) return cmd_econ(eflags, out);
    if (*synth_cmd) return cmd_synth(yflags, yoflags, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace rampsched::cli

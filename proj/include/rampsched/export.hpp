#pragma once

// File formats shared by the CLI and the tests. Numbers are written in the
// shortest form that round-trips, so identical runs give identical bytes.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "rampsched/econ.hpp"
#include "rampsched/oracle.hpp"
#include "rampsched/pmp.hpp"

namespace rampsched {

using Json = nlohmann::ordered_json;

std::string format_number(double v);

/// `t_h,x_kw,lambda,u_kw_per_h,pm_kw,pm_clipped_kw,pl_kw`, one row per grid node.
void write_solution_csv(std::ostream& out, const PmpSolution& sol);
/// Inverse of write_solution_csv; `converged` is left false (it lives in the diagnostics).
PmpSolution read_solution_csv(std::istream& in);

/// Same columns for a discrete schedule. u is the forward difference of p_g
/// and lambda the costate implied by stationarity, -2 d u.
void write_oracle_csv(std::ostream& out, const DiscreteSolution& sol, const Scenario& sc);

Json breakdown_json(const CostBreakdown& c);
Json diagnostics_json(const PmpSolution& sol, const Scenario& sc);
Json oracle_diagnostics_json(const DiscreteSolution& sol, const Scenario& sc);

Json report_json(const EconReport& r);
/// Aligned columns in the layout of the published per-machine table.
void write_report_table(std::ostream& out, std::span<const EconReport> reports);

void write_projection_csv(std::ostream& out, const Projection& p);

/// Writes `content` to `<path>.tmp` and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace rampsched

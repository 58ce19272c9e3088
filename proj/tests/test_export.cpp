#include <sstream>

#include "corpus.hpp"
#include "doctest.h"
#include "rampsched/errors.hpp"
#include "rampsched/export.hpp"

using namespace rampsched;
using namespace rampsched::testing;

TEST_CASE("solution CSV round-trips") {
  const Scenario sc = make_case(duck(48), 120.0, 150.0, 1.0);
  const PmpSolution s = solve(sc);
  std::ostringstream out;
  write_solution_csv(out, s);
  CHECK(out.str().rfind("t_h,x_kw,lambda,u_kw_per_h,pm_kw,pm_clipped_kw,pl_kw\n", 0) == 0);
  std::istringstream in(out.str());
  const PmpSolution back = read_solution_csv(in);
  CHECK(back.dt == s.dt);
  CHECK(back.x_traj == s.x_traj);
  CHECK(back.lambda_traj == s.lambda_traj);
  CHECK(back.pm_clipped == s.pm_clipped);
  CHECK(back.pl == s.pl);

  std::istringstream bad("t_h,x_kw,lambda,u_kw_per_h,pm_kw,pm_clipped_kw,pl_kw\n0,1,2,3,4,5\n");
  CHECK_THROWS_AS(read_solution_csv(bad), ValidationError);
}

TEST_CASE("diagnostics and reports") {
  const Scenario sc = make_case(duck(48), 120.0, 150.0, 1.0);
  const PmpSolution s = solve(sc);
  const Json d = diagnostics_json(s, sc);
  CHECK(d["converged"] == true);
  CHECK(d["objective_breakdown"]["optimized"].contains("ramping"));
  CHECK(d["stages"].size() == 5);

  EconReport r;
  r.machine = "1";
  r.msrp_per_day = 10.136986;
  const Json j = report_json(r);
  CHECK(j["machine"] == "1");
  std::ostringstream table;
  write_report_table(table, std::span<const EconReport>(&r, 1));
  CHECK(table.str().find("10.14") != std::string::npos);
}

TEST_CASE("number formatting is shortest round-trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "0");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "corpus.hpp"
#include "doctest.h"
#include "rampsched/cli.hpp"
#include "rampsched/export.hpp"

namespace fs = std::filesystem;
using namespace rampsched;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("rampsched-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "rampsched");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

const char* kSmallFleet =
    "name = small\ndemand_w = 1500\nincome_usd_day = 4.32\nelec_cost = 0.1\nprice_usd = 2000\ncount = 100\n"
    "g_override = 0.001\nd = 1\n";

}  // namespace

TEST_CASE("synth writes the three profiles") {
  TempDir t("synth");
  const Run r = run({"synth", "--out", t / "s"});
  CHECK(r.code == 0);
  for (const char* f : {"load.csv", "pv.csv", "net.csv"}) CHECK(fs::exists(t.path / "s" / f));
  CHECK(run({"synth", "--out", t / "bad", "--dt", "0.7"}).code == 1);
  CHECK(run({"synth", "--out", t / "bad", "--pv", "-1"}).code == 1);

  const Run z = run({"synth", "--out", t / "z", "--base", "0", "--peak", "0", "--pv", "0"});
  CHECK(z.code == 0);
  std::istringstream in(slurp(t / "z/net.csv"));
  CHECK(load_csv(in).at("load_kw").max() == 0.0);

  SUBCASE("noise is reproducible for a fixed seed") {
    run({"synth", "--out", t / "n1", "--noise", "3", "--seed", "9"});
    run({"synth", "--out", t / "n2", "--noise", "3", "--seed", "9"});
    run({"synth", "--out", t / "n3", "--noise", "3", "--seed", "10"});
    CHECK(slurp(t / "n1/net.csv") == slurp(t / "n2/net.csv"));
    CHECK(slurp(t / "n1/net.csv") != slurp(t / "n3/net.csv"));
  }
}

TEST_CASE("solve end to end") {
  TempDir t("solve");
  REQUIRE(run({"synth", "--out", t / "s"}).code == 0);
  const Run r = run({"solve", "--load", t / "s/net.csv", "--machine", "1", "--out", t / "o"});
  CHECK(r.code == 0);
  CHECK(fs::exists(t.path / "o/solution.csv"));
  const Json diag = Json::parse(slurp(t / "o/diagnostics.json"));
  for (const char* k : {"converged", "periodic_residual", "stationarity_residual", "newton_iters", "alpha_used",
                        "objective_breakdown"}) {
    CHECK(diag.contains(k));
  }
  CHECK(diag["converged"] == true);
  CHECK(diag["alpha_used"] == 1e4);
  CHECK(fs::directory_iterator(t.path / "o") != fs::directory_iterator());
  for (const auto& e : fs::directory_iterator(t.path / "o")) CHECK(e.path().extension() != ".tmp");

  SUBCASE("paper mode alpha schedule") {
    const Run p = run({"solve", "--load", t / "s/net.csv", "--machine", "1", "--alpha-schedule", "1", "--out", t / "p"});
    CHECK(p.code == 0);
    CHECK(Json::parse(slurp(t / "p/diagnostics.json"))["alpha_used"] == 1.0);
  }
  SUBCASE("json solution format") {
    write(t / "m.cfg", kSmallFleet);
    CHECK(run({"solve", "--load", t / "s/net.csv", "--machine", t / "m.cfg", "--format", "json", "--out", t / "j"}).code ==
          0);
    const Json sol = Json::parse(slurp(t / "j/solution.json"));
    CHECK(sol["x_kw"].size() == 96);
  }
  SUBCASE("identical runs give identical bytes") {
    write(t / "m.cfg", kSmallFleet);
    for (const char* d : {"a", "b"}) {
      REQUIRE(run({"solve", "--load", t / "s/net.csv", "--machine", t / "m.cfg", "--seed", "3", "--out", t / d}).code ==
              0);
    }
    CHECK(slurp(t / "a/solution.csv") == slurp(t / "b/solution.csv"));
    CHECK(slurp(t / "a/diagnostics.json") == slurp(t / "b/diagnostics.json"));
  }
  SUBCASE("iteration budget exhausted") {
    write(t / "m.cfg", kSmallFleet);
    const Run nc = run({"solve", "--load", t / "s/net.csv", "--machine", t / "m.cfg", "--tol-bc", "1e-30", "--out",
                        t / "nc"});
    CHECK(nc.code == 2);
    CHECK(fs::exists(t.path / "nc/diagnostics.json"));
    CHECK(Json::parse(slurp(t / "nc/diagnostics.json"))["converged"] == false);
  }
}

TEST_CASE("solve input errors") {
  TempDir t("bad");
  write(t / "bad.csv", "timestamp,load_kw\n0,1\n3600,1\n7200,oops\n10800,1\n");
  const Run r = run({"solve", "--load", t / "bad.csv", "--machine", "1", "--out", t / "o"});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 4") != std::string::npos);
  CHECK(run({"solve", "--load", t / "missing.csv", "--machine", "1", "--out", t / "o"}).code == 1);
  CHECK(run({"solve", "--machine", "1", "--out", t / "o"}).code == 1);
  CHECK(run({"solve", "--load", t / "bad.csv", "--machine", "nope.cfg", "--out", t / "o"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
}

TEST_CASE("oracle-check") {
  TempDir t("oracle");
  REQUIRE(run({"synth", "--out", t / "s"}).code == 0);
  write(t / "m.cfg", kSmallFleet);
  SUBCASE("duck curve passes the gates") {
    const Run r = run({"oracle-check", "--load", t / "s/net.csv", "--machine", t / "m.cfg", "--out", t / "o"});
    CHECK(r.code == 0);
    const Json cmp = Json::parse(slurp(t / "o/comparison.json"));
    CHECK(cmp["objective_gap_rel"].get<double>() <= 0.005);
    CHECK(fs::exists(t.path / "o/oracle_solution.csv"));
    CHECK(fs::exists(t.path / "o/oracle_diagnostics.json"));
  }
  SUBCASE("constant load shows no gap") {
    write(t / "flat.csv", "timestamp,load_kw\n0,100\n3600,100\n7200,100\n10800,100\n14400,100\n18000,100\n");
    const Run r = run({"oracle-check", "--load", t / "flat.csv", "--machine", t / "m.cfg", "--out", t / "f"});
    CHECK(r.code == 0);
    CHECK(Json::parse(slurp(t / "f/comparison.json"))["objective_gap_rel"].get<double>() < 1e-9);
  }
  SUBCASE("node count option") {
    CHECK(run({"oracle-check", "--load", t / "s/net.csv", "--machine", t / "m.cfg", "--nodes", "48", "--out", t / "n"})
              .code == 0);
    CHECK(Json::parse(slurp(t / "n/comparison.json"))["nodes"] == 48);
  }
  SUBCASE("a weak penalty leaves a verification gap") {
    const Run r = run({"oracle-check", "--load", t / "s/net.csv", "--machine", t / "m.cfg", "--alpha-schedule", "1",
                       "--out", t / "g"});
    CHECK(r.code == 3);
  }
}

TEST_CASE("econ") {
  TempDir t("econ");
  SUBCASE("break-even price") {
    const Run r = run({"econ", "--breakeven", "--daily-profit", "5"});
    CHECK(r.code == 0);
    CHECK(r.out == "6497\n");
  }
  SUBCASE("machine amortization") {
    const Run r = run({"econ", "--machine", "1", "--out", t / "m"});
    CHECK(r.code == 0);
    const Json j = Json::parse(slurp(t / "m/report.json"));
    CHECK(std::abs(j["msrp_per_day"].get<double>() - 10.14) <= 0.01);
  }
  SUBCASE("projection needs trend data") {
    CHECK(run({"econ", "--machine", "1", "--project", "6"}).code == 1);
  }
  SUBCASE("full report with a flat projection") {
    REQUIRE(run({"synth", "--out", t / "s"}).code == 0);
    REQUIRE(run({"solve", "--load", t / "s/net.csv", "--machine", "1", "--out", t / "o"}).code == 0);
    write(t / "price.csv", "share_pct,value\n10,50\n20,50\n30,50\n");
    write(t / "ramp.csv", "share_pct,value\n10,0\n20,0\n30,0\n");
    const Run r = run({"econ", "--solution", t / "o/solution.csv", "--machine", "1", "--price-trend", t / "price.csv",
                       "--ramp-trend", t / "ramp.csv", "--share0", "20", "--share-per-year", "5", "--project", "6",
                       "--out", t / "e"});
    CHECK(r.code == 0);
    const Json j = Json::parse(slurp(t / "e/report.json"));
    CHECK(std::abs(j["msrp_per_day"].get<double>() - 10.14) <= 0.01);
    CHECK(j["gross_mining"].get<double>() > 0.0);
    CHECK(fs::exists(t.path / "e/report.txt"));
    std::istringstream proj(slurp(t / "e/projection.csv"));
    std::string header, line, first;
    std::getline(proj, header);
    std::getline(proj, first);
    int rows = 1;
    while (std::getline(proj, line)) {
      ++rows;
      CHECK(line.substr(line.find(',', line.find(',') + 1)) == first.substr(first.find(',', first.find(',') + 1)));
    }
    CHECK(rows == 6);
  }
}

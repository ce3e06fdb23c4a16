#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = std::string(MAXLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tent_path() {
  static std::string path = [] {
    std::string p = "cli_tent.json";
    std::ofstream out(p);
    out << R"({"breakpoints":["-1","0","1"],"values":["0","1","0"]})";
    return p;
  }();
  return path;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("maximal profile row count and determinism") {
  RunResult r = run("maximal --op M --grid -4:4:0.01 " + tent_path());
  CHECK(r.exit_code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 802);  // header + 801 samples
  CHECK(lines[0] == "x,value,radius,radius_kind,derivative,derivative_source");

  RunResult again = run("maximal --op M --grid -4:4:0.01 " + tent_path());
  CHECK(again.out == r.out);  // byte-identical rerun
}

TEST_CASE("long-range profile keeps radii above the partition distance") {
  RunResult r = run("maximal --op M2 --partition 0 --grid -2:2:0.25 " + tent_path());
  CHECK(r.exit_code == 0);
  auto lines = lines_of(r.out);
  REQUIRE(lines.size() > 2);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream is(lines[i]);
    std::string sx, sval, srad;
    std::getline(is, sx, ',');
    std::getline(is, sval, ',');
    std::getline(is, srad, ',');
    double x = std::strtod(sx.c_str(), nullptr);
    double rad = std::strtod(srad.c_str(), nullptr);
    CHECK(rad >= std::abs(x) - 1e-12);  // d(x, {0}) = |x|
  }
}

TEST_CASE("exit codes") {
  CHECK(run("maximal --op M --grid -1:1:0.5 no_such_file.json").exit_code == 3);
  CHECK(run("maximal --op M --grid 1:-1:0.5 " + tent_path()).exit_code == 2);
  CHECK(run("maximal --op bogus --grid -1:1:0.5 " + tent_path()).exit_code == 2);
  CHECK(run("verify --which bogus " + tent_path()).exit_code == 2);
  CHECK(run("continuity --j 4,2 " + tent_path()).exit_code == 2);
  CHECK(run("nonsense").exit_code == 2);

  {
    std::ofstream bad("cli_bad.json");
    bad << R"({"breakpoints":["0","1"],"values":["0","1"]})";  // nonzero end value
  }
  CHECK(run("maximal --op M --grid 0:1:0.5 cli_bad.json").exit_code == 2);
}

TEST_CASE("verify subcommands succeed on the tent") {
  CHECK(run("verify --which decomposition --step 0.13 " + tent_path()).exit_code == 0);
  CHECK(run("verify --which tails " + tent_path()).exit_code == 0);
  RunResult r = run("verify --which oracle --step 0.31 " + tent_path());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("\"ok\": true") != std::string::npos);
  CHECK(r.out.find("\"config\"") != std::string::npos);  // resolved config embedded
}

TEST_CASE("derivative, approx, perturb round trip") {
  RunResult d = run("derivative " + tent_path());
  CHECK(d.exit_code == 0);
  CHECK(d.out.find("\"plateaus\"") != std::string::npos);
  CHECK(d.out.find("\"1\"") != std::string::npos);
  CHECK(d.out.find("\"-1\"") != std::string::npos);

  RunResult a = run("approx --epsilon 3 --coarsen " + tent_path());
  CHECK(a.exit_code == 0);
  CHECK(a.out.find("\"error\": \"2\"") != std::string::npos);

  RunResult p = run("perturb --kind bump --j 2 -o cli_fj.json " + tent_path());
  CHECK(p.exit_code == 0);
  CHECK(p.out.find("\"sobolev_gap\": \"5/4\"") != std::string::npos);
  RunResult prof = run("maximal --op M --grid -1:1:0.5 cli_fj.json");
  CHECK(prof.exit_code == 0);
}

TEST_CASE("continuity run emits reports and gates on the decrease") {
  RunResult r = run("continuity --kind bump --j 1,2,4 --step 0.05 -o cli_cont --svg " +
                    tent_path());
  // j only reaches 4, so the factor-ten decrease fails: exit 1, reports still written
  CHECK(r.exit_code == 1);
  std::ifstream json("cli_cont.json"), csv("cli_cont.csv"), svg("cli_cont.svg");
  CHECK(json.good());
  CHECK(csv.good());
  CHECK(svg.good());
  std::ostringstream js;
  js << json.rdbuf();
  CHECK(js.str().find("\"decrease_ok\": false") != std::string::npos);
  CHECK(js.str().find("\"sup_bound_ok\": true") != std::string::npos);

  RunResult full = run("continuity --kind bump --j 1,4,16,64 --step 0.05 -o cli_cont2 " +
                       tent_path());
  CHECK(full.exit_code == 0);
}

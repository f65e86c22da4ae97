#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dapq/cli.hpp"
#include "dapq/errors.hpp"
#include <json.hpp>

using namespace dapq;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

int shell(const std::string& cmdline) {
  const int status = std::system(cmdline.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("dapq_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("sweep parsing") {
  CHECK(parse_sweep("0.5") == std::vector<double>{0.5});
  CHECK(parse_sweep("0:2") == std::vector<double>{0.0, 1.0, 2.0});
  CHECK(parse_sweep("0:1:0.25").size() == 5);
  CHECK_THROWS_AS(parse_sweep("a:b"), Error);
  CHECK_THROWS_AS(parse_sweep("1:0:0.5"), Error);
  CHECK_THROWS_AS(parse_sweep("0:1:0"), Error);
}

TEST_CASE("mean rows") {
  const Run r = call({"mean", "--lam1", "0.5", "--lam2", "0.3", "--b", "0:1:0.5", "--d", "0"});
  REQUIRE(r.code == kExitOk);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "lambda1,lambda2,mu,service,b,d,mean_w1,mean_w2,conservation_residual");
  std::getline(is, line);
  CHECK(line.rfind("0.5,0.3,1,exp,0,0,1.6,8,", 0) == 0);
  std::getline(is, line);
  std::getline(is, line);
  CHECK(line.rfind("0.5,0.3,1,exp,1,0,4,4,", 0) == 0);
}

TEST_CASE("input errors exit 2") {
  CHECK(call({"mean", "--lam1", "0.6", "--lam2", "0.5"}).code == kExitInvalidInput);
  CHECK(call({"mean", "--lam1", "0.5", "--lam2", "0.3", "--service", "erlang"}).code == kExitInvalidInput);
  CHECK(call({"mean", "--lam1", "0.5", "--lam2", "0.3", "--service", "det", "--d", "1.5"}).code ==
        kExitInvalidInput);
  CHECK(call({"mean", "--lam1", "0.5"}).code == kExitInvalidInput);
  CHECK(call({"nonsense"}).code == kExitInvalidInput);
  CHECK(call({"cdf", "--lam1", "0.5", "--lam2", "0.3", "--service", "det", "--kind", "dapq2"}).code ==
        kExitInvalidInput);
  CHECK(call({"cdf", "--lam1", "0.5", "--lam2", "0.3", "--kind", "bogus"}).code == kExitInvalidInput);
}

TEST_CASE("help mentions the environment overrides") {
  const Run r = call({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("DAPQ_EPS_INVERT") != std::string::npos);
}

TEST_CASE("kpi with no feasible point exits 3") {
  const Run r = call({"kpi", "--class", "2", "--w", "4", "--p", "0.85", "--lam1", "0.5", "--lam2", "0.45", "--d", "1"});
  CHECK(r.code == kExitInfeasible);
  CHECK(r.out.find(",0,") != std::string::npos);
  const Run ok = call({"kpi", "--class", "2", "--w", "4", "--p", "0.85", "--lam1", "0.3", "--lam2", "0.30",
                       "--sweep-d", "0:2"});
  CHECK(ok.code == kExitOk);
  CHECK(ok.err.find("E[W1]") != std::string::npos);
}

TEST_CASE("region rows") {
  const Run r = call({"kpi", "--class", "1", "--w", "2", "--p", "0.9", "--region", "--resolution", "0.1"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.rfind("boundary,lambda1,lambda2\nlower,", 0) == 0);
  CHECK(r.out.find("upper,") != std::string::npos);
}

TEST_CASE("binary exit codes") {
  const std::string exe = DAPQ_CLI_PATH;
  const std::string quiet = " >/dev/null 2>&1";
  CHECK(shell(exe + " mean --lam1 0.5 --lam2 0.3" + quiet) == 0);
  CHECK(shell(exe + " mean --lam1 0.9 --lam2 0.3" + quiet) == 2);
  CHECK(shell("DAPQ_MAX_STATES=5 " + exe + " mean --lam1 0.5 --lam2 0.3 --b 0.5 --d 2" + quiet) == 4);
  CHECK(shell("DAPQ_EPS_ROOT=junk " + exe + " mean --lam1 0.5 --lam2 0.3" + quiet) == 2);
}

TEST_CASE("manifests replay to identical output") {
  const fs::path dir = scratch();
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  REQUIRE(call({"simulate", "--lam1", "0.5", "--lam2", "0.3", "--b", "0.5", "--d", "2", "--n", "500", "--burn-in",
                "100", "--reps", "3", "--seed", "77", "--out", a})
              .code == kExitOk);
  const nlohmann::json m = nlohmann::json::parse(slurp(a + ".manifest.json"));
  CHECK(m["subcommand"] == "simulate");
  CHECK(m["parameters"]["simulation"]["seed"] == 77);
  CHECK(m.contains("duration_seconds"));
  CHECK(m["results"]["class1"]["count"].get<int>() + m["results"]["class2"]["count"].get<int>() == 1500);
  REQUIRE(call({"replay", "--manifest", a + ".manifest.json", "--out", b}).code == kExitOk);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("t,F1,F2\n", 0) == 0);

  const std::string c = (dir / "c.csv").string();
  const std::string man = (dir / "explicit.json").string();
  REQUIRE(call({"cdf", "--lam1", "0.5", "--lam2", "0.3", "--b", "0.5", "--d", "2", "--kind", "dapq2", "--kind",
                "fcfs", "--t-max", "5", "--out", c, "--manifest", man})
              .code == kExitOk);
  CHECK(fs::exists(man));
  REQUIRE(call({"replay", "--manifest", man, "--out", b}).code == kExitOk);
  CHECK(slurp(c) == slurp(b));
  // kinds come out in a fixed order whatever the flag order
  CHECK(slurp(c).find("fcfs") < slurp(c).find("dapq2"));
  fs::remove_all(dir);
}

TEST_CASE("raw dump") {
  const fs::path dir = scratch();
  const std::string raw = (dir / "raw.csv").string();
  REQUIRE(call({"simulate", "--lam1", "0.5", "--lam2", "0.3", "--n", "10", "--burn-in", "0", "--reps", "2", "--raw",
                raw})
              .code == kExitOk);
  std::istringstream is(slurp(raw));
  std::string line;
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 21);
  fs::remove_all(dir);
}

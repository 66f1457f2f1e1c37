#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wise/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace wise;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

// Runs the installed tool binary; stdout is captured, stderr discarded.
Outcome tool(const std::string& args, const std::string& env = {}) {
  const char* bin = std::getenv("WISETOOL");
  REQUIRE(bin != nullptr);
  const std::string cmd = env + " '" + bin + "' " + args + " 2>/dev/null";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) o.out.append(buf, n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

RunConfig config(const std::string& sub) {
  RunConfig c;
  c.subcommand = sub;
  return c;
}

}  // namespace

TEST_CASE("plot data round-trips, including quoted cells") {
  Table t{{"r", "R", "note"}, {{"1", "2", "plain"}, {"3", "4", "a,b \"q\""}, {"5", "", ""}}};
  const std::string csv = emit_plot_data(t);
  CHECK(csv.rfind("r,R,note\n", 0) == 0);
  CHECK(parse_plot_data(csv) == t);
  CHECK_THROWS_AS(emit_plot_data(Table{{"r"}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(emit_plot_data(Table{}), std::invalid_argument);
  CHECK_THROWS_AS(emit_plot_data(Table{{"a", "b"}, {{"1"}}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_plot_data(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_plot_data("a,b\n1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_plot_data("a\n\"open\n"), std::invalid_argument);
  CHECK(formatNumber(0.5) == "0.5");
  CHECK(formatNumber(std::nan("")) == "");
}

TEST_CASE("validation fills defaults and rejects bad parameters") {
  RunConfig c = config("build-ball");
  validate(c);
  CHECK(c.radius == 2);
  CHECK(c.format == "json");
  RunConfig r = config("rd-scan");
  validate(r);
  CHECK(r.format == "csv");

  for (auto mutate : std::vector<void (*)(RunConfig&)>{
           [](RunConfig& x) { x.subcommand = "nope"; },
           [](RunConfig& x) { x.format = "xml"; },
           [](RunConfig& x) { x.rmax = 0; },
           [](RunConfig& x) { x.method = "lanczos"; },
           [](RunConfig& x) { x.from = "abq"; },
           [](RunConfig& x) { x.sample = 0; },
           [](RunConfig& x) { x.areaConstant = -1; },
       }) {
    RunConfig x = config("rd-scan");
    mutate(x);
    CHECK_THROWS_AS(validate(x), ConfigError);
  }
  RunConfig csvLink = config("link-audit");
  csvLink.format = "csv";
  CHECK_THROWS_AS(validate(csvLink), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  RunConfig a = config("report"), b = config("report");
  validate(a);
  validate(b);
  CHECK(configHash(a) == configHash(b));
  CHECK(configHash(a).size() == 16);
  b.seed = 2;
  CHECK(configHash(a) != configHash(b));
}

TEST_CASE("run maps failures to exit codes") {
  std::ostringstream out, err;
  RunConfig bad = config("envelope");
  bad.from = "x";
  CHECK(run(bad, out, err) == 2);

  RunConfig ok = config("build-ball");
  ok.radius = 1;
  CHECK(run(ok, out, err) == 0);
  const Json j = Json::parse(out.str());
  CHECK(j["schema"] == "wise.patch/1");
  CHECK(j["vertices"].size() == 11);
  CHECK(j["all_pass"] == true);
}

TEST_CASE("tool: exit codes") {
  CHECK(tool("--help").code == 0);
  CHECK(tool("").code == 2);
  CHECK(tool("no-such-command").code == 2);
  CHECK(tool("rd-scan --rmax 0").code == 2);
  CHECK(tool("envelope --from e").code == 2);
  CHECK(tool("build-ball --radius 3", "WISE_MAX_ELEMENTS=100").code == 3);
  CHECK(tool("rd-scan --rmax 6", "WISE_MAX_MEMORY_MB=1").code == 3);
  CHECK(tool("link-audit").code == 0);
}

TEST_CASE("tool: build-ball radius 0 is a single vertex") {
  const Outcome o = tool("build-ball --radius 0");
  REQUIRE(o.code == 0);
  const Json j = Json::parse(o.out);
  CHECK(j["vertices"].size() == 1);
  CHECK(j["edges"].empty());
  CHECK(j["faces"].empty());
  CHECK(j["vertices"][0]["word"] == "e");
}

TEST_CASE("tool: build-ball writes the patch to --emit") {
  const std::string path = "test_report_patch.json";
  REQUIRE(tool("build-ball --radius 2 --emit " + path).code == 0);
  std::ifstream f(path);
  const Json j = Json::parse(f);
  CHECK(j["ball_size"] == 83);
  CHECK(j["vertices"].size() == 83);
  // Every vertex has its positive letters inside the patch except at the boundary.
  CHECK(j["edges"].size() >= 83 - 1);
  std::remove(path.c_str());
}

TEST_CASE("tool: rd-scan emits one CSV row per r") {
  const Outcome o = tool("rd-scan --rmax 5");
  REQUIRE(o.code == 0);
  const Table t = parse_plot_data(o.out);
  CHECK(t.columns == std::vector<std::string>{"r", "R", "lower_bound", "power_bound", "fit_slope"});
  REQUIRE(t.rows.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(t.rows[k][0] == std::to_string(k + 1));
    CHECK(t.rows[k][1] == "3");
    CHECK(std::stod(t.rows[k][2]) <= std::stod(t.rows[k][3]));
  }
}

TEST_CASE("tool: the report is byte-identical across runs") {
  const Outcome a = tool("report --radius 3 --sample 20"), b = tool("report --radius 3 --sample 20");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("config_hash") != std::string::npos);
}

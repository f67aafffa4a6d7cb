#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "bowen/cli.hpp"
#include "bowen/parallel.hpp"
#include "doctest.h"

using namespace bowen;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "bowen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  set_thread_count(0);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("bowen_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string shipped(const char* name) { return std::string(BOWEN_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_CASE("usage and config errors exit with 2") {
  CHECK(run({"pressure"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate", "--config", "x"}).code == 2);
  CHECK(run({"pressure", "--config", (scratch() / "missing.json").string()}).code == 2);
  CHECK(run({"pressure", "--config", write_config("broken.json", "{\"generators\": [")}).code == 2);
  CHECK(run({"pressure", "--config", write_config("unknown.json", R"({"generators": [{"num": [0,0,1]}], "x": 1})")})
            .code == 2);
  CHECK(run({"pressure", "--config", shipped("z2.json"), "--threads", "-1"}).code == 2);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("sweep") != std::string::npos);
}

TEST_CASE("library failures map to exit codes") {
  const std::string translation = write_config("translation.json", R"({"generators": [{"num": [1, 1]}]})");
  CHECK(run({"bowen", "--config", translation}).code == 3);
  CHECK(run({"julia", "--config", translation, "--out", (scratch() / "t.ppm").string()}).code == 3);

  const std::string low =
      write_config("low.json", R"({"generators": [{"num": [0,0,1]}], "thermo": {"depth": 8, "t_max": 0.5}})");
  CHECK(run({"bowen", "--config", low}).code == 4);

  const std::string cheb =
      write_config("cheb.json", R"({"generators": [{"num": [-2,0,1]}], "basepoint": -2, "t_values": [1]})");
  const Run crit = run({"pressure", "--config", cheb});
  CHECK(crit.code == 5);
  CHECK(crit.err.find("critical") != std::string::npos);

  const fs::path osc_csv = scratch() / "osc.csv";
  const Run osc = run({"osc", "--config", shipped("z2_z2.json"), "--out", osc_csv.string()});
  CHECK(osc.code == 6);
  CHECK(osc.out.find("witness") != std::string::npos);
  CHECK(slurp(osc_csv).rfind("verdict,variant,grid_n,witness_re,witness_im\nfail,", 0) == 0);
  CHECK(run({"osc", "--config", shipped("z3_z3_over8_osc.json")}).code == 0);

  const std::string not_hyp = write_config(
      "nothyp.json", R"({"generators": [{"num": [0,0,1]}, {"num": [-2,0,1]}], "thermo": {"depth": 8}})");
  const Run nh = run({"bowen", "--config", not_hyp});
  CHECK(nh.code == 1);
  CHECK(nh.err.find("thermo.force") != std::string::npos);
}

TEST_CASE("failed runs leave no output file behind") {
  const fs::path target = scratch() / "should_not_exist.csv";
  const std::string cheb =
      write_config("cheb2.json", R"({"generators": [{"num": [-2,0,1]}], "basepoint": -2, "t_values": [1]})");
  CHECK(run({"pressure", "--config", cheb, "--out", target.string()}).code == 5);
  CHECK_FALSE(fs::exists(target));
  CHECK_FALSE(fs::exists(target.string() + ".tmp"));
}

TEST_CASE("pressure CSV format") {
  const Run r = run({"pressure", "--config", shipped("z2_z2.json"), "--depth", "8"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,value,residual,depth\n", 0) == 0);
  CHECK(r.out.find('\r') == std::string::npos);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) cols.push_back(f);
    REQUIRE(cols.size() == 4);
    CHECK(std::stoi(cols[3]) <= 8);  // early stop may end sooner
    if (cols[0] == "0") {
      CHECK(cols[1].size() >= 17);
      CHECK(std::stod(cols[1]) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    }
    if (cols[0] == "2") CHECK(std::abs(std::stod(cols[1])) < 1e-9);
  }
  CHECK(rows == 5);
  CHECK(r.out.back() == '\n');
}

TEST_CASE("other CSV commands") {
  const Run p = run({"poincare", "--config", shipped("z2.json"), "--depth", "6"});
  REQUIRE(p.code == 0);
  CHECK(p.out.rfind("t,value,residual,depth\n", 0) == 0);
  CHECK(p.out.find("\n0,125.99999999999997,") != std::string::npos);  // 2 + 4 + ... + 64
  CHECK(p.out.find("\n1,6,") != std::string::npos);

  const Run l = run({"lyap", "--config", shipped("z2_z2.json"), "--depth", "8"});
  REQUIRE(l.code == 0);
  CHECK(l.out.rfind("t,value,residual,depth,entropy\n", 0) == 0);

  const fs::path csv = scratch() / "bowen.csv";
  const Run b = run({"bowen", "--config", shipped("z2_z2.json"), "--depth", "8", "--out", csv.string()});
  REQUIRE(b.code == 0);
  CHECK(b.out.find("delta") != std::string::npos);
  CHECK(slurp(csv).rfind("delta,delta_error,t_lo,t_hi,residual,depth,hyperbolic\n", 0) == 0);
  CHECK_FALSE(fs::exists(csv.string() + ".tmp"));
}

TEST_CASE("julia writes a P6 image") {
  const fs::path ppm = scratch() / "z2.ppm";
  const Run r = run({"julia", "--config", shipped("z2.json"), "--depth", "8", "--out", ppm.string()});
  REQUIRE(r.code == 0);
  const std::string img = slurp(ppm);
  REQUIRE(img.rfind("P6\n256 256\n255\n", 0) == 0);
  CHECK(img.size() == std::string("P6\n256 256\n255\n").size() + 256 * 256 * 3);
  CHECK(img.find(std::string(3, '\0')) != std::string::npos);  // some black pixels
  CHECK(r.out.find("points       511") != std::string::npos);
}

TEST_CASE("outputs are identical across thread counts") {
  auto bytes = [](std::vector<std::string> args, const std::string& threads, const fs::path& out) {
    args.insert(args.end(), {"--threads", threads, "--out", out.string()});
    REQUIRE(run(args).code == 0);
    return slurp(out);
  };
  const fs::path a = scratch() / "a.out", b = scratch() / "b.out";
  const std::vector<std::string> julia = {"julia", "--config", shipped("sierpinski.json"), "--depth", "9"};
  CHECK(bytes(julia, "1", a) == bytes(julia, "4", b));
  const std::vector<std::string> pres = {"pressure", "--config", shipped("z2_z3.json"), "--depth", "10"};
  CHECK(bytes(pres, "1", a) == bytes(pres, "4", b));
  const std::string small = write_config("small_sweep.json", R"({
    "family": {"generators": [{"num": [[0], [0], [1]]}, {"num": [[0], [0], [0, 1]]}],
               "domain": {"type": "annulus", "center": 0, "r1": 0, "r2": 0.95}, "excluded": [0]},
    "grid": {"re_min": -0.5, "re_max": 0.5, "re_steps": 3, "im_min": -0.5, "im_max": 0.5, "im_steps": 3},
    "thermo": {"depth": 7}})");
  const std::string s1 = bytes({"sweep", "--config", small}, "1", a);
  CHECK(s1 == bytes({"sweep", "--config", small}, "4", b));
  CHECK(s1.rfind("re_lambda,im_lambda,delta,pressure_residual,depth,status\n", 0) == 0);
  CHECK(s1.find("0,0,,,,invalid-instance\n") != std::string::npos);
}

TEST_CASE("supercritical systems get the open set condition note") {
  const Run r = run({"bowen", "--config", shipped("supercritical.json"), "--depth", "8"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("note: delta > 2") != std::string::npos);
  const Run sub = run({"bowen", "--config", shipped("z3_z3.json"), "--depth", "8"});
  REQUIRE(sub.code == 0);
  CHECK(sub.out.find("note:") == std::string::npos);
}

TEST_CASE("seed and verbose flags") {
  const Run v = run({"pressure", "--config", shipped("z2.json"), "--depth", "4", "--verbose", "--seed", "9"});
  REQUIRE(v.code == 0);
  CHECK(v.err.find("\"rng_seed\": 9") != std::string::npos);
  const Run q = run({"pressure", "--config", shipped("z2.json"), "--depth", "4"});
  CHECK(q.err.empty());
  CHECK(q.out == v.out);
}

TEST_CASE("box dimension command") {
  const fs::path csv = scratch() / "box.csv";
  const Run r = run({"boxdim", "--config", shipped("sierpinski.json"), "--depth", "10", "--out", csv.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("slope") != std::string::npos);
  CHECK(slurp(csv).rfind("scale,count\n", 0) == 0);
}

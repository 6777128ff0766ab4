#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "samdde/bench.hpp"

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "samdde");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = samdde::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::filesystem::path tmp_dir() {
  const char* d = std::getenv("SAMDDE_TMP");
  return d != nullptr ? std::filesystem::path(d) : std::filesystem::temp_directory_path();
}

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.find(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

}  // namespace

using samdde::cli::kOk;
using samdde::cli::kValidation;
using samdde::cli::kVerification;

TEST_CASE("run writes one row per step point") {
  const Result r = run({"run", "--problem", "toggle", "--N", "8", "--omega", "200", "--tmax", "2"});
  REQUIRE(r.code == kOk);
  CHECK(lines(r.out) == 34);
  CHECK(r.out.rfind("t,X_1,X_2\n", 0) == 0);
  CHECK(r.err.find("evals") != std::string::npos);
  CHECK(r.out.find("\n2,") != std::string::npos);
}

TEST_CASE("run rejects infeasible grids and bad input") {
  const Result r = run({"run", "--problem", "toggle", "--N", "2", "--omega", "25"});
  CHECK(r.code == kValidation);
  CHECK(r.err.find("InfeasibleGrid") != std::string::npos);

  CHECK(run({"run", "--problem", "toggle", "--N", "1", "--omega", "abc"}).code == kValidation);
  CHECK(run({"run", "--problem", "toggle", "--N", "1"}).code == kValidation);
  CHECK(run({"run", "--problem", "nope", "--N", "1", "--omega", "25"}).code == kValidation);
  CHECK(run({"run", "--problem", "toggle", "--set", "foo=1", "--N", "1", "--omega", "25"}).code == kValidation);
  CHECK(run({"run", "--problem", "toggle", "--set", "alpha", "--N", "1", "--omega", "25"}).code == kValidation);
  CHECK(run({"run", "--N", "1", "--omega", "25", "--format", "json"}).code == kValidation);
  CHECK(run({"frobnicate"}).code == kValidation);
  CHECK(run({}).code == kValidation);
}

TEST_CASE("run on the scalar test equation with an exact frequency") {
  const Result r = run({"run", "--problem", "newpro", "--N", "1", "--omega", "8pi"});
  REQUIRE(r.code == kOk);
  CHECK(r.out.rfind("t,X_1\n", 0) == 0);
  CHECK(lines(r.out) == 6);
  CHECK(run({"run", "--problem", "newpro", "--N", "4", "--omega", "25.1327"}).code == kValidation);
}

TEST_CASE("run options and overrides") {
  const Result a = run({"run", "--problem", "toggle", "--N", "1", "--omega", "64pi", "--forward-only"});
  REQUIRE(a.code == kOk);
  CHECK(a.err.find("evals 10,") != std::string::npos);  // 2 * (4 + 1)
  const Result b = run({"run", "--problem", "toggle", "--N", "1", "--omega", "64pi", "--nu-max", "8"});
  REQUIRE(b.code == kOk);
  CHECK(b.err.find("evals 72,") != std::string::npos);  // 8 + 2 * 8 * 4
  const Result c = run({"run", "--problem", "toggle", "--set", "B=0", "--set", "A=0", "--N", "1", "--omega", "64pi",
                        "--tmax", "0.5"});
  REQUIRE(c.code == kOk);
  CHECK(lines(c.out) == 3);
}

TEST_CASE("run output is deterministic and can go to a file") {
  const std::vector<std::string> args{"run", "--problem", "toggle", "--N", "4", "--omega", "400", "--seed", "7"};
  const Result a = run(args), b = run(args);
  CHECK(a.out == b.out);

  const auto path = tmp_dir() / "cli_run_out.csv";
  std::filesystem::remove(path);
  auto with_out = args;
  with_out.insert(with_out.end(), {"--out", path.string()});
  const Result c = run(with_out);
  REQUIRE(c.code == kOk);
  CHECK(c.out.empty());
  std::ifstream in(path);
  const std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(file == a.out);

  CHECK(run({"run", "--N", "1", "--omega", "25", "--out", "/nonexistent-dir/x.csv"}).code != kOk);
}

TEST_CASE("table shows the exclusion triangle") {
  const Result r = run({"table", "--problem", "toggle", "--reference", "averaged", "--N", "1,2,4,8", "--omega",
                        "25,50,100,200"});
  REQUIRE(r.code == kOk);
  std::istringstream is(r.out);
  const auto cells = samdde::parse_csv(is);
  REQUIRE(cells.size() == 16);
  for (std::size_t k = 0; k < 16; ++k) CHECK(cells[k].excluded == (k % 4 < k / 4));
  CHECK(r.out == run({"table", "--problem", "toggle", "--reference", "averaged", "--N", "1,2,4,8", "--omega",
                      "25,50,100,200"})
                     .out);
}

TEST_CASE("table guards and built-in lists") {
  CHECK(run({"table", "--reference", "oscillatory", "--omega", "25"}).code == kValidation);
  CHECK(run({"table", "--reference", "sideways", "--omega", "25"}).code == kValidation);
  CHECK(run({"table", "--N", "4,2", "--omega", "400"}).code == kValidation);
  CHECK(run({"table", "--N", "1", "--omega", "400", "--component", "3"}).code == kValidation);

  const Result h2 = run({"table", "--problem", "newpro", "--N", "1,2,4", "--omega-list", "h2"});
  REQUIRE(h2.code == kOk);
  CHECK(lines(h2.out) == 1 + 3 * 7);

  const Result strobe = run({"table", "--reference", "oscillatory", "--N", "1,2", "--omega", "8pi,16pi"});
  CHECK(strobe.code == kOk);

  const auto gp = tmp_dir() / "cli_table.gp";
  std::filesystem::remove(gp);
  CHECK(run({"table", "--N", "1,2", "--omega", "50,100", "--gnuplot", gp.string()}).code == kOk);
  CHECK(std::filesystem::exists(gp));

  const Result timed = run({"table", "--N", "1", "--omega", "50", "--wall-time"});
  REQUIRE(timed.code == kOk);
  CHECK(timed.out.find(",0.000\n") == std::string::npos);
}

TEST_CASE("ratios prints diagonal and column ratios") {
  const Result r = run({"ratios", "--N", "2,4,8,16", "--omega", "50,100,200,400"});
  REQUIRE(r.code == kOk);
  CHECK(r.out.rfind("diagonal ", 0) == 0);
  CHECK(r.out.find("column Omega=400") != std::string::npos);
  CHECK(run({"ratios", "--N", "1,2", "--omega", "25,50"}).code == kValidation);
}

TEST_CASE("avg-check verdicts") {
  const Result t = run({"avg-check", "--problem", "toggle", "--omega", "60"});
  REQUIRE(t.code == kOk);
  CHECK(t.out.find("H1=true") != std::string::npos);
  CHECK(value_after(t.out, "phase1 ") <= 1e-10);
  CHECK(value_after(t.out, "phase2 ") <= 1e-10);
  CHECK(t.out.find("jacobians analytic") != std::string::npos);

  const Result n = run({"avg-check", "--problem", "newpro", "--omega", "8pi"});
  REQUIRE(n.code == kOk);
  CHECK(n.out.find("H1=false") != std::string::npos);
  CHECK(n.out.find("H2=true") != std::string::npos);

  const Result m = run({"avg-check", "--problem", "newpro", "--omega", "8pi+pi/64"});
  REQUIRE(m.code == kOk);
  CHECK(m.out.find("H2=false") != std::string::npos);
  const Result dec = run({"avg-check", "--problem", "newpro", "--omega", "25.1818"});
  CHECK(dec.out.find("H2=false") != std::string::npos);

  CHECK(run({"avg-check", "--problem", "toggle-gene"}).code == kValidation);
  CHECK(run({"avg-check", "--problem", "toggle", "--samples", "0"}).code == kValidation);
  CHECK(run({"avg-check", "--problem", "toggle", "--seed", "3"}).out ==
        run({"avg-check", "--problem", "toggle", "--seed", "3"}).out);
  static_assert(kVerification == 4);
}

TEST_CASE("reference and timing subcommands") {
  const Result r = run({"reference", "--problem", "toggle", "--omega", "200", "--points", "5"});
  REQUIRE(r.code == kOk);
  CHECK(lines(r.out) == 6);
  CHECK(r.out.rfind("t,x_1,x_2\n", 0) == 0);
  CHECK(run({"reference", "--omega", "25", "--kind", "oscillatory", "--points", "3"}).code == kOk);
  CHECK(run({"reference", "--omega", "25", "--kind", "bogus"}).code == kValidation);

  const Result t = run({"timing", "--omega", "64pi", "--N", "1", "--nu-max", "2", "--repeats", "1"});
  REQUIRE(t.code == kOk);
  CHECK(t.out.find("speedup") != std::string::npos);
}

TEST_CASE("help exits cleanly") {
  const Result h = run({"--help"});
  CHECK(h.code == kOk);
  CHECK(h.out.find("avg-check") != std::string::npos);
}

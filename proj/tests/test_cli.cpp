#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "densreg/inference.hpp"
#include "densreg/io.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path data = DENSREG_TEST_DATA;

struct Run {
  int code = 0;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() / ("densreg_test_cli_" + std::to_string(++counter));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run run(const std::string& args) {
  const fs::path dir = scratch();
  const std::string cmd = std::string("\"") + DENSREG_CLI + "\" " + args + " > \"" + (dir / "out").string() +
                          "\" 2> \"" + (dir / "err").string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(dir / "out");
  r.err = slurp(dir / "err");
  return r;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path golden_fit() {
  static fs::path dir;
  if (dir.empty()) {
    dir = scratch();
    const Run r = run("fit --data " + quoted(data / "tiny.csv") + " --model " + quoted(data / "tiny_model.json") +
                      " --out " + quoted(dir) + " --bins 10 --xi 1");
    REQUIRE(r.code == 0);
  }
  return dir;
}

fs::path rows_file() {
  const fs::path p = scratch() / "rows.csv";
  std::ofstream(p) << "g,x\na,0.3\nb,0.7\n";
  return p;
}

std::vector<std::vector<std::string>> table(const fs::path& p) { return densreg::read_csv(p).rows; }

}  // namespace

TEST_CASE("fit reproduces the golden files byte for byte") {
  const fs::path dir = golden_fit();
  for (const char* f : {"coefficients.csv", "smoothing.csv", "trace.csv", "design.csv"}) {
    INFO(f);
    CHECK(slurp(dir / f) == slurp(data / "golden" / f));
  }
  const std::string first = slurp(dir / "coefficients.csv").substr(0, 10);
  CHECK(first == "# densreg ");
}

TEST_CASE("fit with a smoothing grid writes the candidates") {
  const fs::path dir = scratch();
  const Run r = run("fit --data " + quoted(data / "tiny.csv") + " --model " + quoted(data / "tiny_model.json") +
                    " --out " + quoted(dir) + " --bins 10 --xi-grid 0.1,1,10");
  CHECK(r.code == 0);
  CHECK(table(dir / "selection.csv").size() == 3);
  CHECK(r.out.find("converged") != std::string::npos);
}

TEST_CASE("input errors exit nonzero with a located message") {
  const fs::path dir = scratch();
  std::ofstream(dir / "empty.csv").close();
  Run r = run("fit --data " + quoted(dir / "empty.csv") + " --model " + quoted(data / "tiny_model.json") + " --out " +
              quoted(dir / "o"));
  CHECK(r.code != 0);
  CHECK(r.err.find("ParseError") != std::string::npos);

  std::ofstream(dir / "bad.csv") << "g,x,y\na,0.1,0.5\nb,zz,0.2\n";
  r = run("fit --data " + quoted(dir / "bad.csv") + " --model " + quoted(data / "tiny_model.json") + " --out " +
          quoted(dir / "o"));
  CHECK(r.code != 0);
  CHECK(r.err.find("line 3, column 2") != std::string::npos);

  std::ofstream(dir / "nox.csv") << "g,y\na,0.5\nb,0.2\n";
  r = run("fit --data " + quoted(dir / "nox.csv") + " --model " + quoted(data / "tiny_model.json") + " --out " +
          quoted(dir / "o"));
  CHECK(r.code != 0);
  CHECK(r.err.find("ConfigError") != std::string::npos);
  CHECK(r.err.find("'x'") != std::string::npos);

  r = run("predict --fit " + quoted(dir / "none.json") + " --data " + quoted(data / "tiny.csv") + " --out " +
          quoted(dir / "p.csv"));
  CHECK(r.code != 0);
  CHECK(r.err.find("run fit first") != std::string::npos);

  r = run("frobnicate");
  CHECK(r.code != 0);
}

TEST_CASE("model config must match the fit") {
  const fs::path dir = scratch();
  std::string cfg = slurp(data / "tiny_model.json");
  cfg.replace(cfg.find("\"functions\": 5, \"degree\""), 14, "\"functions\": 6");
  std::ofstream(dir / "other.json") << cfg;
  const Run r = run("predict --fit " + quoted(golden_fit() / "fit.json") + " --data " + quoted(rows_file()) +
                    " --model " + quoted(dir / "other.json") + " --out " + quoted(dir / "p.csv"));
  CHECK(r.code != 0);
  CHECK(r.err.find("differs") != std::string::npos);
}

TEST_CASE("predict, effects and reference coding") {
  const fs::path dir = scratch();
  Run r = run("predict --fit " + quoted(golden_fit() / "fit.json") + " --data " + quoted(rows_file()) + " --model " +
              quoted(data / "tiny_model.json") + " --out " + quoted(dir / "p.csv"));
  REQUIRE(r.code == 0);
  const auto pred = table(dir / "p.csv");
  CHECK(pred.size() == 2 * (201 + 2));
  r = run("effects --fit " + quoted(golden_fit() / "fit.json") + " --data " + quoted(rows_file()) +
          " --reference x=0.3 --out " + quoted(dir / "e.csv"));
  REQUIRE(r.code == 0);
  for (const auto& row : table(dir / "e.csv"))
    if (row[0] == "0" && row[1] == "s(x)") CHECK(std::abs(std::stod(row[4])) <= 1e-12);
  r = run("effects --fit " + quoted(golden_fit() / "fit.json") + " --data " + quoted(rows_file()) +
          " --reference g=1 --out " + quoted(dir / "e2.csv"));
  CHECK(r.code != 0);
}

TEST_CASE("region radius is the chi-square quantile") {
  const fs::path dir = scratch();
  const Run r = run("region --fit " + quoted(golden_fit() / "fit.json") + " --data " + quoted(rows_file()) +
                    " --alpha 0.95 --samples 2 --seed 3 --out " + quoted(dir));
  REQUIRE(r.code == 0);
  const auto regions = table(dir / "regions.csv");
  const double ky = std::stod(regions[0][2]);
  CHECK(ky == 7);
  CHECK(std::stod(regions[0][4]) == doctest::Approx(densreg::chi2_quantile(0.95, ky)).epsilon(1e-12));
  for (const auto& row : regions)
    if (row[1] == "g" && row[0] == "0") CHECK(row[4] == "NA");
  CHECK(table(dir / "simultaneous.csv").size() == 3);
  // five nonzero effects (g vanishes at its reference level), two draws each
  CHECK(table(dir / "samples.csv").size() == 5 * 2 * 203);
}

TEST_CASE("odds ratios at s = t are one") {
  const fs::path dir = scratch();
  const Run r = run("interpret --fit " + quoted(golden_fit() / "fit.json") + " --data " + quoted(rows_file()) +
                    " --points 0,0.5,1 --threshold 0.1 --out " + quoted(dir));
  REQUIRE(r.code == 0);
  const auto odds = table(dir / "odds.csv");
  CHECK(odds.size() == 2 * 3 * 9);
  std::size_t same = 0;
  for (const auto& row : odds)
    if (row[2] == row[3]) {
      ++same;
      CHECK(row[5] == "1");
    }
  CHECK(same == 2 * 3 * 3);
  CHECK_FALSE(table(dir / "sets.csv").empty());
}

TEST_CASE("simulate is deterministic") {
  const fs::path a = scratch(), b = scratch();
  const std::string args = "simulate --scenario " + quoted(data / "tiny_scenario.json") + " --replications 2 --out ";
  REQUIRE(run(args + quoted(a)).code == 0);
  REQUIRE(run(args + quoted(b)).code == 0);
  CHECK(slurp(a / "records.csv") == slurp(b / "records.csv"));
  CHECK(slurp(a / "summary.csv") == slurp(b / "summary.csv"));
  CHECK(run(args + quoted(scratch()) + " --seed 12").code == 0);
}

TEST_CASE("check prints the rank report") {
  Run r = run("check --data " + quoted(data / "tiny.csv") + " --model " + quoted(data / "tiny_model.json") +
              " --bins 10");
  CHECK(r.code == 0);
  CHECK(r.out.find("rank 6 of 6 (ok)") != std::string::npos);
  // three bins and two atoms cannot identify eight response functions
  r = run("check --data " + quoted(data / "tiny.csv") + " --model " + quoted(data / "tiny_model.json") + " --bins 3");
  CHECK(r.code == 3);
  CHECK(r.out.find("combo") != std::string::npos);
}

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "json.hpp"
#include "rlos/cli.hpp"
#include "rlos/dataset.hpp"
#include "rlos/simulate.hpp"

using namespace rlos;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("rlos_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content = {}) const {
    const fs::path p = path / name;
    if (!content.empty()) std::ofstream(p) << content;
    return p.string();
  }
  static inline int counter = 0;
};

std::string csv_from(const RLosSample& s, int first_year = 1961) {
  std::ostringstream out;
  out << "year";
  for (std::size_t j = 1; j <= s.orders(); ++j) out << ",r" << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    out << first_year + int(i);
    for (std::size_t j = 1; j <= s.orders(); ++j) out << ',' << s.at(i, j);
    out << '\n';
  }
  return out.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("load_dataset") {
    std::istringstream ok("year,r1,r2\n2001,5.0,3.0\n2002,4.0,4.0\n");
    const Dataset d = load_dataset(ok);
    CHECK(d.sample.blocks() == 2);
    CHECK(d.sample.time() == std::vector<double>{1.0, 2.0});
    std::istringstream tabs("year\tr1\tr2\n2001\t5.0\t3.0\n2002\t4.0\t1.0\n");
    CHECK(load_dataset(tabs).sample.at(1, 2) == 1.0);

    std::istringstream rising("year,r1,r2\n2001,5.0,3.0\n2002,4.0,4.5\n");
    try {
      load_dataset(rising, "rain.csv");
      FAIL("expected a data error");
    } catch (const DataError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("rain.csv:3") != std::string::npos);
      CHECK(msg.find("r2") != std::string::npos);
    }
    std::istringstream years("year,r1\n2001,5.0\n2001,4.0\n");
    CHECK_THROWS_AS(load_dataset(years), DataError);
    std::istringstream na("year,r1\n2001,NA\n");
    CHECK_THROWS_AS(load_dataset(na), DataError);
    std::istringstream text("year,r1\n2001,wet\n");
    CHECK_THROWS_AS(load_dataset(text), DataError);
  }

  TEST_CASE("fit command") {
    TempDir dir;
    const std::string data = dir.file("data.csv", csv_from(sample_rgev(50, 5, {10.0, 2.0, 0.1}, 3)));
    const Run r = run({"fit", data, "-r", "3", "--json", dir.file("fit.json")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("converged") != std::string::npos);
    const auto j = nlohmann::json::parse(std::ifstream(dir.file("fit.json")));
    CHECK(j.dump().find("mu") != std::string::npos);

    const std::string bad = dir.file("bad.csv", "year,r1,r2\n2001,5.0,3.0\n2002,4.0,4.5\n");
    const Run e = run({"fit", bad, "-r", "1"});
    CHECK(e.code == kExitDataError);
    CHECK(e.err.find("bad.csv:3") != std::string::npos);
  }

  TEST_CASE("select command writes a report that reproduces the choice") {
    TempDir dir;
    const std::string data = dir.file("data.csv", csv_from(contaminate(sample_rgev(60, 8, {}, 5), 4, 0.5)));
    const std::string out = dir.file("report.json");
    const Run r = run({"select", data, "--method", "ccdf", "--out", out});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("mann-kendall") != std::string::npos);
    CHECK(r.out.find("(not used for stopping)") != std::string::npos);
    const auto j = nlohmann::json::parse(std::ifstream(out));
    const auto& rep = j.at("reports").at(0);
    const SelectionReport back = report_from_json(rep);
    CHECK(back.chosen_r == rep.at("chosen_r").get<std::size_t>());
    CHECK(back.rule == rep.at("rule").get<std::string>());
  }

  TEST_CASE("select is reproducible with a fixed seed") {
    TempDir dir;
    const std::string data = dir.file("data.csv", csv_from(sample_rgev(30, 3, {}, 8)));
    const std::vector<std::string> args{"select", data, "--method", "score", "--boot", "99", "--seed", "4"};
    const Run a = run(args), b = run(args);
    REQUIRE(a.code == kExitOk);
    CHECK(a.out == b.out);
  }

  TEST_CASE("select rejects the score test with --ns") {
    TempDir dir;
    const std::string data = dir.file("data.csv", csv_from(sample_rgev(30, 3, {}, 8)));
    CHECK(run({"select", data, "--ns", "--method", "score"}).code == kExitDataError);
    CHECK(run({"select", data, "--method", "bogus"}).code == kExitDataError);
  }

  TEST_CASE("ppdata lies near the diagonal for well-specified data") {
    TempDir dir;
    const std::string data = dir.file("data.csv", csv_from(sample_rgev(500, 3, {0.0, 1.0, 0.1}, 21)));
    const Run r = run({"ppdata", data, "--method", "ccdf"});
    REQUIRE(r.code == kExitOk);
    std::istringstream lines(r.out);
    std::string line;
    std::size_t rows = 0;
    double worst = 0.0;
    while (std::getline(lines, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("method", 0) == 0) continue;
      std::istringstream f(line);
      std::string method;
      int order = 0, i = 0;
      double pp = 0, value = 0;
      f >> method >> order >> i >> pp >> value;
      worst = std::max(worst, std::abs(pp - value));
      ++rows;
    }
    CHECK(rows == 3 * 500);
    CHECK(worst < 0.1);
    const auto pp = plotting_positions(4);
    CHECK(pp[0] == doctest::Approx(0.1625));
    CHECK(pp[3] == doctest::Approx(0.9125));
  }

  TEST_CASE("experiment command") {
    TempDir dir;
    const std::string cfg = dir.file(
        "exp.cfg",
        "population = rgev\nk = 0\nn = 30\nR = 6\ntrue_r = 3\nmixing_p = 0.5\nreplicates = 1\nseed = 1\ntests = ccdf\n");
    const std::string prefix = (dir.path / "run").string();
    const Run r = run({"experiment", cfg, "--out", prefix});
    REQUIRE(r.code == kExitOk);
    const auto manifest = nlohmann::json::parse(std::ifstream(prefix + ".manifest.json"));
    CHECK(manifest.at("seed") == 1);
    CHECK(fs::exists(prefix + ".tsv"));

    const std::string broken = dir.file("broken.cfg", "population = rgev\nk = 0\nn = 30\n");
    const Run e = run({"experiment", broken, "--out", prefix});
    CHECK(e.code == kExitDataError);
    CHECK(e.err.find("R") != std::string::npos);
  }
}

#ifdef SPLITPLOT_HAVE_CLI

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "splitplot/cli.hpp"
#include "splitplot/error.hpp"

using namespace splitplot;
namespace fs = std::filesystem;

namespace {

const char* kF1 =
    "whole_plot,unit,a_level,b_level,outcome\n"
    "p1,1,0,0,1\np1,2,0,0,3\np1,3,0,1,2\np1,4,0,1,4\n"
    "p2,1,0,0,2\np2,2,0,1,6\np2,3,0,0,4\np2,4,0,1,8\n"
    "p3,1,1,1,3\np3,2,1,1,5\np3,3,1,0,1\np3,4,1,0,3\n"
    "p4,1,1,0,0\np4,2,1,1,2\np4,3,1,0,4\np4,4,1,1,6\n";

int counter = 0;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("splitplot_cli_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
  std::string read(const std::string& name) const {
    std::ifstream in(path / name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }
};

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "splitplot");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("cli estimate on the fixture") {
  TempDir dir;
  const std::string data = dir.write("f1.csv", kF1);
  const Result r = run_cli({"estimate", data, "--scheme", "wls"});
  REQUIRE(r.code == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"effect", "est", "se", "p.normal", "p.frt"});
  CHECK(std::stod(rows[1][1]) == doctest::Approx(-0.75));
  CHECK(std::stod(rows[2][1]) == doctest::Approx(2.25));
  CHECK(std::stod(rows[3][1]) == doctest::Approx(-0.5));
  CHECK(rows[1][4] == "NA");

  const auto haj = parse_csv(run_cli({"estimate", data, "--scheme", "haj"}).out);
  for (std::size_t k = 1; k < 4; ++k) CHECK(haj[k][1] == rows[k][1]);
}

TEST_CASE("cli rejects malformed datasets") {
  TempDir dir;
  const std::string bad = dir.write("bad.csv",
                                    "whole_plot,a_level,b_level,outcome\n"
                                    "p1,0,0,1\np1,1,1,2\np1,0,0,3\np1,0,1,3\n"
                                    "p2,0,0,1\np2,0,1,2\np2,0,0,3\np2,0,1,3\n");
  const Result r = run_cli({"estimate", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);

  const std::string missing = dir.write("m.csv", "whole_plot,a_level,outcome\np1,0,1\n");
  CHECK(run_cli({"estimate", missing}).code == 2);
  const std::string nonnum = dir.write("n.csv", std::string(kF1) + "p4,5,1,1,abc\n");
  CHECK(run_cli({"estimate", nonnum}).code == 2);
  CHECK(run_cli({"estimate", dir.write("f.csv", kF1), "--scheme", "nope"}).code == 2);
  CHECK(run_cli({"bogus"}).code == 2);
}

TEST_CASE("cli randomize is deterministic and round-trips") {
  TempDir dir;
  const std::string design = dir.write(
      "d.json", R"({"t_a": 2, "t_b": 2, "whole_plot_counts": [2, 3],
                    "sub_plot_counts": [[2, 2], [3, 2], [2, 4], [2, 2], [3, 3]]})");
  const std::string out1 = (dir.path / "a1.csv").string(), out2 = (dir.path / "a2.csv").string();
  REQUIRE(run_cli({"randomize", "--design", design, "--seed", "9", "--out", out1}).code == 0);
  REQUIRE(run_cli({"randomize", "--design", design, "--seed", "9", "--out", out2}).code == 0);
  CHECK(dir.read("a1.csv") == dir.read("a2.csv"));

  // attach synthetic outcomes and parse back
  const auto rows = parse_csv(dir.read("a1.csv"));
  std::ostringstream ds;
  ds << "whole_plot,unit,a_level,b_level,outcome\n";
  for (std::size_t i = 1; i < rows.size(); ++i) ds << rows[i][0] << ',' << rows[i][1] << ',' << rows[i][2] << ',' << rows[i][3] << ',' << i << '\n';
  std::istringstream in(ds.str());
  const cli::Dataset back = cli::read_dataset(in);
  CHECK(back.data.design() == cli::load_design(design));
}

TEST_CASE("cli frt") {
  TempDir dir;
  const std::string data = dir.write("f1.csv", kF1);
  const Result a = run_cli({"frt", data, "--scheme", "ag", "--mode", "montecarlo", "--draws", "4999", "--seed", "7"});
  const Result b = run_cli({"frt", data, "--scheme", "ag", "--mode", "montecarlo", "--draws", "4999", "--seed", "7",
                            "--workers", "1"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto rows = parse_csv(a.out);
  CHECK(rows.back()[0] == "joint");
  const Result ex = run_cli({"frt", data, "--scheme", "ag", "--mode", "exhaustive"});
  REQUIRE(ex.code == 0);
  // A has the smallest achievable statistic on this fixture
  CHECK(parse_csv(ex.out)[1][4] == "1");
}

TEST_CASE("cli simulate") {
  TempDir dir;
  const std::string cfg = dir.write("c.json", R"({"num_plots": 30, "replications": 12})");
  const std::string o1 = (dir.path / "s1.csv").string(), o2 = (dir.path / "s2.csv").string();
  REQUIRE(run_cli({"simulate", "--config", cfg, "--workers", "1", "--out", o1}).code == 0);
  REQUIRE(run_cli({"simulate", "--config", cfg, "--workers", "3", "--out", o2}).code == 0);
  CHECK(dir.read("s1.csv") == dir.read("s2.csv"));
  const auto rows = parse_csv(dir.read("s1.csv"));
  CHECK(rows.size() == 40);
  CHECK(rows[0] == std::vector<std::string>{"scheme", "effect", "truth", "bias", "sd", "ese", "coverage", "failures"});

  const Result one = run_cli({"simulate", "--config", cfg, "--replications", "1"});
  REQUIRE(one.code == 0);
  CHECK(parse_csv(one.out)[1][4] == "NA");
  CHECK(run_cli({"simulate", "--config", dir.write("bad.json", R"({"nope": 1})")}).code == 2);
}

TEST_CASE("number formatting") {
  CHECK(cli::format_number(0.1) == "0.1");
  CHECK(cli::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(cli::format_number(std::nan("")) == "NA");
}

#endif

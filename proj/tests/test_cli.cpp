#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ncots/explorer.hpp"
#include "ncots/heads.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ncots_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(NCOTS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

json read_json(const fs::path& p) { return json::parse(std::ifstream(p)); }

}  // namespace

TEST_CASE("gen-env") {
  TempDir t;
  const auto d = t.path.string();
  CHECK(run("--out " + d + "/zero gen-env --n-queries 0") == 0);
  CHECK(fs::exists(t.path / "zero/env.json"));
  CHECK(lines(t.path / "zero/queries.jsonl").empty());

  CHECK(run("--seed 4 --out " + d + "/two gen-env --n-queries 200") == 0);
  const auto q = lines(t.path / "two/queries.jsonl");
  CHECK(q.size() == 200);
  const auto manifest = read_json(t.path / "two/gen-env.manifest.json");
  CHECK(manifest.at("command") == "gen-env");
  CHECK(manifest.contains("wall_clock_seconds"));
}

TEST_CASE("exit codes") {
  TempDir t;
  const auto d = t.path.string();
  CHECK(run("--bogus-flag") == 1);
  CHECK(run("search --repeats 0") == 1);
  CHECK(run("--out " + d + " metrics --run a=/no/such/file --baseline /no/such/file") == 1);
  std::ofstream(t.path / "bad.jsonl") << "{broken\n";
  CHECK(run("--out " + d + " metrics --run a=" + d + "/bad.jsonl --baseline " + d + "/bad.jsonl") == 2);
}

TEST_CASE("train with zero epochs, search and metrics") {
  TempDir t;
  const auto d = t.path.string();
  REQUIRE(run("--seed 3 --out " + d + " gen-env --n-queries 20") == 0);
  std::ofstream(t.path / "train.json") << R"({"epochs": 0, "seed": 5})";
  REQUIRE(run("--config " + d + "/train.json --out " + d + " train --env " + d + "/env.json --queries " +
              d + "/queries.jsonl --heads both --operator-set random8") == 0);
  const auto prog = ncots::progress_from_json(read_json(t.path / "progress.json"));
  const auto init = ncots::progress_random_init(prog.dim(), 5);
  CHECK(prog.weights == init.weights);
  CHECK(prog.bias == init.bias);
  const auto report = read_json(t.path / "train_report.json");
  CHECK(report.contains("potential"));

  REQUIRE(run("--out " + d + "/orig search --original --env " + d + "/env.json --queries " + d +
              "/queries.jsonl") == 0);
  CHECK(lines(t.path / "orig/traces.jsonl").size() == 20);
  REQUIRE(run("--out " + d + "/ours search --env " + d + "/env.json --queries " + d +
              "/queries.jsonl --operator-set random8 --potential " + d + "/potential.json --progress " +
              d + "/progress.json --diagnostics") == 0);
  CHECK(fs::exists(t.path / "ours/decisions.jsonl"));

  REQUIRE(run("--out " + d + "/m metrics --run self=" + d + "/orig/traces.jsonl --baseline " + d +
              "/orig/traces.jsonl") == 0);
  const auto m = read_json(t.path / "m/metrics.json");
  CHECK(m.dump().find("\"eta\":1.0") != std::string::npos);
}

TEST_CASE("aggregate a four-point fixture") {
  TempDir t;
  const auto d = t.path.string();
  ncots::PathMatrix pm;
  pm.query_ids = {"q1", "q2"};
  pm.paths = {{{100, true}, {200, false}}, {{150, true}, {50, false}}};
  ncots::write_path_matrix(t.path / "paths.jsonl", pm);
  REQUIRE(run("--out " + d + " aggregate --paths " + d +
              "/paths.jsonl --iterations 100000 --length-bin 1") == 0);
  const auto rows = lines(t.path / "density.csv");
  REQUIRE(rows.size() == 5);  // header plus four cells
  std::size_t total = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto count = std::stoul(rows[i].substr(rows[i].rfind(',') + 1));
    CHECK(count == doctest::Approx(25000).epsilon(0.04));
    total += count;
  }
  CHECK(total == 100000);
  CHECK(read_json(t.path / "density.json").at("n_samples") == 100000);
}

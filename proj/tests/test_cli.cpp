#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "hocp/io.hpp"
#include "hocp/rng.hpp"

using namespace hocp;
namespace fs = std::filesystem;

namespace {

const std::string kCli = HOCP_CLI_PATH;
const std::string kConfigs = std::string(HOCP_SOURCE_DIR) + "/configs/";

// Fresh scratch directory, removed at scope exit.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("hocp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  int file_count() const { return static_cast<int>(std::distance(fs::directory_iterator(dir), {})); }
};

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// Copies a shipped config, pointing its output into the scratch directory.
std::string staged_config(const Scratch& s, const std::string& name, const std::string& stem) {
  json c = read_json_file(kConfigs + name);
  c["output"] = s.path(stem);
  const std::string path = s.path(stem + "_config.json");
  write(path, c.dump(2));
  return path;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Rows j >= 2 of a trace satisfy dist <= eps.
void check_envelope(const std::string& csv_path) {
  const auto rows = read_csv(csv_path);
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0].size() == 10);
  for (std::size_t r = 2; r < rows.size(); ++r) {
    const long double eps = std::stold(rows[r][1]), dist = std::stold(rows[r][3]);
    CHECK(dist <= eps);
  }
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("malformed configs exit with 1 and write nothing") {
    Scratch s;
    const std::string out = s.path("result");
    const std::vector<std::string> bad{
        "{\"problem\": {\"name\": \"maxroot\", \"n\": 1}, \"q\": 1, \"x1\": 0.1, \"output\": \"" + out + "\"",
        "{\"problem\": {\"name\": \"maxroot\", \"n\": 1}, \"q\": 0, \"x1\": 0.1, \"output\": \"" + out + "\"}",
        "{\"problem\": {\"name\": \"nosuch\"}, \"q\": 1, \"x1\": 0.1, \"output\": \"" + out + "\"}",
        "{\"problem\": {\"name\": \"maxroot\", \"n\": 1}, \"q\": 1, \"x1\": 0.1, \"kappa\": 1.5, \"output\": \"" + out +
            "\"}",
        "{\"problem\": {\"name\": \"maxroot\", \"n\": 1}, \"q\": 1, \"x1\": 0.1, \"typo\": 3, \"output\": \"" + out +
            "\"}",
        "{\"problem\": {\"name\": \"maxroot\", \"n\": 2}, \"q\": 1, \"x1\": [1, 2, 3], \"output\": \"" + out + "\"}",
        "{\"problem\": {\"name\": \"maxroot\", \"n\": 1}, \"q\": 1, \"x1\": 0.1, \"eps_thr\": \"1e-400\", \"output\": \"" +
            out + "\"}",
        "{\"problem\": {\"name\": \"maxroot\", \"n\": 1}, \"q\": 1, \"x1\": 0.1}",
    };
    for (const auto& text : bad) {
      const std::string cfg = s.path("bad.json");
      write(cfg, text);
      CHECK(shell(kCli + " run " + cfg) == 1);
      CHECK_FALSE(fs::exists(out + ".csv"));
      CHECK_FALSE(fs::exists(out + ".json"));
      fs::remove(cfg);
      CHECK(s.file_count() == 0);
    }
    CHECK(shell(kCli + " run " + s.path("missing.json")) == 1);
  }

  TEST_CASE("max-root q=2 trace has the fixed header and stays in its envelope") {
    Scratch s;
    const std::string cfg = staged_config(s, "ex61_q2.json", "q2");
    CHECK(shell(kCli + " run " + cfg) == 0);
    const auto rows = read_csv(s.path("q2.csv"));
    REQUIRE(!rows.empty());
    CHECK(slurp(s.path("q2.csv")).rfind(std::string(kTraceHeader) + "\n", 0) == 0);
    check_envelope(s.path("q2.csv"));
    const json summary = read_json_file(s.path("q2.json"));
    CHECK(summary.at("status") == "EpsThreshold");
    CHECK(summary.at("exit_code") == 0);
  }

  TEST_CASE("half-and-half run pays one value per jet call plus the start") {
    Scratch s;
    CHECK(shell(kCli + " run " + staged_config(s, "ex64.json", "hh")) == 0);
    const json summary = read_json_file(s.path("hh.json"));
    CHECK(summary.at("total_objective_evals").get<long long>() == summary.at("total_oracle_calls").get<long long>() + 1);
    const auto rows = read_csv(s.path("hh.csv"));
    CHECK(std::stoll(rows.back()[6]) == summary.at("total_oracle_calls").get<long long>());
  }

  TEST_CASE("repeated runs produce byte-identical traces") {
    Scratch s;
    const std::string cfg = staged_config(s, "ex62.json", "sa");
    REQUIRE(shell(kCli + " run " + cfg) == 0);
    const std::string first = slurp(s.path("sa.csv"));
    REQUIRE(shell(kCli + " run " + cfg) == 0);
    CHECK(slurp(s.path("sa.csv")) == first);
    CHECK(!first.empty());
  }

  TEST_CASE("q sweep writes one trace per grid point regardless of the worker count") {
    Scratch s;
    const std::string cfg = staged_config(s, "ex61_q1.json", "sw");
    const std::string grid = kConfigs + "ex61_qgrid.json";
    REQUIRE(shell("HOCP_THREADS=2 " + kCli + " sweep " + cfg + " " + grid) == 0);
    std::vector<std::string> traces;
    for (int q = 1; q <= 5; ++q) {
      const std::string csv = s.path("sw_q=" + std::to_string(q) + ".csv");
      REQUIRE(fs::exists(csv));
      check_envelope(csv);
      traces.push_back(slurp(csv));
    }
    const json summary = read_json_file(s.path("sw_sweep.json"));
    CHECK(summary.is_object());

    REQUIRE(shell("HOCP_THREADS=1 " + kCli + " sweep " + cfg + " " + grid) == 0);
    for (int q = 1; q <= 5; ++q) CHECK(slurp(s.path("sw_q=" + std::to_string(q) + ".csv")) == traces[q - 1]);

    const std::string empty = s.path("empty_grid.json");
    write(empty, "{\"q\": []}");
    CHECK(shell(kCli + " sweep " + cfg + " " + empty) == 1);
  }

  TEST_CASE("acceptance check notices a broken schedule") {
    CHECK(shell(kCli + " check --kappa 1.1") != 0);
    CHECK(shell(kCli + " check --only 2") == 0);
  }

  TEST_CASE("list-problems names every built-in problem") {
    Scratch s;
    const int code = std::system((kCli + " list-problems > " + s.path("list.txt")).c_str());
    CHECK(WEXITSTATUS(code) == 0);
    const std::string text = slurp(s.path("list.txt"));
    for (const char* name : {"maxroot", "fig1", "sumabs", "maxeig", "halfhalf"})
      CHECK(text.find(name) != std::string::npos);
  }

  TEST_CASE("hexfloat text round-trips binary64 exactly") {
    SplitMix64 rng(70);
    std::vector<double> values{0.0, -0.0, 1.0, 0.1, -2.5e-300, std::numeric_limits<double>::denorm_min(),
                               std::numeric_limits<double>::max(), std::numeric_limits<double>::min()};
    for (int i = 0; i < 200; ++i) values.push_back(std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.uniform(-1000, 1000))));
    for (double v : values) {
      const double back = from_hex(to_hex(v));
      CHECK(back == v);
      CHECK(std::signbit(back) == std::signbit(v));
    }
    CHECK_THROWS(from_hex("not a number"));
  }
}

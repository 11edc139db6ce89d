// Copyright 2026 lmplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lmplan/model_shape.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using lmplan::testing::rel_err;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("lmplan-test-" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(LMPLAN_BIN) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kConfig = R"(
[model]
preset = falcon-180b

[parallelism]
tp = 8
pp = 8
dp = 64
n_microbatches = 64
)";

}  // namespace

TEST_CASE("topo plan emits the published round structure") {
  TempDir dir;
  const fs::path out = dir.path / "plan.txt";
  CHECK(run("topo plan --n 4 --out " + out.string()) == 0);
  CHECK(slurp(out) == "0-1,2-3\n0-2,1-3\n0-3,1-2\n");
  CHECK(run("topo plan --n 6") == 1);  // not a power of two
}

TEST_CASE("plan subcommand writes a parseable json report, deterministically") {
  TempDir dir;
  const fs::path cfg = dir.path / "cfg.ini";
  write_file(cfg, kConfig);
  const fs::path out1 = dir.path / "report1.json";
  const fs::path out2 = dir.path / "report2.json";
  CHECK(run("plan --config " + cfg.string() + " --format json --out " + out1.string()) == 0);
  CHECK(run("plan --config " + cfg.string() + " --format json --out " + out2.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));

  const auto doc = nlohmann::json::parse(slurp(out1));
  const auto replica =
      doc.at("sections").at("memory").at("replica_bytes").at("value").get<long long>();
  CHECK(rel_err(double(replica), 765e9) < 0.02);

  const fs::path human = dir.path / "report.txt";
  CHECK(run("plan --config " + cfg.string() + " --format human --out " + human.string()) == 0);
  CHECK(slurp(human).find("[kv_cache]") != std::string::npos);
}

TEST_CASE("exit codes distinguish validation from io errors") {
  TempDir dir;
  const fs::path bad = dir.path / "bad.ini";
  write_file(bad, "[model]\npreset = falcon-180b\n[parallelism]\ntp = 8\npp = 8\ndp = 64\nworld_size = 1\n");
  CHECK(run("plan --config " + bad.string()) == 1);

  const fs::path malformed = dir.path / "malformed.ini";
  write_file(malformed, "this is not a config\n");
  CHECK(run("plan --config " + malformed.string()) == 2);

  CHECK(run("plan --config " + (dir.path / "missing.ini").string()) == 2);
  CHECK(run("plan --bogus-flag") == 1);

  const fs::path cfg = dir.path / "cfg.ini";
  write_file(cfg, kConfig);
  CHECK(run("plan --config " + cfg.string() + " --format yaml") == 1);
}

TEST_CASE("simulate reports the closed-form total for uniform timings") {
  TempDir dir;
  const fs::path cfg = dir.path / "cfg.ini";
  write_file(cfg, kConfig);
  const fs::path out = dir.path / "sim.json";
  const fs::path trace = dir.path / "trace.json";
  CHECK(run("simulate --config " + cfg.string() + " --fwd-us 10 --p2p-us 0 --format json --out " +
            out.string() + " --trace " + trace.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  const auto& schedule = doc.at("sections").at("schedule");
  // pp = 8, m = 64, fwd 10, bwd 20: (64 + 7) * 30.
  CHECK(schedule.at("total_time_us").at("value").get<double>() == doctest::Approx(71 * 30.0));
  CHECK(schedule.at("bubble_fraction").at("value").get<double>() == doctest::Approx(7.0 / 71.0));

  const auto events = nlohmann::json::parse(slurp(trace));
  CHECK(events.size() == 2u * 8u * 64u);
}

TEST_CASE("mixture emits one index per line with exact counts") {
  TempDir dir;
  const fs::path out = dir.path / "pattern.txt";
  CHECK(run("mixture --weights 0.76,0.08,0.06,0.05,0.03,0.02 --length 10000 --out " +
            out.string()) == 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::vector<int> counts(6, 0);
  int total = 0;
  while (std::getline(in, line)) {
    ++counts[static_cast<std::size_t>(std::stoi(line))];
    ++total;
  }
  CHECK(total == 10000);
  CHECK(counts == std::vector<int>{7600, 800, 600, 500, 300, 200});

  CHECK(run("mixture --weights 0.7,0.2") == 1);  // does not sum to one
}

TEST_CASE("mask renders bit rows from a depth list and from a tree file") {
  TempDir dir;
  const fs::path out = dir.path / "mask.txt";
  CHECK(run("mask --depths 0,1,1 --out " + out.string()) == 0);
  CHECK(slurp(out) == "011\n001\n010\n");

  const fs::path tree = dir.path / "tree.txt";
  write_file(tree, "root - 1\na root 1\nb root 1\n");
  const fs::path out2 = dir.path / "mask2.txt";
  CHECK(run("mask --tree " + tree.string() + " --out " + out2.string()) == 0);
  CHECK(slurp(out2) == "011\n001\n010\n");

  const fs::path json_out = dir.path / "mask.json";
  CHECK(run("mask --depths 0,1 --format json --out " + json_out.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(json_out));
  CHECK(doc.at("polarity") == "allow");

  CHECK(run("mask --depths 0,1 --tree " + tree.string()) == 1);  // both inputs
  CHECK(run("mask --tree " + (dir.path / "missing.txt").string()) == 2);
}

TEST_CASE("topo place recovers a permuted grid") {
  TempDir dir;
  // Physical cluster: a 2x2 grid relabeled by the permutation (2,0,3,1),
  // with bandwidth = 100 / grid distance.
  const lmplan::Count n = 4;
  std::vector<lmplan::Count> physical_of_logical{2, 0, 3, 1};
  Eigen::MatrixXd grid(4, 4);
  grid << 0, 1, 1, 2, 1, 0, 2, 1, 1, 2, 0, 1, 2, 1, 1, 0;
  Eigen::MatrixXd bw = Eigen::MatrixXd::Zero(n, n);
  for (lmplan::Count i = 0; i < n; ++i)
    for (lmplan::Count j = 0; j < n; ++j)
      if (i != j)
        bw(physical_of_logical[static_cast<std::size_t>(i)],
           physical_of_logical[static_cast<std::size_t>(j)]) = 100.0 / grid(i, j);

  std::ostringstream csv;
  csv << "n=" << n << "\n";
  for (lmplan::Count i = 0; i < n; ++i) {
    for (lmplan::Count j = 0; j < n; ++j) csv << (j ? "," : "") << bw(i, j);
    csv << "\n";
  }
  const fs::path bw_path = dir.path / "bw.csv";
  write_file(bw_path, csv.str());

  const fs::path out = dir.path / "placement.json";
  CHECK(run("topo place --bandwidth " + bw_path.string() +
            " --pp 2 --dp 2 --format json --out " + out.string()) == 0);
  const auto doc = nlohmann::json::parse(slurp(out));
  CHECK(doc.at("converged").get<bool>());
  CHECK(doc.at("logical_to_physical").size() == 4);

  const fs::path pairs = dir.path / "placement.txt";
  CHECK(run("topo place --bandwidth " + bw_path.string() + " --pp 2 --dp 2 --out " +
            pairs.string()) == 0);
  std::istringstream in(slurp(pairs));
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);

  CHECK(run("topo place --bandwidth " + bw_path.string() + " --pp 2 --dp 3") == 1);
}

TEST_CASE("help exits zero") {
  CHECK(run("--help >/dev/null") == 0);
  CHECK(run("") == 1);  // a subcommand is required
}

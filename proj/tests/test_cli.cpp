// Copyright 2026 The TCN Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Runs the tcn binary end to end in scratch directories.

#include <doctest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "run_config.hpp"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path root;
  Scratch() {
    root = fs::temp_directory_path() /
           ("tcn_cli_" + std::to_string(::getpid()) + "_" + std::to_string(next++));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Scratch() { fs::remove_all(root); }
  std::string at(const std::string& rel) const { return (root / rel).string(); }
  static inline int next = 0;
};

int run(const Scratch& s, const std::string& args) {
  const std::string cmd = "cd '" + s.root.string() + "' && '" TCN_CLI_PATH "' " +
                          args + " >cli.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// Epoch log without the wall-clock column.
std::vector<std::string> losses(const std::string& path) {
  std::vector<std::string> out;
  std::ifstream in(path);
  for (std::string l; std::getline(in, l);) out.push_back(l.substr(0, l.rfind('\t')));
  return out;
}

std::vector<std::string> lines(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void prepare(const Scratch& s) {
  REQUIRE(run(s, "synth --dims 12,12,12 --rank 2 --observations 150 --seed 4 -o syn") == 0);
  REQUIRE(run(s, "split -i syn/observed.tsv --seed 4 -o sp") == 0);
}

}  // namespace

TEST_CASE("help and usage errors") {
  Scratch s;
  CHECK(run(s, "--help") == 0);
  CHECK(run(s, "") == 1);
  CHECK(run(s, "frobnicate") == 1);
  CHECK(run(s, "split --no-such-flag") == 1);
  CHECK(run(s, "split") == 1);
  CHECK(run(s, "split -i x.tsv --ratios 0.5,0.5,0.5") == 1);
  CHECK(run(s, "train --train x.tsv --fusion max") == 1);
}

TEST_CASE("data errors") {
  Scratch s;
  CHECK(run(s, "split -i missing.tsv -o out") == 2);
  {
    std::ofstream(s.at("bad.tsv")) << "0\t0\t0\n1\tq\t0\n";
  }
  CHECK(run(s, "split -i bad.tsv -o out") == 2);
  CHECK(slurp(s.at("cli.log")).find("line 2") != std::string::npos);
  {
    std::ofstream(s.at("empty.tsv")) << "";
  }
  CHECK(run(s, "graph -i empty.tsv -o g") == 2);
  {
    std::ofstream(s.at("junk.bin")) << "junk";
  }
  prepare(s);
  CHECK(run(s, "eval -c junk.bin --train sp/train.tsv --test sp/test.tsv -o ev") == 2);
}

TEST_CASE("numeric failure exits with code 3") {
  Scratch s;
  prepare(s);
  CHECK(run(s, "train --train sp/train.tsv --epochs 2 --lr 1e200 -o tr") == 3);
}

TEST_CASE("full pipeline produces every artifact") {
  Scratch s;
  prepare(s);
  for (const char* f : {"syn/observed.tsv", "syn/holdout.tsv", "syn/synth_manifest.json",
                        "sp/train.tsv", "sp/valid.tsv", "sp/test.tsv",
                        "sp/split_manifest.json", "sp/config.ini"}) {
    CHECK_MESSAGE(fs::exists(s.at(f)), f);
  }
  REQUIRE(run(s, "graph -i sp/train.tsv -o g") == 0);
  auto stats = lines(s.at("g/graph_stats.tsv"));
  REQUIRE(!stats.empty());
  CHECK(stats[0] == "stat\tvalue");
  CHECK(fs::exists(s.at("g/edges.tsv")));

  REQUIRE(run(s, "train --train sp/train.tsv --valid sp/valid.tsv --rank 4 --epochs 4 "
                 "--lr 0.01,0.03 --wd 0,0.001 --valid-k 20 -o tr") == 0);
  for (int r = 0; r < 4; ++r) {
    CHECK(fs::exists(s.at("tr/run_" + std::to_string(r) + "/checkpoint.bin")));
  }
  CHECK(fs::is_symlink(s.at("tr/checkpoint.bin")));
  CHECK(fs::exists(s.at("tr/checkpoint.bin")));
  auto log = lines(s.at("tr/epochs.tsv"));
  REQUIRE(log.size() == 5);
  CHECK(log[0] == "epoch\tloss\tvalid_ap\twall_ms");

  REQUIRE(run(s, "eval -c tr/checkpoint.bin --train sp/train.tsv --valid sp/valid.tsv "
                 "--test sp/test.tsv -k 10,50 --runs 3 --candidates sampled "
                 "--multiplier 3 -o ev") == 0);
  auto metrics = lines(s.at("ev/metrics.tsv"));
  REQUIRE(metrics.size() == 5);
  CHECK(metrics[0] == "metric\tk\tvalue\tn_test\tn_candidates\tstd\truns");
  CHECK(metrics[1].rfind("AP\t10\t", 0) == 0);
  CHECK(metrics[4].rfind("Precision\t50\t", 0) == 0);
  CHECK(lines(s.at("ev/metrics_runs.tsv")).size() == 1 + 3 * 4);
  CHECK(fs::exists(s.at("ev/ranked.tsv")));
  CHECK(fs::exists(s.at("ev/eval_manifest.json")));

  REQUIRE(run(s, "plot --log tr/epochs.tsv --metrics ev/metrics.tsv -o pl") == 0);
  CHECK(lines(s.at("pl/loss_curve.tsv")).size() == 5);
  CHECK(lines(s.at("pl/ap_vs_k.tsv")).size() == 3);
}

TEST_CASE("identical seeds give identical artifacts") {
  Scratch s;
  prepare(s);
  REQUIRE(run(s, "split -i syn/observed.tsv --seed 4 -o sp2") == 0);
  for (const char* f : {"train.tsv", "valid.tsv", "test.tsv"}) {
    CHECK(slurp(s.at(std::string("sp/") + f)) == slurp(s.at(std::string("sp2/") + f)));
  }
  REQUIRE(run(s, "split -i syn/observed.tsv --seed 5 -o sp3") == 0);
  CHECK(slurp(s.at("sp/train.tsv")) != slurp(s.at("sp3/train.tsv")));

  const std::string train =
      "train --train sp/train.tsv --valid sp/valid.tsv --rank 4 --epochs 3 --seed 9 ";
  REQUIRE(run(s, train + "-o a") == 0);
  REQUIRE(run(s, train + "-o b") == 0);
  CHECK(losses(s.at("a/epochs.tsv")) == losses(s.at("b/epochs.tsv")));
  const std::string eval =
      "eval --train sp/train.tsv --valid sp/valid.tsv --test sp/test.tsv -k 20 ";
  REQUIRE(run(s, eval + "-c a/checkpoint.bin -o ea") == 0);
  REQUIRE(run(s, eval + "-c b/checkpoint.bin -o eb") == 0);
  CHECK(slurp(s.at("ea/metrics.tsv")) == slurp(s.at("eb/metrics.tsv")));
  CHECK(slurp(s.at("ea/ranked.tsv")) == slurp(s.at("eb/ranked.tsv")));
}

TEST_CASE("resume continues a run exactly") {
  Scratch s;
  prepare(s);
  const std::string base = "train --train sp/train.tsv --valid sp/valid.tsv --rank 4 ";
  REQUIRE(run(s, base + "--epochs 4 -o full") == 0);
  REQUIRE(run(s, base + "--epochs 2 -o half") == 0);
  REQUIRE(run(s, base + "--resume half/checkpoint.bin --epochs 2 -o rest") == 0);
  REQUIRE(run(s, base + "--epochs 4 --checkpoint-every 1 -o chunked") == 0);
  const auto want = losses(s.at("full/epochs.tsv"));
  REQUIRE(want.size() == 5);
  CHECK(losses(s.at("rest/epochs.tsv")) == want);
  CHECK(losses(s.at("chunked/epochs.tsv")) == want);
  // Same scores for every candidate, so the same ranked list.
  const std::string eval =
      "eval --train sp/train.tsv --valid sp/valid.tsv --test sp/test.tsv -k 200 ";
  for (const char* d : {"full", "rest", "chunked"}) {
    REQUIRE(run(s, eval + "-c " + d + "/checkpoint.bin -o e_" + d) == 0);
  }
  const std::string ranked = slurp(s.at("e_full/ranked.tsv"));
  CHECK(slurp(s.at("e_rest/ranked.tsv")) == ranked);
  CHECK(slurp(s.at("e_chunked/ranked.tsv")) == ranked);
}

TEST_CASE("config file drives a run and flags override it") {
  Scratch s;
  prepare(s);
  {
    std::ofstream ini(s.at("run.ini"));
    ini << "[paths]\ntrain = sp/train.tsv\nvalid = sp/valid.tsv\noutput_dir = fromfile\n"
        << "[model]\nrank = 3\nfusion = sum\n[train]\nepochs = 2\n";
  }
  REQUIRE(run(s, "train --config run.ini --rank 5") == 0);
  auto cfg = tcn::cli::load_config(s.at("fromfile/config.ini"));
  CHECK(cfg.rank == 5);
  CHECK(cfg.fusion == "sum");
  CHECK(cfg.epochs == 2);
  CHECK(lines(s.at("fromfile/epochs.tsv")).size() == 3);

  {
    std::ofstream(s.at("typo.ini")) << "[model]\nrnak = 3\n";
  }
  CHECK(run(s, "train --config typo.ini --train sp/train.tsv") == 1);
}

TEST_CASE("config text round trip") {
  tcn::cli::RunConfig c;
  c.train = "a b.tsv";
  c.seed = 18446744073709551615ULL;
  c.ratios = {0.8, 0.1, 0.1};
  c.learning_rates = {0.1, 1e-3, 3.0000000000000004e-2};
  c.ks = {1, 10, 1000};
  c.dims = {5, 6, 7, 8};
  c.noise = 0.25;
  c.feature_transform = true;
  std::ostringstream out;
  tcn::cli::write_config(c, out);
  std::istringstream in(out.str());
  CHECK(tcn::cli::parse_config(in) == c);

  std::istringstream unknown("[eval]\nbogus = 1\n");
  CHECK_THROWS_AS(tcn::cli::parse_config(unknown), tcn::cli::ConfigError);
  std::istringstream bad_number("[model]\nrank = ten\n");
  CHECK_THROWS_AS(tcn::cli::parse_config(bad_number), tcn::cli::ConfigError);
  tcn::cli::RunConfig v;
  v.ratios = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(tcn::cli::validate(v), tcn::cli::ConfigError);
}

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


// Exercises the shared library through its C header only.

#include <doctest.h>
#include <tcn/tcn.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tcn_c_api_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

struct Data {
  tcn_tensor* train = nullptr;
  tcn_tensor* valid = nullptr;
  tcn_tensor* test = nullptr;
  tcn_graph* graph = nullptr;

  Data() {
    const int64_t dims[] = {12, 12, 12};
    tcn_tensor* observed = nullptr;
    tcn_tensor* holdout = nullptr;
    REQUIRE(tcn_synth_planted(dims, 3, 2, 150, 0.0, 5, &observed, &holdout) == TCN_OK);
    const double ratios[] = {0.7, 0.1, 0.2};
    REQUIRE(tcn_tensor_split(observed, ratios, 6, &train, &valid, &test) == TCN_OK);
    REQUIRE(tcn_graph_build(train, &graph) == TCN_OK);
    tcn_tensor_free(observed);
    tcn_tensor_free(holdout);
  }
  ~Data() {
    tcn_graph_free(graph);
    tcn_tensor_free(train);
    tcn_tensor_free(valid);
    tcn_tensor_free(test);
  }
};

tcn_train_options quick_options() {
  tcn_train_options o;
  tcn_train_options_default(&o);
  o.rank = 4;
  o.epochs = 3;
  o.batch_size = 32;
  o.valid_k = 10;
  o.seed = 3;
  return o;
}

}  // namespace

TEST_CASE("names, parsing and seeds") {
  CHECK(std::string(tcn_version()).size() > 0);
  tcn_fusion f;
  CHECK(tcn_fusion_parse("product", &f) == TCN_OK);
  CHECK(f == TCN_FUSION_PRODUCT);
  CHECK(std::string(tcn_fusion_name(TCN_FUSION_CONCAT)) == "concat");
  CHECK(tcn_fusion_parse("max", &f) == TCN_ERROR_USAGE);
  CHECK(std::string(tcn_last_error()).find("max") != std::string::npos);
  tcn_predictor p;
  CHECK(tcn_predictor_parse("ncft", &p) == TCN_OK);
  CHECK(p == TCN_PREDICTOR_MLP);
  CHECK(tcn_predictor_parse("costco", &p) == TCN_OK);
  CHECK(p == TCN_PREDICTOR_CONV);
  tcn_candidates c;
  CHECK(tcn_candidates_parse("sampled", &c) == TCN_OK);
  CHECK(c == TCN_CANDIDATES_SAMPLED);
  CHECK(tcn_derive_seed(1, "split", 0) == tcn_derive_seed(1, "split", 0));
  CHECK(tcn_derive_seed(1, "split", 0) != tcn_derive_seed(1, "train", 0));
  CHECK(tcn_derive_seed(1, "split", 0) != tcn_derive_seed(1, "split", 1));
}

TEST_CASE("tensor handles") {
  const int64_t dims[] = {2, 2, 2};
  const int64_t idx[] = {0, 0, 0, 1, 1, 0, 0, 1, 1};
  tcn_tensor* t = nullptr;
  REQUIRE(tcn_tensor_create(dims, 3, idx, 3, &t) == TCN_OK);
  CHECK(tcn_tensor_order(t) == 3);
  CHECK(tcn_tensor_dim(t, 1) == 2);
  CHECK(tcn_tensor_nnz(t) == 3);
  const int64_t probe[] = {1, 1, 0};
  const int64_t absent[] = {1, 0, 1};
  CHECK(tcn_tensor_contains(t, probe) == 1);
  CHECK(tcn_tensor_contains(t, absent) == 0);
  int64_t row[3];
  // Entries keep input order.
  REQUIRE(tcn_tensor_entry(t, 1, row) == TCN_OK);
  CHECK(row[0] == 1);
  CHECK(row[1] == 1);
  CHECK(row[2] == 0);
  CHECK(tcn_tensor_entry(t, 3, row) == TCN_ERROR_USAGE);

  TempDir dir;
  REQUIRE(tcn_tensor_save(t, dir.file("t.tsv").c_str()) == TCN_OK);
  tcn_tensor* back = nullptr;
  size_t dups = 99;
  REQUIRE(tcn_tensor_load(dir.file("t.tsv").c_str(), 0, dims, 3, &dups, &back) == TCN_OK);
  CHECK(dups == 0);
  CHECK(tcn_tensor_nnz(back) == 3);
  CHECK(tcn_tensor_contains(back, probe) == 1);
  tcn_tensor_free(back);

  const int64_t bad[] = {0, 0, 2};
  tcn_tensor* oob = nullptr;
  CHECK(tcn_tensor_create(dims, 3, bad, 1, &oob) == TCN_ERROR_DATA);
  CHECK(oob == nullptr);
  CHECK(tcn_tensor_load(dir.file("missing.tsv").c_str(), 0, nullptr, 0, nullptr, &back) ==
        TCN_ERROR_DATA);
  {
    std::ofstream(dir.file("junk.tsv")) << "0\t1\tx\n";
  }
  CHECK(tcn_tensor_load(dir.file("junk.tsv").c_str(), 0, nullptr, 0, nullptr, &back) ==
        TCN_ERROR_DATA);
  CHECK(std::string(tcn_last_error()).find("line 1") != std::string::npos);
  CHECK(tcn_tensor_create(nullptr, 3, idx, 3, &t) == TCN_ERROR_USAGE);
  tcn_tensor_free(t);
  tcn_tensor_free(nullptr);
}

TEST_CASE("graph handle matches the three-interaction example") {
  const int64_t dims[] = {2, 2, 2};
  const int64_t idx[] = {0, 0, 0, 1, 1, 0, 0, 1, 1};
  tcn_tensor* t = nullptr;
  REQUIRE(tcn_tensor_create(dims, 3, idx, 3, &t) == TCN_OK);
  tcn_graph* g = nullptr;
  REQUIRE(tcn_graph_build(t, &g) == TCN_OK);
  tcn_graph_stats s;
  REQUIRE(tcn_graph_stats_get(g, &s) == TCN_OK);
  CHECK(s.node_count == 6);
  CHECK(s.hyperedges == 3);
  CHECK(s.incidence_nnz == 9);
  CHECK(s.undirected_edges == 9);
  CHECK(s.adjacency_nnz == 18);
  CHECK(s.isolated_nodes == 0);
  CHECK(tcn_graph_order(g) == 3);
  CHECK(tcn_graph_dim_nodes(g, 2) == 2);
  // Node ids: dimension offsets 0, 2, 4.
  // Every node has degree 4 and every pair co-occurs at most once.
  CHECK(tcn_graph_weight(g, 0, 3) == 1.0);
  CHECK(tcn_graph_weight(g, 0, 1) == 0.0);
  CHECK(tcn_graph_normalized_weight(g, 0, 3) == 0.25);
  CHECK(tcn_graph_weight(g, 0, 6) == 0.0);
  tcn_graph_free(g);

  tcn_tensor* empty = nullptr;
  REQUIRE(tcn_tensor_create(dims, 3, nullptr, 0, &empty) == TCN_OK);
  CHECK(tcn_graph_build(empty, &g) == TCN_ERROR_DATA);
  tcn_tensor_free(empty);
  tcn_tensor_free(t);
}

TEST_CASE("train, checkpoint, score and evaluate through handles") {
  Data d;
  tcn_train_options o = quick_options();
  int calls = 0;
  auto cb = [](void* user, int, double loss, double, double) {
    ++*static_cast<int*>(user);
    CHECK(std::isfinite(loss));
  };
  tcn_model* m = nullptr;
  REQUIRE(tcn_model_train(d.train, d.valid, d.graph, &o, cb, &calls, &m) == TCN_OK);
  CHECK(calls == 3);
  tcn_model_info info;
  REQUIRE(tcn_model_info_get(m, &info) == TCN_OK);
  CHECK(info.epochs_done == 3);
  CHECK(info.best_epoch >= 1);
  CHECK(tcn_model_log_size(m) == 3);
  int epoch;
  double loss, vap, ms;
  REQUIRE(tcn_model_log_entry(m, 2, &epoch, &loss, &vap, &ms) == TCN_OK);
  CHECK(epoch == 3);
  CHECK(loss == info.last_loss);
  CHECK(tcn_model_log_entry(m, 3, &epoch, &loss, &vap, &ms) == TCN_ERROR_USAGE);

  tcn_train_options back;
  REQUIRE(tcn_model_options(m, &back) == TCN_OK);
  CHECK(back.rank == 4);
  CHECK(back.seed == 3);
  CHECK(back.fusion == o.fusion);

  TempDir dir;
  const std::string ckpt = dir.file("m.bin");
  REQUIRE(tcn_model_save(m, ckpt.c_str()) == TCN_OK);
  tcn_model* loaded = nullptr;
  REQUIRE(tcn_model_load(ckpt.c_str(), &loaded) == TCN_OK);

  std::vector<int64_t> cells;
  for (size_t e = 0; e < tcn_tensor_nnz(d.test); ++e) {
    int64_t row[3];
    tcn_tensor_entry(d.test, e, row);
    cells.insert(cells.end(), row, row + 3);
  }
  const size_t count = cells.size() / 3;
  std::vector<double> a(count), b(count);
  REQUIRE(tcn_model_score(m, d.graph, cells.data(), count, a.data()) == TCN_OK);
  REQUIRE(tcn_model_score(loaded, d.graph, cells.data(), count, b.data()) == TCN_OK);
  CHECK(a == b);

  REQUIRE(tcn_model_resume(m, d.train, d.valid, d.graph, 2, nullptr, nullptr) == TCN_OK);
  REQUIRE(tcn_model_resume(loaded, d.train, d.valid, d.graph, 2, nullptr, nullptr) == TCN_OK);
  tcn_model_info ia, ib;
  tcn_model_info_get(m, &ia);
  tcn_model_info_get(loaded, &ib);
  CHECK(ia.epochs_done == 5);
  CHECK(ia.last_loss == ib.last_loss);
  CHECK(ia.optimizer_step == ib.optimizer_step);

  tcn_eval_options eo;
  tcn_eval_options_default(&eo);
  const size_t ks[] = {10, 50};
  tcn_metric_row rows[2];
  const std::string ranked = dir.file("ranked.tsv");
  REQUIRE(tcn_evaluate(m, d.graph, d.train, d.valid, d.test, &eo, ks, 2, rows,
                       ranked.c_str()) == TCN_OK);
  CHECK(rows[0].k == 10);
  CHECK(rows[1].k == 50);
  CHECK(rows[0].n_test == tcn_tensor_nnz(d.test));
  CHECK(rows[0].n_candidates ==
        12u * 12u * 12u - tcn_tensor_nnz(d.train) - tcn_tensor_nnz(d.valid));
  for (const auto& r : rows) {
    CHECK(r.ap >= 0.0);
    CHECK(r.ap <= 1.0);
  }
  CHECK(fs::exists(ranked));

  eo.budget = 10;
  CHECK(tcn_evaluate(m, d.graph, d.train, d.valid, d.test, &eo, ks, 2, rows,
                     nullptr) == TCN_ERROR_USAGE);
  CHECK(std::string(tcn_last_error()).find("sampled") != std::string::npos);

  {
    std::ofstream(dir.file("bad.bin")) << "not a model";
  }
  tcn_model* bad = nullptr;
  CHECK(tcn_model_load(dir.file("bad.bin").c_str(), &bad) == TCN_ERROR_DATA);
  CHECK(bad == nullptr);

  tcn_model_free(loaded);
  tcn_model_free(m);
}

TEST_CASE("invalid options and mismatched shapes") {
  Data d;
  tcn_train_options o = quick_options();
  o.batch_size = 0;
  tcn_model* m = nullptr;
  CHECK(tcn_model_train(d.train, d.valid, d.graph, &o, nullptr, nullptr, &m) ==
        TCN_ERROR_USAGE);
  CHECK(m == nullptr);
  o = quick_options();
  o.learning_rate = 1e308;
  o.epochs = 5;
  const tcn_status s = tcn_model_train(d.train, nullptr, d.graph, &o, nullptr, nullptr, &m);
  if (s != TCN_OK) {
    CHECK(s == TCN_ERROR_NUMERIC);
  } else {
    tcn_model_free(m);
  }

  const int64_t dims[] = {3, 3, 3};
  const int64_t idx[] = {0, 0, 0};
  tcn_tensor* other = nullptr;
  REQUIRE(tcn_tensor_create(dims, 3, idx, 1, &other) == TCN_OK);
  o = quick_options();
  CHECK(tcn_model_train(other, nullptr, d.graph, &o, nullptr, nullptr, &m) == TCN_ERROR_DATA);
  tcn_tensor_free(other);
}

TEST_CASE("ap_at_k through the C API") {
  const int64_t dims[] = {20, 1};
  std::vector<int64_t> idx;
  for (int64_t i = 0; i < 10; ++i) idx.insert(idx.end(), {i, 0});
  tcn_tensor* test = nullptr;
  REQUIRE(tcn_tensor_create(dims, 2, idx.data(), 10, &test) == TCN_OK);
  const int64_t ranked[] = {0, 0, 15, 0, 1, 0};
  double ap = -1, prec = -1;
  REQUIRE(tcn_ap_at_k(test, ranked, 3, 3, &ap, &prec) == TCN_OK);
  CHECK(ap == 5.0 / 9.0);
  CHECK(prec == 2.0 / 3.0);
  CHECK(tcn_ap_at_k(test, ranked, 3, 0, &ap, &prec) == TCN_ERROR_USAGE);
  tcn_tensor_free(test);
}

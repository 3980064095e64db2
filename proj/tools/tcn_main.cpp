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


// Command-line front end: split, graph, train, eval, synth, plot.

#include <tcn/tcn.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using tcn::cli::RunConfig;
using tcn::cli::format_double;

namespace {

// Error carrying the process exit code.
struct Failure {
  int code;
  std::string message;
};

[[noreturn]] void fail(int code, std::string message) {
  throw Failure{code, std::move(message)};
}

void check(tcn_status status) {
  if (status != TCN_OK) fail(static_cast<int>(status), tcn_last_error());
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TensorPtr = std::unique_ptr<tcn_tensor, Deleter<tcn_tensor, tcn_tensor_free>>;
using GraphPtr = std::unique_ptr<tcn_graph, Deleter<tcn_graph, tcn_graph_free>>;
using ModelPtr = std::unique_ptr<tcn_model, Deleter<tcn_model, tcn_model_free>>;

TensorPtr load_tensor(const std::string& path, int index_base,
                      std::size_t order, const char* role,
                      std::size_t* duplicates = nullptr) {
  if (path.empty()) fail(1, std::string("missing path for the ") + role +
                                " tensor");
  tcn_tensor* t = nullptr;
  check(tcn_tensor_load(path.c_str(), index_base, nullptr, order, duplicates,
                        &t));
  return TensorPtr(t);
}

void save_tensor(const tcn_tensor* t, const fs::path& path) {
  check(tcn_tensor_save(t, path.string().c_str()));
}

std::vector<int64_t> shape_of(const tcn_tensor* t) {
  std::vector<int64_t> dims(tcn_tensor_order(t));
  for (std::size_t n = 0; n < dims.size(); ++n) dims[n] = tcn_tensor_dim(t, n);
  return dims;
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) fail(2, "cannot create directory " + p.string() + ": " + ec.message());
  return p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) fail(2, "cannot write " + path.string());
  return out;
}

void write_json(const json& j, const fs::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_effective_config(const RunConfig& cfg, const fs::path& dir) {
  auto out = open_out(dir / "config.ini");
  tcn::cli::write_config(cfg, out);
}

// Seeds recorded in manifests are written as strings so they survive JSON
// readers that parse numbers as doubles.
std::string seed_text(uint64_t seed) { return std::to_string(seed); }

std::string number_text(double v) {
  return std::isnan(v) ? "nan" : format_double(v);
}

void replace_symlink(const fs::path& target, const fs::path& link) {
  std::error_code ec;
  fs::remove(link, ec);
  fs::create_symlink(target, link, ec);
  if (ec) fail(2, "cannot link " + link.string() + ": " + ec.message());
}

tcn_fusion parse_fusion(const std::string& name) {
  tcn_fusion f;
  check(tcn_fusion_parse(name.c_str(), &f));
  return f;
}

tcn_predictor parse_predictor(const std::string& name) {
  tcn_predictor p;
  check(tcn_predictor_parse(name.c_str(), &p));
  return p;
}

tcn_candidates parse_candidates(const std::string& name) {
  tcn_candidates c;
  check(tcn_candidates_parse(name.c_str(), &c));
  return c;
}

tcn_eval_options eval_options(const RunConfig& cfg, uint64_t seed) {
  tcn_eval_options o;
  tcn_eval_options_default(&o);
  o.candidates = parse_candidates(cfg.candidates);
  o.multiplier = cfg.multiplier;
  o.seed = seed;
  o.exclude_valid = cfg.exclude_valid ? 1 : 0;
  o.budget = cfg.budget;
  o.threads = cfg.threads;
  return o;
}

tcn_train_options train_options(const RunConfig& cfg, double lr, double wd,
                                bool has_valid) {
  tcn_train_options o;
  tcn_train_options_default(&o);
  o.rank = cfg.rank;
  o.layers = cfg.layers;
  o.feature_transform = cfg.feature_transform ? 1 : 0;
  o.nonlinearity = cfg.nonlinearity ? 1 : 0;
  o.fusion = parse_fusion(cfg.fusion);
  o.predictor = parse_predictor(cfg.predictor);
  o.hidden = cfg.hidden;
  o.mlp_depth = cfg.mlp_depth;
  o.channels = cfg.channels;
  o.epochs = cfg.epochs;
  o.batch_size = cfg.batch_size;
  o.learning_rate = lr;
  o.weight_decay = wd;
  o.negatives_per_positive = cfg.negatives;
  o.seed = tcn_derive_seed(cfg.seed, "train", 0);
  o.valid_every = has_valid ? cfg.valid_every : 0;
  o.valid_k = cfg.valid_k;
  o.valid = eval_options(cfg, 0);
  o.graph_includes_valid = cfg.include_valid ? 1 : 0;
  o.audit_negatives = cfg.audit_negatives ? 1 : 0;
  return o;
}

// Propagation graph from train, or train ∪ valid.
GraphPtr build_graph(const tcn_tensor* train, const tcn_tensor* valid,
                     bool include_valid) {
  TensorPtr merged;
  const tcn_tensor* source = train;
  if (include_valid) {
    if (valid == nullptr) fail(1, "graph.include_valid requires a valid tensor");
    tcn_tensor* m = nullptr;
    check(tcn_tensor_merge(train, valid, &m));
    merged.reset(m);
    source = m;
  }
  tcn_graph* g = nullptr;
  check(tcn_graph_build(source, &g));
  return GraphPtr(g);
}

void print_epoch(void*, int epoch, double loss, double valid_ap,
                 double wall_ms) {
  std::cerr << "epoch " << epoch << "  loss " << format_double(loss);
  if (!std::isnan(valid_ap)) std::cerr << "  valid_ap " << format_double(valid_ap);
  std::cerr << "  (" << static_cast<long long>(wall_ms) << " ms)\n";
}

void write_epoch_log(const tcn_model* m, const fs::path& path) {
  auto out = open_out(path);
  out << "epoch\tloss\tvalid_ap\twall_ms\n";
  for (std::size_t i = 0; i < tcn_model_log_size(m); ++i) {
    int epoch = 0;
    double loss = 0, ap = 0, ms = 0;
    check(tcn_model_log_entry(m, i, &epoch, &loss, &ap, &ms));
    out << epoch << '\t' << number_text(loss) << '\t' << number_text(ap)
        << '\t' << format_double(std::round(ms * 1000.0) / 1000.0) << '\n';
  }
}

json model_json(const tcn_model* m) {
  tcn_model_info info;
  check(tcn_model_info_get(m, &info));
  tcn_train_options o;
  check(tcn_model_options(m, &o));
  json j;
  j["epochs_done"] = info.epochs_done;
  j["best_epoch"] = info.best_epoch;
  j["best_valid_ap"] = info.best_epoch >= 0 ? json(info.best_valid_ap) : json();
  j["last_loss"] = std::isnan(info.last_loss) ? json() : json(info.last_loss);
  j["rank"] = o.rank;
  j["layers"] = o.layers;
  j["fusion"] = tcn_fusion_name(o.fusion);
  j["predictor"] = tcn_predictor_name(o.predictor);
  j["feature_transform"] = o.feature_transform != 0;
  j["nonlinearity"] = o.nonlinearity != 0;
  j["learning_rate"] = o.learning_rate;
  j["weight_decay"] = o.weight_decay;
  j["train_seed"] = seed_text(o.seed);
  j["graph_includes_valid"] = o.graph_includes_valid != 0;
  return j;
}

// ---- split --------------------------------------------------------------

int cmd_split(const RunConfig& cfg) {
  std::size_t duplicates = 0;
  TensorPtr input =
      load_tensor(cfg.input, cfg.index_base, cfg.order, "input", &duplicates);
  const uint64_t seed = tcn_derive_seed(cfg.seed, "split", 0);
  tcn_tensor *train = nullptr, *valid = nullptr, *test = nullptr;
  check(tcn_tensor_split(input.get(), cfg.ratios.data(), seed, &train, &valid,
                         &test));
  TensorPtr tr(train), va(valid), te(test);
  const fs::path dir = prepare_dir(cfg.output_dir);
  save_tensor(train, dir / "train.tsv");
  save_tensor(valid, dir / "valid.tsv");
  save_tensor(test, dir / "test.tsv");
  json j;
  j["command"] = "split";
  j["input"] = cfg.input;
  j["shape"] = shape_of(input.get());
  j["ratios"] = cfg.ratios;
  j["root_seed"] = seed_text(cfg.seed);
  j["split_seed"] = seed_text(seed);
  j["counts"] = {{"input", tcn_tensor_nnz(input.get())},
                 {"duplicates", duplicates},
                 {"train", tcn_tensor_nnz(train)},
                 {"valid", tcn_tensor_nnz(valid)},
                 {"test", tcn_tensor_nnz(test)}};
  write_json(j, dir / "split_manifest.json");
  write_effective_config(cfg, dir);
  std::cout << "train " << tcn_tensor_nnz(train) << "  valid "
            << tcn_tensor_nnz(valid) << "  test " << tcn_tensor_nnz(test)
            << '\n';
  return 0;
}

// ---- graph --------------------------------------------------------------

int cmd_graph(const RunConfig& cfg) {
  TensorPtr input = load_tensor(cfg.input, cfg.index_base, cfg.order, "input");
  TensorPtr valid;
  if (cfg.include_valid) valid = load_tensor(cfg.valid, 0, 0, "valid");
  if (tcn_tensor_nnz(input.get()) == 0) {
    fail(2, "input tensor " + cfg.input + " has no interactions");
  }
  GraphPtr graph = build_graph(input.get(), valid.get(), cfg.include_valid);
  tcn_graph_stats s;
  check(tcn_graph_stats_get(graph.get(), &s));
  const fs::path dir = prepare_dir(cfg.output_dir);
  check(tcn_graph_write_edges(graph.get(), (dir / "edges.tsv").string().c_str()));

  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t n = 0; n < tcn_graph_order(graph.get()); ++n) {
    rows.emplace_back("nodes.dim" + std::to_string(n),
                      std::to_string(tcn_graph_dim_nodes(graph.get(), n)));
  }
  rows.emplace_back("nodes.total", std::to_string(s.node_count));
  rows.emplace_back("nodes.isolated", std::to_string(s.isolated_nodes));
  rows.emplace_back("hypergraph.hyperedges", std::to_string(s.hyperedges));
  rows.emplace_back("hypergraph.nnz", std::to_string(s.incidence_nnz));
  rows.emplace_back("hypergraph.bytes", std::to_string(s.hypergraph_bytes));
  rows.emplace_back("hypergraph.seconds", format_double(s.hypergraph_seconds));
  rows.emplace_back("clique.edges", std::to_string(s.undirected_edges));
  rows.emplace_back("clique.nnz", std::to_string(s.adjacency_nnz));
  rows.emplace_back("clique.max_degree", format_double(s.max_degree));
  rows.emplace_back("clique.mean_degree", format_double(s.mean_degree));
  rows.emplace_back("clique.bytes", std::to_string(s.clique_bytes));
  rows.emplace_back("clique.seconds", format_double(s.clique_seconds));
  auto out = open_out(dir / "graph_stats.tsv");
  out << "stat\tvalue\n";
  for (const auto& [k, v] : rows) {
    out << k << '\t' << v << '\n';
    std::cout << k << '\t' << v << '\n';
  }
  write_effective_config(cfg, dir);
  return 0;
}

// ---- train --------------------------------------------------------------

// Trains opts.epochs epochs, checkpointing every `every` epochs when set.
ModelPtr train_one(const tcn_tensor* train, const tcn_tensor* valid,
                   const tcn_graph* graph, tcn_train_options opts, int every,
                   const fs::path& checkpoint) {
  const int total = opts.epochs;
  const int first = every > 0 ? std::min(every, total) : total;
  opts.epochs = first;
  tcn_model* raw = nullptr;
  check(tcn_model_train(train, valid, graph, &opts, print_epoch, nullptr, &raw));
  ModelPtr model(raw);
  int done = first;
  while (done < total) {
    check(tcn_model_save(model.get(), checkpoint.string().c_str()));
    const int chunk = std::min(every, total - done);
    check(tcn_model_resume(model.get(), train, valid, graph, chunk,
                           print_epoch, nullptr));
    done += chunk;
  }
  check(tcn_model_save(model.get(), checkpoint.string().c_str()));
  return model;
}

int cmd_train(const RunConfig& cfg, const std::string& resume) {
  TensorPtr train = load_tensor(cfg.train, 0, 0, "train");
  TensorPtr valid;
  if (!cfg.valid.empty()) valid = load_tensor(cfg.valid, 0, 0, "valid");
  const fs::path dir = prepare_dir(cfg.output_dir);

  if (!resume.empty()) {
    tcn_model* raw = nullptr;
    check(tcn_model_load(resume.c_str(), &raw));
    ModelPtr model(raw);
    tcn_train_options o;
    check(tcn_model_options(model.get(), &o));
    GraphPtr graph = build_graph(train.get(), valid.get(),
                                 o.graph_includes_valid != 0);
    check(tcn_model_resume(model.get(), train.get(), valid.get(), graph.get(),
                           cfg.epochs, print_epoch, nullptr));
    check(tcn_model_save(model.get(), (dir / "checkpoint.bin").string().c_str()));
    write_epoch_log(model.get(), dir / "epochs.tsv");
    json j;
    j["command"] = "train";
    j["resumed_from"] = resume;
    j["added_epochs"] = cfg.epochs;
    j["model"] = model_json(model.get());
    write_json(j, dir / "train_manifest.json");
    return 0;
  }

  GraphPtr graph = build_graph(train.get(), valid.get(), cfg.include_valid);
  const bool grid = cfg.learning_rates.size() * cfg.weight_decays.size() > 1;
  json runs = json::array();
  int best = -1;
  double best_score = 0.0;
  int index = 0;
  for (double lr : cfg.learning_rates) {
    for (double wd : cfg.weight_decays) {
      RunConfig run_cfg = cfg;
      run_cfg.learning_rates = {lr};
      run_cfg.weight_decays = {wd};
      const fs::path run_dir =
          grid ? prepare_dir((dir / ("run_" + std::to_string(index))).string())
               : dir;
      std::cerr << "run " << index << ": learning_rate " << format_double(lr)
                << "  weight_decay " << format_double(wd) << '\n';
      const tcn_train_options opts =
          train_options(run_cfg, lr, wd, valid != nullptr);
      ModelPtr model = train_one(train.get(), valid.get(), graph.get(), opts,
                                 cfg.checkpoint_every,
                                 run_dir / "checkpoint.bin");
      write_epoch_log(model.get(), run_dir / "epochs.tsv");
      write_effective_config(run_cfg, run_dir);
      tcn_model_info info;
      check(tcn_model_info_get(model.get(), &info));
      // Highest validation AP; lowest final loss when validation is off.
      const double score =
          info.best_epoch >= 0 ? info.best_valid_ap : -info.last_loss;
      if (best < 0 || score > best_score) {
        best = index;
        best_score = score;
      }
      json r = model_json(model.get());
      r["run"] = index;
      r["dir"] = grid ? run_dir.filename().string() : ".";
      runs.push_back(r);
      ++index;
    }
  }
  if (grid) {
    const std::string best_name = "run_" + std::to_string(best);
    replace_symlink(best_name, dir / "best");
    replace_symlink(fs::path(best_name) / "checkpoint.bin",
                    dir / "checkpoint.bin");
    replace_symlink(fs::path(best_name) / "epochs.tsv", dir / "epochs.tsv");
    write_effective_config(cfg, dir);
  }
  json j;
  j["command"] = "train";
  j["root_seed"] = seed_text(cfg.seed);
  j["train"] = cfg.train;
  j["valid"] = cfg.valid;
  j["counts"] = {{"train", tcn_tensor_nnz(train.get())},
                 {"valid", valid ? tcn_tensor_nnz(valid.get()) : 0}};
  j["selection"] = valid ? "best validation AP" : "lowest final loss";
  j["runs"] = runs;
  j["best_run"] = best;
  write_json(j, dir / "train_manifest.json");
  std::cout << "best run " << best << " (" << runs[best]["dir"].get<std::string>()
            << ")\n";
  return 0;
}

// ---- eval ---------------------------------------------------------------

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

// Mean and sample standard deviation (0 for a single run).
Summary summarize(const std::vector<double>& v) {
  Summary s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return s;
}

int cmd_eval(const RunConfig& cfg, const std::vector<std::string>& checkpoints) {
  if (checkpoints.empty()) fail(1, "eval needs at least one checkpoint");
  TensorPtr train = load_tensor(cfg.train, 0, 0, "train");
  TensorPtr test = load_tensor(cfg.test, 0, 0, "test");
  TensorPtr valid;
  if (!cfg.valid.empty()) valid = load_tensor(cfg.valid, 0, 0, "valid");
  const fs::path dir = prepare_dir(cfg.output_dir);
  const std::size_t nk = cfg.ks.size();

  std::vector<std::vector<double>> ap(nk), prec(nk);
  uint64_t n_test = 0, n_candidates = 0;
  auto runs_out = open_out(dir / "metrics_runs.tsv");
  runs_out << "checkpoint\trun\tmetric\tk\tvalue\n";
  json ckpt_info = json::array();
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    tcn_model* raw = nullptr;
    check(tcn_model_load(checkpoints[c].c_str(), &raw));
    ModelPtr model(raw);
    tcn_train_options o;
    check(tcn_model_options(model.get(), &o));
    GraphPtr graph = build_graph(train.get(), valid.get(),
                                 o.graph_includes_valid != 0);
    json info = model_json(model.get());
    info["path"] = checkpoints[c];
    ckpt_info.push_back(info);
    for (int r = 0; r < cfg.runs; ++r) {
      const tcn_eval_options eo =
          eval_options(cfg, tcn_derive_seed(cfg.seed, "eval", r));
      std::vector<tcn_metric_row> rows(nk);
      const std::string ranked = (dir / "ranked.tsv").string();
      const bool first = c == 0 && r == 0;
      check(tcn_evaluate(model.get(), graph.get(), train.get(), valid.get(),
                         test.get(), &eo, cfg.ks.data(), nk, rows.data(),
                         first ? ranked.c_str() : nullptr));
      for (std::size_t i = 0; i < nk; ++i) {
        ap[i].push_back(rows[i].ap);
        prec[i].push_back(rows[i].precision);
        runs_out << c << '\t' << r << "\tAP\t" << rows[i].k << '\t'
                 << format_double(rows[i].ap) << '\n';
      }
      for (std::size_t i = 0; i < nk; ++i) {
        runs_out << c << '\t' << r << "\tPrecision\t" << rows[i].k << '\t'
                 << format_double(rows[i].precision) << '\n';
      }
      n_test = rows[0].n_test;
      n_candidates = rows[0].n_candidates;
    }
  }

  auto out = open_out(dir / "metrics.tsv");
  // Leading columns match the single-run report; std and runs follow.
  out << "metric\tk\tvalue\tn_test\tn_candidates\tstd\truns\n";
  const std::size_t total_runs = ap[0].size();
  auto emit = [&](const char* name, const std::vector<std::vector<double>>& v) {
    for (std::size_t i = 0; i < nk; ++i) {
      const Summary s = summarize(v[i]);
      out << name << '\t' << cfg.ks[i] << '\t' << format_double(s.mean) << '\t'
          << n_test << '\t' << n_candidates << '\t' << format_double(s.std)
          << '\t' << total_runs << '\n';
      std::cout << name << '@' << cfg.ks[i] << '\t' << format_double(s.mean)
                << " ± " << format_double(s.std) << '\n';
    }
  };
  emit("AP", ap);
  emit("Precision", prec);

  json j;
  j["command"] = "eval";
  j["root_seed"] = seed_text(cfg.seed);
  j["candidates"] = cfg.candidates;
  j["multiplier"] = cfg.multiplier;
  j["runs_per_checkpoint"] = cfg.runs;
  j["exclude_valid"] = cfg.exclude_valid;
  j["k"] = cfg.ks;
  j["checkpoints"] = ckpt_info;
  j["counts"] = {{"train", tcn_tensor_nnz(train.get())},
                 {"valid", valid ? tcn_tensor_nnz(valid.get()) : 0},
                 {"test", n_test},
                 {"candidates", n_candidates}};
  write_json(j, dir / "eval_manifest.json");
  write_effective_config(cfg, dir);
  return 0;
}

// ---- synth --------------------------------------------------------------

int cmd_synth(const RunConfig& cfg) {
  const uint64_t seed = tcn_derive_seed(cfg.seed, "synth", 0);
  tcn_tensor *observed = nullptr, *holdout = nullptr;
  check(tcn_synth_planted(cfg.dims.data(), cfg.dims.size(), cfg.synth_rank,
                          cfg.observations, cfg.noise, seed, &observed,
                          &holdout));
  TensorPtr obs(observed), hold(holdout);
  const fs::path dir = prepare_dir(cfg.output_dir);
  save_tensor(observed, dir / "observed.tsv");
  save_tensor(holdout, dir / "holdout.tsv");
  const uint64_t noise_cells =
      static_cast<uint64_t>(std::llround(cfg.noise * cfg.observations));
  json j;
  j["command"] = "synth";
  j["generator"] = "planted nonnegative CP, top cells";
  j["dims"] = cfg.dims;
  j["rank"] = cfg.synth_rank;
  j["observations"] = cfg.observations;
  j["noise"] = cfg.noise;
  j["root_seed"] = seed_text(cfg.seed);
  j["synth_seed"] = seed_text(seed);
  j["counts"] = {{"observed", tcn_tensor_nnz(observed)},
                 {"planted_observed", cfg.observations - noise_cells},
                 {"noise", noise_cells},
                 {"holdout", tcn_tensor_nnz(holdout)}};
  write_json(j, dir / "synth_manifest.json");
  write_effective_config(cfg, dir);
  std::cout << "observed " << tcn_tensor_nnz(observed) << "  holdout "
            << tcn_tensor_nnz(holdout) << '\n';
  return 0;
}

// ---- plot ---------------------------------------------------------------

std::vector<std::vector<std::string>> read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(2, "cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) fail(2, path + " is empty");
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name,
                   const std::string& path) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) fail(2, path + " has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

int cmd_plot(const RunConfig& cfg, const std::vector<std::string>& logs,
             const std::vector<std::string>& metrics) {
  if (logs.empty() && metrics.empty()) {
    fail(1, "plot needs --log and/or --metrics inputs");
  }
  const fs::path dir = prepare_dir(cfg.output_dir);
  if (!logs.empty()) {
    auto out = open_out(dir / "loss_curve.tsv");
    out << "series\tepoch\tloss\tvalid_ap\n";
    for (std::size_t s = 0; s < logs.size(); ++s) {
      auto rows = read_tsv(logs[s]);
      const auto& h = rows[0];
      const std::size_t ce = column(h, "epoch", logs[s]);
      const std::size_t cl = column(h, "loss", logs[s]);
      const std::size_t ca = column(h, "valid_ap", logs[s]);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != h.size()) fail(2, logs[s] + ": ragged row");
        out << s << '\t' << rows[i][ce] << '\t' << rows[i][cl] << '\t'
            << rows[i][ca] << '\n';
      }
    }
  }
  if (!metrics.empty()) {
    auto out = open_out(dir / "ap_vs_k.tsv");
    out << "series\tk\tap_mean\tap_std\tprecision_mean\tprecision_std\n";
    for (std::size_t s = 0; s < metrics.size(); ++s) {
      auto rows = read_tsv(metrics[s]);
      const auto& h = rows[0];
      const std::size_t cm = column(h, "metric", metrics[s]);
      const std::size_t ck = column(h, "k", metrics[s]);
      const std::size_t cmean = column(h, "value", metrics[s]);
      const std::size_t cstd = column(h, "std", metrics[s]);
      std::map<long long, std::array<std::string, 4>> by_k;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].size() != h.size()) fail(2, metrics[s] + ": ragged row");
        const long long k = std::stoll(rows[i][ck]);
        auto& cell = by_k[k];
        if (rows[i][cm] == "AP") {
          cell[0] = rows[i][cmean];
          cell[1] = rows[i][cstd];
        } else if (rows[i][cm] == "Precision") {
          cell[2] = rows[i][cmean];
          cell[3] = rows[i][cstd];
        }
      }
      for (const auto& [k, c] : by_k) {
        out << s << '\t' << k << '\t' << c[0] << '\t' << c[1] << '\t' << c[2]
            << '\t' << c[3] << '\n';
      }
    }
  }
  return 0;
}

// Value of --config from the raw arguments, so file values can be loaded
// before flags are bound over them.
std::string find_config_arg(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      path = argv[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    }
  }
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) cfg = tcn::cli::load_config(config_path);
  } catch (const tcn::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"Top-k higher-order interaction prediction for sparse tensors"};
  app.require_subcommand(1);
  // Lets --config follow the subcommand name too.
  app.fallthrough();
  app.set_version_flag("--version", std::string(tcn_version()));
  std::string config_path;
  app.add_option("--config", config_path,
                 "INI run configuration; flags override its values")
      ->check(CLI::ExistingFile);

  std::vector<double> ratios;
  std::string resume;
  std::vector<std::string> checkpoints, logs, metric_files;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Root seed");
  };
  auto add_out = [&](CLI::App* sub) {
    sub->add_option("-o,--out-dir", cfg.output_dir, "Output directory");
  };
  auto add_base = [&](CLI::App* sub) {
    sub->add_option("--index-base", cfg.index_base, "Index base of input files")
        ->check(CLI::IsMember({0, 1}));
  };
  auto add_order = [&](CLI::App* sub) {
    sub->add_option("--order", cfg.order,
                    "Index fields per line; later fields are ignored");
  };
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--candidates", cfg.candidates, "full or sampled");
    sub->add_option("--multiplier", cfg.multiplier,
                    "Sampled candidates per test cell");
    sub->add_option("--budget", cfg.budget, "Full-enumeration cell cap");
    sub->add_option("--threads", cfg.threads, "Ranking threads");
    sub->add_flag("--exclude-valid,!--keep-valid", cfg.exclude_valid,
                  "Drop valid cells from test candidates");
  };

  CLI::App* split = app.add_subcommand("split", "Split a COO tensor into train/valid/test");
  split->add_option("-i,--input", cfg.input, "Input COO file");
  split->add_option("--ratios", ratios, "train,valid,test ratios")
      ->delimiter(',')
      ->expected(3);
  add_seed(split);
  add_out(split);
  add_base(split);
  add_order(split);

  CLI::App* graph = app.add_subcommand("graph", "Build the clique-expanded graph");
  graph->add_option("-i,--input", cfg.input, "Input COO file");
  graph->add_option("--valid", cfg.valid, "Valid COO file (with --include-valid)");
  graph->add_flag("--include-valid", cfg.include_valid,
                  "Build from input ∪ valid");
  add_out(graph);
  add_base(graph);
  add_order(graph);

  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--train", cfg.train, "Train COO file");
  train->add_option("--valid", cfg.valid, "Valid COO file");
  train->add_option("--resume", resume, "Continue from a checkpoint")
      ->check(CLI::ExistingFile);
  train->add_option("--rank", cfg.rank, "Embedding width r");
  train->add_option("--layers", cfg.layers, "Propagation layers L");
  train->add_flag("--feature-transform", cfg.feature_transform,
                  "Per-layer weight matrices");
  train->add_flag("--nonlinearity", cfg.nonlinearity, "ReLU after each layer");
  train->add_option("--fusion", cfg.fusion, "sum, mean, product or concat");
  train->add_option("--predictor", cfg.predictor, "cp, tucker, mlp or conv");
  train->add_option("--hidden", cfg.hidden, "Head hidden width");
  train->add_option("--mlp-depth", cfg.mlp_depth, "MLP hidden layers");
  train->add_option("--channels", cfg.channels, "Conv channels (0: rank)");
  train->add_option("--epochs", cfg.epochs,
                    "Epochs (additional epochs with --resume)");
  train->add_option("--batch-size", cfg.batch_size, "Positives per batch");
  train->add_option("--lr", cfg.learning_rates, "Learning rate(s)")
      ->delimiter(',');
  train->add_option("--wd", cfg.weight_decays, "Weight decay(s)")
      ->delimiter(',');
  train->add_option("--negatives", cfg.negatives, "Negatives per positive");
  train->add_option("--valid-every", cfg.valid_every,
                    "Validate every n epochs (0: never)");
  train->add_option("--valid-k", cfg.valid_k, "k of validation AP@k");
  train->add_option("--checkpoint-every", cfg.checkpoint_every,
                    "Checkpoint every n epochs");
  train->add_flag("--include-valid", cfg.include_valid,
                  "Propagate over train ∪ valid");
  train->add_flag("--audit-negatives", cfg.audit_negatives,
                  "Re-check sampled negatives");
  add_eval(train);
  add_seed(train);
  add_out(train);

  CLI::App* eval = app.add_subcommand("eval", "Rank candidates and report AP@k");
  eval->add_option("-c,--checkpoint", checkpoints,
                   "Checkpoint(s); metrics pool over all of them");
  eval->add_option("--train", cfg.train, "Train COO file");
  eval->add_option("--valid", cfg.valid, "Valid COO file");
  eval->add_option("--test", cfg.test, "Test COO file");
  eval->add_option("-k,--k", cfg.ks, "Cutoffs")->delimiter(',');
  eval->add_option("--runs", cfg.runs, "Candidate draws per checkpoint");
  add_eval(eval);
  add_seed(eval);
  add_out(eval);

  CLI::App* synth = app.add_subcommand("synth", "Generate planted low-rank data");
  synth->add_option("--dims", cfg.dims, "Tensor shape")->delimiter(',');
  synth->add_option("--rank", cfg.synth_rank, "Planted rank");
  synth->add_option("--observations", cfg.observations, "Observed cells");
  synth->add_option("--noise", cfg.noise, "Fraction of uniform noise cells");
  add_seed(synth);
  add_out(synth);

  CLI::App* plot = app.add_subcommand("plot", "Emit plot data as TSV");
  plot->add_option("--log", logs, "Epoch log(s) from train");
  plot->add_option("--metrics", metric_files, "metrics.tsv file(s) from eval");
  add_out(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (!ratios.empty()) cfg.ratios = {ratios[0], ratios[1], ratios[2]};
    if (checkpoints.empty() && !cfg.checkpoint.empty()) {
      checkpoints.push_back(cfg.checkpoint);
    }
    tcn::cli::validate(cfg);
    // Reject unknown names before any file is read.
    parse_fusion(cfg.fusion);
    parse_predictor(cfg.predictor);
    parse_candidates(cfg.candidates);
    if (*split) return cmd_split(cfg);
    if (*graph) return cmd_graph(cfg);
    if (*train) return cmd_train(cfg, resume);
    if (*eval) return cmd_eval(cfg, checkpoints);
    if (*synth) return cmd_synth(cfg);
    if (*plot) return cmd_plot(cfg, logs, metric_files);
  } catch (const tcn::cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

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


#include "tcn/tcn.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "checkpoint.hpp"
#include "evaluation.hpp"
#include "graph.hpp"
#include "tensor.hpp"
#include "training.hpp"

struct tcn_tensor {
  tcn::SparseTensor value;
};

struct tcn_graph {
  tcn::TensorShape shape;
  tcn::CliqueGraph clique;
  tcn::NormalizedAdjacency adj;
  std::size_t hyperedges = 0;
  std::size_t incidence_nnz = 0;
  std::size_t incidence_bytes = 0;
  double hypergraph_seconds = 0.0;
  double clique_seconds = 0.0;
};

struct tcn_model {
  tcn::TrainState state;
};

namespace {

thread_local std::string g_last_error;

tcn_status fail(tcn_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs body and maps exceptions onto status codes.
template <typename Body>
tcn_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return TCN_OK;
  } catch (const tcn::Error& e) {
    return fail(static_cast<tcn_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(TCN_ERROR_DATA, "out of memory");
  } catch (const std::exception& e) {
    return fail(TCN_ERROR_DATA, e.what());
  } catch (...) {
    return fail(TCN_ERROR_DATA, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw tcn::UsageError(what);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

tcn::EvalProtocol to_protocol(const tcn_eval_options& o) {
  tcn::EvalProtocol p;
  require(o.candidates == TCN_CANDIDATES_FULL ||
              o.candidates == TCN_CANDIDATES_SAMPLED,
          "unknown candidate mode");
  p.kind = o.candidates == TCN_CANDIDATES_FULL ? tcn::CandidateKind::kFull
                                               : tcn::CandidateKind::kSampled;
  p.multiplier = o.multiplier;
  p.seed = o.seed;
  p.exclude_valid = o.exclude_valid != 0;
  p.budget = o.budget;
  p.threads = o.threads;
  return p;
}

tcn_eval_options from_protocol(const tcn::EvalProtocol& p) {
  tcn_eval_options o;
  o.candidates = p.kind == tcn::CandidateKind::kFull ? TCN_CANDIDATES_FULL
                                                     : TCN_CANDIDATES_SAMPLED;
  o.multiplier = p.multiplier;
  o.seed = p.seed;
  o.exclude_valid = p.exclude_valid ? 1 : 0;
  o.budget = p.budget;
  o.threads = p.threads;
  return o;
}

tcn::TrainConfig to_config(const tcn_train_options& o) {
  require(o.fusion >= TCN_FUSION_SUM && o.fusion <= TCN_FUSION_CONCAT,
          "unknown fusion");
  require(o.predictor >= TCN_PREDICTOR_CP && o.predictor <= TCN_PREDICTOR_CONV,
          "unknown predictor");
  tcn::TrainConfig c;
  c.model.rank = o.rank;
  c.model.propagation.layers = o.layers;
  c.model.propagation.feature_transform = o.feature_transform != 0;
  c.model.propagation.nonlinearity = o.nonlinearity != 0;
  c.model.fusion = static_cast<tcn::FusionKind>(o.fusion);
  c.model.predictor = static_cast<tcn::PredictorKind>(o.predictor);
  c.model.predictor_options.hidden = o.hidden;
  c.model.predictor_options.mlp_depth = o.mlp_depth;
  c.model.predictor_options.channels = o.channels;
  c.epochs = o.epochs;
  c.batch_size = o.batch_size;
  c.learning_rate = o.learning_rate;
  c.weight_decay = o.weight_decay;
  c.negatives_per_positive = o.negatives_per_positive;
  c.seed = o.seed;
  c.valid_every = o.valid_every;
  c.valid_k = o.valid_k;
  c.valid_protocol = to_protocol(o.valid);
  c.graph_includes_valid = o.graph_includes_valid != 0;
  c.audit_negatives = o.audit_negatives != 0;
  return c;
}

tcn_train_options from_config(const tcn::TrainConfig& c) {
  tcn_train_options o;
  o.rank = c.model.rank;
  o.layers = c.model.propagation.layers;
  o.feature_transform = c.model.propagation.feature_transform ? 1 : 0;
  o.nonlinearity = c.model.propagation.nonlinearity ? 1 : 0;
  o.fusion = static_cast<tcn_fusion>(c.model.fusion);
  o.predictor = static_cast<tcn_predictor>(c.model.predictor);
  o.hidden = c.model.predictor_options.hidden;
  o.mlp_depth = c.model.predictor_options.mlp_depth;
  o.channels = c.model.predictor_options.channels;
  o.epochs = c.epochs;
  o.batch_size = c.batch_size;
  o.learning_rate = c.learning_rate;
  o.weight_decay = c.weight_decay;
  o.negatives_per_positive = c.negatives_per_positive;
  o.seed = c.seed;
  o.valid_every = c.valid_every;
  o.valid_k = c.valid_k;
  o.valid = from_protocol(c.valid_protocol);
  o.graph_includes_valid = c.graph_includes_valid ? 1 : 0;
  o.audit_negatives = c.audit_negatives ? 1 : 0;
  return o;
}

void check_graph_matches(const tcn_graph& g, const tcn::TensorShape& shape) {
  if (!(g.shape == shape)) {
    throw tcn::DataError("graph was built for a different tensor shape");
  }
}

void check_tensor_matches(const tcn::SparseTensor& t,
                          const tcn::TensorShape& shape, const char* name) {
  if (!(t.shape() == shape)) {
    throw tcn::DataError(std::string(name) +
                         " tensor shape differs from the model shape");
  }
}

tcn::TrainHooks make_hooks(tcn_epoch_callback callback, void* user) {
  tcn::TrainHooks hooks;
  if (callback != nullptr) {
    hooks.on_epoch = [callback, user](const tcn::EpochRecord& r) {
      callback(user, r.epoch, r.loss, r.valid_ap, r.wall_ms);
    };
  }
  return hooks;
}

}  // namespace

extern "C" {

const char* tcn_last_error(void) { return g_last_error.c_str(); }

const char* tcn_version(void) { return "0.1.0"; }

uint64_t tcn_derive_seed(uint64_t root, const char* name, uint64_t index) {
  return tcn::derive_seed(root, name == nullptr ? "" : name, index);
}

const char* tcn_fusion_name(tcn_fusion f) {
  static const char* const names[] = {"sum", "mean", "product", "concat"};
  return f >= TCN_FUSION_SUM && f <= TCN_FUSION_CONCAT ? names[f] : "";
}

tcn_status tcn_fusion_parse(const char* name, tcn_fusion* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = static_cast<tcn_fusion>(tcn::parse_fusion(name));
  });
}

const char* tcn_predictor_name(tcn_predictor p) {
  static const char* const names[] = {"cp", "tucker", "mlp", "conv"};
  return p >= TCN_PREDICTOR_CP && p <= TCN_PREDICTOR_CONV ? names[p] : "";
}

tcn_status tcn_predictor_parse(const char* name, tcn_predictor* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = static_cast<tcn_predictor>(tcn::parse_predictor(name));
  });
}

const char* tcn_candidates_name(tcn_candidates c) {
  switch (c) {
    case TCN_CANDIDATES_FULL: return "full";
    case TCN_CANDIDATES_SAMPLED: return "sampled";
  }
  return "";
}

tcn_status tcn_candidates_parse(const char* name, tcn_candidates* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = tcn::parse_candidate_kind(name) == tcn::CandidateKind::kFull
               ? TCN_CANDIDATES_FULL
               : TCN_CANDIDATES_SAMPLED;
  });
}

tcn_status tcn_tensor_load(const char* path, int index_base,
                           const int64_t* dims, size_t order,
                           size_t* duplicates, tcn_tensor** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    tcn::LoadOptions opts;
    opts.index_base = index_base;
    if (dims != nullptr) {
      opts.declared_shape = tcn::TensorShape({dims, dims + order});
    } else if (order > 0) {
      opts.order = order;
    }
    tcn::LoadResult r = tcn::load_coo(path, opts);
    if (duplicates != nullptr) *duplicates = r.duplicates;
    *out = new tcn_tensor{std::move(r.tensor)};
  });
}

tcn_status tcn_tensor_save(const tcn_tensor* t, const char* path) {
  return guarded([&] {
    require(t != nullptr && path != nullptr, "null argument");
    tcn::write_coo(t->value, std::string(path));
  });
}

tcn_status tcn_tensor_create(const int64_t* dims, size_t order,
                             const int64_t* indices, size_t nnz,
                             tcn_tensor** out) {
  return guarded([&] {
    require(dims != nullptr && out != nullptr, "null argument");
    require(indices != nullptr || nnz == 0, "null indices");
    tcn::TensorShape shape({dims, dims + order});
    *out = new tcn_tensor{
        tcn::SparseTensor::from_flat(shape, {indices, nnz * order})};
  });
}

void tcn_tensor_free(tcn_tensor* t) { delete t; }

size_t tcn_tensor_order(const tcn_tensor* t) {
  return t == nullptr ? 0 : t->value.order();
}

int64_t tcn_tensor_dim(const tcn_tensor* t, size_t n) {
  if (t == nullptr || n >= t->value.order()) return 0;
  return t->value.shape().dim(n);
}

size_t tcn_tensor_nnz(const tcn_tensor* t) {
  return t == nullptr ? 0 : t->value.nnz();
}

tcn_status tcn_tensor_entry(const tcn_tensor* t, size_t e, int64_t* out) {
  return guarded([&] {
    require(t != nullptr && out != nullptr, "null argument");
    require(e < t->value.nnz(), "entry index out of range");
    auto s = t->value.entry(e);
    std::copy(s.begin(), s.end(), out);
  });
}

int tcn_tensor_contains(const tcn_tensor* t, const int64_t* index) {
  if (t == nullptr || index == nullptr) return 0;
  return t->value.contains({index, t->value.order()}) ? 1 : 0;
}

tcn_status tcn_tensor_merge(const tcn_tensor* a, const tcn_tensor* b,
                            tcn_tensor** out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = new tcn_tensor{tcn::merge(a->value, b->value)};
  });
}

tcn_status tcn_tensor_split(const tcn_tensor* t, const double* ratios,
                            uint64_t seed, tcn_tensor** train,
                            tcn_tensor** valid, tcn_tensor** test) {
  return guarded([&] {
    require(t != nullptr && ratios != nullptr && train != nullptr &&
                valid != nullptr && test != nullptr,
            "null argument");
    tcn::DatasetSplit s =
        tcn::split(t->value, {ratios[0], ratios[1], ratios[2]}, seed);
    auto tr = std::make_unique<tcn_tensor>(tcn_tensor{std::move(s.train)});
    auto va = std::make_unique<tcn_tensor>(tcn_tensor{std::move(s.valid)});
    auto te = std::make_unique<tcn_tensor>(tcn_tensor{std::move(s.test)});
    *train = tr.release();
    *valid = va.release();
    *test = te.release();
  });
}

tcn_status tcn_synth_planted(const int64_t* dims, size_t order, int rank,
                             uint64_t n_obs, double noise_frac, uint64_t seed,
                             tcn_tensor** observed, tcn_tensor** holdout) {
  return guarded([&] {
    require(dims != nullptr && observed != nullptr, "null argument");
    tcn::PlantedData d = tcn::synth_planted(
        tcn::TensorShape({dims, dims + order}), rank, n_obs, noise_frac, seed);
    auto obs = std::make_unique<tcn_tensor>(tcn_tensor{std::move(d.observed)});
    if (holdout != nullptr) {
      *holdout = new tcn_tensor{std::move(d.holdout)};
    }
    *observed = obs.release();
  });
}

tcn_status tcn_graph_build(const tcn_tensor* t, tcn_graph** out) {
  return guarded([&] {
    require(t != nullptr && out != nullptr, "null argument");
    auto g = std::make_unique<tcn_graph>();
    g->shape = t->value.shape();
    auto start = std::chrono::steady_clock::now();
    tcn::CsrMatrix incidence = tcn::build_incidence(t->value);
    g->hypergraph_seconds = seconds_since(start);
    g->hyperedges = static_cast<std::size_t>(incidence.n_cols);
    g->incidence_nnz = incidence.nnz();
    g->incidence_bytes = incidence.bytes();
    start = std::chrono::steady_clock::now();
    g->clique = tcn::clique_expand(incidence, t->value.shape().dims());
    g->clique_seconds = seconds_since(start);
    g->adj = tcn::normalize(g->clique);
    *out = g.release();
  });
}

void tcn_graph_free(tcn_graph* g) { delete g; }

tcn_status tcn_graph_stats_get(const tcn_graph* g, tcn_graph_stats* out) {
  return guarded([&] {
    require(g != nullptr && out != nullptr, "null argument");
    tcn::GraphStats s = tcn::graph_stats(g->clique, g->clique_seconds);
    out->node_count = s.node_count;
    out->isolated_nodes = s.isolated_nodes;
    out->hyperedges = g->hyperedges;
    out->incidence_nnz = g->incidence_nnz;
    out->adjacency_nnz = s.nnz;
    out->undirected_edges = s.undirected_edges;
    out->max_degree = s.max_degree;
    out->mean_degree = s.mean_degree;
    out->hypergraph_seconds = g->hypergraph_seconds;
    out->clique_seconds = g->clique_seconds;
    out->hypergraph_bytes = g->incidence_bytes;
    out->clique_bytes = s.bytes;
  });
}

size_t tcn_graph_order(const tcn_graph* g) {
  return g == nullptr ? 0 : g->shape.order();
}

int64_t tcn_graph_dim_nodes(const tcn_graph* g, size_t n) {
  if (g == nullptr || n >= g->shape.order()) return 0;
  return g->shape.dim(n);
}

double tcn_graph_weight(const tcn_graph* g, int64_t i, int64_t j) {
  if (g == nullptr || i < 0 || j < 0 || i >= g->clique.node_count() ||
      j >= g->clique.node_count()) {
    return 0.0;
  }
  return g->clique.adjacency.at(i, j);
}

double tcn_graph_normalized_weight(const tcn_graph* g, int64_t i, int64_t j) {
  if (g == nullptr || i < 0 || j < 0 || i >= g->adj.node_count() ||
      j >= g->adj.node_count()) {
    return 0.0;
  }
  return g->adj.matrix.at(i, j);
}

tcn_status tcn_graph_write_edges(const tcn_graph* g, const char* path) {
  return guarded([&] {
    require(g != nullptr && path != nullptr, "null argument");
    std::ofstream out(path);
    if (!out) throw tcn::DataError(std::string("cannot write ") + path);
    tcn::write_edge_list(g->clique, out);
    if (!out) throw tcn::DataError(std::string("write failed: ") + path);
  });
}

void tcn_eval_options_default(tcn_eval_options* out) {
  if (out != nullptr) *out = from_protocol(tcn::EvalProtocol{});
}

void tcn_train_options_default(tcn_train_options* out) {
  if (out != nullptr) *out = from_config(tcn::TrainConfig{});
}

tcn_status tcn_model_train(const tcn_tensor* train, const tcn_tensor* valid,
                           const tcn_graph* graph,
                           const tcn_train_options* opts,
                           tcn_epoch_callback callback, void* user,
                           tcn_model** out) {
  return guarded([&] {
    require(train != nullptr && graph != nullptr && opts != nullptr &&
                out != nullptr,
            "null argument");
    tcn::TrainConfig config = to_config(*opts);
    tcn::validate(config);
    const tcn::TensorShape& shape = train->value.shape();
    check_graph_matches(*graph, shape);
    if (valid != nullptr) check_tensor_matches(valid->value, shape, "valid");
    auto m = std::make_unique<tcn_model>(
        tcn_model{tcn::init_training(shape, config)});
    tcn::train(m->state, train->value, valid ? &valid->value : nullptr,
               graph->adj, config.epochs, make_hooks(callback, user));
    *out = m.release();
  });
}

tcn_status tcn_model_resume(tcn_model* m, const tcn_tensor* train,
                            const tcn_tensor* valid, const tcn_graph* graph,
                            int epochs, tcn_epoch_callback callback,
                            void* user) {
  return guarded([&] {
    require(m != nullptr && train != nullptr && graph != nullptr,
            "null argument");
    require(epochs >= 0, "epochs must be non-negative");
    const tcn::TensorShape& shape = m->state.model.shape();
    check_tensor_matches(train->value, shape, "train");
    check_graph_matches(*graph, shape);
    if (valid != nullptr) check_tensor_matches(valid->value, shape, "valid");
    tcn::train(m->state, train->value, valid ? &valid->value : nullptr,
               graph->adj, epochs, make_hooks(callback, user));
  });
}

tcn_status tcn_model_save(const tcn_model* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "null argument");
    tcn::save_checkpoint(m->state, std::string(path));
  });
}

tcn_status tcn_model_load(const char* path, tcn_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new tcn_model{tcn::load_checkpoint(std::string(path))};
  });
}

void tcn_model_free(tcn_model* m) { delete m; }

tcn_status tcn_model_info_get(const tcn_model* m, tcn_model_info* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    const tcn::TrainState& s = m->state;
    out->epochs_done = s.epochs_done;
    out->best_epoch = s.best_epoch;
    out->best_valid_ap = s.best_valid;
    out->last_loss = s.log.empty() ? std::numeric_limits<double>::quiet_NaN()
                                   : s.log.back().loss;
    out->optimizer_step = s.optimizer.step;
  });
}

tcn_status tcn_model_options(const tcn_model* m, tcn_train_options* out) {
  return guarded([&] {
    require(m != nullptr && out != nullptr, "null argument");
    *out = from_config(m->state.config);
  });
}

size_t tcn_model_log_size(const tcn_model* m) {
  return m == nullptr ? 0 : m->state.log.size();
}

tcn_status tcn_model_log_entry(const tcn_model* m, size_t i, int* epoch,
                               double* loss, double* valid_ap,
                               double* wall_ms) {
  return guarded([&] {
    require(m != nullptr, "null argument");
    require(i < m->state.log.size(), "log index out of range");
    const tcn::EpochRecord& r = m->state.log[i];
    if (epoch != nullptr) *epoch = r.epoch;
    if (loss != nullptr) *loss = r.loss;
    if (valid_ap != nullptr) *valid_ap = r.valid_ap;
    if (wall_ms != nullptr) *wall_ms = r.wall_ms;
  });
}

tcn_status tcn_model_score(const tcn_model* m, const tcn_graph* graph,
                           const int64_t* cells, size_t count,
                           double* scores) {
  return guarded([&] {
    require(m != nullptr && graph != nullptr, "null argument");
    require((cells != nullptr && scores != nullptr) || count == 0,
            "null argument");
    const tcn::Model& model = m->state.selected();
    check_graph_matches(*graph, model.shape());
    const std::size_t order = model.shape().order();
    std::span<const tcn::Index> flat(cells, count * order);
    for (std::size_t c = 0; c < count; ++c) {
      if (!model.shape().contains(flat.subspan(c * order, order))) {
        throw tcn::UsageError("cell " + std::to_string(c) +
                              " is outside the tensor shape");
      }
    }
    tcn::FusedFeatures feat = model.features(graph->adj);
    std::vector<double> s = model.score(feat, flat);
    std::copy(s.begin(), s.end(), scores);
  });
}

tcn_status tcn_evaluate(const tcn_model* m, const tcn_graph* graph,
                        const tcn_tensor* train, const tcn_tensor* valid,
                        const tcn_tensor* test, const tcn_eval_options* opts,
                        const size_t* ks, size_t n_k, tcn_metric_row* rows,
                        const char* ranked_path) {
  return guarded([&] {
    require(m != nullptr && graph != nullptr && train != nullptr &&
                test != nullptr && opts != nullptr && ks != nullptr &&
                rows != nullptr,
            "null argument");
    require(n_k > 0, "at least one k is required");
    const tcn::Model& model = m->state.selected();
    const tcn::TensorShape& shape = model.shape();
    check_graph_matches(*graph, shape);
    check_tensor_matches(train->value, shape, "train");
    check_tensor_matches(test->value, shape, "test");
    if (valid != nullptr) check_tensor_matches(valid->value, shape, "valid");
    tcn::EvalReport report = tcn::evaluate(
        model, graph->adj, train->value, valid ? &valid->value : nullptr,
        test->value, to_protocol(*opts), {ks, n_k});
    for (std::size_t i = 0; i < n_k; ++i) {
      rows[i].k = report.rows[i].k;
      rows[i].ap = report.rows[i].ap;
      rows[i].precision = report.rows[i].precision;
      rows[i].n_test = report.n_test;
      rows[i].n_candidates = report.n_candidates;
    }
    if (ranked_path != nullptr) {
      std::ofstream out(ranked_path);
      if (!out) throw tcn::DataError(std::string("cannot write ") + ranked_path);
      tcn::write_ranked_list(report.ranked, test->value, out);
      if (!out) throw tcn::DataError(std::string("write failed: ") + ranked_path);
    }
  });
}

tcn_status tcn_ap_at_k(const tcn_tensor* test, const int64_t* ranked,
                       size_t n_ranked, size_t k, double* ap,
                       double* precision) {
  return guarded([&] {
    require(test != nullptr, "null argument");
    require(ranked != nullptr || n_ranked == 0, "null ranking");
    const tcn::TensorShape& shape = test->value.shape();
    const std::size_t order = shape.order();
    tcn::RankedList list{shape, {}};
    list.entries.reserve(n_ranked);
    for (std::size_t i = 0; i < n_ranked; ++i) {
      std::span<const tcn::Index> cell(ranked + i * order, order);
      if (!shape.contains(cell)) {
        throw tcn::UsageError("ranked cell " + std::to_string(i) +
                              " is outside the tensor shape");
      }
      list.entries.push_back(
          {shape.key(cell), -static_cast<double>(i)});
    }
    if (ap != nullptr) *ap = tcn::ap_at_k(list, test->value, k);
    if (precision != nullptr) {
      *precision = tcn::precision_at_k(list, test->value, k);
    }
  });
}

}  // extern "C"

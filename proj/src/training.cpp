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

#include "training.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace tcn {

void validate(const TrainConfig& c) {
  if (c.model.rank < 1) throw UsageError("rank must be at least 1");
  if (c.model.propagation.layers < 0) throw UsageError("layers must be >= 0");
  if (c.epochs < 0) throw UsageError("epochs must be >= 0");
  if (c.batch_size < 1) throw UsageError("batch size must be positive");
  if (!(c.learning_rate >= 0.0)) throw UsageError("learning rate must be >= 0");
  if (!(c.weight_decay >= 0.0)) throw UsageError("weight decay must be >= 0");
  if (c.negatives_per_positive < 1) {
    throw UsageError("negatives per positive must be positive");
  }
  if (c.valid_every < 0) throw UsageError("valid_every must be >= 0");
  if (c.valid_k < 1) throw UsageError("valid_k must be positive");
}

void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads,
               OptimizerState& state, double learning_rate,
               double weight_decay) {
  if (params.size() != grads.size()) {
    throw UsageError("adam_step: parameter/gradient block count mismatch");
  }
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw UsageError("adam_step: optimizer state does not match parameters");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() ||
        state.first_moment[b].size() != params[b].size()) {
      throw UsageError("adam_step: block " + std::to_string(b) +
                       " shape mismatch");
    }
    if (!all_finite(grads[b])) {
      throw NumericError("adam_step: non-finite gradient in parameter block " +
                         std::to_string(b));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const double shrink = 1.0 - learning_rate * weight_decay;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = state.first_moment[b];
    auto& v = state.second_moment[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] *= shrink;
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

std::vector<Index> sample_negatives(std::span<const Index> positives,
                                    const SparseTensor& observed, Rng& rng,
                                    std::size_t* redraws) {
  constexpr int kMaxRetries = 100;
  const TensorShape& shape = observed.shape();
  const std::size_t order = shape.order();
  const std::size_t count = positives.size() / order;
  std::vector<Index> out(count * order);
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < count; ++i) {
    auto cell = std::span<Index>(out).subspan(i * order, order);
    int attempt = 0;
    while (true) {
      for (std::size_t n = 0; n < order; ++n) {
        cell[n] = static_cast<Index>(
            rng.below(static_cast<std::uint64_t>(shape.dim(n))));
      }
      if (!observed.contains_key(shape.key(cell))) break;
      ++rejected;
      if (++attempt >= kMaxRetries) {
        throw NumericError(
            "negative sampling rejected " + std::to_string(kMaxRetries) +
            " draws in a row; the tensor is too dense for uniform negatives");
      }
    }
  }
  if (redraws) *redraws = rejected;
  return out;
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

BprResult bpr_loss(std::span<const double> pos_scores,
                   std::span<const double> neg_scores) {
  if (pos_scores.size() != neg_scores.size()) {
    throw UsageError("bpr_loss: score vectors differ in length");
  }
  BprResult r;
  r.dpos.resize(pos_scores.size());
  r.dneg.resize(pos_scores.size());
  for (std::size_t i = 0; i < pos_scores.size(); ++i) {
    const double x = pos_scores[i] - neg_scores[i];
    r.loss += softplus(-x);
    const double s = sigmoid(-x);
    r.dpos[i] = -s;
    r.dneg[i] = s;
  }
  return r;
}

double batch_loss(const Model& model, const NormalizedAdjacency& adj,
                  std::span<const Index> positives,
                  std::span<const Index> negatives, ModelGrads* grads) {
  if (positives.size() != negatives.size()) {
    throw UsageError("batch_loss: positives and negatives differ in length");
  }
  const FactorStack stack = model.propagate(adj);
  const FusionKind fusion = model.config().fusion;
  const FusedFeatures feat = fuse(stack, fusion);
  const Predictor& predictor = model.predictor();
  const auto& offsets = model.offsets();

  ScoreBatch pos = score_batch(predictor, feat, positives, offsets);
  ScoreBatch neg = score_batch(predictor, feat, negatives, offsets);
  const BprResult bpr = bpr_loss(pos.scores, neg.scores);
  if (grads == nullptr) return bpr.loss;

  backward_batch(predictor, feat, positives, offsets, bpr.dpos, pos);
  backward_batch(predictor, feat, negatives, offsets, bpr.dneg, neg);

  *grads = model.zero_grads();
  for (std::size_t b = 0; b < grads->predictor.size(); ++b) {
    auto& dst = grads->predictor[b];
    for (std::size_t i = 0; i < dst.size(); ++i) {
      dst[i] = pos.param_grads[b][i] + neg.param_grads[b][i];
    }
  }

  Matrix grad_fused(feat.rows(), feat.width());
  const std::size_t order = offsets.size();
  const GatherLayout layout = predictor.layout();
  for (std::size_t i = 0; i < pos.scores.size(); ++i) {
    gather_backward(feat, positives.subspan(i * order, order), offsets, layout,
                    pos.input_grads[i], grad_fused);
    gather_backward(feat, negatives.subspan(i * order, order), offsets, layout,
                    neg.input_grads[i], grad_fused);
  }
  const std::vector<Matrix> layer_grads =
      fuse_backward(stack, fusion, grad_fused);
  PropagationGrads pg = propagate_backward(
      adj, stack, layer_grads, model.config().propagation, model.transforms());
  grads->embeddings = std::move(pg.embeddings);
  if (!pg.transforms.empty()) grads->transforms = std::move(pg.transforms);
  return bpr.loss;
}

TrainState init_training(const TensorShape& shape, const TrainConfig& config) {
  validate(config);
  TrainState state;
  state.config = config;
  state.model = Model(shape, config.model, config.seed);
  return state;
}

void train(TrainState& state, const SparseTensor& train_set,
           const SparseTensor* valid_set, const NormalizedAdjacency& adj,
           int epochs, const TrainHooks& hooks) {
  const TrainConfig& cfg = state.config;
  validate(cfg);
  if (train_set.empty()) throw DataError("training set is empty");
  if (!(train_set.shape() == state.model.shape())) {
    throw DataError("training data shape does not match the model");
  }
  if (adj.node_count() != state.model.shape().node_count()) {
    throw DataError("graph node count does not match the model");
  }
  const std::size_t order = train_set.order();
  const std::size_t per = cfg.negatives_per_positive;

  for (int step = 0; step < epochs; ++step) {
    const auto started = std::chrono::steady_clock::now();
    const int epoch = state.epochs_done + 1;
    std::vector<std::size_t> perm(train_set.nnz());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", epoch));
    shuffle_rng.shuffle(perm);
    Rng neg_rng(derive_seed(cfg.seed, "negatives", epoch));

    double total = 0.0;
    std::size_t pairs = 0;
    std::size_t batch_no = 0;
    for (std::size_t begin = 0; begin < perm.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(perm.size(), begin + cfg.batch_size);
      std::vector<Index> pos;
      pos.reserve((end - begin) * per * order);
      for (std::size_t i = begin; i < end; ++i) {
        auto e = train_set.entry(perm[i]);
        for (std::size_t r = 0; r < per; ++r) pos.insert(pos.end(), e.begin(), e.end());
      }
      std::vector<Index> neg = sample_negatives(pos, train_set, neg_rng);
      if (cfg.audit_negatives) {
        for (std::size_t i = 0; i < neg.size(); i += order) {
          if (train_set.contains(std::span<const Index>(neg).subspan(i, order))) {
            throw NumericError("negative sample collides with training data");
          }
        }
      }
      ModelGrads grads;
      const double loss = batch_loss(state.model, adj, pos, neg, &grads);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(batch_no));
      }
      const auto params = state.model.parameter_views();
      const auto gviews = state.model.gradient_views(grads);
      adam_step(params, gviews, state.optimizer, cfg.learning_rate,
                cfg.weight_decay);
      total += loss;
      pairs += pos.size() / order;
      ++batch_no;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = total / static_cast<double>(pairs);
    rec.valid_ap = std::numeric_limits<double>::quiet_NaN();
    if (valid_set != nullptr && !valid_set->empty() && cfg.valid_every > 0 &&
        epoch % cfg.valid_every == 0) {
      EvalProtocol protocol = cfg.valid_protocol;
      protocol.seed = derive_seed(cfg.seed, "valid_candidates");
      const std::size_t ks[] = {cfg.valid_k};
      EvalReport report = evaluate(state.model, adj, train_set, nullptr,
                                   *valid_set, protocol, ks);
      rec.valid_ap = report.rows[0].ap;
    }
    state.epochs_done = epoch;
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - started)
                      .count();
    state.log.push_back(rec);
    const bool improved = !std::isnan(rec.valid_ap) &&
                          (state.best_epoch < 0 || rec.valid_ap > state.best_valid);
    if (improved) {
      state.best_epoch = epoch;
      state.best_valid = rec.valid_ap;
      state.best_model = state.model;
    }
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (improved && hooks.on_best) hooks.on_best(state);
    if (hooks.on_state) hooks.on_state(state);
  }
}

}  // namespace tcn

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

#ifndef TCN_TRAINING_HPP_
#define TCN_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "evaluation.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace tcn {

struct TrainConfig {
  ModelConfig model;
  int epochs = 100;
  std::size_t batch_size = 256;
  double learning_rate = 1e-2;
  double weight_decay = 0.0;
  std::size_t negatives_per_positive = 1;
  std::uint64_t seed = 0;
  // Validation AP@valid_k every valid_every epochs; 0 disables.
  int valid_every = 1;
  std::size_t valid_k = 100;
  EvalProtocol valid_protocol;
  // Propagation graph was built from train ∪ valid.
  bool graph_includes_valid = false;
  // Re-check every sampled negative against the training set.
  bool audit_negatives = false;

  bool operator==(const TrainConfig&) const = default;
};

// Throws UsageError on out-of-range values.
void validate(const TrainConfig& config);

struct OptimizerState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  // Sized lazily on the first step, one entry per parameter block.
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;

  bool operator==(const OptimizerState&) const = default;
};

// Bias-corrected Adam with decoupled weight decay:
//   θ ← θ (1 - lr·wd), then θ ← θ - lr · m̂ / (sqrt(v̂) + ε).
// Throws NumericError on a non-finite gradient.
void adam_step(std::span<const std::span<double>> params,
               std::span<const std::span<const double>> grads,
               OptimizerState& state, double learning_rate,
               double weight_decay);

// One uniform cell per positive, redrawn while it is in `observed`.
// Throws NumericError after 100 rejections in a row.
std::vector<Index> sample_negatives(std::span<const Index> positives,
                                    const SparseTensor& observed, Rng& rng,
                                    std::size_t* redraws = nullptr);

struct BprResult {
  double loss = 0.0;
  std::vector<double> dpos;
  std::vector<double> dneg;
};

// Σ -log σ(s⁺ - s⁻) and its gradients, stable for large |s⁺ - s⁻|.
BprResult bpr_loss(std::span<const double> pos_scores,
                   std::span<const double> neg_scores);

// Forward + backward of the summed pairwise loss for one batch; positives
// and negatives are parallel flat N-wide rows. grads may be null.
double batch_loss(const Model& model, const NormalizedAdjacency& adj,
                  std::span<const Index> positives,
                  std::span<const Index> negatives, ModelGrads* grads);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;       // mean per pair
  double valid_ap = 0.0;   // NaN when not evaluated
  double wall_ms = 0.0;
};

// Everything needed to continue training exactly where it stopped.
struct TrainState {
  TrainConfig config;
  Model model;
  OptimizerState optimizer;
  int epochs_done = 0;
  std::vector<EpochRecord> log;
  // Snapshot at the best validation score so far.
  std::optional<Model> best_model;
  int best_epoch = -1;
  double best_valid = 0.0;

  // Best-validation model when validation ran, else the current model.
  const Model& selected() const { return best_model ? *best_model : model; }
};

TrainState init_training(const TensorShape& shape, const TrainConfig& config);

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
  std::function<void(const TrainState&)> on_best;
  // Called with the state after every epoch; the caller decides whether to
  // checkpoint.
  std::function<void(const TrainState&)> on_state;
};

// Runs `epochs` more epochs. Every epoch draws its shuffle and negatives from
// sub-seeds keyed by the epoch number, so stopping and resuming reproduces
// an uninterrupted run.
void train(TrainState& state, const SparseTensor& train_set,
           const SparseTensor* valid_set, const NormalizedAdjacency& adj,
           int epochs, const TrainHooks& hooks = {});

}  // namespace tcn

#endif  // TCN_TRAINING_HPP_

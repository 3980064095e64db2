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

#include "model.hpp"

namespace tcn {

std::pair<std::size_t, std::size_t> predictor_input_shape(
    std::size_t order, const ModelConfig& config) {
  const std::size_t slices =
      config.fusion == FusionKind::kConcat
          ? static_cast<std::size_t>(config.propagation.layers) + 1
          : 1;
  if (config.predictor == PredictorKind::kConv) {
    return {order * slices, config.rank};
  }
  return {order, config.rank * slices};
}

Model::Model(TensorShape shape, ModelConfig config, std::uint64_t seed)
    : shape_(std::move(shape)), config_(config) {
  if (config_.rank < 1) throw UsageError("rank must be at least 1");
  if (config_.propagation.layers < 0) {
    throw UsageError("layer count must be nonnegative");
  }
  embeddings_ = init_embeddings(shape_, config_.rank, InitScheme{},
                                derive_seed(seed, "init"));
  if (config_.propagation.feature_transform) {
    Rng rng(derive_seed(seed, "transforms"));
    for (int l = 0; l < config_.propagation.layers; ++l) {
      transforms_.push_back(glorot_uniform(config_.rank, config_.rank, rng));
    }
  }
  const auto [rows, cols] = predictor_input_shape(shape_.order(), config_);
  Rng rng(derive_seed(seed, "predictor"));
  predictor_ = make_predictor(config_.predictor, rows, cols,
                              config_.predictor_options, rng);
}

Model::Model(const Model& other)
    : shape_(other.shape_),
      config_(other.config_),
      embeddings_(other.embeddings_),
      transforms_(other.transforms_),
      predictor_(other.predictor_ ? other.predictor_->clone() : nullptr) {}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

FactorStack Model::propagate(const NormalizedAdjacency& adj) const {
  return tcn::propagate(embeddings_.weights, adj, config_.propagation,
                        transforms_);
}

FusedFeatures Model::features(const NormalizedAdjacency& adj) const {
  return fuse(propagate(adj), config_.fusion);
}

std::vector<double> Model::score(const FusedFeatures& feat,
                                 std::span<const Index> cells) const {
  return score_batch(*predictor_, feat, cells, offsets()).scores;
}

ModelGrads Model::zero_grads() const {
  ModelGrads g;
  g.embeddings = Matrix(embeddings_.rows(), embeddings_.rank());
  for (const auto& w : transforms_) g.transforms.emplace_back(w.rows(), w.cols());
  g.predictor = predictor_->zero_grads();
  return g;
}

std::vector<std::span<double>> Model::parameter_views() {
  std::vector<std::span<double>> out;
  out.push_back(embeddings_.weights.data());
  for (auto& w : transforms_) out.push_back(w.data());
  for (auto& p : predictor_->params()) out.push_back(p.values);
  return out;
}

std::vector<std::span<const double>> Model::gradient_views(
    const ModelGrads& grads) const {
  std::vector<std::span<const double>> out;
  out.push_back(grads.embeddings.data());
  for (const auto& w : grads.transforms) out.push_back(w.data());
  for (const auto& p : grads.predictor) out.push_back(p);
  return out;
}

}  // namespace tcn

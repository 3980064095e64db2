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

#ifndef TCN_MODEL_HPP_
#define TCN_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "predictors.hpp"
#include "propagation.hpp"
#include "tensor.hpp"

namespace tcn {

struct ModelConfig {
  std::size_t rank = 10;
  PropagationConfig propagation;
  FusionKind fusion = FusionKind::kConcat;
  PredictorKind predictor = PredictorKind::kCp;
  PredictorOptions predictor_options;

  bool operator==(const ModelConfig&) const = default;
};

// Gradient of a scalar loss wrt every learnable parameter of a Model.
struct ModelGrads {
  Matrix embeddings;
  std::vector<Matrix> transforms;
  ParamGrads predictor;
};

// Learnable encoder (F^[0], optional W^[l]) plus a predictor head.
class Model {
 public:
  Model() = default;
  // Fresh initialization. Embeddings and transforms draw from sub-seeds of
  // `seed`.
  Model(TensorShape shape, ModelConfig config, std::uint64_t seed);

  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const TensorShape& shape() const { return shape_; }
  const ModelConfig& config() const { return config_; }
  const std::vector<Index>& offsets() const { return embeddings_.offsets; }

  EmbeddingTable& embeddings() { return embeddings_; }
  const EmbeddingTable& embeddings() const { return embeddings_; }
  std::vector<Matrix>& transforms() { return transforms_; }
  const std::vector<Matrix>& transforms() const { return transforms_; }
  Predictor& predictor() { return *predictor_; }
  const Predictor& predictor() const { return *predictor_; }

  FactorStack propagate(const NormalizedAdjacency& adj) const;
  // Propagation + fusion; computed once before ranking.
  FusedFeatures features(const NormalizedAdjacency& adj) const;
  std::vector<double> score(const FusedFeatures& feat,
                            std::span<const Index> cells) const;

  ModelGrads zero_grads() const;
  // Mutable views over every parameter block, in a fixed order:
  // embeddings, transforms, predictor blocks.
  std::vector<std::span<double>> parameter_views();
  std::vector<std::span<const double>> gradient_views(
      const ModelGrads& grads) const;

 private:
  TensorShape shape_;
  ModelConfig config_;
  EmbeddingTable embeddings_;
  std::vector<Matrix> transforms_;
  std::unique_ptr<Predictor> predictor_;
};

// Input shape the predictor sees for a given shape and configuration.
std::pair<std::size_t, std::size_t> predictor_input_shape(
    std::size_t order, const ModelConfig& config);

}  // namespace tcn

#endif  // TCN_MODEL_HPP_

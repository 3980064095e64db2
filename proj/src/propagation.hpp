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

#ifndef TCN_PROPAGATION_HPP_
#define TCN_PROPAGATION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "graph.hpp"
#include "tensor.hpp"

namespace tcn {

struct PropagationConfig {
  int layers = 2;
  // Per-layer r x r weight W^[l] after aggregation.
  bool feature_transform = false;
  // Rectifier after each layer.
  bool nonlinearity = false;

  bool operator==(const PropagationConfig&) const = default;
};

// F^[0]: the factor matrices of all dimensions stacked vertically. Row
// i + offsets[n] belongs to entity i of dimension n.
struct EmbeddingTable {
  Matrix weights;
  std::vector<Index> dims;
  std::vector<Index> offsets;

  std::size_t rank() const { return weights.cols(); }
  std::size_t rows() const { return weights.rows(); }
};

enum class InitKind { kGlorotUniform, kUniform };

struct InitScheme {
  InitKind kind = InitKind::kGlorotUniform;
  // Half-width for kUniform.
  double scale = 0.1;
};

// Uniform in (-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

EmbeddingTable init_embeddings(const TensorShape& shape, std::size_t rank,
                               const InitScheme& scheme, std::uint64_t seed);

// Layers F^[0..L] plus what the backward pass needs.
struct FactorStack {
  std::vector<Matrix> layers;
  // Ã F^[l] for l < L; kept only with feature_transform.
  std::vector<Matrix> aggregated;
  // Input of the rectifier for layer l + 1; kept only with nonlinearity.
  std::vector<Matrix> pre_activation;

  int depth() const { return static_cast<int>(layers.size()) - 1; }
};

// F^[l+1] = act(Ã F^[l] W^[l]); with both flags off, F^[l+1] = Ã F^[l].
// transforms must hold `layers` r x r matrices when feature_transform is set.
FactorStack propagate(const Matrix& f0, const NormalizedAdjacency& adj,
                      const PropagationConfig& config,
                      std::span<const Matrix> transforms = {});

struct PropagationGrads {
  Matrix embeddings;
  std::vector<Matrix> transforms;
};

// Reverse accumulation through propagate(). layer_grads[l] is the gradient
// entering at F^[l] (from fusion). Uses Ã^T = Ã.
PropagationGrads propagate_backward(const NormalizedAdjacency& adj,
                                    const FactorStack& stack,
                                    std::span<const Matrix> layer_grads,
                                    const PropagationConfig& config,
                                    std::span<const Matrix> transforms = {});

enum class FusionKind { kSum, kMean, kProduct, kConcat };

std::string to_string(FusionKind kind);
FusionKind parse_fusion(const std::string& name);

// F_final. For concat the matrix is the horizontal concatenation
// [F^[0] | ... | F^[L]], which doubles as the |V| x r x (L+1) stacked view.
class FusedFeatures {
 public:
  FusedFeatures() = default;
  FusedFeatures(FusionKind kind, Matrix values, std::size_t slices,
                std::size_t rank)
      : kind_(kind), values_(std::move(values)), slices_(slices),
        rank_(rank) {}

  FusionKind kind() const { return kind_; }
  const Matrix& values() const { return values_; }
  std::size_t rows() const { return values_.rows(); }
  std::size_t width() const { return values_.cols(); }
  // Third-mode length of the stacked view: L + 1 for concat, else 1.
  std::size_t slices() const { return slices_; }
  std::size_t rank() const { return rank_; }

  double stacked(std::size_t node, std::size_t col, std::size_t slice) const {
    return values_(node, slice * rank_ + col);
  }
  Matrix slice(std::size_t l) const;

 private:
  FusionKind kind_ = FusionKind::kSum;
  Matrix values_;
  std::size_t slices_ = 1;
  std::size_t rank_ = 0;
};

FusedFeatures fuse(const FactorStack& stack, FusionKind kind);

// Gradient of a loss wrt each F^[l], given its gradient wrt F_final.
std::vector<Matrix> fuse_backward(const FactorStack& stack, FusionKind kind,
                                  const Matrix& grad_fused);

enum class GatherLayout {
  // N rows of width `width()`.
  kRows,
  // (slices * N) x r: for each entity its (L+1) x r block, stacked.
  kStacked,
};

std::pair<std::size_t, std::size_t> gathered_shape(const FusedFeatures& feat,
                                                   std::size_t order,
                                                   GatherLayout layout);

// Copies the rows of the entities of one interaction.
Matrix gather(const FusedFeatures& feat, std::span<const Index> interaction,
              std::span<const Index> offsets, GatherLayout layout);

// Adds the gradient of gathered rows back into grad_fused.
void gather_backward(const FusedFeatures& feat,
                     std::span<const Index> interaction,
                     std::span<const Index> offsets, GatherLayout layout,
                     const Matrix& grad_rows, Matrix& grad_fused);

}  // namespace tcn

#endif  // TCN_PROPAGATION_HPP_

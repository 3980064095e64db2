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

#include "propagation.hpp"

#include <cmath>

namespace tcn {

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-a, a);
  return m;
}

EmbeddingTable init_embeddings(const TensorShape& shape, std::size_t rank,
                               const InitScheme& scheme, std::uint64_t seed) {
  if (rank < 1) throw UsageError("embedding rank must be at least 1");
  Rng rng(seed);
  EmbeddingTable t;
  t.dims = shape.dims();
  t.offsets = shape.offsets();
  const auto rows = static_cast<std::size_t>(shape.node_count());
  if (scheme.kind == InitKind::kGlorotUniform) {
    t.weights = glorot_uniform(rows, rank, rng);
  } else {
    t.weights = Matrix(rows, rank);
    for (double& v : t.weights.data()) v = rng.uniform(-scheme.scale, scheme.scale);
  }
  return t;
}

FactorStack propagate(const Matrix& f0, const NormalizedAdjacency& adj,
                      const PropagationConfig& config,
                      std::span<const Matrix> transforms) {
  if (config.layers < 0) throw UsageError("layer count must be nonnegative");
  if (static_cast<std::size_t>(adj.node_count()) != f0.rows()) {
    throw UsageError("propagate: adjacency has " +
                     std::to_string(adj.node_count()) + " nodes but table has " +
                     std::to_string(f0.rows()) + " rows");
  }
  if (config.feature_transform &&
      transforms.size() != static_cast<std::size_t>(config.layers)) {
    throw UsageError("propagate: one transform per layer required");
  }
  FactorStack stack;
  stack.layers.reserve(static_cast<std::size_t>(config.layers) + 1);
  stack.layers.push_back(f0);
  for (int l = 0; l < config.layers; ++l) {
    Matrix next = spmm(adj.matrix, stack.layers.back());
    if (config.feature_transform) {
      stack.aggregated.push_back(next);
      next = matmul(next, transforms[l]);
    }
    if (config.nonlinearity) {
      stack.pre_activation.push_back(next);
      for (double& v : next.data()) v = v > 0.0 ? v : 0.0;
    }
    stack.layers.push_back(std::move(next));
  }
  return stack;
}

PropagationGrads propagate_backward(const NormalizedAdjacency& adj,
                                    const FactorStack& stack,
                                    std::span<const Matrix> layer_grads,
                                    const PropagationConfig& config,
                                    std::span<const Matrix> transforms) {
  const int depth = stack.depth();
  if (layer_grads.size() != stack.layers.size()) {
    throw UsageError("propagate_backward: one gradient per layer required");
  }
  for (std::size_t l = 0; l < layer_grads.size(); ++l) {
    if (layer_grads[l].rows() != stack.layers[l].rows() ||
        layer_grads[l].cols() != stack.layers[l].cols()) {
      throw UsageError("propagate_backward: gradient shape mismatch");
    }
  }
  if (config.nonlinearity &&
      stack.pre_activation.size() != static_cast<std::size_t>(depth)) {
    throw UsageError("propagate_backward: missing pre-activation cache");
  }
  if (config.feature_transform &&
      (stack.aggregated.size() != static_cast<std::size_t>(depth) ||
       transforms.size() != static_cast<std::size_t>(depth))) {
    throw UsageError("propagate_backward: missing transform cache");
  }

  PropagationGrads grads;
  if (config.feature_transform) grads.transforms.resize(depth);
  Matrix g = layer_grads[depth];
  for (int l = depth; l >= 1; --l) {
    if (config.nonlinearity) {
      const Matrix& pre = stack.pre_activation[l - 1];
      auto gd = g.data();
      auto pd = pre.data();
      for (std::size_t i = 0; i < gd.size(); ++i) {
        if (!(pd[i] > 0.0)) gd[i] = 0.0;
      }
    }
    if (config.feature_transform) {
      grads.transforms[l - 1] = matmul_tn(stack.aggregated[l - 1], g);
      g = matmul_nt(g, transforms[l - 1]);
    }
    g = spmm(adj.matrix, g);
    auto gd = g.data();
    auto in = layer_grads[l - 1].data();
    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] += in[i];
  }
  grads.embeddings = std::move(g);
  return grads;
}

std::string to_string(FusionKind kind) {
  switch (kind) {
    case FusionKind::kSum: return "sum";
    case FusionKind::kMean: return "mean";
    case FusionKind::kProduct: return "product";
    case FusionKind::kConcat: return "concat";
  }
  return "?";
}

FusionKind parse_fusion(const std::string& name) {
  if (name == "sum") return FusionKind::kSum;
  if (name == "mean") return FusionKind::kMean;
  if (name == "product") return FusionKind::kProduct;
  if (name == "concat") return FusionKind::kConcat;
  throw UsageError("unknown fusion operator '" + name + "'");
}

Matrix FusedFeatures::slice(std::size_t l) const {
  Matrix out(rows(), rank_);
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t c = 0; c < rank_; ++c) out(i, c) = stacked(i, c, l);
  }
  return out;
}

FusedFeatures fuse(const FactorStack& stack, FusionKind kind) {
  if (stack.layers.empty()) throw UsageError("fuse: empty stack");
  const Matrix& first = stack.layers.front();
  const std::size_t rows = first.rows();
  const std::size_t rank = first.cols();
  const std::size_t count = stack.layers.size();
  if (kind == FusionKind::kConcat) {
    Matrix out(rows, rank * count);
    for (std::size_t l = 0; l < count; ++l) {
      for (std::size_t i = 0; i < rows; ++i) {
        auto src = stack.layers[l].row(i);
        std::copy(src.begin(), src.end(), out.row(i).begin() + l * rank);
      }
    }
    return {kind, std::move(out), count, rank};
  }
  Matrix out = first;
  auto od = out.data();
  for (std::size_t l = 1; l < count; ++l) {
    auto src = stack.layers[l].data();
    if (kind == FusionKind::kProduct) {
      for (std::size_t i = 0; i < od.size(); ++i) od[i] *= src[i];
    } else {
      for (std::size_t i = 0; i < od.size(); ++i) od[i] += src[i];
    }
  }
  if (kind == FusionKind::kMean && count > 1) {
    const double g = 1.0 / static_cast<double>(count);
    for (double& v : od) v *= g;
  }
  return {kind, std::move(out), 1, rank};
}

std::vector<Matrix> fuse_backward(const FactorStack& stack, FusionKind kind,
                                  const Matrix& grad_fused) {
  const std::size_t count = stack.layers.size();
  const std::size_t rows = stack.layers.front().rows();
  const std::size_t rank = stack.layers.front().cols();
  std::vector<Matrix> out;
  out.reserve(count);
  switch (kind) {
    case FusionKind::kSum:
    case FusionKind::kMean: {
      Matrix g = grad_fused;
      if (kind == FusionKind::kMean && count > 1) {
        const double s = 1.0 / static_cast<double>(count);
        for (double& v : g.data()) v *= s;
      }
      for (std::size_t l = 0; l < count; ++l) out.push_back(g);
      break;
    }
    case FusionKind::kProduct: {
      // Leave-one-out products via prefix/suffix sweeps; no division, so
      // zero factors are handled.
      const std::size_t n = rows * rank;
      std::vector<double> prefix(n, 1.0);
      for (std::size_t l = 0; l < count; ++l) {
        Matrix g(rows, rank);
        auto gd = g.data();
        auto up = grad_fused.data();
        for (std::size_t i = 0; i < n; ++i) gd[i] = up[i] * prefix[i];
        auto src = stack.layers[l].data();
        for (std::size_t i = 0; i < n; ++i) prefix[i] *= src[i];
        out.push_back(std::move(g));
      }
      std::vector<double> suffix(n, 1.0);
      for (std::size_t l = count; l-- > 0;) {
        auto gd = out[l].data();
        for (std::size_t i = 0; i < n; ++i) gd[i] *= suffix[i];
        auto src = stack.layers[l].data();
        for (std::size_t i = 0; i < n; ++i) suffix[i] *= src[i];
      }
      break;
    }
    case FusionKind::kConcat: {
      for (std::size_t l = 0; l < count; ++l) {
        Matrix g(rows, rank);
        for (std::size_t i = 0; i < rows; ++i) {
          auto src = grad_fused.row(i).subspan(l * rank, rank);
          std::copy(src.begin(), src.end(), g.row(i).begin());
        }
        out.push_back(std::move(g));
      }
      break;
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> gathered_shape(const FusedFeatures& feat,
                                                   std::size_t order,
                                                   GatherLayout layout) {
  if (layout == GatherLayout::kRows) return {order, feat.width()};
  return {order * feat.slices(), feat.rank()};
}

namespace {

std::size_t node_of(const FusedFeatures& feat,
                    std::span<const Index> interaction,
                    std::span<const Index> offsets, std::size_t n) {
  const Index limit = n + 1 < offsets.size()
                          ? offsets[n + 1]
                          : static_cast<Index>(feat.rows());
  const Index node = interaction[n] + offsets[n];
  if (interaction[n] < 0 || node >= limit) {
    throw DataError("gather: index " + std::to_string(interaction[n]) +
                    " out of bounds in dimension " + std::to_string(n));
  }
  return static_cast<std::size_t>(node);
}

}  // namespace

Matrix gather(const FusedFeatures& feat, std::span<const Index> interaction,
              std::span<const Index> offsets, GatherLayout layout) {
  if (interaction.size() != offsets.size()) {
    throw DataError("gather: interaction arity does not match tensor order");
  }
  const auto [rows, cols] = gathered_shape(feat, interaction.size(), layout);
  Matrix out(rows, cols);
  for (std::size_t n = 0; n < interaction.size(); ++n) {
    auto src = feat.values().row(node_of(feat, interaction, offsets, n));
    if (layout == GatherLayout::kRows) {
      std::copy(src.begin(), src.end(), out.row(n).begin());
    } else {
      const std::size_t r = feat.rank();
      for (std::size_t l = 0; l < feat.slices(); ++l) {
        auto part = src.subspan(l * r, r);
        std::copy(part.begin(), part.end(),
                  out.row(n * feat.slices() + l).begin());
      }
    }
  }
  return out;
}

void gather_backward(const FusedFeatures& feat,
                     std::span<const Index> interaction,
                     std::span<const Index> offsets, GatherLayout layout,
                     const Matrix& grad_rows, Matrix& grad_fused) {
  for (std::size_t n = 0; n < interaction.size(); ++n) {
    auto dst = grad_fused.row(node_of(feat, interaction, offsets, n));
    if (layout == GatherLayout::kRows) {
      auto src = grad_rows.row(n);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    } else {
      const std::size_t r = feat.rank();
      for (std::size_t l = 0; l < feat.slices(); ++l) {
        auto src = grad_rows.row(n * feat.slices() + l);
        for (std::size_t c = 0; c < r; ++c) dst[l * r + c] += src[c];
      }
    }
  }
}

}  // namespace tcn

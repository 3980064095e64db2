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

#ifndef TCN_TENSOR_HPP_
#define TCN_TENSOR_HPP_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "common.hpp"

namespace tcn {

// One entity per dimension, 0-based.
using Interaction = std::vector<Index>;

// Sizes (I_1, ..., I_N) of an N-way tensor.
class TensorShape {
 public:
  TensorShape() = default;
  // Throws DataError unless N >= 2, every I_n >= 1 and the cell count fits
  // in 64 bits.
  explicit TensorShape(std::vector<Index> dims);

  std::size_t order() const { return dims_.size(); }
  Index dim(std::size_t n) const { return dims_[n]; }
  const std::vector<Index>& dims() const { return dims_; }
  std::uint64_t total_cells() const { return total_cells_; }

  // I_1 + ... + I_N, the node count of the derived graphs.
  Index node_count() const;
  // S_n = I_1 + ... + I_{n-1}; the global node id of entity i of dimension
  // n is i + S_n.
  std::vector<Index> offsets() const;

  bool contains(std::span<const Index> idx) const;
  // Row-major mixed-radix cell id. Ordering by key is lexicographic
  // ordering of the index tuples.
  std::uint64_t key(std::span<const Index> idx) const;
  void unravel(std::uint64_t key, std::span<Index> out) const;

  bool operator==(const TensorShape& other) const {
    return dims_ == other.dims_;
  }

 private:
  std::vector<Index> dims_;
  std::uint64_t total_cells_ = 0;
};

// Observed interactions of an implicit (existence-only) sparse tensor.
// Immutable after construction.
class SparseTensor {
 public:
  SparseTensor() = default;
  // Empty tensor of the given shape.
  explicit SparseTensor(TensorShape shape) : shape_(std::move(shape)) {}

  // Builds from N-wide flat index rows. Duplicates are merged (counted in
  // *duplicates when given); out-of-bounds rows throw DataError.
  static SparseTensor from_flat(TensorShape shape,
                                std::span<const Index> flat,
                                std::size_t* duplicates = nullptr);
  static SparseTensor from_interactions(
      TensorShape shape, const std::vector<Interaction>& entries,
      std::size_t* duplicates = nullptr);
  // Same shape, keys given directly.
  static SparseTensor from_keys(TensorShape shape,
                                std::span<const std::uint64_t> keys);

  const TensorShape& shape() const { return shape_; }
  std::size_t order() const { return shape_.order(); }
  std::size_t nnz() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

  std::span<const Index> entry(std::size_t e) const {
    return {indices_.data() + e * order(), order()};
  }
  Interaction interaction(std::size_t e) const {
    auto s = entry(e);
    return {s.begin(), s.end()};
  }
  std::uint64_t entry_key(std::size_t e) const { return keys_[e]; }
  std::span<const Index> flat() const { return indices_; }

  bool contains(std::span<const Index> idx) const;
  bool contains_key(std::uint64_t key) const {
    return members_.count(key) != 0;
  }

  // Copy with entries in lexicographic order.
  SparseTensor sorted() const;

 private:
  TensorShape shape_;
  std::vector<Index> indices_;
  std::vector<std::uint64_t> keys_;
  std::unordered_set<std::uint64_t> members_;
};

// a ∪ b; shapes must agree.
SparseTensor merge(const SparseTensor& a, const SparseTensor& b);

struct LoadOptions {
  int index_base = 0;  // 0 or 1
  std::optional<TensorShape> declared_shape;
  // Number of leading index fields. Defaults to the header/declared shape
  // order, else the field count of the first data line.
  std::optional<std::size_t> order;
};

struct LoadResult {
  SparseTensor tensor;
  std::size_t duplicates = 0;
  std::size_t data_lines = 0;
};

// COO text: '#' comments, optional "# shape I1 ... IN" header, one
// interaction per line, whitespace-separated, trailing fields ignored.
LoadResult load_coo(const std::string& path, const LoadOptions& options = {});
LoadResult parse_coo(std::istream& in, const LoadOptions& options = {});

// Header plus 0-based tab-separated rows in lexicographic order.
void write_coo(const SparseTensor& t, std::ostream& out);
void write_coo(const SparseTensor& t, const std::string& path);

struct DatasetSplit {
  SparseTensor train;
  SparseTensor valid;
  SparseTensor test;
};

// Seeded uniform partition. Valid and test sizes are floor(|E| * ratio);
// the remainder goes to train.
DatasetSplit split(const SparseTensor& t, const std::array<double, 3>& ratios,
                   std::uint64_t seed);

struct PlantedData {
  SparseTensor observed;
  SparseTensor holdout;
  // Ground-truth nonnegative factors, one I_n x rank matrix per dimension.
  std::vector<Matrix> factors;
};

// Σ_r Π_n factors[n](i_n, r).
double planted_score(const std::vector<Matrix>& factors,
                     std::span<const Index> idx);

// Scores every cell with a random nonnegative CP model and plants the
// n_obs best cells. The observed tensor holds (1 - noise_frac) * n_obs of
// them plus noise_frac * n_obs uniform cells from outside the planted set;
// the holdout holds the planted cells left unobserved.
PlantedData synth_planted(const TensorShape& shape, int rank,
                          std::uint64_t n_obs, double noise_frac,
                          std::uint64_t seed);

}  // namespace tcn

#endif  // TCN_TENSOR_HPP_

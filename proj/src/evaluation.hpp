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

#ifndef TCN_EVALUATION_HPP_
#define TCN_EVALUATION_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "graph.hpp"
#include "model.hpp"
#include "tensor.hpp"

namespace tcn {

enum class CandidateKind { kFull, kSampled };

std::string to_string(CandidateKind kind);
CandidateKind parse_candidate_kind(const std::string& name);

struct EvalProtocol {
  CandidateKind kind = CandidateKind::kFull;
  // Sampled mode draws multiplier * |test| fillers.
  std::uint64_t multiplier = 1000;
  std::uint64_t seed = 0;
  // Exclude train ∪ valid at test time; false excludes train only.
  bool exclude_valid = true;
  // Upper bound on enumerated cells in full mode.
  std::uint64_t budget = 1'000'000'000;
  std::size_t threads = 1;
  std::size_t block_size = 4096;

  bool operator==(const EvalProtocol&) const = default;
};

// Cells scored at inference. Full sets are enumerated lazily in
// lexicographic order; sampled sets are materialized, also in order.
class CandidateSet {
 public:
  CandidateKind kind() const { return kind_; }
  const TensorShape& shape() const { return shape_; }
  std::uint64_t size() const { return size_; }

  // Blocks partition the candidates in order; block contents never depend
  // on the thread count.
  std::size_t block_count() const;
  // Keys of the candidates in block b.
  void block_keys(std::size_t b, std::vector<std::uint64_t>& out) const;

  // Every candidate key, for small sets and tests.
  std::vector<std::uint64_t> keys() const;

  static CandidateSet full(TensorShape shape, SparseTensor excluded,
                           std::size_t block_size);
  static CandidateSet sampled(TensorShape shape,
                              std::vector<std::uint64_t> sorted_keys,
                              std::size_t block_size);

 private:
  CandidateKind kind_ = CandidateKind::kFull;
  TensorShape shape_;
  SparseTensor excluded_;
  std::vector<std::uint64_t> sampled_;
  std::uint64_t size_ = 0;
  std::size_t block_size_ = 4096;
};

// Full: every cell not in `excluded`. Sampled: test ∪ multiplier * |test|
// distinct uniform cells outside excluded ∪ test.
CandidateSet build_candidates(const TensorShape& shape,
                              const SparseTensor& excluded,
                              const SparseTensor& test,
                              const EvalProtocol& protocol);

struct RankedEntry {
  std::uint64_t key = 0;
  double score = 0.0;
};

// True when a ranks strictly ahead of b: higher score, then smaller key
// (lexicographically smaller interaction).
inline bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  return a.score != b.score ? a.score > b.score : a.key < b.key;
}

struct RankedList {
  TensorShape shape;
  std::vector<RankedEntry> entries;
};

// Scores cells given as flat N-wide rows. Must be safe to call from several
// threads at once.
using BatchScorer =
    std::function<void(std::span<const Index> cells, std::span<double> scores)>;

// Streaming top-k with a bounded heap per worker, merged at the end.
RankedList rank_topk(const BatchScorer& scorer, const CandidateSet& candidates,
                     std::size_t k, std::size_t threads = 1);

BatchScorer model_scorer(const Model& model, const FusedFeatures& features);

// |top-k ∩ test| / k.
double precision_at_k(const RankedList& ranked, const SparseTensor& test,
                      std::size_t k);
// (1 / min(k, |test|)) Σ_{i<=k} Precision@i * rel(i).
double ap_at_k(const RankedList& ranked, const SparseTensor& test,
               std::size_t k);

struct KMetrics {
  std::size_t k = 0;
  double ap = 0.0;
  double precision = 0.0;
  std::size_t hits = 0;
};

struct EvalReport {
  std::size_t n_test = 0;
  std::uint64_t n_candidates = 0;
  std::vector<KMetrics> rows;
  RankedList ranked;
};

// Candidates, ranking and metrics at every k in ks.
EvalReport evaluate_scorer(const BatchScorer& scorer,
                           const SparseTensor& excluded,
                           const SparseTensor& test,
                           const EvalProtocol& protocol,
                           std::span<const std::size_t> ks);

// Exclusion set is train, plus valid when protocol.exclude_valid and valid
// is given.
EvalReport evaluate(const Model& model, const NormalizedAdjacency& adj,
                    const SparseTensor& train, const SparseTensor* valid,
                    const SparseTensor& test, const EvalProtocol& protocol,
                    std::span<const std::size_t> ks);

// "metric<TAB>k<TAB>value<TAB>n_test<TAB>n_candidates" rows.
void write_metrics_tsv(const EvalReport& report, std::ostream& out,
                       bool header = true);
// "rank<TAB>i1<TAB>...<TAB>iN<TAB>score<TAB>is_test".
void write_ranked_list(const RankedList& ranked, const SparseTensor& test,
                       std::ostream& out);

}  // namespace tcn

#endif  // TCN_EVALUATION_HPP_

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

#include "evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <queue>
#include <thread>
#include <unordered_set>

namespace tcn {

std::string to_string(CandidateKind kind) {
  return kind == CandidateKind::kFull ? "full" : "sampled";
}

CandidateKind parse_candidate_kind(const std::string& name) {
  if (name == "full") return CandidateKind::kFull;
  if (name == "sampled") return CandidateKind::kSampled;
  throw UsageError("unknown candidate mode '" + name + "'");
}

CandidateSet CandidateSet::full(TensorShape shape, SparseTensor excluded,
                                std::size_t block_size) {
  CandidateSet c;
  c.kind_ = CandidateKind::kFull;
  c.size_ = shape.total_cells() - excluded.nnz();
  c.shape_ = std::move(shape);
  c.excluded_ = std::move(excluded);
  c.block_size_ = std::max<std::size_t>(block_size, 1);
  return c;
}

CandidateSet CandidateSet::sampled(TensorShape shape,
                                   std::vector<std::uint64_t> sorted_keys,
                                   std::size_t block_size) {
  CandidateSet c;
  c.kind_ = CandidateKind::kSampled;
  c.shape_ = std::move(shape);
  c.size_ = sorted_keys.size();
  c.sampled_ = std::move(sorted_keys);
  c.block_size_ = std::max<std::size_t>(block_size, 1);
  return c;
}

std::size_t CandidateSet::block_count() const {
  // Full mode blocks are ranges of the raw key space.
  const std::uint64_t span =
      kind_ == CandidateKind::kFull ? shape_.total_cells() : sampled_.size();
  return static_cast<std::size_t>((span + block_size_ - 1) / block_size_);
}

void CandidateSet::block_keys(std::size_t b,
                              std::vector<std::uint64_t>& out) const {
  out.clear();
  const std::uint64_t begin = static_cast<std::uint64_t>(b) * block_size_;
  if (kind_ == CandidateKind::kFull) {
    const std::uint64_t end =
        std::min<std::uint64_t>(begin + block_size_, shape_.total_cells());
    for (std::uint64_t k = begin; k < end; ++k) {
      if (!excluded_.contains_key(k)) out.push_back(k);
    }
  } else {
    const std::uint64_t end =
        std::min<std::uint64_t>(begin + block_size_, sampled_.size());
    out.assign(sampled_.begin() + begin, sampled_.begin() + end);
  }
}

std::vector<std::uint64_t> CandidateSet::keys() const {
  std::vector<std::uint64_t> all;
  std::vector<std::uint64_t> block;
  for (std::size_t b = 0; b < block_count(); ++b) {
    block_keys(b, block);
    all.insert(all.end(), block.begin(), block.end());
  }
  return all;
}

CandidateSet build_candidates(const TensorShape& shape,
                              const SparseTensor& excluded,
                              const SparseTensor& test,
                              const EvalProtocol& protocol) {
  if (!(excluded.shape() == shape) || !(test.shape() == shape)) {
    throw DataError("candidate sets: tensor shapes disagree");
  }
  if (protocol.kind == CandidateKind::kFull) {
    const std::uint64_t count = shape.total_cells() - excluded.nnz();
    if (count > protocol.budget) {
      throw UsageError("full enumeration needs " + std::to_string(count) +
                       " cells, above the budget of " +
                       std::to_string(protocol.budget) +
                       "; use sampled candidates");
    }
    return CandidateSet::full(shape, excluded, protocol.block_size);
  }

  std::vector<std::uint64_t> keys;
  std::unordered_set<std::uint64_t> taken;
  for (std::size_t e = 0; e < test.nnz(); ++e) {
    const std::uint64_t k = test.entry_key(e);
    if (!excluded.contains_key(k) && taken.insert(k).second) keys.push_back(k);
  }
  std::uint64_t blocked = excluded.nnz();
  for (std::size_t e = 0; e < test.nnz(); ++e) {
    if (!excluded.contains_key(test.entry_key(e))) ++blocked;
  }
  const std::uint64_t fillers = protocol.multiplier * test.nnz();
  if (fillers > shape.total_cells() - blocked) {
    throw UsageError("sampled candidates: " + std::to_string(fillers) +
                     " fillers requested but only " +
                     std::to_string(shape.total_cells() - blocked) +
                     " unobserved cells exist");
  }
  Rng rng(protocol.seed);
  std::uint64_t drawn = 0;
  while (drawn < fillers) {
    const std::uint64_t k = rng.below(shape.total_cells());
    if (excluded.contains_key(k) || !taken.insert(k).second) continue;
    keys.push_back(k);
    ++drawn;
  }
  std::sort(keys.begin(), keys.end());
  return CandidateSet::sampled(shape, std::move(keys), protocol.block_size);
}

namespace {

// Max-heap on "ranks later", so the top is the weakest kept entry.
struct RanksBefore {
  bool operator()(const RankedEntry& a, const RankedEntry& b) const {
    return ranks_before(a, b);
  }
};
using TopHeap =
    std::priority_queue<RankedEntry, std::vector<RankedEntry>, RanksBefore>;

void offer(TopHeap& heap, const RankedEntry& e, std::size_t k) {
  if (heap.size() < k) {
    heap.push(e);
  } else if (ranks_before(e, heap.top())) {
    heap.pop();
    heap.push(e);
  }
}

}  // namespace

RankedList rank_topk(const BatchScorer& scorer, const CandidateSet& candidates,
                     std::size_t k, std::size_t threads) {
  if (k == 0) throw UsageError("k must be positive");
  const std::size_t blocks = candidates.block_count();
  threads = std::max<std::size_t>(1, std::min(threads, blocks));
  const TensorShape& shape = candidates.shape();
  const std::size_t order = shape.order();

  std::vector<TopHeap> heaps(threads);
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&](std::size_t worker) {
    try {
      std::vector<std::uint64_t> keys;
      std::vector<Index> cells;
      std::vector<double> scores;
      for (std::size_t b = worker; b < blocks; b += threads) {
        candidates.block_keys(b, keys);
        if (keys.empty()) continue;
        cells.resize(keys.size() * order);
        for (std::size_t i = 0; i < keys.size(); ++i) {
          shape.unravel(keys[i], std::span<Index>(cells).subspan(i * order, order));
        }
        scores.assign(keys.size(), 0.0);
        scorer(cells, scores);
        for (std::size_t i = 0; i < keys.size(); ++i) {
          if (!std::isfinite(scores[i])) {
            throw NumericError("non-finite score for candidate key " +
                               std::to_string(keys[i]));
          }
          offer(heaps[worker], {keys[i], scores[i]}, k);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Ties are broken by key, a total order, so the merge is independent of
  // how blocks were distributed.
  RankedList out;
  out.shape = shape;
  for (auto& h : heaps) {
    while (!h.empty()) {
      out.entries.push_back(h.top());
      h.pop();
    }
  }
  std::sort(out.entries.begin(), out.entries.end(), ranks_before);
  if (out.entries.size() > k) out.entries.resize(k);
  return out;
}

BatchScorer model_scorer(const Model& model, const FusedFeatures& features) {
  return [&model, &features](std::span<const Index> cells,
                             std::span<double> scores) {
    auto s = model.score(features, cells);
    std::copy(s.begin(), s.end(), scores.begin());
  };
}

namespace {

void check_metric_args(const RankedList& ranked, const SparseTensor& test,
                       std::size_t k) {
  if (k == 0) throw UsageError("k must be positive");
  if (test.empty()) throw DataError("test set is empty");
  if (!(ranked.shape == test.shape())) {
    throw DataError("ranked list and test set shapes disagree");
  }
}

}  // namespace

double precision_at_k(const RankedList& ranked, const SparseTensor& test,
                      std::size_t k) {
  check_metric_args(ranked, test, k);
  const std::size_t depth = std::min(k, ranked.entries.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (test.contains_key(ranked.entries[i].key)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double ap_at_k(const RankedList& ranked, const SparseTensor& test,
               std::size_t k) {
  check_metric_args(ranked, test, k);
  const std::size_t depth = std::min(k, ranked.entries.size());
  std::size_t hits = 0;
  // Extended precision, rounded once at the end: hand-sized cases such as
  // (1 + 2/3) / 3 then come out as the correctly rounded 5/9.
  long double total = 0.0L;
  for (std::size_t i = 0; i < depth; ++i) {
    if (test.contains_key(ranked.entries[i].key)) {
      ++hits;
      total += static_cast<long double>(hits) / static_cast<long double>(i + 1);
    }
  }
  return static_cast<double>(
      total / static_cast<long double>(std::min(k, test.nnz())));
}

EvalReport evaluate_scorer(const BatchScorer& scorer,
                           const SparseTensor& excluded,
                           const SparseTensor& test,
                           const EvalProtocol& protocol,
                           std::span<const std::size_t> ks) {
  if (ks.empty()) throw UsageError("at least one k is required");
  if (test.empty()) throw DataError("test set is empty");
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  CandidateSet candidates =
      build_candidates(test.shape(), excluded, test, protocol);
  EvalReport report;
  report.n_test = test.nnz();
  report.n_candidates = candidates.size();
  report.ranked = rank_topk(scorer, candidates, k_max, protocol.threads);
  for (std::size_t k : ks) {
    KMetrics m;
    m.k = k;
    m.ap = ap_at_k(report.ranked, test, k);
    m.precision = precision_at_k(report.ranked, test, k);
    m.hits = static_cast<std::size_t>(
        std::llround(m.precision * static_cast<double>(k)));
    report.rows.push_back(m);
  }
  return report;
}

EvalReport evaluate(const Model& model, const NormalizedAdjacency& adj,
                    const SparseTensor& train, const SparseTensor* valid,
                    const SparseTensor& test, const EvalProtocol& protocol,
                    std::span<const std::size_t> ks) {
  if (!(model.shape() == test.shape()) || !(train.shape() == test.shape())) {
    throw DataError("model and data shapes disagree");
  }
  const SparseTensor excluded = (protocol.exclude_valid && valid != nullptr)
                                    ? merge(train, *valid)
                                    : train;
  const FusedFeatures features = model.features(adj);
  return evaluate_scorer(model_scorer(model, features), excluded, test,
                         protocol, ks);
}

namespace {

// Shortest text that reads back to the same double.
std::string exact(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_metrics_tsv(const EvalReport& report, std::ostream& out,
                       bool header) {
  if (header) out << "metric\tk\tvalue\tn_test\tn_candidates\n";
  for (const auto& row : report.rows) {
    out << "AP\t" << row.k << '\t' << exact(row.ap) << '\t' << report.n_test << '\t'
        << report.n_candidates << '\n';
  }
  for (const auto& row : report.rows) {
    out << "Precision\t" << row.k << '\t' << exact(row.precision) << '\t'
        << report.n_test << '\t' << report.n_candidates << '\n';
  }
}

void write_ranked_list(const RankedList& ranked, const SparseTensor& test,
                       std::ostream& out) {
  std::vector<Index> idx(ranked.shape.order());
  out << "rank";
  for (std::size_t n = 0; n < idx.size(); ++n) out << "\ti" << n + 1;
  out << "\tscore\tis_test\n";
  for (std::size_t r = 0; r < ranked.entries.size(); ++r) {
    const auto& e = ranked.entries[r];
    ranked.shape.unravel(e.key, idx);
    out << r + 1;
    for (Index i : idx) out << '\t' << i;
    out << '\t' << exact(e.score) << '\t' << (test.contains_key(e.key) ? 1 : 0)
        << '\n';
  }
}

}  // namespace tcn

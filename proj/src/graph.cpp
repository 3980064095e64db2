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

#include "graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>

namespace tcn {

double CsrMatrix::at(Index i, Index j) const {
  const auto begin = col_idx.begin() + row_ptr[i];
  const auto end = col_idx.begin() + row_ptr[i + 1];
  auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

std::size_t CsrMatrix::bytes() const {
  return row_ptr.size() * sizeof(Index) + col_idx.size() * sizeof(Index) +
         values.size() * sizeof(double);
}

void CsrMatrix::validate() const {
  if (n_rows < 0 || n_cols < 0) throw DataError("csr: negative dimensions");
  if (row_ptr.size() != static_cast<std::size_t>(n_rows) + 1) {
    throw DataError("csr: row_ptr length must be n_rows + 1");
  }
  if (row_ptr.front() != 0) throw DataError("csr: row_ptr[0] must be 0");
  if (static_cast<std::size_t>(row_ptr.back()) != col_idx.size() ||
      col_idx.size() != values.size()) {
    throw DataError("csr: nnz mismatch between row_ptr, col_idx and values");
  }
  for (Index i = 0; i < n_rows; ++i) {
    if (row_ptr[i + 1] < row_ptr[i]) throw DataError("csr: row_ptr decreasing");
    for (Index p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      if (col_idx[p] < 0 || col_idx[p] >= n_cols) {
        throw DataError("csr: column index out of range");
      }
      if (p > row_ptr[i] && col_idx[p] <= col_idx[p - 1]) {
        throw DataError("csr: columns not strictly increasing in row " +
                        std::to_string(i));
      }
      if (!(values[p] > 0.0)) throw DataError("csr: non-positive value");
    }
  }
}

CsrMatrix transpose(const CsrMatrix& m) {
  CsrMatrix t;
  t.n_rows = m.n_cols;
  t.n_cols = m.n_rows;
  t.row_ptr.assign(static_cast<std::size_t>(t.n_rows) + 1, 0);
  for (Index c : m.col_idx) ++t.row_ptr[c + 1];
  for (Index i = 0; i < t.n_rows; ++i) t.row_ptr[i + 1] += t.row_ptr[i];
  t.col_idx.resize(m.nnz());
  t.values.resize(m.nnz());
  std::vector<Index> cursor(t.row_ptr.begin(), t.row_ptr.end() - 1);
  // Walking source rows in order keeps destination columns sorted.
  for (Index i = 0; i < m.n_rows; ++i) {
    for (Index p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) {
      const Index dst = cursor[m.col_idx[p]]++;
      t.col_idx[dst] = i;
      t.values[dst] = m.values[p];
    }
  }
  return t;
}

Matrix spmm(const CsrMatrix& a, const Matrix& dense) {
  if (static_cast<std::size_t>(a.n_cols) != dense.rows()) {
    throw UsageError("spmm: dimension mismatch");
  }
  Matrix out(static_cast<std::size_t>(a.n_rows), dense.cols());
  for (Index i = 0; i < a.n_rows; ++i) {
    auto out_row = out.row(static_cast<std::size_t>(i));
    for (Index p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const double w = a.values[p];
      auto src = dense.row(static_cast<std::size_t>(a.col_idx[p]));
      for (std::size_t c = 0; c < src.size(); ++c) out_row[c] += w * src[c];
    }
  }
  return out;
}

CsrMatrix build_incidence(const SparseTensor& t) {
  if (t.empty()) throw DataError("cannot build a hypergraph from an empty tensor");
  const std::size_t order = t.order();
  const auto offsets = t.shape().offsets();
  CsrMatrix b;
  b.n_rows = t.shape().node_count();
  b.n_cols = static_cast<Index>(t.nnz());
  b.row_ptr.assign(static_cast<std::size_t>(b.n_rows) + 1, 0);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    auto idx = t.entry(e);
    for (std::size_t n = 0; n < order; ++n) ++b.row_ptr[idx[n] + offsets[n] + 1];
  }
  for (Index i = 0; i < b.n_rows; ++i) b.row_ptr[i + 1] += b.row_ptr[i];
  b.col_idx.resize(order * t.nnz());
  b.values.assign(order * t.nnz(), 1.0);
  std::vector<Index> cursor(b.row_ptr.begin(), b.row_ptr.end() - 1);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    auto idx = t.entry(e);
    for (std::size_t n = 0; n < order; ++n) {
      b.col_idx[cursor[idx[n] + offsets[n]]++] = static_cast<Index>(e);
    }
  }
  return b;
}

namespace {

void check_dims(const CsrMatrix& incidence, const std::vector<Index>& dims) {
  Index total = 0;
  for (Index d : dims) total += d;
  if (total != incidence.n_rows) {
    throw DataError("clique_expand: dims do not sum to the incidence row count");
  }
}

// Gustavson product B B^T minus the diagonal. `members` is B^T: row e lists
// the nodes of hyperedge e. Unit skips reading the weights, all 1.
template <bool Unit>
CliqueGraph expand(const CsrMatrix& incidence, const CsrMatrix& members,
                   const std::vector<Index>& dims) {
  const Index n = incidence.n_rows;

  CliqueGraph g;
  g.dims = dims;
  g.offsets.assign(dims.size(), 0);
  for (std::size_t d = 1; d < dims.size(); ++d) {
    g.offsets[d] = g.offsets[d - 1] + dims[d - 1];
  }
  CsrMatrix& a = g.adjacency;
  a.n_rows = n;
  a.n_cols = n;
  a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  g.degrees.assign(static_cast<std::size_t>(n), 0.0);

  // Σ_e |e| (|e| - 1) bounds the stored entries; one allocation up front.
  std::size_t bound = 0;
  for (Index e = 0; e < members.n_rows; ++e) {
    const auto size = static_cast<std::size_t>(members.row_ptr[e + 1] - members.row_ptr[e]);
    bound += size * (size > 0 ? size - 1 : 0);
  }
  a.col_idx.reserve(bound);
  a.values.reserve(bound);

  // Dense accumulator plus a bitmap of touched columns. A row's columns come
  // out in order either by scanning the bitmap words it touched or by sorting
  // the touched list, whichever is cheaper for that row.
  std::vector<double> accum(static_cast<std::size_t>(n), 0.0);
  std::vector<std::uint64_t> mark((static_cast<std::size_t>(n) + 63) / 64, 0);
  std::vector<Index> touched;
  for (Index i = 0; i < n; ++i) {
    touched.clear();
    std::size_t lo = mark.size(), hi = 0;
    for (Index p = incidence.row_ptr[i]; p < incidence.row_ptr[i + 1]; ++p) {
      const Index e = incidence.col_idx[p];
      const double bie = Unit ? 1.0 : incidence.values[p];
      for (Index q = members.row_ptr[e]; q < members.row_ptr[e + 1]; ++q) {
        const Index j = members.col_idx[q];
        if (j == i) continue;
        const auto w = static_cast<std::size_t>(j) >> 6;
        const std::uint64_t bit = std::uint64_t{1} << (j & 63);
        if (!(mark[w] & bit)) {
          mark[w] |= bit;
          touched.push_back(j);
          lo = std::min(lo, w);
          hi = std::max(hi, w);
        }
        accum[j] += Unit ? 1.0 : bie * members.values[q];
      }
    }
    double degree = 0.0;
    auto emit = [&](Index j) {
      a.col_idx.push_back(j);
      a.values.push_back(accum[j]);
      degree += accum[j];
      accum[j] = 0.0;
    };
    const std::size_t m = touched.size();
    if (m > 0 && hi - lo + 1 <= m * static_cast<std::size_t>(std::bit_width(m))) {
      for (std::size_t w = lo; w <= hi; ++w) {
        for (std::uint64_t bits = mark[w]; bits != 0; bits &= bits - 1) {
          emit(static_cast<Index>((w << 6) + std::countr_zero(bits)));
        }
        mark[w] = 0;
      }
    } else {
      std::sort(touched.begin(), touched.end());
      for (Index j : touched) {
        emit(j);
        mark[static_cast<std::size_t>(j) >> 6] = 0;
      }
    }
    a.row_ptr[i + 1] = static_cast<Index>(a.col_idx.size());
    g.degrees[i] = degree;
  }
  return g;
}

}  // namespace

CliqueGraph clique_expand(const CsrMatrix& incidence,
                          const std::vector<Index>& dims) {
  check_dims(incidence, dims);
  return expand<false>(incidence, transpose(incidence), dims);
}

CliqueGraph build_clique_graph(const SparseTensor& t) {
  const CsrMatrix b = build_incidence(t);
  const std::vector<Index>& dims = t.shape().dims();
  check_dims(b, dims);
  // Row e of B^T is interaction e shifted by the dimension offsets, already
  // in increasing order; writing it directly avoids a scattered transpose.
  const std::size_t order = t.order();
  const auto offsets = t.shape().offsets();
  CsrMatrix members;
  members.n_rows = b.n_cols;
  members.n_cols = b.n_rows;
  members.row_ptr.resize(t.nnz() + 1);
  members.col_idx.resize(order * t.nnz());
  members.values.assign(order * t.nnz(), 1.0);
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    members.row_ptr[e] = static_cast<Index>(e * order);
    auto idx = t.entry(e);
    for (std::size_t n = 0; n < order; ++n) {
      members.col_idx[e * order + n] = idx[n] + offsets[n];
    }
  }
  members.row_ptr[t.nnz()] = static_cast<Index>(order * t.nnz());
  return expand<true>(b, members, dims);
}

NormalizedAdjacency normalize(const CliqueGraph& g) {
  NormalizedAdjacency out;
  out.matrix = g.adjacency;
  out.inv_sqrt_degree.resize(g.degrees.size());
  for (std::size_t i = 0; i < g.degrees.size(); ++i) {
    out.inv_sqrt_degree[i] =
        g.degrees[i] > 0.0 ? 1.0 / std::sqrt(g.degrees[i]) : 0.0;
  }
  // Stored entries have both endpoint degrees positive. One rounding step
  // instead of two keeps regular cliques exact (1 / sqrt(2 * 2) == 0.5).
  CsrMatrix& m = out.matrix;
  for (Index i = 0; i < m.n_rows; ++i) {
    for (Index p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) {
      m.values[p] /= std::sqrt(g.degrees[i] * g.degrees[m.col_idx[p]]);
    }
  }
  return out;
}

GraphStats graph_stats(const CliqueGraph& g, double build_seconds) {
  GraphStats s;
  s.nodes_per_dim = g.dims;
  s.node_count = g.node_count();
  s.nnz = g.adjacency.nnz();
  s.undirected_edges = s.nnz / 2;
  double sum = 0.0;
  for (double d : g.degrees) {
    if (d == 0.0) ++s.isolated_nodes;
    s.max_degree = std::max(s.max_degree, d);
    sum += d;
  }
  s.mean_degree = s.node_count ? sum / static_cast<double>(s.node_count) : 0.0;
  s.build_seconds = build_seconds;
  s.bytes = g.adjacency.bytes();
  return s;
}

void write_edge_list(const CliqueGraph& g, std::ostream& out) {
  const CsrMatrix& a = g.adjacency;
  out << "# nodes " << a.n_rows << " edges " << a.nnz() / 2 << '\n';
  for (Index i = 0; i < a.n_rows; ++i) {
    for (Index p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const Index j = a.col_idx[p];
      if (j <= i) continue;
      out << i << '\t' << j << '\t' << a.values[p] << '\n';
    }
  }
}

}  // namespace tcn

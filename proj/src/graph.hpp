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

#ifndef TCN_GRAPH_HPP_
#define TCN_GRAPH_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "common.hpp"
#include "tensor.hpp"

namespace tcn {

// Compressed sparse row matrix with strictly increasing columns per row and
// positive stored values.
struct CsrMatrix {
  Index n_rows = 0;
  Index n_cols = 0;
  std::vector<Index> row_ptr{0};
  std::vector<Index> col_idx;
  std::vector<double> values;

  std::size_t nnz() const { return col_idx.size(); }
  // Stored value at (i, j), or 0.
  double at(Index i, Index j) const;
  // Exact footprint of the three CSR arrays.
  std::size_t bytes() const;
  // Throws DataError describing the first broken invariant.
  void validate() const;
};

CsrMatrix transpose(const CsrMatrix& m);

// a * dense, row-major. Rows of the result follow the CSR row order, and
// each row accumulates in column order, so results are reproducible.
Matrix spmm(const CsrMatrix& a, const Matrix& dense);

// Incidence matrix B of the tensor-originated hypergraph: one row per
// entity (global id i_n + S_n), one column per observed interaction.
CsrMatrix build_incidence(const SparseTensor& t);

// Pairwise graph obtained by expanding every hyperedge into a clique.
// A(i, j) counts the interactions containing both i and j; the diagonal is
// zero.
struct CliqueGraph {
  CsrMatrix adjacency;
  std::vector<Index> dims;
  std::vector<Index> offsets;
  std::vector<double> degrees;

  Index node_count() const { return adjacency.n_rows; }
};

// A = B B^T - diag(B B^T), row by row (Gustavson) with a dense scratch
// accumulator and a touched list. dims gives the entity count per tensor
// dimension so node ids can be attributed to dimensions.
CliqueGraph clique_expand(const CsrMatrix& incidence,
                          const std::vector<Index>& dims);

// Convenience: incidence + expansion straight from a tensor.
CliqueGraph build_clique_graph(const SparseTensor& t);

// D^{-1/2} A D^{-1/2}. Zero-degree nodes get inv_sqrt_degree 0 and an empty
// row.
struct NormalizedAdjacency {
  CsrMatrix matrix;
  std::vector<double> inv_sqrt_degree;

  Index node_count() const { return matrix.n_rows; }
};

NormalizedAdjacency normalize(const CliqueGraph& g);

struct GraphStats {
  std::vector<Index> nodes_per_dim;
  Index node_count = 0;
  Index isolated_nodes = 0;
  std::size_t nnz = 0;             // stored directed entries
  std::size_t undirected_edges = 0;
  double max_degree = 0.0;
  double mean_degree = 0.0;
  double build_seconds = 0.0;
  std::size_t bytes = 0;
};

GraphStats graph_stats(const CliqueGraph& g, double build_seconds = 0.0);

// "# nodes |V| edges m" then "i<TAB>j<TAB>w" for i < j, lexicographic.
void write_edge_list(const CliqueGraph& g, std::ostream& out);

}  // namespace tcn

#endif  // TCN_GRAPH_HPP_

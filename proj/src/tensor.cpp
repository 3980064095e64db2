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

#include "tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace tcn {

TensorShape::TensorShape(std::vector<Index> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) {
    throw DataError("tensor order must be at least 2, got " +
                    std::to_string(dims_.size()));
  }
  std::uint64_t cells = 1;
  for (Index d : dims_) {
    if (d < 1) throw DataError("tensor dimension sizes must be positive");
    if (__builtin_mul_overflow(cells, static_cast<std::uint64_t>(d), &cells)) {
      throw DataError("tensor cell count overflows 64 bits");
    }
  }
  total_cells_ = cells;
}

Index TensorShape::node_count() const {
  Index total = 0;
  for (Index d : dims_) total += d;
  return total;
}

std::vector<Index> TensorShape::offsets() const {
  std::vector<Index> out(dims_.size(), 0);
  for (std::size_t n = 1; n < dims_.size(); ++n) {
    out[n] = out[n - 1] + dims_[n - 1];
  }
  return out;
}

bool TensorShape::contains(std::span<const Index> idx) const {
  if (idx.size() != dims_.size()) return false;
  for (std::size_t n = 0; n < idx.size(); ++n) {
    if (idx[n] < 0 || idx[n] >= dims_[n]) return false;
  }
  return true;
}

std::uint64_t TensorShape::key(std::span<const Index> idx) const {
  std::uint64_t k = 0;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    k = k * static_cast<std::uint64_t>(dims_[n]) +
        static_cast<std::uint64_t>(idx[n]);
  }
  return k;
}

void TensorShape::unravel(std::uint64_t key, std::span<Index> out) const {
  for (std::size_t n = dims_.size(); n-- > 0;) {
    const auto d = static_cast<std::uint64_t>(dims_[n]);
    out[n] = static_cast<Index>(key % d);
    key /= d;
  }
}

SparseTensor SparseTensor::from_flat(TensorShape shape,
                                     std::span<const Index> flat,
                                     std::size_t* duplicates) {
  const std::size_t n = shape.order();
  if (n == 0 || flat.size() % n != 0) {
    throw DataError("flat index array is not a multiple of the tensor order");
  }
  SparseTensor t(std::move(shape));
  const std::size_t rows = flat.size() / n;
  t.indices_.reserve(flat.size());
  t.keys_.reserve(rows);
  t.members_.reserve(rows);
  std::size_t dup = 0;
  for (std::size_t e = 0; e < rows; ++e) {
    auto idx = flat.subspan(e * n, n);
    if (!t.shape_.contains(idx)) {
      std::ostringstream msg;
      msg << "interaction " << e << " is out of bounds (";
      for (std::size_t m = 0; m < n; ++m) msg << (m ? "," : "") << idx[m];
      msg << ")";
      throw DataError(msg.str());
    }
    const std::uint64_t k = t.shape_.key(idx);
    if (!t.members_.insert(k).second) {
      ++dup;
      continue;
    }
    t.keys_.push_back(k);
    t.indices_.insert(t.indices_.end(), idx.begin(), idx.end());
  }
  if (duplicates) *duplicates = dup;
  return t;
}

SparseTensor SparseTensor::from_interactions(
    TensorShape shape, const std::vector<Interaction>& entries,
    std::size_t* duplicates) {
  std::vector<Index> flat;
  flat.reserve(entries.size() * shape.order());
  for (const auto& e : entries) {
    if (e.size() != shape.order()) {
      throw DataError("interaction arity does not match tensor order");
    }
    flat.insert(flat.end(), e.begin(), e.end());
  }
  return from_flat(std::move(shape), flat, duplicates);
}

SparseTensor SparseTensor::from_keys(TensorShape shape,
                                     std::span<const std::uint64_t> keys) {
  const std::size_t n = shape.order();
  std::vector<Index> flat(keys.size() * n);
  for (std::size_t e = 0; e < keys.size(); ++e) {
    if (keys[e] >= shape.total_cells()) throw DataError("cell key out of range");
    shape.unravel(keys[e], std::span<Index>(flat).subspan(e * n, n));
  }
  return from_flat(std::move(shape), flat);
}

bool SparseTensor::contains(std::span<const Index> idx) const {
  return shape_.contains(idx) && contains_key(shape_.key(idx));
}

SparseTensor SparseTensor::sorted() const {
  std::vector<std::uint64_t> keys = keys_;
  std::sort(keys.begin(), keys.end());
  return from_keys(shape_, keys);
}

SparseTensor merge(const SparseTensor& a, const SparseTensor& b) {
  if (!(a.shape() == b.shape())) throw DataError("merge: shape mismatch");
  std::vector<Index> flat(a.flat().begin(), a.flat().end());
  flat.insert(flat.end(), b.flat().begin(), b.flat().end());
  return SparseTensor::from_flat(a.shape(), flat);
}

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r')) {
      ++i;
    }
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' &&
           line[j] != '\r') {
      ++j;
    }
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_int(std::string_view s, Index& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw DataError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

LoadResult parse_coo(std::istream& in, const LoadOptions& options) {
  if (options.index_base != 0 && options.index_base != 1) {
    throw UsageError("index base must be 0 or 1");
  }
  std::optional<TensorShape> shape = options.declared_shape;
  std::optional<std::size_t> order = options.order;
  if (!order && shape) order = shape->order();

  std::vector<Index> flat;
  std::size_t field_count = 0;
  std::size_t data_lines = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = fields_of(line);
    if (fields.empty()) continue;
    if (fields[0].starts_with("#")) {
      // "# shape I1 ... IN" (or "#shape ...") before any data.
      std::vector<std::string_view> rest = fields;
      if (rest[0] == "#") {
        rest.erase(rest.begin());
      } else {
        rest[0].remove_prefix(1);
      }
      if (!rest.empty() && rest[0] == "shape" && data_lines == 0 &&
          !options.declared_shape) {
        std::vector<Index> dims;
        for (std::size_t i = 1; i < rest.size(); ++i) {
          Index d;
          if (!parse_int(rest[i], d)) line_error(line_no, "malformed shape header");
          dims.push_back(d);
        }
        try {
          shape = TensorShape(dims);
        } catch (const DataError& e) {
          line_error(line_no, e.what());
        }
        if (!options.order) order = shape->order();
      }
      continue;
    }
    if (data_lines == 0) {
      field_count = fields.size();
      if (!order) order = field_count;
    } else if (fields.size() != field_count) {
      line_error(line_no, "inconsistent field count (expected " +
                              std::to_string(field_count) + ", got " +
                              std::to_string(fields.size()) + ")");
    }
    if (fields.size() < *order) {
      line_error(line_no, "expected at least " + std::to_string(*order) +
                              " index fields");
    }
    for (std::size_t n = 0; n < *order; ++n) {
      Index v;
      if (!parse_int(fields[n], v)) {
        line_error(line_no, "malformed index '" + std::string(fields[n]) + "'");
      }
      v -= options.index_base;
      if (v < 0) line_error(line_no, "negative index after rebasing");
      if (shape && v >= shape->dim(n)) {
        line_error(line_no, "index " + std::to_string(v) +
                                " out of bounds for dimension " +
                                std::to_string(n) + " of size " +
                                std::to_string(shape->dim(n)));
      }
      flat.push_back(v);
    }
    ++data_lines;
  }
  if (!shape) {
    if (data_lines == 0) throw DataError("no interactions and no shape header");
    std::vector<Index> dims(*order, 0);
    for (std::size_t e = 0; e < data_lines; ++e) {
      for (std::size_t n = 0; n < *order; ++n) {
        dims[n] = std::max(dims[n], flat[e * *order + n] + 1);
      }
    }
    shape = TensorShape(dims);
  } else if (shape->order() != *order) {
    throw DataError("shape order does not match index field count");
  }
  LoadResult result;
  result.data_lines = data_lines;
  result.tensor = SparseTensor::from_flat(*shape, flat, &result.duplicates);
  return result;
}

LoadResult load_coo(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return parse_coo(in, options);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_coo(const SparseTensor& t, std::ostream& out) {
  out << "# shape";
  for (Index d : t.shape().dims()) out << ' ' << d;
  out << '\n';
  std::vector<std::uint64_t> keys(t.nnz());
  for (std::size_t e = 0; e < t.nnz(); ++e) keys[e] = t.entry_key(e);
  std::sort(keys.begin(), keys.end());
  std::vector<Index> idx(t.order());
  for (std::uint64_t k : keys) {
    t.shape().unravel(k, idx);
    for (std::size_t n = 0; n < idx.size(); ++n) {
      if (n) out << '\t';
      out << idx[n];
    }
    out << '\n';
  }
}

void write_coo(const SparseTensor& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  write_coo(t, out);
  if (!out) throw DataError("write failed for '" + path + "'");
}

DatasetSplit split(const SparseTensor& t, const std::array<double, 3>& ratios,
                   std::uint64_t seed) {
  if (t.empty()) throw DataError("cannot split an empty tensor");
  for (double r : ratios) {
    if (!(r > 0.0)) throw UsageError("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw UsageError("split ratios must sum to 1");
  }
  const std::size_t total = t.nnz();
  // The epsilon absorbs representation error such as 0.7 * 10 = 7.0000001.
  auto take = [&](double r) {
    return static_cast<std::size_t>(
        std::floor(static_cast<double>(total) * r + 1e-9));
  };
  const std::size_t n_valid = take(ratios[1]);
  const std::size_t n_test = take(ratios[2]);
  const std::size_t n_train = total - n_valid - n_test;

  std::vector<std::size_t> order(total);
  for (std::size_t e = 0; e < total; ++e) order[e] = e;
  Rng rng(seed);
  rng.shuffle(order);

  auto collect = [&](std::size_t begin, std::size_t count) {
    std::vector<std::uint64_t> keys(count);
    for (std::size_t i = 0; i < count; ++i) {
      keys[i] = t.entry_key(order[begin + i]);
    }
    return SparseTensor::from_keys(t.shape(), keys);
  };
  DatasetSplit out;
  out.train = collect(0, n_train);
  out.valid = collect(n_train, n_valid);
  out.test = collect(n_train + n_valid, n_test);
  return out;
}

double planted_score(const std::vector<Matrix>& factors,
                     std::span<const Index> idx) {
  const std::size_t rank = factors.front().cols();
  double total = 0.0;
  for (std::size_t r = 0; r < rank; ++r) {
    double p = 1.0;
    for (std::size_t n = 0; n < factors.size(); ++n) {
      p *= factors[n](static_cast<std::size_t>(idx[n]), r);
    }
    total += p;
  }
  return total;
}

PlantedData synth_planted(const TensorShape& shape, int rank,
                          std::uint64_t n_obs, double noise_frac,
                          std::uint64_t seed) {
  constexpr std::uint64_t kMaxCells = 50'000'000;
  if (rank < 1) throw UsageError("planted rank must be at least 1");
  if (!(noise_frac >= 0.0 && noise_frac <= 1.0)) {
    throw UsageError("noise fraction must lie in [0, 1]");
  }
  if (n_obs == 0 || n_obs >= shape.total_cells()) {
    throw UsageError("n_obs must be positive and below the cell count");
  }
  if (shape.total_cells() > kMaxCells) {
    throw UsageError("planted generator enumerates every cell; shape too large");
  }
  Rng rng(seed);
  PlantedData out;
  for (std::size_t n = 0; n < shape.order(); ++n) {
    Matrix f(static_cast<std::size_t>(shape.dim(n)),
             static_cast<std::size_t>(rank));
    for (double& v : f.data()) v = rng.uniform();
    out.factors.push_back(std::move(f));
  }

  const std::uint64_t cells = shape.total_cells();
  std::vector<std::pair<double, std::uint64_t>> scored(cells);
  std::vector<Index> idx(shape.order());
  for (std::uint64_t k = 0; k < cells; ++k) {
    shape.unravel(k, idx);
    scored[k] = {planted_score(out.factors, idx), k};
  }
  // Highest score first; ties resolved toward the smaller key.
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  std::nth_element(scored.begin(), scored.begin() + n_obs, scored.end(),
                   better);
  std::vector<std::uint64_t> planted(n_obs);
  for (std::uint64_t i = 0; i < n_obs; ++i) planted[i] = scored[i].second;
  std::sort(planted.begin(), planted.end());
  std::unordered_set<std::uint64_t> planted_set(planted.begin(), planted.end());

  const auto n_noise = static_cast<std::uint64_t>(
      std::llround(noise_frac * static_cast<double>(n_obs)));
  const std::uint64_t n_true = n_obs - n_noise;
  if (n_noise > cells - n_obs) {
    throw UsageError("not enough unplanted cells for the requested noise");
  }

  std::vector<std::uint64_t> shuffled = planted;
  rng.shuffle(shuffled);
  std::vector<std::uint64_t> observed(shuffled.begin(),
                                      shuffled.begin() + n_true);
  std::vector<std::uint64_t> holdout(shuffled.begin() + n_true,
                                     shuffled.end());
  std::unordered_set<std::uint64_t> noise;
  while (noise.size() < n_noise) {
    const std::uint64_t k = rng.below(cells);
    if (planted_set.count(k) || !noise.insert(k).second) continue;
    observed.push_back(k);
  }
  std::sort(observed.begin(), observed.end());
  std::sort(holdout.begin(), holdout.end());
  out.observed = SparseTensor::from_keys(shape, observed);
  out.holdout = SparseTensor::from_keys(shape, holdout);
  return out;
}

}  // namespace tcn

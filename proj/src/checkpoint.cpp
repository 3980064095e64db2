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

#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

namespace tcn {

namespace {

constexpr char kMagic[8] = {'T', 'C', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr char kEndMarker[4] = {'E', 'N', 'D', '!'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void i64(std::int64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void doubles(std::span<const double> v) {
    u64(v.size());
    bytes(v.data(), v.size() * sizeof(double));
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    bytes(m.data().data(), m.size() * sizeof(double));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in_) throw DataError("checkpoint is truncated");
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::int64_t i64() {
    std::int64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t count(std::uint64_t limit = 1ULL << 40) {
    const std::uint64_t n = u64();
    if (n > limit) throw DataError("checkpoint field length is implausible");
    return n;
  }
  std::string str() {
    std::string s(count(1 << 20), '\0');
    bytes(s.data(), s.size());
    return s;
  }
  std::vector<double> doubles() {
    std::vector<double> v(count());
    bytes(v.data(), v.size() * sizeof(double));
    return v;
  }
  Matrix matrix() {
    const std::uint64_t rows = count();
    const std::uint64_t cols = count();
    Matrix m(rows, cols);
    bytes(m.data().data(), m.size() * sizeof(double));
    return m;
  }

 private:
  std::istream& in_;
};

void write_config(Writer& w, const TrainConfig& c, const TensorShape& shape) {
  w.u64(shape.order());
  for (Index d : shape.dims()) w.i64(d);
  w.u64(c.model.rank);
  w.i64(c.model.propagation.layers);
  w.u64(c.model.propagation.feature_transform);
  w.u64(c.model.propagation.nonlinearity);
  w.u64(static_cast<std::uint64_t>(c.model.fusion));
  w.u64(static_cast<std::uint64_t>(c.model.predictor));
  w.u64(c.model.predictor_options.hidden);
  w.u64(c.model.predictor_options.mlp_depth);
  w.u64(c.model.predictor_options.channels);
  w.i64(c.epochs);
  w.u64(c.batch_size);
  w.f64(c.learning_rate);
  w.f64(c.weight_decay);
  w.u64(c.negatives_per_positive);
  w.u64(c.seed);
  w.i64(c.valid_every);
  w.u64(c.valid_k);
  const EvalProtocol& p = c.valid_protocol;
  w.u64(static_cast<std::uint64_t>(p.kind));
  w.u64(p.multiplier);
  w.u64(p.seed);
  w.u64(p.exclude_valid);
  w.u64(p.budget);
  w.u64(p.threads);
  w.u64(p.block_size);
  w.u64(c.graph_includes_valid);
  w.u64(c.audit_negatives);
}

template <typename E>
E read_enum(Reader& r, std::uint64_t max) {
  const std::uint64_t v = r.u64();
  if (v > max) throw DataError("checkpoint holds an unknown enum value");
  return static_cast<E>(v);
}

TrainConfig read_config(Reader& r, TensorShape& shape) {
  const std::uint64_t order = r.count(64);
  std::vector<Index> dims(order);
  for (auto& d : dims) d = r.i64();
  shape = TensorShape(dims);
  TrainConfig c;
  c.model.rank = r.u64();
  c.model.propagation.layers = static_cast<int>(r.i64());
  c.model.propagation.feature_transform = r.u64() != 0;
  c.model.propagation.nonlinearity = r.u64() != 0;
  c.model.fusion = read_enum<FusionKind>(r, 3);
  c.model.predictor = read_enum<PredictorKind>(r, 3);
  c.model.predictor_options.hidden = r.u64();
  c.model.predictor_options.mlp_depth = r.u64();
  c.model.predictor_options.channels = r.u64();
  c.epochs = static_cast<int>(r.i64());
  c.batch_size = r.u64();
  c.learning_rate = r.f64();
  c.weight_decay = r.f64();
  c.negatives_per_positive = r.u64();
  c.seed = r.u64();
  c.valid_every = static_cast<int>(r.i64());
  c.valid_k = r.u64();
  EvalProtocol& p = c.valid_protocol;
  p.kind = read_enum<CandidateKind>(r, 1);
  p.multiplier = r.u64();
  p.seed = r.u64();
  p.exclude_valid = r.u64() != 0;
  p.budget = r.u64();
  p.threads = r.u64();
  p.block_size = r.u64();
  c.graph_includes_valid = r.u64() != 0;
  c.audit_negatives = r.u64() != 0;
  return c;
}

void write_model(Writer& w, const Model& m) {
  w.matrix(m.embeddings().weights);
  w.u64(m.transforms().size());
  for (const auto& t : m.transforms()) w.matrix(t);
  const auto& blocks = m.predictor().params();
  w.u64(blocks.size());
  for (const auto& b : blocks) {
    w.str(b.name);
    w.u64(b.shape.size());
    for (auto s : b.shape) w.u64(s);
    w.doubles(b.values);
  }
}

void expect_same(const Matrix& got, const Matrix& want, const char* what) {
  if (got.rows() != want.rows() || got.cols() != want.cols()) {
    throw DataError(std::string("checkpoint ") + what +
                    " shape does not match its configuration");
  }
}

// Overwrites the parameters of a freshly initialized model.
void read_model(Reader& r, Model& m) {
  Matrix emb = r.matrix();
  expect_same(emb, m.embeddings().weights, "embedding table");
  m.embeddings().weights = std::move(emb);
  const std::uint64_t n_transforms = r.count(1 << 16);
  if (n_transforms != m.transforms().size()) {
    throw DataError("checkpoint transform count does not match configuration");
  }
  for (auto& t : m.transforms()) {
    Matrix loaded = r.matrix();
    expect_same(loaded, t, "transform");
    t = std::move(loaded);
  }
  auto& blocks = m.predictor().params();
  if (r.count(1 << 16) != blocks.size()) {
    throw DataError("checkpoint predictor block count does not match");
  }
  for (auto& b : blocks) {
    const std::string name = r.str();
    std::vector<std::size_t> shape(r.count(64));
    for (auto& s : shape) s = r.u64();
    std::vector<double> values = r.doubles();
    if (name != b.name || shape != b.shape || values.size() != b.values.size()) {
      throw DataError("checkpoint predictor block '" + name +
                      "' does not match configuration");
    }
    b.values = std::move(values);
  }
}

}  // namespace

void save_checkpoint(const TrainState& state, std::ostream& out) {
  Writer w(out);
  w.bytes(kMagic, sizeof kMagic);
  const std::uint32_t version = kCheckpointVersion;
  w.bytes(&version, sizeof version);
  write_config(w, state.config, state.model.shape());
  w.i64(state.epochs_done);
  w.i64(state.best_epoch);
  w.f64(state.best_valid);
  w.u64(state.log.size());
  for (const auto& rec : state.log) {
    w.i64(rec.epoch);
    w.f64(rec.loss);
    w.f64(rec.valid_ap);
    w.f64(rec.wall_ms);
  }
  write_model(w, state.model);
  const OptimizerState& o = state.optimizer;
  w.f64(o.beta1);
  w.f64(o.beta2);
  w.f64(o.epsilon);
  w.u64(o.step);
  w.u64(o.first_moment.size());
  for (std::size_t b = 0; b < o.first_moment.size(); ++b) {
    w.doubles(o.first_moment[b]);
    w.doubles(o.second_moment[b]);
  }
  w.u64(state.best_model.has_value());
  if (state.best_model) write_model(w, *state.best_model);
  w.bytes(kEndMarker, sizeof kEndMarker);
  if (!out) throw DataError("failed to write checkpoint");
}

void save_checkpoint(const TrainState& state, const std::string& path) {
  // Write-then-rename so an interrupted save never clobbers a good file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + tmp + "'");
    save_checkpoint(state, out);
  }
  std::filesystem::rename(tmp, path);
}

TrainState load_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  std::uint32_t version;
  r.bytes(&version, sizeof version);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  TensorShape shape;
  TrainConfig config = read_config(r, shape);
  TrainState state = init_training(shape, config);
  state.epochs_done = static_cast<int>(r.i64());
  state.best_epoch = static_cast<int>(r.i64());
  state.best_valid = r.f64();
  const std::uint64_t log_size = r.count(1 << 24);
  for (std::uint64_t i = 0; i < log_size; ++i) {
    EpochRecord rec;
    rec.epoch = static_cast<int>(r.i64());
    rec.loss = r.f64();
    rec.valid_ap = r.f64();
    rec.wall_ms = r.f64();
    state.log.push_back(rec);
  }
  read_model(r, state.model);
  OptimizerState& o = state.optimizer;
  o.beta1 = r.f64();
  o.beta2 = r.f64();
  o.epsilon = r.f64();
  o.step = r.u64();
  const std::uint64_t blocks = r.count(1 << 16);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    o.first_moment.push_back(r.doubles());
    o.second_moment.push_back(r.doubles());
  }
  if (r.u64() != 0) {
    Model best = state.model;
    read_model(r, best);
    state.best_model = std::move(best);
  }
  char end[4];
  r.bytes(end, sizeof end);
  if (std::memcmp(end, kEndMarker, sizeof end) != 0) {
    throw DataError("checkpoint end marker missing");
  }
  return state;
}

TrainState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  try {
    return load_checkpoint(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace tcn

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

#include "predictors.hpp"

#include <algorithm>

namespace tcn {

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kCp: return "cp";
    case PredictorKind::kTucker: return "tucker";
    case PredictorKind::kMlp: return "mlp";
    case PredictorKind::kConv: return "conv";
  }
  return "?";
}

PredictorKind parse_predictor(const std::string& name) {
  if (name == "cp") return PredictorKind::kCp;
  if (name == "tucker") return PredictorKind::kTucker;
  if (name == "mlp" || name == "ncft") return PredictorKind::kMlp;
  if (name == "conv" || name == "costco") return PredictorKind::kConv;
  throw UsageError("unknown predictor '" + name + "'");
}

double cp_score(const Matrix& rows) {
  double total = 0.0;
  for (std::size_t c = 0; c < rows.cols(); ++c) {
    double p = 1.0;
    for (std::size_t n = 0; n < rows.rows(); ++n) p *= rows(n, c);
    total += p;
  }
  return total;
}

void cp_backward(const Matrix& rows, double upstream, Matrix& grad_rows) {
  const std::size_t order = rows.rows();
  std::vector<double> prefix(order + 1);
  for (std::size_t c = 0; c < rows.cols(); ++c) {
    prefix[0] = 1.0;
    for (std::size_t n = 0; n < order; ++n) {
      prefix[n + 1] = prefix[n] * rows(n, c);
    }
    double suffix = 1.0;
    for (std::size_t n = order; n-- > 0;) {
      grad_rows(n, c) += upstream * prefix[n] * suffix;
      suffix *= rows(n, c);
    }
  }
}

namespace {

std::size_t int_pow(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out *= base;
  return out;
}

void check_core(const Matrix& rows, std::span<const double> core) {
  if (core.size() != int_pow(rows.cols(), rows.rows())) {
    throw UsageError("tucker: core size does not match rank^order");
  }
}

}  // namespace

double tucker_score(const Matrix& rows, std::span<const double> core) {
  check_core(rows, core);
  const std::size_t width = rows.cols();
  // Contract the last mode repeatedly.
  std::vector<double> cur(core.begin(), core.end());
  for (std::size_t n = rows.rows(); n-- > 0;) {
    const std::size_t outer = cur.size() / width;
    std::vector<double> next(outer, 0.0);
    auto r = rows.row(n);
    for (std::size_t o = 0; o < outer; ++o) {
      double acc = 0.0;
      for (std::size_t c = 0; c < width; ++c) acc += cur[o * width + c] * r[c];
      next[o] = acc;
    }
    cur = std::move(next);
  }
  return cur[0];
}

void tucker_backward(const Matrix& rows, std::span<const double> core,
                     double upstream, Matrix& grad_rows,
                     std::span<double> grad_core) {
  check_core(rows, core);
  const std::size_t order = rows.rows();
  const std::size_t width = rows.cols();
  std::vector<std::size_t> cell(order, 0);
  std::vector<double> prefix(order + 1);
  for (std::size_t flat = 0; flat < core.size(); ++flat) {
    prefix[0] = 1.0;
    for (std::size_t n = 0; n < order; ++n) {
      prefix[n + 1] = prefix[n] * rows(n, cell[n]);
    }
    grad_core[flat] += upstream * prefix[order];
    const double g = upstream * core[flat];
    if (g != 0.0) {
      double suffix = 1.0;
      for (std::size_t n = order; n-- > 0;) {
        grad_rows(n, cell[n]) += g * prefix[n] * suffix;
        suffix *= rows(n, cell[n]);
      }
    }
    // Row-major odometer.
    for (std::size_t n = order; n-- > 0;) {
      if (++cell[n] < width) break;
      cell[n] = 0;
    }
  }
}

ParamGrads Predictor::zero_grads() const {
  ParamGrads g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.values.size(), 0.0);
  return g;
}

void Predictor::check_input(const Matrix& input) const {
  if (input.rows() != input_rows_ || input.cols() != input_cols_) {
    throw UsageError(to_string(kind_) + " predictor expects a " +
                     std::to_string(input_rows_) + "x" +
                     std::to_string(input_cols_) + " input, got " +
                     std::to_string(input.rows()) + "x" +
                     std::to_string(input.cols()));
  }
}

namespace {

ParamBlock make_block(std::string name, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return {std::move(name), std::move(shape), std::vector<double>(n, 0.0)};
}

void glorot_fill(ParamBlock& block, std::size_t fan_out, std::size_t fan_in,
                 Rng& rng) {
  Matrix m = glorot_uniform(fan_out, fan_in, rng);
  std::copy(m.data().begin(), m.data().end(), block.values.begin());
}

// y = W x + b with W out x in, row-major.
void affine(std::span<const double> w, std::span<const double> b,
            std::span<const double> x, std::span<double> y) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < y.size(); ++o) {
    double acc = b[o];
    for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * x[i];
    y[o] = acc;
  }
}

// Accumulates parameter gradients and, when dx is non-empty, dx.
void affine_backward(std::span<const double> w, std::span<const double> x,
                     std::span<const double> dy, std::span<double> dx,
                     std::span<double> dw, std::span<double> db) {
  const std::size_t in = x.size();
  for (std::size_t o = 0; o < dy.size(); ++o) {
    const double g = dy[o];
    if (g == 0.0) continue;
    db[o] += g;
    for (std::size_t i = 0; i < in; ++i) {
      dw[o * in + i] += g * x[i];
      if (!dx.empty()) dx[i] += g * w[o * in + i];
    }
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

void relu_mask(const std::vector<double>& pre, std::vector<double>& grad) {
  for (std::size_t i = 0; i < pre.size(); ++i) {
    if (!(pre[i] > 0.0)) grad[i] = 0.0;
  }
}

class CpPredictor final : public Predictor {
 public:
  using Predictor::Predictor;

  double forward(const Matrix& input) const override {
    check_input(input);
    return cp_score(input);
  }
  void backward(const Matrix& input, double upstream, Matrix& grad_input,
                ParamGrads&) const override {
    check_input(input);
    cp_backward(input, upstream, grad_input);
  }
  std::unique_ptr<Predictor> clone() const override {
    return std::make_unique<CpPredictor>(*this);
  }
};

class TuckerPredictor final : public Predictor {
 public:
  TuckerPredictor(std::size_t rows, std::size_t cols, Rng& rng)
      : Predictor(PredictorKind::kTucker, rows, cols) {
    params_.push_back(
        make_block("core", std::vector<std::size_t>(rows, cols)));
    // Superdiagonal start (the CP model) with small symmetric noise.
    auto& core = params_[0].values;
    for (double& v : core) v = rng.uniform(-0.01, 0.01);
    std::size_t stride = 0;
    for (std::size_t n = 0; n < rows; ++n) stride = stride * cols + 1;
    for (std::size_t c = 0; c < cols; ++c) core[c * stride] += 1.0;
  }

  double forward(const Matrix& input) const override {
    check_input(input);
    return tucker_score(input, params_[0].values);
  }
  void backward(const Matrix& input, double upstream, Matrix& grad_input,
                ParamGrads& grads) const override {
    check_input(input);
    tucker_backward(input, params_[0].values, upstream, grad_input, grads[0]);
  }
  std::unique_ptr<Predictor> clone() const override {
    return std::make_unique<TuckerPredictor>(*this);
  }
};

// Flattened rows -> [affine -> relu] x depth -> affine -> scalar.
class MlpPredictor final : public Predictor {
 public:
  MlpPredictor(std::size_t rows, std::size_t cols,
               const PredictorOptions& options, Rng& rng)
      : Predictor(PredictorKind::kMlp, rows, cols) {
    std::size_t in = rows * cols;
    for (std::size_t k = 0; k <= options.mlp_depth; ++k) {
      const std::size_t out = k == options.mlp_depth ? 1 : options.hidden;
      params_.push_back(make_block("w" + std::to_string(k), {out, in}));
      glorot_fill(params_.back(), out, in, rng);
      params_.push_back(make_block("b" + std::to_string(k), {out}));
      in = out;
    }
  }

  double forward(const Matrix& input) const override {
    check_input(input);
    std::vector<double> act(input.data().begin(), input.data().end());
    const std::size_t layers = params_.size() / 2;
    for (std::size_t k = 0; k < layers; ++k) {
      std::vector<double> z(params_[2 * k + 1].values.size());
      affine(params_[2 * k].values, params_[2 * k + 1].values, act, z);
      if (k + 1 < layers) relu_inplace(z);
      act = std::move(z);
    }
    return act[0];
  }

  void backward(const Matrix& input, double upstream, Matrix& grad_input,
                ParamGrads& grads) const override {
    check_input(input);
    const std::size_t layers = params_.size() / 2;
    std::vector<std::vector<double>> acts{
        {input.data().begin(), input.data().end()}};
    std::vector<std::vector<double>> pres;
    for (std::size_t k = 0; k < layers; ++k) {
      std::vector<double> z(params_[2 * k + 1].values.size());
      affine(params_[2 * k].values, params_[2 * k + 1].values, acts.back(), z);
      pres.push_back(z);
      if (k + 1 < layers) relu_inplace(z);
      acts.push_back(std::move(z));
    }
    std::vector<double> dz{upstream};
    for (std::size_t k = layers; k-- > 0;) {
      std::vector<double> dx(acts[k].size(), 0.0);
      affine_backward(params_[2 * k].values, acts[k], dz, dx, grads[2 * k],
                      grads[2 * k + 1]);
      if (k > 0) relu_mask(pres[k - 1], dx);
      dz = std::move(dx);
    }
    auto gi = grad_input.data();
    for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += dz[i];
  }

  std::unique_ptr<Predictor> clone() const override {
    return std::make_unique<MlpPredictor>(*this);
  }
};

// Two-stage convolution over an M x r slab followed by a 2-layer head:
//   stage 1: C filters of shape M x 1 across the slab columns -> C x r
//   stage 2: C filters of shape 1 x r over all C input channels -> C
//   head:    C -> hidden (relu) -> 1
class ConvPredictor final : public Predictor {
 public:
  ConvPredictor(std::size_t rows, std::size_t cols,
                const PredictorOptions& options, Rng& rng)
      : Predictor(PredictorKind::kConv, rows, cols) {
    const std::size_t c = options.channels ? options.channels : cols;
    const std::size_t h = options.hidden;
    params_.push_back(make_block("mode_filters", {c, rows}));
    glorot_fill(params_.back(), c, rows, rng);
    params_.push_back(make_block("mode_bias", {c}));
    params_.push_back(make_block("rank_filters", {c, c, cols}));
    glorot_fill(params_.back(), c, c * cols, rng);
    params_.push_back(make_block("rank_bias", {c}));
    params_.push_back(make_block("head_w", {h, c}));
    glorot_fill(params_.back(), h, c, rng);
    params_.push_back(make_block("head_b", {h}));
    params_.push_back(make_block("out_w", {1, h}));
    glorot_fill(params_.back(), 1, h, rng);
    params_.push_back(make_block("out_b", {1}));
  }

  std::size_t channels() const { return params_[1].values.size(); }
  std::size_t hidden() const { return params_[5].values.size(); }

  struct Trace {
    std::vector<double> z1, a1, z2, a2, zh, ah;
    double out = 0.0;
  };

  Trace run(const Matrix& x) const {
    const std::size_t m_rows = input_rows();
    const std::size_t r = input_cols();
    const std::size_t c = channels();
    const auto& k1 = params_[0].values;
    const auto& b1 = params_[1].values;
    Trace t;
    t.z1.assign(c * r, 0.0);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t j = 0; j < r; ++j) {
        double acc = b1[ch];
        for (std::size_t m = 0; m < m_rows; ++m) acc += k1[ch * m_rows + m] * x(m, j);
        t.z1[ch * r + j] = acc;
      }
    }
    t.a1 = t.z1;
    relu_inplace(t.a1);
    t.z2.assign(c, 0.0);
    affine(params_[2].values, params_[3].values, t.a1, t.z2);
    t.a2 = t.z2;
    relu_inplace(t.a2);
    t.zh.assign(hidden(), 0.0);
    affine(params_[4].values, params_[5].values, t.a2, t.zh);
    t.ah = t.zh;
    relu_inplace(t.ah);
    std::vector<double> out(1);
    affine(params_[6].values, params_[7].values, t.ah, out);
    t.out = out[0];
    return t;
  }

  double forward(const Matrix& input) const override {
    check_input(input);
    return run(input).out;
  }

  void backward(const Matrix& input, double upstream, Matrix& grad_input,
                ParamGrads& grads) const override {
    check_input(input);
    const Trace t = run(input);
    const std::size_t m_rows = input_rows();
    const std::size_t r = input_cols();
    const std::size_t c = channels();

    std::vector<double> dout{upstream};
    std::vector<double> dah(hidden(), 0.0);
    affine_backward(params_[6].values, t.ah, dout, dah, grads[6], grads[7]);
    relu_mask(t.zh, dah);
    std::vector<double> da2(c, 0.0);
    affine_backward(params_[4].values, t.a2, dah, da2, grads[4], grads[5]);
    relu_mask(t.z2, da2);
    std::vector<double> da1(c * r, 0.0);
    affine_backward(params_[2].values, t.a1, da2, da1, grads[2], grads[3]);
    relu_mask(t.z1, da1);

    const auto& k1 = params_[0].values;
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t j = 0; j < r; ++j) {
        const double g = da1[ch * r + j];
        if (g == 0.0) continue;
        grads[1][ch] += g;
        for (std::size_t m = 0; m < m_rows; ++m) {
          grads[0][ch * m_rows + m] += g * input(m, j);
          grad_input(m, j) += g * k1[ch * m_rows + m];
        }
      }
    }
  }

  std::unique_ptr<Predictor> clone() const override {
    return std::make_unique<ConvPredictor>(*this);
  }
};

}  // namespace

std::unique_ptr<Predictor> make_predictor(PredictorKind kind,
                                          std::size_t input_rows,
                                          std::size_t input_cols,
                                          const PredictorOptions& options,
                                          Rng& rng) {
  if (input_rows == 0 || input_cols == 0) {
    throw UsageError("predictor input must be non-empty");
  }
  switch (kind) {
    case PredictorKind::kCp:
      return std::make_unique<CpPredictor>(kind, input_rows, input_cols);
    case PredictorKind::kTucker:
      return std::make_unique<TuckerPredictor>(input_rows, input_cols, rng);
    case PredictorKind::kMlp:
      if (options.hidden == 0) throw UsageError("mlp hidden width must be positive");
      return std::make_unique<MlpPredictor>(input_rows, input_cols, options, rng);
    case PredictorKind::kConv:
      if (options.hidden == 0) throw UsageError("conv head width must be positive");
      return std::make_unique<ConvPredictor>(input_rows, input_cols, options, rng);
  }
  throw UsageError("unknown predictor kind");
}

ScoreBatch score_batch(const Predictor& predictor, const FusedFeatures& feat,
                       std::span<const Index> cells,
                       std::span<const Index> offsets) {
  const std::size_t order = offsets.size();
  if (order == 0 || cells.size() % order != 0) {
    throw UsageError("score_batch: cell array is not a multiple of the order");
  }
  const std::size_t count = cells.size() / order;
  ScoreBatch batch;
  batch.scores.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    Matrix in = gather(feat, cells.subspan(i * order, order), offsets,
                       predictor.layout());
    batch.scores[i] = predictor.forward(in);
  }
  return batch;
}

void backward_batch(const Predictor& predictor, const FusedFeatures& feat,
                    std::span<const Index> cells,
                    std::span<const Index> offsets,
                    std::span<const double> upstream, ScoreBatch& batch) {
  const std::size_t order = offsets.size();
  const std::size_t count = cells.size() / order;
  if (upstream.size() != count) {
    throw UsageError("backward_batch: one upstream gradient per example");
  }
  batch.param_grads = predictor.zero_grads();
  batch.input_grads.clear();
  batch.input_grads.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Matrix in = gather(feat, cells.subspan(i * order, order), offsets,
                       predictor.layout());
    Matrix grad(in.rows(), in.cols());
    predictor.backward(in, upstream[i], grad, batch.param_grads);
    batch.input_grads.push_back(std::move(grad));
  }
}

}  // namespace tcn

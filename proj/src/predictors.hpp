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

#ifndef TCN_PREDICTORS_HPP_
#define TCN_PREDICTORS_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "propagation.hpp"

namespace tcn {

enum class PredictorKind { kCp, kTucker, kMlp, kConv };

std::string to_string(PredictorKind kind);
PredictorKind parse_predictor(const std::string& name);

// One named, flat, row-major parameter array.
struct ParamBlock {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

// Gradient buffers parallel to Predictor::params().
using ParamGrads = std::vector<std::vector<double>>;

struct PredictorOptions {
  std::size_t hidden = 64;    // head / MLP hidden width
  std::size_t mlp_depth = 2;  // MLP hidden layers
  std::size_t channels = 0;   // conv channels; 0 means the slab width

  bool operator==(const PredictorOptions&) const = default;
};

// Σ_c Π_n rows(n, c).
double cp_score(const Matrix& rows);
// grad(n, c) += upstream * Π_{m≠n} rows(m, c).
void cp_backward(const Matrix& rows, double upstream, Matrix& grad_rows);

// Σ_{c_1..c_N} G[c_1..c_N] Π_n rows(n, c_n), G row-major with every mode of
// size rows.cols().
double tucker_score(const Matrix& rows, std::span<const double> core);
void tucker_backward(const Matrix& rows, std::span<const double> core,
                     double upstream, Matrix& grad_rows,
                     std::span<double> grad_core);

// A differentiable score function over one gathered input matrix.
class Predictor {
 public:
  Predictor(PredictorKind kind, std::size_t input_rows, std::size_t input_cols)
      : kind_(kind), input_rows_(input_rows), input_cols_(input_cols) {}
  virtual ~Predictor() = default;

  PredictorKind kind() const { return kind_; }
  std::size_t input_rows() const { return input_rows_; }
  std::size_t input_cols() const { return input_cols_; }
  // The convolutional head reads the stacked slab; the rest read rows.
  GatherLayout layout() const {
    return kind_ == PredictorKind::kConv ? GatherLayout::kStacked
                                         : GatherLayout::kRows;
  }

  std::vector<ParamBlock>& params() { return params_; }
  const std::vector<ParamBlock>& params() const { return params_; }
  ParamGrads zero_grads() const;

  virtual double forward(const Matrix& input) const = 0;
  // Accumulates upstream * d score into grad_input and grads.
  virtual void backward(const Matrix& input, double upstream,
                        Matrix& grad_input, ParamGrads& grads) const = 0;
  virtual std::unique_ptr<Predictor> clone() const = 0;

 protected:
  void check_input(const Matrix& input) const;

  std::vector<ParamBlock> params_;

 private:
  PredictorKind kind_;
  std::size_t input_rows_;
  std::size_t input_cols_;
};

// Input is input_rows x input_cols as produced by gather() with the
// predictor's layout.
std::unique_ptr<Predictor> make_predictor(PredictorKind kind,
                                          std::size_t input_rows,
                                          std::size_t input_cols,
                                          const PredictorOptions& options,
                                          Rng& rng);

struct ScoreBatch {
  std::vector<double> scores;
  // Filled by backward_batch.
  std::vector<Matrix> input_grads;
  ParamGrads param_grads;
};

// Scores interactions given as flat N-wide rows, in order.
ScoreBatch score_batch(const Predictor& predictor, const FusedFeatures& feat,
                       std::span<const Index> cells,
                       std::span<const Index> offsets);

// Per-example input gradients and summed parameter gradients for
// upstream[i] * d scores[i].
void backward_batch(const Predictor& predictor, const FusedFeatures& feat,
                    std::span<const Index> cells,
                    std::span<const Index> offsets,
                    std::span<const double> upstream, ScoreBatch& batch);

}  // namespace tcn

#endif  // TCN_PREDICTORS_HPP_

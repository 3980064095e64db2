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


#include <doctest.h>

#include <cmath>
#include <sstream>

#include "checkpoint.hpp"
#include "evaluation.hpp"
#include "oracles.hpp"
#include "training.hpp"

using namespace tcn;

namespace {

struct Fixture {
  SparseTensor train_set, valid_set;
  NormalizedAdjacency adj;
  TrainConfig config;

  explicit Fixture(PredictorKind predictor) {
    auto d = synth_planted(TensorShape({8, 9, 10}), 2, 150, 0.0, 3);
    auto s = split(d.observed, {0.8, 0.1, 0.1}, 4);
    train_set = s.train;
    valid_set = s.valid;
    adj = normalize(build_clique_graph(train_set));
    config.model.rank = 3;
    config.model.predictor = predictor;
    config.model.predictor_options.hidden = 5;
    config.model.propagation.feature_transform = true;
    config.model.propagation.nonlinearity = true;
    config.batch_size = 32;
    config.valid_k = 10;
    config.seed = 99;
  }
};

std::vector<std::vector<double>> snapshot(const Model& m) {
  Model copy = m;
  std::vector<std::vector<double>> out;
  for (auto v : copy.parameter_views()) out.emplace_back(v.begin(), v.end());
  return out;
}

}  // namespace

TEST_CASE("checkpoint round trip reproduces state and continues identically") {
  for (int p = 0; p < 4; ++p) {
    Fixture fx(static_cast<PredictorKind>(p));
    TrainState a = init_training(fx.train_set.shape(), fx.config);
    train(a, fx.train_set, &fx.valid_set, fx.adj, 3);

    std::stringstream buf;
    save_checkpoint(a, buf);
    TrainState b = load_checkpoint(buf);
    CAPTURE(p);
    CHECK(b.config == a.config);
    CHECK(b.epochs_done == a.epochs_done);
    CHECK(b.best_epoch == a.best_epoch);
    CHECK(b.best_valid == a.best_valid);
    CHECK(b.optimizer == a.optimizer);
    CHECK(snapshot(b.model) == snapshot(a.model));
    CHECK(b.best_model.has_value() == a.best_model.has_value());
    if (a.best_model) CHECK(snapshot(*b.best_model) == snapshot(*a.best_model));
    REQUIRE(b.log.size() == a.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
      CHECK(b.log[i].loss == a.log[i].loss);
    }

    train(a, fx.train_set, &fx.valid_set, fx.adj, 2);
    train(b, fx.train_set, &fx.valid_set, fx.adj, 2);
    CHECK(snapshot(b.model) == snapshot(a.model));
  }
}

TEST_CASE("malformed checkpoints are rejected") {
  Fixture fx(PredictorKind::kCp);
  TrainState s = init_training(fx.train_set.shape(), fx.config);
  std::stringstream buf;
  save_checkpoint(s, buf);
  const std::string bytes = buf.str();

  std::string bad = bytes;
  bad[0] ^= 0x5a;
  std::istringstream bad_in(bad);
  CHECK_THROWS_AS(load_checkpoint(bad_in), DataError);

  for (std::size_t cut : {std::size_t{3}, bytes.size() / 2, bytes.size() - 1}) {
    std::istringstream t(bytes.substr(0, cut));
    CHECK_THROWS_AS(load_checkpoint(t), DataError);
  }
  CHECK_THROWS_AS(load_checkpoint(std::string("/nonexistent/ckpt.bin")), DataError);
}

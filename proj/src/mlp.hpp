// Copyright (c) 2026 the glik authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GLIK_MLP_HPP
#define GLIK_MLP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "likelihood_approx.hpp"

namespace glik {

// Feed-forward network, rectified-linear hidden layers, identity output.
struct MLP {
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;

  static MLP make(const std::vector<int>& layer_sizes, uint64_t seed);
  static MLP zeros(const std::vector<int>& layer_sizes);
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
};

struct LossKind {
  enum class Tag { ExactCE, GaussOneHot, Matched };
  Tag tag = Tag::ExactCE;
  ApproxConfig cfg;  // Matched only

  static LossKind exact_ce() { return {Tag::ExactCE, {}}; }
  static LossKind gauss_onehot() { return {Tag::GaussOneHot, {}}; }
  static LossKind matched(const ApproxConfig& c) { return {Tag::Matched, c}; }
};

Eigen::VectorXd forward(const MLP& net, const Eigen::VectorXd& x);

using MLPGrads = MLP;  // same shapes, holds d loss / d parameter

struct LossResult {
  double loss = 0.0;
  MLPGrads grads;
};

// Mean loss over the batch plus weight_decay * 0.5 * ||theta||^2; gradients by
// manual backprop.
LossResult loss_and_grad(const MLP& net, const Dataset& batch, const LossKind& kind,
                         double weight_decay);

struct TrainConfig {
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 64;
  int epochs = 300;
  double weight_decay = 0.0;
};

struct TrainResult {
  MLP net;
  std::vector<double> epoch_loss;
  std::vector<double> epoch_accuracy;
  bool diverged = false;
};

TrainResult train(const MLP& init, const Dataset& data, const LossKind& kind,
                  const TrainConfig& cfg, uint64_t rng_seed);

Eigen::VectorXd predict_proba_point(const MLP& net, const Eigen::VectorXd& x);

}  // namespace glik

#endif

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

#include "mlp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rng.hpp"
#include "special_fns.hpp"

namespace glik {

MLP MLP::make(const std::vector<int>& layer_sizes, uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw std::invalid_argument("MLP: need at least input and output layers");
  }
  Rng rng(seed);
  MLP net;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    if (fan_in < 1 || fan_out < 1) {
      throw std::invalid_argument("MLP: layer sizes must be positive");
    }
    // He-style scale for the ReLU stack.
    const double scale = std::sqrt(2.0 / fan_in);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i) {
      for (int j = 0; j < fan_in; ++j) w(i, j) = scale * rng.normal();
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return net;
}

MLP MLP::zeros(const std::vector<int>& layer_sizes) {
  MLP net = make(layer_sizes, 0);
  for (auto& w : net.weights) w.setZero();
  return net;
}

Eigen::VectorXd forward(const MLP& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim()) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  Eigen::VectorXd h = x;
  const size_t last = net.weights.size() - 1;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    h = net.weights[l] * h + net.biases[l];
    if (l != last) h = h.cwiseMax(0.0);
  }
  return h;
}

namespace {

// Forward pass keeping pre-activations, then backprop d loss / d logits.
struct Tape {
  std::vector<Eigen::VectorXd> acts;  // activations per layer, acts[0] = x
};

Eigen::VectorXd forward_tape(const MLP& net, const Eigen::VectorXd& x, Tape* tape) {
  tape->acts.clear();
  tape->acts.push_back(x);
  Eigen::VectorXd h = x;
  const size_t last = net.weights.size() - 1;
  for (size_t l = 0; l < net.weights.size(); ++l) {
    h = net.weights[l] * h + net.biases[l];
    if (l != last) {
      h = h.cwiseMax(0.0);
      tape->acts.push_back(h);
    }
  }
  return h;
}

void backprop(const MLP& net, const Tape& tape, Eigen::VectorXd delta, MLPGrads* grads) {
  for (int l = static_cast<int>(net.weights.size()) - 1; l >= 0; --l) {
    grads->weights[l] += delta * tape.acts[l].transpose();
    grads->biases[l] += delta;
    if (l > 0) {
      delta = net.weights[l].transpose() * delta;
      // ReLU mask from the stored post-activation.
      delta = (tape.acts[l].array() > 0.0).select(delta, 0.0);
    }
  }
}

}  // namespace

LossResult loss_and_grad(const MLP& net, const Dataset& batch, const LossKind& kind,
                         double weight_decay) {
  if (batch.size() < 1) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
  if (weight_decay < 0.0) {
    throw std::invalid_argument("loss_and_grad: weight_decay must be nonnegative");
  }
  const int kk = net.output_dim();
  LossResult res;
  res.grads.weights.reserve(net.weights.size());
  res.grads.biases.reserve(net.biases.size());
  for (size_t l = 0; l < net.weights.size(); ++l) {
    res.grads.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    res.grads.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }

  // Matched pseudo-observations depend only on the label class.
  std::vector<ClassPseudoObs> per_class;
  if (kind.tag == LossKind::Tag::Matched) {
    if (kk < 2) {
      throw std::invalid_argument("loss_and_grad: Matched needs K >= 2 outputs");
    }
    per_class.resize(batch.num_classes);
    for (int c = 0; c < batch.num_classes; ++c) {
      per_class[c] = softmax_pseudo_obs(c, kk, kind.cfg);
    }
  }

  Tape tape;
  const int n = batch.size();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd f = forward_tape(net, batch.features.row(i).transpose(), &tape);
    const int y = batch.labels[i];
    double loss_i = 0.0;
    Eigen::VectorXd delta(kk);
    switch (kind.tag) {
      case LossKind::Tag::ExactCE: {
        std::vector<double> logits(f.data(), f.data() + kk);
        const double lse = log_sum_exp(logits);
        loss_i = lse - f(y);
        for (int k = 0; k < kk; ++k) delta(k) = std::exp(f(k) - lse);
        delta(y) -= 1.0;
        break;
      }
      case LossKind::Tag::GaussOneHot: {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(kk);
        c(y) = 1.0;
        delta = f - c;
        loss_i = 0.5 * delta.squaredNorm();
        break;
      }
      case LossKind::Tag::Matched: {
        const ClassPseudoObs& o = per_class[y];
        for (int k = 0; k < kk; ++k) {
          const double r = f(k) - o.means[k];
          const double v = o.variances[k];
          loss_i += 0.5 * (r * r / v + std::log(2.0 * std::numbers::pi * v));
          delta(k) = r / v;
        }
        break;
      }
    }
    if (!std::isfinite(loss_i)) {
      throw std::runtime_error("loss_and_grad: non-finite loss at example " + std::to_string(i));
    }
    res.loss += loss_i;
    backprop(net, tape, delta / n, &res.grads);
  }
  res.loss /= n;

  if (weight_decay > 0.0) {
    double sq = 0.0;
    for (size_t l = 0; l < net.weights.size(); ++l) {
      sq += net.weights[l].squaredNorm() + net.biases[l].squaredNorm();
      res.grads.weights[l] += weight_decay * net.weights[l];
      res.grads.biases[l] += weight_decay * net.biases[l];
    }
    res.loss += weight_decay * 0.5 * sq;
  }
  return res;
}

TrainResult train(const MLP& init, const Dataset& data, const LossKind& kind,
                  const TrainConfig& cfg, uint64_t rng_seed) {
  if (cfg.epochs < 1) {
    throw std::invalid_argument("train: epochs must be >= 1");
  }
  TrainResult res;
  res.net = init;
  MLP velocity = init;
  for (auto& w : velocity.weights) w.setZero();
  for (auto& b : velocity.biases) b.setZero();

  std::vector<int> order(data.size());
  for (int i = 0; i < data.size(); ++i) order[i] = i;
  Rng rng(rng_seed);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int i = data.size() - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.below(i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < data.size(); start += cfg.batch_size) {
      const int end = std::min(start + cfg.batch_size, data.size());
      std::vector<int> idx(order.begin() + start, order.begin() + end);
      const Dataset batch = dataset_slice(data, idx);
      LossResult lr;
      try {
        lr = loss_and_grad(res.net, batch, kind, cfg.weight_decay);
      } catch (const std::runtime_error&) {
        res.diverged = true;
        return res;
      }
      epoch_loss += lr.loss;
      ++batches;
      for (size_t l = 0; l < res.net.weights.size(); ++l) {
        velocity.weights[l] = cfg.momentum * velocity.weights[l] - cfg.lr * lr.grads.weights[l];
        velocity.biases[l] = cfg.momentum * velocity.biases[l] - cfg.lr * lr.grads.biases[l];
        res.net.weights[l] += velocity.weights[l];
        res.net.biases[l] += velocity.biases[l];
      }
    }
    epoch_loss /= batches;
    if (!std::isfinite(epoch_loss)) {
      res.diverged = true;
      res.epoch_loss.push_back(epoch_loss);
      return res;
    }
    int correct = 0;
    for (int i = 0; i < data.size(); ++i) {
      const Eigen::VectorXd f = forward(res.net, data.features.row(i).transpose());
      int arg = 0;
      f.maxCoeff(&arg);
      if (arg == data.labels[i]) ++correct;
    }
    res.epoch_loss.push_back(epoch_loss);
    res.epoch_accuracy.push_back(static_cast<double>(correct) / data.size());
  }
  return res;
}

Eigen::VectorXd predict_proba_point(const MLP& net, const Eigen::VectorXd& x) {
  const Eigen::VectorXd f = forward(net, x);
  std::vector<double> logits(f.data(), f.data() + f.size());
  const auto p = softmax(logits);
  return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<int>(p.size()));
}

}  // namespace glik

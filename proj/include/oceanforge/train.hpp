// train.hpp
//
// Copyright 2026 The Oceanforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Symmetric contrastive training: loss over cosine similarities with a
// learnable temperature, AdamW with decoupled weight decay, cosine LR decay,
// and a finite-difference gradient verifier.

#ifndef OCEANFORGE_TRAIN_HPP
#define OCEANFORGE_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oceanforge/errors.hpp"
#include "oceanforge/model.hpp"
#include "oceanforge/tensor.hpp"

namespace oceanforge::train {

enum class Errc {
  DegenerateBatch,
  ZeroNormRow,
  NonFiniteLoss,
  ZeroEpsilon,
};

using Error = CodedError<Errc>;

using tensor::Tensor;

// ---------------------------------------------------------------------------
// Contrastive loss
// ---------------------------------------------------------------------------

// L = -(1/2N) sum_i [ log softmax_j(Ea_i.Et_j / tau)_i
//                   + log softmax_j(Et_i.Ea_j / tau)_i ]
// over row-normalized embeddings. N=1 is only meaningful as a diagnostic;
// the single-element softmax pins the loss to zero.
inline Tensor contrastive_loss(const Tensor& ea, const Tensor& et, const Tensor& tau,
                               bool diagnostic = false) {
  const int n = ea->rows;
  if (n < 2 && !diagnostic)
    throw Error(Errc::DegenerateBatch,
                "contrastive loss needs N >= 2, got " + std::to_string(n));
  Tensor ea_hat, et_hat;
  try {
    ea_hat = tensor::l2_normalize_rows(ea);
    et_hat = tensor::l2_normalize_rows(et);
  } catch (const tensor::Error& e) {
    if (e.code() == tensor::Errc::ZeroNormRow)
      throw Error(Errc::ZeroNormRow, e.what());
    throw;
  }
  auto logits = tensor::div_scalar_tensor(tensor::matmul_nt(ea_hat, et_hat), tau);
  auto audio_to_text = tensor::trace(tensor::log_softmax_rows(logits));
  auto text_to_audio = tensor::trace(tensor::log_softmax_rows(tensor::transpose(logits)));
  return tensor::scalar_mul(tensor::add(audio_to_text, text_to_audio), -0.5 / n);
}

inline Tensor contrastive_loss(const Tensor& ea, const Tensor& et, double tau,
                               bool diagnostic = false) {
  auto t = tensor::make_tensor(1, 1);
  t->value[0] = tau;
  return contrastive_loss(ea, et, t, diagnostic);
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct AdamWConfig {
  double beta1 = 0.99;  // kept as printed in the training recipe
  double beta2 = 0.9;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  AdamW(std::vector<model::Param> params, AdamWConfig config = {})
      : params_(std::move(params)), config_(config) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i].t->size(), 0.0);
      v_[i].assign(params_[i].t->size(), 0.0);
    }
  }

  // Applies one decoupled-weight-decay Adam update from the current grads.
  void step(double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i].t;
      // no decay on biases or the temperature: decaying them drags the
      // logit scale and offsets toward zero for no modeling reason
      const bool decay = config_.weight_decay != 0.0 && params_[i].t->rows > 1;
      for (std::size_t j = 0; j < p.size(); ++j) {
        m_[i][j] = config_.beta1 * m_[i][j] + (1.0 - config_.beta1) * p.grad[j];
        v_[i][j] = config_.beta2 * v_[i][j] + (1.0 - config_.beta2) * p.grad[j] * p.grad[j];
        const double mhat = m_[i][j] / bc1;
        const double vhat = v_[i][j] / bc2;
        double update = mhat / (std::sqrt(vhat) + config_.eps);
        if (decay) update += config_.weight_decay * p.value[j];
        p.value[j] -= lr * update;
      }
    }
  }

  int64_t steps_taken() const { return t_; }

 private:
  std::vector<model::Param> params_;
  AdamWConfig config_;
  int64_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

inline double cosine_lr(double base_lr, int64_t step, int64_t total_steps) {
  if (total_steps <= 0) return base_lr;
  const double frac = static_cast<double>(std::min(step, total_steps)) /
                      static_cast<double>(total_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainSample {
  model::PatchInput audio;
  std::vector<int> tokens;
};

struct TrainOptions {
  int batch_size = 8;
  int epochs = 1;
  int max_steps = 0;  // 0 means run every epoch to completion
  double base_lr = 1e-5;
  AdamWConfig adamw;
  uint64_t seed = 42;
};

struct StepLog {
  int epoch = 0;
  int64_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  double tau = 0.0;
};

struct TrainResult {
  std::vector<StepLog> steps;
  int64_t total_steps = 0;
  double final_loss = 0.0;
};

namespace detail {

constexpr double kLogitLo = -6.907755278982137;  // ln 1e-3
constexpr double kLogitHi = 4.605170185988092;   // ln 100

inline void clamp_temperature(const Tensor& logit) {
  logit->value[0] = std::clamp(logit->value[0], kLogitLo, kLogitHi);
}

}  // namespace detail

inline TrainResult run_training(model::DualEncoder& enc,
                                const std::vector<TrainSample>& samples,
                                const TrainOptions& opt) {
  if (samples.size() < 2)
    throw Error(Errc::DegenerateBatch, "training needs at least two samples");
  const int bs = std::max(2, opt.batch_size);
  const int64_t per_epoch = static_cast<int64_t>(samples.size() + bs - 1) / bs;
  int64_t total = per_epoch * opt.epochs;
  if (opt.max_steps > 0) total = std::min<int64_t>(total, opt.max_steps);

  AdamW optimizer(enc.params().trainable(), opt.adamw);
  TrainResult result;
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  int64_t step = 0;
  for (int epoch = 0; epoch < opt.epochs && step < total; ++epoch) {
    std::mt19937_64 rng(opt.seed + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(epoch + 1));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t at = 0; at < order.size() && step < total; at += static_cast<std::size_t>(bs)) {
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(bs),
                                                     order.size() - at);
      if (take < 2) break;  // a trailing singleton cannot form a contrastive batch

      std::vector<model::PatchInput> audio;
      std::vector<std::vector<int>> text;
      audio.reserve(take);
      text.reserve(take);
      for (std::size_t i = 0; i < take; ++i) {
        audio.push_back(samples[order[at + i]].audio);
        text.push_back(samples[order[at + i]].tokens);
      }

      auto ea = enc.encode_audio_batch(audio);
      auto et = enc.encode_text_batch(text);
      auto tau = enc.temperature();
      auto loss = contrastive_loss(ea, et, tau);
      if (!std::isfinite(loss->value[0]))
        throw Error(Errc::NonFiniteLoss,
                    "loss is not finite at step " + std::to_string(step) +
                        " (lr=" + std::to_string(cosine_lr(opt.base_lr, step, total)) + ")");

      tensor::backward(loss);
      const double lr = cosine_lr(opt.base_lr, step, total);
      optimizer.step(lr);
      detail::clamp_temperature(enc.temperature_logit());

      result.steps.push_back({epoch, step, loss->value[0], lr,
                              std::exp(enc.temperature_logit()->value[0])});
      result.final_loss = loss->value[0];
      ++step;
    }
  }
  result.total_steps = step;
  return result;
}

// Per-epoch summary rows: epoch, mean loss, last lr, last tau.
inline std::string epoch_csv(const TrainResult& result) {
  std::ostringstream out;
  out << "epoch,loss,lr,tau\n";
  int epoch = -1;
  double loss_sum = 0.0;
  int64_t count = 0;
  double last_lr = 0.0, last_tau = 0.0;
  char buf[128];
  auto flush = [&] {
    if (count == 0) return;
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", epoch, loss_sum / count, last_lr,
                  last_tau);
    out << buf;
  };
  for (const auto& s : result.steps) {
    if (s.epoch != epoch) {
      flush();
      epoch = s.epoch;
      loss_sum = 0.0;
      count = 0;
    }
    loss_sum += s.loss;
    ++count;
    last_lr = s.lr;
    last_tau = s.tau;
  }
  flush();
  return out.str();
}

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

// Central differences per coordinate against the analytic gradient; returns
// the max relative error. Coordinates may be subsampled per tensor.
inline double finite_diff_check(const std::function<Tensor()>& loss_fn,
                                const std::vector<Tensor>& leaves, double eps,
                                int max_coords_per_tensor = -1, uint64_t seed = 0x9d5e11) {
  if (eps <= 0.0) throw Error(Errc::ZeroEpsilon, "finite differences need eps > 0");
  auto loss = loss_fn();
  tensor::backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(leaves.size());
  for (const auto& l : leaves) analytic.push_back(l->grad);

  std::mt19937_64 rng(seed);
  double max_rel = 0.0;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    const auto& leaf = leaves[li];
    std::vector<std::size_t> coords(leaf->size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (max_coords_per_tensor > 0 &&
        coords.size() > static_cast<std::size_t>(max_coords_per_tensor)) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<std::size_t>(max_coords_per_tensor));
    }
    for (std::size_t i : coords) {
      const double saved = leaf->value[i];
      leaf->value[i] = saved + eps;
      const double up = loss_fn()->value[0];
      leaf->value[i] = saved - eps;
      const double down = loss_fn()->value[0];
      leaf->value[i] = saved;
      const double fd = (up - down) / (2.0 * eps);
      const double an = analytic[li][i];
      const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace oceanforge::train

#endif  // OCEANFORGE_TRAIN_HPP

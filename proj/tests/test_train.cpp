// test_train.cpp
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

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "oceanforge/model.hpp"
#include "oceanforge/tensor.hpp"
#include "oceanforge/train.hpp"

using namespace oceanforge;
using train::Errc;
using train::Error;
using tensor::Tensor;

namespace {

auto ErrcIs(Errc want) {
  return Catch::Matchers::Predicate<Error>(
      [want](const Error& e) { return e.code() == want; });
}

Tensor random_embeddings(std::mt19937_64& rng, int n, int d, bool requires_grad = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto t = tensor::make_tensor(n, d, requires_grad);
  for (auto& v : t->value) v = u(rng);
  return t;
}

// Loss restated with plain loops and scalars, no shared code with the graph.
double loss_by_hand(const std::vector<std::vector<double>>& ea,
                    const std::vector<std::vector<double>>& et, double tau) {
  const int n = static_cast<int>(ea.size());
  const int d = static_cast<int>(ea[0].size());
  auto normalized = [&](const std::vector<std::vector<double>>& m) {
    std::vector<std::vector<double>> out(m.size(), std::vector<double>(d));
    for (std::size_t i = 0; i < m.size(); ++i) {
      double ss = 0.0;
      for (double v : m[i]) ss += v * v;
      const double inv = 1.0 / std::sqrt(ss);
      for (int j = 0; j < d; ++j) out[i][j] = m[i][j] * inv;
    }
    return out;
  };
  const auto a = normalized(ea);
  const auto t = normalized(et);
  std::vector<std::vector<double>> s(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += a[i][k] * t[j][k];
      s[i][j] = dot / tau;
    }
  auto log_softmax_at = [&](bool rowwise, int i) {
    double mx = -1e300;
    for (int j = 0; j < n; ++j) mx = std::max(mx, rowwise ? s[i][j] : s[j][i]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) z += std::exp((rowwise ? s[i][j] : s[j][i]) - mx);
    return s[i][i] - mx - std::log(z);
  };
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += log_softmax_at(true, i) + log_softmax_at(false, i);
  return -total / (2.0 * n);
}

std::vector<std::vector<double>> rows_of(const Tensor& t) {
  std::vector<std::vector<double>> out(t->rows, std::vector<double>(t->cols));
  for (int i = 0; i < t->rows; ++i)
    for (int j = 0; j < t->cols; ++j) out[i][j] = t->value[static_cast<std::size_t>(i) * t->cols + j];
  return out;
}

model::ModelConfig tiny_config(uint64_t seed = 7) {
  model::ModelConfig c;
  c.d_model = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.d_ff = 16;
  c.embed_dim = 4;
  c.head_hidden = 6;
  c.vocab_size = 64;
  c.max_len = 12;
  c.patch_size = 4;
  c.patch_stride = 4;
  c.max_patches = 16;
  c.lora_rank = 2;
  c.lora_alpha = 4.0;
  c.seed = seed;
  return c;
}

model::PatchInput patch_input(const std::vector<double>& signature, int count, int dim,
                              uint64_t noise_seed) {
  model::PatchInput in;
  in.count = count;
  in.dim = dim;
  in.values.resize(static_cast<std::size_t>(count) * dim);
  in.grid_indices.resize(count);
  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> jitter(0.0, 0.05);
  for (int p = 0; p < count; ++p) {
    in.grid_indices[p] = p;
    for (int j = 0; j < dim; ++j)
      in.values[static_cast<std::size_t>(p) * dim + j] =
          signature[j % signature.size()] + jitter(rng);
  }
  return in;
}

// Six pairwise-distinct samples grouped into three classes.
std::vector<train::TrainSample> toy_samples(const model::ModelConfig& cfg) {
  std::vector<train::TrainSample> samples;
  const std::vector<std::vector<double>> class_signatures = {
      {1.0, 0.0, 0.0, -1.0}, {0.0, 1.0, -1.0, 0.0}, {-1.0, -1.0, 1.0, 1.0}};
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 2; ++j) {
      train::TrainSample s;
      auto sig = class_signatures[static_cast<std::size_t>(k)];
      sig[0] += 0.5 * j;  // sample-specific component keeps pairs separable
      s.audio = patch_input(sig, 4, cfg.patch_size * cfg.patch_size,
                            static_cast<uint64_t>(k * 10 + j));
      s.tokens = {0, 10 + k, 20 + k * 2 + j, 1};
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

double checksum(const Tensor& t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t->size(); ++i)
    acc += t->value[i] * static_cast<double>(i % 97 + 1);
  return acc;
}

}  // namespace

TEST_CASE("contrastive loss matches a double-loop oracle") {
  std::mt19937_64 rng(0x10c5au);
  std::uniform_int_distribution<int> nd(2, 16), dd(1, 32);
  std::uniform_real_distribution<double> taud(0.05, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nd(rng), d = dd(rng);
    auto ea = random_embeddings(rng, n, d);
    auto et = random_embeddings(rng, n, d);
    const double tau = taud(rng);
    auto loss = train::contrastive_loss(ea, et, tau);
    const double want = loss_by_hand(rows_of(ea), rows_of(et), tau);
    REQUIRE_THAT(loss->value[0], Catch::Matchers::WithinAbs(want, 1e-10));
  }
}

TEST_CASE("uniform batch of four gives exactly ln 4") {
  auto ea = tensor::make_tensor(4, 8);
  auto et = tensor::make_tensor(4, 8);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 8; ++j) {
      ea->value[static_cast<std::size_t>(i) * 8 + j] = (j == 0) ? 2.5 : 0.0;
      et->value[static_cast<std::size_t>(i) * 8 + j] = (j == 1) ? -0.5 : 0.0;
    }
  auto loss = train::contrastive_loss(ea, et, 0.07);
  REQUIRE_THAT(loss->value[0], Catch::Matchers::WithinAbs(std::log(4.0), 1e-12));
}

TEST_CASE("single-pair batch is rejected unless diagnostic, then loss is zero") {
  std::mt19937_64 rng(3);
  auto ea = random_embeddings(rng, 1, 6);
  auto et = random_embeddings(rng, 1, 6);
  REQUIRE_THROWS_MATCHES(train::contrastive_loss(ea, et, 0.07), Error,
                         ErrcIs(Errc::DegenerateBatch));
  auto loss = train::contrastive_loss(ea, et, 0.07, true);
  REQUIRE(loss->value[0] == 0.0);
}

TEST_CASE("loss is invariant to paired permutation and per-row positive scaling") {
  std::mt19937_64 rng(11);
  const int n = 7, d = 12;
  auto ea = random_embeddings(rng, n, d);
  auto et = random_embeddings(rng, n, d);
  const double base = train::contrastive_loss(ea, et, 0.2)->value[0];

  std::vector<int> perm = {3, 0, 6, 1, 5, 2, 4};
  auto pea = tensor::make_tensor(n, d);
  auto pet = tensor::make_tensor(n, d);
  std::uniform_real_distribution<double> scale(0.1, 9.0);
  auto sea = tensor::make_tensor(n, d);
  auto set = tensor::make_tensor(n, d);
  for (int i = 0; i < n; ++i) {
    const double sa = scale(rng), st = scale(rng);
    for (int j = 0; j < d; ++j) {
      const auto src = static_cast<std::size_t>(perm[i]) * d + j;
      const auto dst = static_cast<std::size_t>(i) * d + j;
      pea->value[dst] = ea->value[src];
      pet->value[dst] = et->value[src];
      sea->value[dst] = ea->value[dst] * sa;
      set->value[dst] = et->value[dst] * st;
    }
  }
  REQUIRE_THAT(train::contrastive_loss(pea, pet, 0.2)->value[0],
               Catch::Matchers::WithinAbs(base, 1e-12));
  REQUIRE_THAT(train::contrastive_loss(sea, set, 0.2)->value[0],
               Catch::Matchers::WithinAbs(base, 1e-12));
}

TEST_CASE("loss is symmetric in its arguments and never negative") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto ea = random_embeddings(rng, 5, 9);
    auto et = random_embeddings(rng, 5, 9);
    const double ab = train::contrastive_loss(ea, et, 0.5)->value[0];
    const double ba = train::contrastive_loss(et, ea, 0.5)->value[0];
    REQUIRE_THAT(ab, Catch::Matchers::WithinAbs(ba, 1e-12));
    REQUIRE(ab >= 0.0);
  }
}

TEST_CASE("a zero embedding row is rejected") {
  std::mt19937_64 rng(23);
  auto ea = random_embeddings(rng, 3, 4);
  auto et = random_embeddings(rng, 3, 4);
  for (int j = 0; j < 4; ++j) ea->value[4 + j] = 0.0;
  REQUIRE_THROWS_MATCHES(train::contrastive_loss(ea, et, 0.07), Error,
                         ErrcIs(Errc::ZeroNormRow));
}

TEST_CASE("contrastive gradients match central differences") {
  std::mt19937_64 rng(29);
  auto ea = random_embeddings(rng, 6, 10, true);
  auto et = random_embeddings(rng, 6, 10, true);
  auto logit = tensor::make_tensor(1, 1, true);
  logit->value[0] = std::log(0.07);
  auto loss_fn = [&] {
    return train::contrastive_loss(ea, et, tensor::exp_elem(logit));
  };
  const double err = train::finite_diff_check(loss_fn, {ea, et, logit}, 1e-5);
  REQUIRE(err < 1e-4);
}

TEST_CASE("finite differences nail an analytic quadratic") {
  auto theta = tensor::make_tensor(3, 4, true);
  for (std::size_t i = 0; i < theta->size(); ++i)
    theta->value[i] = 0.3 * static_cast<double>(i) - 1.7;
  auto loss_fn = [&] { return tensor::sum_all(tensor::hadamard(theta, theta)); };
  const double err = train::finite_diff_check(loss_fn, {theta}, 1e-4);
  REQUIRE(err < 1e-8);
}

TEST_CASE("finite differences reject a zero step size") {
  auto theta = tensor::make_tensor(1, 1, true);
  auto loss_fn = [&] { return tensor::sum_all(theta); };
  REQUIRE_THROWS_MATCHES(train::finite_diff_check(loss_fn, {theta}, 0.0), Error,
                         ErrcIs(Errc::ZeroEpsilon));
  REQUIRE_THROWS_MATCHES(train::finite_diff_check(loss_fn, {theta}, -1e-6), Error,
                         ErrcIs(Errc::ZeroEpsilon));
}

TEST_CASE("adamw single step matches the update rule by hand") {
  auto p = tensor::make_tensor(2, 1, true);
  p->value = {1.0, -2.0};
  p->grad = {0.5, -0.25};
  train::AdamWConfig cfg;
  cfg.weight_decay = 0.1;
  train::AdamW opt({model::Param{"p", p, false}}, cfg);
  opt.step(0.01);

  for (int i = 0; i < 2; ++i) {
    const double g = (i == 0) ? 0.5 : -0.25;
    const double theta0 = (i == 0) ? 1.0 : -2.0;
    const double m = (1.0 - cfg.beta1) * g;
    const double v = (1.0 - cfg.beta2) * g * g;
    const double mhat = m / (1.0 - cfg.beta1);
    const double vhat = v / (1.0 - cfg.beta2);
    const double want = theta0 - 0.01 * (mhat / (std::sqrt(vhat) + cfg.eps) +
                                         cfg.weight_decay * theta0);
    REQUIRE_THAT(p->value[static_cast<std::size_t>(i)],
                 Catch::Matchers::WithinAbs(want, 1e-15));
  }
}

TEST_CASE("adamw with zero learning rate leaves parameters untouched") {
  std::mt19937_64 rng(31);
  auto p = random_embeddings(rng, 4, 5, true);
  const auto before = p->value;
  for (auto& g : p->grad) g = 3.0;
  train::AdamW opt({model::Param{"p", p, false}});
  for (int i = 0; i < 10; ++i) opt.step(0.0);
  REQUIRE(p->value == before);
}

TEST_CASE("cosine decay hits its endpoints and midpoint") {
  REQUIRE_THAT(train::cosine_lr(2.0, 0, 100), Catch::Matchers::WithinAbs(2.0, 1e-15));
  REQUIRE_THAT(train::cosine_lr(2.0, 50, 100), Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(train::cosine_lr(2.0, 100, 100), Catch::Matchers::WithinAbs(0.0, 1e-12));
  REQUIRE(train::cosine_lr(2.0, 25, 100) > train::cosine_lr(2.0, 75, 100));
}

TEST_CASE("training leaves frozen weights bit-identical and moves adapters") {
  auto cfg = tiny_config();
  model::DualEncoder enc(cfg);
  auto samples = toy_samples(cfg);

  std::vector<std::pair<std::string, double>> frozen_before;
  for (const auto& p : enc.params().all())
    if (p.frozen) frozen_before.emplace_back(p.name, checksum(p.t));
  const double patch_before = checksum(enc.params().find("audio.patch_proj.W").t);

  train::TrainOptions opt;
  opt.batch_size = 6;
  opt.epochs = 30;
  opt.base_lr = 0.02;
  train::run_training(enc, samples, opt);

  for (const auto& [name, sum] : frozen_before) {
    REQUIRE(checksum(enc.params().find(name).t) == sum);
  }
  REQUIRE(checksum(enc.params().find("audio.patch_proj.W").t) != patch_before);
  bool some_b_nonzero = false;
  for (const auto& p : enc.params().trainable())
    if (p.name.ends_with("lora.B"))
      for (double v : p.t->value) some_b_nonzero |= (v != 0.0);
  REQUIRE(some_b_nonzero);
}

TEST_CASE("two hundred steps on a separable toy set cut the loss tenfold") {
  // Linear encoders over three separable classes, six distinct pairs.
  const int n = 6, f = 8, d = 4;
  std::mt19937_64 rng(43);
  std::normal_distribution<double> noise(0.0, 0.1);
  auto xa = tensor::make_tensor(n, f);
  auto xt = tensor::make_tensor(n, f);
  for (int i = 0; i < n; ++i) {
    const int cls = i / 2;
    for (int j = 0; j < f; ++j) {
      xa->value[static_cast<std::size_t>(i) * f + j] =
          (j == cls ? 2.0 : 0.0) + (j == 4 + i % 2 ? 1.0 : 0.0) + noise(rng);
      xt->value[static_cast<std::size_t>(i) * f + j] = (j == i ? 3.0 : 0.0) + noise(rng);
    }
  }
  auto wa = random_embeddings(rng, d, f, true);
  auto wt = random_embeddings(rng, d, f, true);
  auto logit = tensor::make_tensor(1, 1, true);
  logit->value[0] = std::log(0.07);

  train::AdamW opt({model::Param{"wa", wa, false}, model::Param{"wt", wt, false},
                    model::Param{"tau", logit, false}});
  double initial = 0.0, final = 0.0;
  for (int step = 0; step < 200; ++step) {
    auto loss = train::contrastive_loss(tensor::matmul_nt(xa, wa), tensor::matmul_nt(xt, wt),
                                        tensor::exp_elem(logit));
    if (step == 0) initial = loss->value[0];
    final = loss->value[0];
    tensor::backward(loss);
    opt.step(train::cosine_lr(0.05, step, 200));
  }
  REQUIRE(final < 0.1 * initial);
}

TEST_CASE("full-model training drives the loss down") {
  auto cfg = tiny_config(19);
  model::DualEncoder enc(cfg);
  auto samples = toy_samples(cfg);

  train::TrainOptions opt;
  opt.batch_size = 6;
  opt.epochs = 200;
  opt.max_steps = 200;
  opt.base_lr = 0.03;
  auto result = train::run_training(enc, samples, opt);

  REQUIRE(result.total_steps == 200);
  REQUIRE(result.final_loss < 0.5 * result.steps.front().loss);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto cfg = tiny_config(23);
  auto samples = toy_samples(cfg);
  train::TrainOptions opt;
  opt.batch_size = 4;
  opt.epochs = 5;
  opt.base_lr = 0.01;
  opt.seed = 99;

  model::DualEncoder a(cfg), b(cfg);
  auto ra = train::run_training(a, samples, opt);
  auto rb = train::run_training(b, samples, opt);

  REQUIRE(ra.steps.size() == rb.steps.size());
  for (std::size_t i = 0; i < ra.steps.size(); ++i) {
    REQUIRE(ra.steps[i].loss == rb.steps[i].loss);
    REQUIRE(ra.steps[i].lr == rb.steps[i].lr);
    REQUIRE(ra.steps[i].tau == rb.steps[i].tau);
  }
  const auto& pa = a.params().all();
  const auto& pb = b.params().all();
  for (std::size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i].t->value == pb[i].t->value);
}

TEST_CASE("a different seed changes the batch order") {
  auto cfg = tiny_config(27);
  auto samples = toy_samples(cfg);
  train::TrainOptions opt;
  opt.batch_size = 2;
  opt.epochs = 3;
  opt.base_lr = 0.01;

  model::DualEncoder a(cfg), b(cfg);
  opt.seed = 1;
  auto ra = train::run_training(a, samples, opt);
  opt.seed = 2;
  auto rb = train::run_training(b, samples, opt);

  bool any_differs = false;
  for (std::size_t i = 0; i < ra.steps.size(); ++i)
    any_differs |= (ra.steps[i].loss != rb.steps[i].loss);
  REQUIRE(any_differs);
}

TEST_CASE("temperature is clamped into its working range after each step") {
  auto cfg = tiny_config(31);
  model::DualEncoder enc(cfg);
  enc.temperature_logit()->value[0] = 10.0;  // way above ln 100

  train::TrainOptions opt;
  opt.batch_size = 6;
  opt.epochs = 1;
  opt.max_steps = 1;
  opt.base_lr = 0.0;
  auto result = train::run_training(enc, toy_samples(cfg), opt);

  REQUIRE(result.total_steps == 1);
  REQUIRE_THAT(enc.temperature_logit()->value[0],
               Catch::Matchers::WithinAbs(std::log(100.0), 1e-12));
  REQUIRE_THAT(result.steps[0].tau, Catch::Matchers::WithinAbs(100.0, 1e-9));
}

TEST_CASE("a non-finite loss aborts with diagnostics") {
  auto cfg = tiny_config(37);
  model::DualEncoder enc(cfg);
  // poisoning the temperature cannot be laundered by any downstream relu
  enc.temperature_logit()->value[0] = std::nan("");
  train::TrainOptions opt;
  opt.batch_size = 6;
  opt.epochs = 1;
  REQUIRE_THROWS_MATCHES(train::run_training(enc, toy_samples(cfg), opt), Error,
                         ErrcIs(Errc::NonFiniteLoss));
}

TEST_CASE("whole-model gradients survive a finite-difference audit") {
  auto cfg = tiny_config(41);
  model::DualEncoder enc(cfg);
  auto samples = toy_samples(cfg);

  std::vector<model::PatchInput> audio = {samples[0].audio, samples[2].audio,
                                          samples[4].audio};
  std::vector<std::vector<int>> text = {samples[0].tokens, samples[2].tokens,
                                        samples[4].tokens};
  auto loss_fn = [&] {
    return train::contrastive_loss(enc.encode_audio_batch(audio),
                                   enc.encode_text_batch(text), enc.temperature());
  };
  std::vector<Tensor> leaves;
  for (const auto& p : enc.params().trainable()) leaves.push_back(p.t);
  const double err = train::finite_diff_check(loss_fn, leaves, 1e-5, 4);
  REQUIRE(err < 1e-4);
}

TEST_CASE("epoch csv aggregates one row per epoch") {
  train::TrainResult result;
  result.steps = {{0, 0, 2.0, 0.1, 0.07}, {0, 1, 1.0, 0.09, 0.071},
                  {1, 2, 0.5, 0.08, 0.072}};
  const std::string csv = train::epoch_csv(result);

  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "epoch,loss,lr,tau");

  auto fields = [](const std::string& row) {
    std::vector<double> out;
    std::istringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) out.push_back(std::stod(cell));
    return out;
  };
  std::getline(in, line);
  auto first = fields(line);
  REQUIRE(first.size() == 4);
  REQUIRE(first[0] == 0.0);
  REQUIRE_THAT(first[1], Catch::Matchers::WithinAbs(1.5, 1e-15));  // mean of the epoch
  REQUIRE_THAT(first[2], Catch::Matchers::WithinAbs(0.09, 1e-15));
  REQUIRE_THAT(first[3], Catch::Matchers::WithinAbs(0.071, 1e-15));
  std::getline(in, line);
  auto second = fields(line);
  REQUIRE(second[0] == 1.0);
  REQUIRE_THAT(second[1], Catch::Matchers::WithinAbs(0.5, 1e-15));
  REQUIRE(!std::getline(in, line));
}

// model.hpp
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

// Dual text/audio encoder. Frozen randomly initialized transformer trunks
// with LoRA adapters on the attention query/value projections, a trainable
// patch projection on the audio side, and two-layer MLP heads projecting
// both modalities into a shared space.

#ifndef OCEANFORGE_MODEL_HPP
#define OCEANFORGE_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "oceanforge/bpe.hpp"
#include "oceanforge/dsp.hpp"
#include "oceanforge/errors.hpp"
#include "oceanforge/tensor.hpp"

#include "json.hpp"

namespace oceanforge::model {

enum class Errc {
  DimMismatch,
  EmptyTokens,
  EmptyPatchSequence,
  InvalidConfig,
  MalformedCheckpoint,
};

using Error = CodedError<Errc>;

using tensor::Tensor;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct ModelConfig {
  int d_model = 64;
  int n_layers = 2;
  int n_heads = 4;
  int d_ff = 256;
  int embed_dim = 32;   // shared space D
  int head_hidden = 32;
  int vocab_size = 512;
  int max_len = 77;
  int patch_size = 16;
  int patch_stride = 10;
  int max_patches = 505;  // positional table on the audio side
  int lora_rank = 4;
  double lora_alpha = 8.0;
  uint64_t seed = 42;

  bool operator==(const ModelConfig&) const = default;

  void validate() const {
    if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || d_ff <= 0 || embed_dim <= 0 ||
        head_hidden <= 0 || vocab_size <= 0 || max_len <= 0 || patch_size <= 0 ||
        patch_stride <= 0 || max_patches <= 0 || lora_rank <= 0)
      throw Error(Errc::InvalidConfig, "all model dims must be positive");
    if (d_model % n_heads != 0)
      throw Error(Errc::InvalidConfig, "d_model must divide evenly into heads");
    if (lora_rank > d_model / 2)
      throw Error(Errc::InvalidConfig, "lora rank must satisfy r <= min(d,k)/2");
  }

  nlohmann::json to_json() const {
    return nlohmann::json{{"d_model", d_model},       {"n_layers", n_layers},
                          {"n_heads", n_heads},       {"d_ff", d_ff},
                          {"embed_dim", embed_dim},   {"head_hidden", head_hidden},
                          {"vocab_size", vocab_size}, {"max_len", max_len},
                          {"patch_size", patch_size}, {"patch_stride", patch_stride},
                          {"max_patches", max_patches}, {"lora_rank", lora_rank},
                          {"lora_alpha", lora_alpha}, {"seed", seed}};
  }

  static ModelConfig from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.d_model = j.at("d_model").get<int>();
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_ff = j.at("d_ff").get<int>();
    c.embed_dim = j.at("embed_dim").get<int>();
    c.head_hidden = j.at("head_hidden").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_len = j.at("max_len").get<int>();
    c.patch_size = j.at("patch_size").get<int>();
    c.patch_stride = j.at("patch_stride").get<int>();
    c.max_patches = j.at("max_patches").get<int>();
    c.lora_rank = j.at("lora_rank").get<int>();
    c.lora_alpha = j.at("lora_alpha").get<double>();
    c.seed = j.at("seed").get<uint64_t>();
    c.validate();
    return c;
  }
};

// ---------------------------------------------------------------------------
// Parameter registry
// ---------------------------------------------------------------------------

struct Param {
  std::string name;
  Tensor t;
  bool frozen = false;
};

class ParamRegistry {
 public:
  Tensor add(const std::string& name, int rows, int cols, bool frozen) {
    auto t = tensor::make_tensor(rows, cols, !frozen);
    params_.push_back({name, t, frozen});
    return t;
  }
  const std::vector<Param>& all() const { return params_; }
  std::vector<Param> trainable() const {
    std::vector<Param> out;
    for (const auto& p : params_)
      if (!p.frozen) out.push_back(p);
    return out;
  }
  const Param& find(const std::string& name) const {
    for (const auto& p : params_)
      if (p.name == name) return p;
    throw Error(Errc::MalformedCheckpoint, "unknown parameter: " + name);
  }
  int64_t count_all() const {
    int64_t n = 0;
    for (const auto& p : params_) n += static_cast<int64_t>(p.t->size());
    return n;
  }
  int64_t count_trainable() const {
    int64_t n = 0;
    for (const auto& p : params_)
      if (!p.frozen) n += static_cast<int64_t>(p.t->size());
    return n;
  }

 private:
  std::vector<Param> params_;
};

// ---------------------------------------------------------------------------
// LoRA dense layer
// ---------------------------------------------------------------------------

// y = x.W0^T + (alpha/r) (x.A^T).B^T with W0: d x k, A: r x k, B: d x r.
// B starts at zero so the adapted layer opens as the frozen one.
struct LoraDense {
  Tensor W0;  // d x k, frozen
  Tensor A;   // r x k
  Tensor B;   // d x r
  int rank = 0;
  double alpha = 0.0;

  Tensor forward(const Tensor& x, bool with_adapter = true) const {
    if (x->cols != W0->cols)
      throw Error(Errc::DimMismatch,
                  "lora_dense: input width " + std::to_string(x->cols) + " vs k " +
                      std::to_string(W0->cols));
    auto base = tensor::matmul_nt(x, W0);
    if (!with_adapter) return base;
    auto low = tensor::matmul_nt(tensor::matmul_nt(x, A), B);
    return tensor::add(base, tensor::scalar_mul(low, alpha / rank));
  }

  // Collapses the adapter into a dense matrix W0 + (alpha/r) B.A.
  Tensor merged_weight() const {
    auto merged = tensor::make_tensor(W0->rows, W0->cols);
    const double scale = alpha / rank;
    for (int d = 0; d < W0->rows; ++d)
      for (int k = 0; k < W0->cols; ++k) {
        double acc = 0.0;
        for (int r = 0; r < rank; ++r) acc += B->at(d, r) * A->at(r, k);
        merged->at(d, k) = W0->at(d, k) + scale * acc;
      }
    return merged;
  }
};

// ---------------------------------------------------------------------------
// Trunk internals
// ---------------------------------------------------------------------------

struct DenseLayer {
  Tensor W;  // out x in
  Tensor b;  // 1 x out

  Tensor forward(const Tensor& x) const {
    return tensor::add_bias(tensor::matmul_nt(x, W), b);
  }
};

struct TransformerBlock {
  Tensor ln1_gamma, ln1_beta;
  LoraDense wq, wv;
  Tensor wk, wo;  // d x d, frozen
  Tensor ln2_gamma, ln2_beta;
  DenseLayer mlp1, mlp2;
};

struct EncoderTrunk {
  std::vector<TransformerBlock> blocks;
  Tensor final_ln_gamma, final_ln_beta;
  Tensor pos_embed;  // positions x d_model, frozen
  bool causal = false;
};

namespace detail {

inline Tensor attention_mask(int n, bool causal) {
  auto mask = tensor::make_tensor(n, n);
  if (causal)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) mask->at(i, j) = -1e9;
  return mask;
}

inline Tensor block_forward(const TransformerBlock& blk, const Tensor& x, int n_heads,
                            bool causal, bool with_adapter) {
  const int d = x->cols;
  const int dh = d / n_heads;
  auto xn = tensor::layer_norm_rows(x, blk.ln1_gamma, blk.ln1_beta);
  auto q = blk.wq.forward(xn, with_adapter);
  auto k = tensor::matmul_nt(xn, blk.wk);
  auto v = blk.wv.forward(xn, with_adapter);

  auto mask = attention_mask(x->rows, causal);
  std::vector<Tensor> heads;
  heads.reserve(static_cast<std::size_t>(n_heads));
  for (int h = 0; h < n_heads; ++h) {
    auto qh = tensor::slice_cols(q, h * dh, dh);
    auto kh = tensor::slice_cols(k, h * dh, dh);
    auto vh = tensor::slice_cols(v, h * dh, dh);
    auto scores = tensor::scalar_mul(tensor::matmul_nt(qh, kh), 1.0 / std::sqrt(dh));
    auto attn = tensor::softmax_rows(tensor::add(scores, mask));
    heads.push_back(tensor::matmul(attn, vh));
  }
  auto ctx = tensor::matmul_nt(tensor::concat_cols(heads), blk.wo);
  auto h1 = tensor::add(x, ctx);

  auto hn = tensor::layer_norm_rows(h1, blk.ln2_gamma, blk.ln2_beta);
  auto ff = blk.mlp2.forward(tensor::relu(blk.mlp1.forward(hn)));
  return tensor::add(h1, ff);
}

inline Tensor trunk_forward(const EncoderTrunk& trunk, const Tensor& x, int n_heads,
                            bool with_adapter) {
  Tensor h = x;
  for (const auto& blk : trunk.blocks)
    h = block_forward(blk, h, n_heads, trunk.causal, with_adapter);
  return tensor::layer_norm_rows(h, trunk.final_ln_gamma, trunk.final_ln_beta);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Heads
// ---------------------------------------------------------------------------

struct ProjectionHead {
  DenseLayer l1, l2;

  Tensor forward(const Tensor& x) const {
    return l2.forward(tensor::relu(l1.forward(x)));
  }
};

// ---------------------------------------------------------------------------
// Audio patch input
// ---------------------------------------------------------------------------

// Live patches of one spectrogram plus their indices into the full patch
// grid. Padding-only patches are dropped; grid indices keep the survivors'
// positional identity.
struct PatchInput {
  int count = 0;
  int dim = 0;                    // P*P
  std::vector<double> values;     // count x dim, row major
  std::vector<int> grid_indices;  // into the full grid, for pos embeddings
};

inline PatchInput live_patches(const dsp::PatchSequence& seq, int real_frames) {
  PatchInput in;
  in.dim = seq.P * seq.P;
  for (int k = 0; k < seq.count(); ++k) {
    if (!dsp::patch_has_real_frames(seq, k, real_frames)) continue;
    in.values.insert(in.values.end(), seq.patches[static_cast<std::size_t>(k)].begin(),
                     seq.patches[static_cast<std::size_t>(k)].end());
    in.grid_indices.push_back(k);
    ++in.count;
  }
  return in;
}

// ---------------------------------------------------------------------------
// Dual encoder
// ---------------------------------------------------------------------------

class DualEncoder {
 public:
  explicit DualEncoder(const ModelConfig& config) : config_(config) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);
    build_text(rng);
    build_audio(rng);
    build_heads(rng);
    temperature_logit_ = registry_.add("temperature_logit", 1, 1, false);
    temperature_logit_->value[0] = std::log(0.07);
  }

  const ModelConfig& config() const { return config_; }
  ParamRegistry& params() { return registry_; }
  const ParamRegistry& params() const { return registry_; }
  const Tensor& temperature_logit() const { return temperature_logit_; }
  Tensor temperature() const { return tensor::exp_elem(temperature_logit_); }

  // Post-pooling, pre-head activations are exposed for the causal check.
  Tensor text_prepool(const std::vector<int>& tokens, bool with_adapter = true) const {
    if (tokens.empty()) throw Error(Errc::EmptyTokens, "cannot encode zero tokens");
    const int n = static_cast<int>(tokens.size());
    if (n > config_.max_len)
      throw Error(Errc::DimMismatch, "token sequence exceeds max_len");
    for (int id : tokens)
      if (id < 0 || id >= config_.vocab_size)
        throw Error(Errc::DimMismatch, "token id outside vocab");
    std::vector<int> pos(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = i;
    auto x = tensor::add(tensor::take_rows(token_embed_, tokens),
                         tensor::take_rows(text_.pos_embed, pos));
    return detail::trunk_forward(text_, x, config_.n_heads, with_adapter);
  }

  Tensor encode_text(const std::vector<int>& tokens, bool with_adapter = true) const {
    auto h = text_prepool(tokens, with_adapter);
    int eos_pos = static_cast<int>(tokens.size()) - 1;
    for (int i = static_cast<int>(tokens.size()) - 1; i >= 0; --i)
      if (tokens[static_cast<std::size_t>(i)] == bpe::kEos) {
        eos_pos = i;
        break;
      }
    auto pooled = tensor::take_rows(h, {eos_pos});
    return text_head_.forward(pooled);
  }

  Tensor encode_audio(const PatchInput& input, bool with_adapter = true) const {
    if (input.count <= 0) throw Error(Errc::EmptyPatchSequence, "no patches to encode");
    if (input.dim != config_.patch_size * config_.patch_size)
      throw Error(Errc::DimMismatch, "patch dim does not match patch_size^2");
    for (int g : input.grid_indices)
      if (g < 0 || g >= config_.max_patches)
        throw Error(Errc::DimMismatch, "grid index outside positional table");
    auto x = tensor::make_tensor(input.count, input.dim, input.values);
    auto projected = patch_proj_.forward(x);
    auto with_pos = tensor::add(projected, tensor::take_rows(audio_.pos_embed, input.grid_indices));
    auto h = detail::trunk_forward(audio_, with_pos, config_.n_heads, with_adapter);
    return audio_head_.forward(tensor::mean_axis0(h));
  }

  Tensor encode_text_batch(const std::vector<std::vector<int>>& batch,
                           bool with_adapter = true) const {
    std::vector<Tensor> rows;
    rows.reserve(batch.size());
    for (const auto& tokens : batch) rows.push_back(encode_text(tokens, with_adapter));
    return tensor::concat_rows(rows);
  }

  Tensor encode_audio_batch(const std::vector<PatchInput>& batch,
                            bool with_adapter = true) const {
    std::vector<Tensor> rows;
    rows.reserve(batch.size());
    for (const auto& input : batch) rows.push_back(encode_audio(input, with_adapter));
    return tensor::concat_rows(rows);
  }

  const std::vector<LoraDense>& adapters() const { return adapters_; }

  // Adapter parameters alone, as the invariant formula counts them.
  int64_t formula_trainable_count() const {
    int64_t n = 0;
    for (const auto& a : adapters_)
      n += static_cast<int64_t>(a.A->size()) + static_cast<int64_t>(a.B->size());
    for (const auto* head : {&text_head_, &audio_head_})
      n += static_cast<int64_t>(head->l1.W->size()) + static_cast<int64_t>(head->l1.b->size()) +
           static_cast<int64_t>(head->l2.W->size()) + static_cast<int64_t>(head->l2.b->size());
    return n + 1;  // temperature
  }

  // ------------------------------------------------------------------
  // Checkpoints: u64 header length, JSON header, f32 tensor data.
  // ------------------------------------------------------------------

  void save_checkpoint(const std::string& path, const nlohmann::json& meta) const {
    nlohmann::json header{{"format", "oceanforge-ckpt"},
                          {"version", 1},
                          {"config", config_.to_json()},
                          {"meta", meta}};
    auto& tensors = header["tensors"] = nlohmann::json::array();
    for (const auto& p : registry_.all())
      tensors.push_back(nlohmann::json{
          {"name", p.name}, {"rows", p.t->rows}, {"cols", p.t->cols}, {"frozen", p.frozen}});
    const std::string hdr = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::MalformedCheckpoint, "cannot open for writing: " + path);
    const uint64_t hdr_len = hdr.size();
    out.write(reinterpret_cast<const char*>(&hdr_len), sizeof hdr_len);
    out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
    for (const auto& p : registry_.all()) {
      std::vector<float> row(p.t->size());
      for (std::size_t i = 0; i < row.size(); ++i) row[i] = static_cast<float>(p.t->value[i]);
      out.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
  }

  struct Loaded {
    std::unique_ptr<DualEncoder> model;
    nlohmann::json meta;
  };

  static Loaded load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::MalformedCheckpoint, "cannot open: " + path);
    uint64_t hdr_len = 0;
    in.read(reinterpret_cast<char*>(&hdr_len), sizeof hdr_len);
    if (!in || hdr_len == 0 || hdr_len > (1ull << 30))
      throw Error(Errc::MalformedCheckpoint, "bad header length: " + path);
    std::string hdr(hdr_len, '\0');
    in.read(hdr.data(), static_cast<std::streamsize>(hdr_len));
    if (!in) throw Error(Errc::MalformedCheckpoint, "truncated header: " + path);

    nlohmann::json header;
    try {
      header = nlohmann::json::parse(hdr);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedCheckpoint, std::string("header is not JSON: ") + e.what());
    }
    if (header.value("format", "") != "oceanforge-ckpt")
      throw Error(Errc::MalformedCheckpoint, "not a checkpoint file: " + path);

    Loaded loaded;
    loaded.model = std::make_unique<DualEncoder>(ModelConfig::from_json(header.at("config")));
    loaded.meta = header.value("meta", nlohmann::json::object());

    const auto& params = loaded.model->registry_.all();
    const auto& tensors = header.at("tensors");
    if (tensors.size() != params.size())
      throw Error(Errc::MalformedCheckpoint, "tensor count disagrees with config");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& desc = tensors[i];
      const auto& p = params[i];
      if (desc.at("name").get<std::string>() != p.name ||
          desc.at("rows").get<int>() != p.t->rows || desc.at("cols").get<int>() != p.t->cols ||
          desc.at("frozen").get<bool>() != p.frozen)
        throw Error(Errc::MalformedCheckpoint, "tensor layout mismatch at " + p.name);
      std::vector<float> row(p.t->size());
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
      if (!in) throw Error(Errc::MalformedCheckpoint, "truncated data at " + p.name);
      for (std::size_t v = 0; v < row.size(); ++v) p.t->value[v] = static_cast<double>(row[v]);
    }
    return loaded;
  }

 private:
  Tensor init_normal(std::mt19937_64& rng, const std::string& name, int rows, int cols,
                     bool frozen, double stddev = 0.02) {
    auto t = registry_.add(name, rows, cols, frozen);
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : t->value) v = dist(rng);
    return t;
  }

  Tensor init_const(const std::string& name, int rows, int cols, bool frozen, double fill) {
    auto t = registry_.add(name, rows, cols, frozen);
    std::fill(t->value.begin(), t->value.end(), fill);
    return t;
  }

  TransformerBlock build_block(std::mt19937_64& rng, const std::string& prefix) {
    const int d = config_.d_model;
    TransformerBlock blk;
    blk.ln1_gamma = init_const(prefix + ".ln1.gamma", 1, d, true, 1.0);
    blk.ln1_beta = init_const(prefix + ".ln1.beta", 1, d, true, 0.0);
    blk.wq.W0 = init_normal(rng, prefix + ".attn.wq.W0", d, d, true);
    blk.wq.A = init_normal(rng, prefix + ".attn.wq.lora.A", config_.lora_rank, d, false);
    blk.wq.B = init_const(prefix + ".attn.wq.lora.B", d, config_.lora_rank, false, 0.0);
    blk.wq.rank = config_.lora_rank;
    blk.wq.alpha = config_.lora_alpha;
    blk.wk = init_normal(rng, prefix + ".attn.wk.W0", d, d, true);
    blk.wv.W0 = init_normal(rng, prefix + ".attn.wv.W0", d, d, true);
    blk.wv.A = init_normal(rng, prefix + ".attn.wv.lora.A", config_.lora_rank, d, false);
    blk.wv.B = init_const(prefix + ".attn.wv.lora.B", d, config_.lora_rank, false, 0.0);
    blk.wv.rank = config_.lora_rank;
    blk.wv.alpha = config_.lora_alpha;
    blk.wo = init_normal(rng, prefix + ".attn.wo.W0", d, d, true);
    blk.ln2_gamma = init_const(prefix + ".ln2.gamma", 1, d, true, 1.0);
    blk.ln2_beta = init_const(prefix + ".ln2.beta", 1, d, true, 0.0);
    blk.mlp1.W = init_normal(rng, prefix + ".mlp.w1.W", config_.d_ff, d, true);
    blk.mlp1.b = init_const(prefix + ".mlp.w1.b", 1, config_.d_ff, true, 0.0);
    blk.mlp2.W = init_normal(rng, prefix + ".mlp.w2.W", d, config_.d_ff, true);
    blk.mlp2.b = init_const(prefix + ".mlp.w2.b", 1, d, true, 0.0);
    adapters_.push_back(blk.wq);
    adapters_.push_back(blk.wv);
    return blk;
  }

  void build_text(std::mt19937_64& rng) {
    const int d = config_.d_model;
    token_embed_ = init_normal(rng, "text.token_embed", config_.vocab_size, d, true);
    text_.pos_embed = init_normal(rng, "text.pos_embed", config_.max_len, d, true);
    text_.causal = true;
    for (int l = 0; l < config_.n_layers; ++l)
      text_.blocks.push_back(build_block(rng, "text.layer" + std::to_string(l)));
    text_.final_ln_gamma = init_const("text.final_ln.gamma", 1, d, true, 1.0);
    text_.final_ln_beta = init_const("text.final_ln.beta", 1, d, true, 0.0);
  }

  void build_audio(std::mt19937_64& rng) {
    const int d = config_.d_model;
    patch_proj_.W = init_normal(rng, "audio.patch_proj.W", d,
                                config_.patch_size * config_.patch_size, false);
    patch_proj_.b = init_const("audio.patch_proj.b", 1, d, false, 0.0);
    audio_.pos_embed = init_normal(rng, "audio.pos_embed", config_.max_patches, d, true);
    audio_.causal = false;
    for (int l = 0; l < config_.n_layers; ++l)
      audio_.blocks.push_back(build_block(rng, "audio.layer" + std::to_string(l)));
    audio_.final_ln_gamma = init_const("audio.final_ln.gamma", 1, d, true, 1.0);
    audio_.final_ln_beta = init_const("audio.final_ln.beta", 1, d, true, 0.0);
  }

  void build_heads(std::mt19937_64& rng) {
    for (auto [head, name] : {std::pair{&audio_head_, "head.audio"},
                              std::pair{&text_head_, "head.text"}}) {
      head->l1.W = init_normal(rng, std::string(name) + ".w1.W", config_.head_hidden,
                               config_.d_model, false);
      head->l1.b = init_const(std::string(name) + ".w1.b", 1, config_.head_hidden, false, 0.0);
      head->l2.W = init_normal(rng, std::string(name) + ".w2.W", config_.embed_dim,
                               config_.head_hidden, false);
      head->l2.b = init_const(std::string(name) + ".w2.b", 1, config_.embed_dim, false, 0.0);
    }
  }

  ModelConfig config_;
  ParamRegistry registry_;
  Tensor token_embed_;
  EncoderTrunk text_;
  EncoderTrunk audio_;
  DenseLayer patch_proj_;
  ProjectionHead text_head_;
  ProjectionHead audio_head_;
  std::vector<LoraDense> adapters_;
  Tensor temperature_logit_;
};

}  // namespace oceanforge::model

#endif  // OCEANFORGE_MODEL_HPP

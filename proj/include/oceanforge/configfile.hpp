// configfile.hpp
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

// Pipeline configuration: a small TOML subset (sections, scalar keys,
// comments), dotted-key overrides, and a canonical serialization whose
// FNV-1a hash stamps every artifact.

#ifndef OCEANFORGE_CONFIGFILE_HPP
#define OCEANFORGE_CONFIGFILE_HPP

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oceanforge/errors.hpp"
#include "oceanforge/hash.hpp"
#include "oceanforge/model.hpp"

namespace oceanforge::config {

enum class Errc {
  MalformedToml,
  UnknownKey,
  BadValue,
};

using Error = CodedError<Errc>;

struct PipelineConfig {
  uint64_t seed = 42;

  struct {
    std::string salt = "oceanforge";
  } ais;

  struct {
    int64_t max_skew_ms = 30000;
    bool keep_ambiguous = false;
    std::string granularity = "both";  // coarse | fine | both
  } corpus;

  struct {
    std::string profile = "default";  // default | imagebind128
  } dsp;

  model::ModelConfig model;

  struct {
    int batch_size = 8;
    int epochs = 1;
    int max_steps = 0;
    double base_lr = 1e-5;
    double beta1 = 0.99;
    double beta2 = 0.9;
    double eps = 1e-8;
    double weight_decay = 0.01;
  } train;

  struct {
    std::string mode = "retrieval";  // retrieval | zeroshot | supervised
    std::string split = "eval";      // train | eval | all
  } eval;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string strip_quotes(const std::string& raw, int line_no) {
  if (raw.size() >= 2 && raw.front() == '"') {
    if (raw.back() != '"')
      throw Error(Errc::MalformedToml, "unterminated string on line " + std::to_string(line_no));
    return raw.substr(1, raw.size() - 2);
  }
  return raw;
}

inline int64_t parse_int(const std::string& raw, const std::string& key) {
  std::size_t used = 0;
  int64_t v = 0;
  try {
    v = std::stoll(raw, &used);
  } catch (const std::exception&) {
    throw Error(Errc::BadValue, "'" + raw + "' is not an integer for " + key);
  }
  if (used != raw.size())
    throw Error(Errc::BadValue, "'" + raw + "' is not an integer for " + key);
  return v;
}

inline double parse_double(const std::string& raw, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(raw, &used);
  } catch (const std::exception&) {
    throw Error(Errc::BadValue, "'" + raw + "' is not a number for " + key);
  }
  if (used != raw.size())
    throw Error(Errc::BadValue, "'" + raw + "' is not a number for " + key);
  return v;
}

inline bool parse_bool(const std::string& raw, const std::string& key) {
  if (raw == "true") return true;
  if (raw == "false") return false;
  throw Error(Errc::BadValue, "'" + raw + "' is not a boolean for " + key);
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct KeyEntry {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

// One table drives parsing, overrides, and the canonical serialization, so
// the three can never drift apart. Order here is the canonical order.
inline const std::vector<KeyEntry>& key_table() {
  static const std::vector<KeyEntry> table = [] {
    std::vector<KeyEntry> t;
    auto add_u64 = [&t](const std::string& k, auto member) {
      t.push_back({k,
                   [member, k](PipelineConfig& c, const std::string& raw) {
                     const int64_t v = parse_int(raw, k);
                     if (v < 0) throw Error(Errc::BadValue, k + " must be non-negative");
                     c.*member = static_cast<uint64_t>(v);
                   },
                   [member](const PipelineConfig& c) { return std::to_string(c.*member); }});
    };
    auto add = [&t](const std::string& k, auto getter, auto setter) {
      t.push_back({k,
                   [setter, k](PipelineConfig& c, const std::string& raw) { setter(c, raw); },
                   [getter](const PipelineConfig& c) { return getter(c); }});
    };

    add_u64("seed", &PipelineConfig::seed);
    add("ais.salt", [](const PipelineConfig& c) { return c.ais.salt; },
        [](PipelineConfig& c, const std::string& r) { c.ais.salt = r; });
    add("corpus.max_skew_ms",
        [](const PipelineConfig& c) { return std::to_string(c.corpus.max_skew_ms); },
        [](PipelineConfig& c, const std::string& r) {
          c.corpus.max_skew_ms = parse_int(r, "corpus.max_skew_ms");
        });
    add("corpus.keep_ambiguous",
        [](const PipelineConfig& c) { return c.corpus.keep_ambiguous ? "true" : "false"; },
        [](PipelineConfig& c, const std::string& r) {
          c.corpus.keep_ambiguous = parse_bool(r, "corpus.keep_ambiguous");
        });
    add("corpus.granularity",
        [](const PipelineConfig& c) { return c.corpus.granularity; },
        [](PipelineConfig& c, const std::string& r) {
          if (r != "coarse" && r != "fine" && r != "both")
            throw Error(Errc::BadValue, "granularity must be coarse, fine or both");
          c.corpus.granularity = r;
        });
    add("dsp.profile", [](const PipelineConfig& c) { return c.dsp.profile; },
        [](PipelineConfig& c, const std::string& r) {
          if (r != "default" && r != "imagebind128")
            throw Error(Errc::BadValue, "profile must be default or imagebind128");
          c.dsp.profile = r;
        });

    auto add_model_int = [&t](const std::string& k, int model::ModelConfig::* member) {
      t.push_back({"model." + k,
                   [member, k](PipelineConfig& c, const std::string& raw) {
                     c.model.*member = static_cast<int>(parse_int(raw, "model." + k));
                   },
                   [member](const PipelineConfig& c) { return std::to_string(c.model.*member); }});
    };
    add_model_int("d_model", &model::ModelConfig::d_model);
    add_model_int("n_layers", &model::ModelConfig::n_layers);
    add_model_int("n_heads", &model::ModelConfig::n_heads);
    add_model_int("d_ff", &model::ModelConfig::d_ff);
    add_model_int("embed_dim", &model::ModelConfig::embed_dim);
    add_model_int("head_hidden", &model::ModelConfig::head_hidden);
    add_model_int("vocab_size", &model::ModelConfig::vocab_size);
    add_model_int("max_len", &model::ModelConfig::max_len);
    add_model_int("patch_size", &model::ModelConfig::patch_size);
    add_model_int("patch_stride", &model::ModelConfig::patch_stride);
    add_model_int("max_patches", &model::ModelConfig::max_patches);
    add_model_int("lora_rank", &model::ModelConfig::lora_rank);
    add("model.lora_alpha",
        [](const PipelineConfig& c) { return fmt_double(c.model.lora_alpha); },
        [](PipelineConfig& c, const std::string& r) {
          c.model.lora_alpha = parse_double(r, "model.lora_alpha");
        });

    add("train.batch_size",
        [](const PipelineConfig& c) { return std::to_string(c.train.batch_size); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.batch_size = static_cast<int>(parse_int(r, "train.batch_size"));
        });
    add("train.epochs",
        [](const PipelineConfig& c) { return std::to_string(c.train.epochs); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.epochs = static_cast<int>(parse_int(r, "train.epochs"));
        });
    add("train.max_steps",
        [](const PipelineConfig& c) { return std::to_string(c.train.max_steps); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.max_steps = static_cast<int>(parse_int(r, "train.max_steps"));
        });
    add("train.base_lr",
        [](const PipelineConfig& c) { return fmt_double(c.train.base_lr); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.base_lr = parse_double(r, "train.base_lr");
        });
    add("train.beta1", [](const PipelineConfig& c) { return fmt_double(c.train.beta1); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.beta1 = parse_double(r, "train.beta1");
        });
    add("train.beta2", [](const PipelineConfig& c) { return fmt_double(c.train.beta2); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.beta2 = parse_double(r, "train.beta2");
        });
    add("train.eps", [](const PipelineConfig& c) { return fmt_double(c.train.eps); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.eps = parse_double(r, "train.eps");
        });
    add("train.weight_decay",
        [](const PipelineConfig& c) { return fmt_double(c.train.weight_decay); },
        [](PipelineConfig& c, const std::string& r) {
          c.train.weight_decay = parse_double(r, "train.weight_decay");
        });
    add("eval.mode", [](const PipelineConfig& c) { return c.eval.mode; },
        [](PipelineConfig& c, const std::string& r) {
          if (r != "retrieval" && r != "zeroshot" && r != "supervised")
            throw Error(Errc::BadValue, "eval.mode must be retrieval, zeroshot or supervised");
          c.eval.mode = r;
        });
    add("eval.split", [](const PipelineConfig& c) { return c.eval.split; },
        [](PipelineConfig& c, const std::string& r) {
          if (r != "train" && r != "eval" && r != "all")
            throw Error(Errc::BadValue, "eval.split must be train, eval or all");
          c.eval.split = r;
        });
    return t;
  }();
  return table;
}

inline const KeyEntry& entry_for(const std::string& key) {
  for (const auto& e : key_table())
    if (e.key == key) return e;
  throw Error(Errc::UnknownKey, "unknown config key '" + key + "'");
}

}  // namespace detail

// "section.key=value"; bare or quoted values both accepted.
inline void apply_override(PipelineConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw Error(Errc::BadValue, "override must look like key=value, got '" + assignment + "'");
  const std::string key = detail::trim(assignment.substr(0, eq));
  const std::string raw = detail::strip_quotes(detail::trim(assignment.substr(eq + 1)), 0);
  detail::entry_for(key).set(cfg, raw);
}

inline PipelineConfig parse_toml(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos && line.find('"') > hash) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(Errc::MalformedToml, "bad section header on line " + std::to_string(line_no));
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::MalformedToml, "expected key = value on line " + std::to_string(line_no));
    const std::string key = detail::trim(line.substr(0, eq));
    std::string raw = detail::trim(line.substr(eq + 1));
    if (raw.size() >= 2 && raw.front() == '"') {
      const auto close = raw.find('"', 1);
      if (close == std::string::npos)
        throw Error(Errc::MalformedToml, "unterminated string on line " + std::to_string(line_no));
      raw = raw.substr(1, close - 1);
    } else {
      const auto trailing = raw.find('#');
      if (trailing != std::string::npos) raw = detail::trim(raw.substr(0, trailing));
      raw = detail::strip_quotes(raw, line_no);
    }
    const std::string dotted = section.empty() ? key : section + "." + key;
    detail::entry_for(dotted).set(cfg, raw);
  }
  return cfg;
}

// Precedence: explicit overrides > OCEANFORGE_SEED > file values.
inline void apply_env(PipelineConfig& cfg) {
  if (const char* env = std::getenv("OCEANFORGE_SEED")) {
    cfg.seed = static_cast<uint64_t>(detail::parse_int(env, "OCEANFORGE_SEED"));
  }
}

inline std::string canonical_string(const PipelineConfig& cfg) {
  std::string out;
  for (const auto& e : detail::key_table()) {
    out += e.key;
    out += '=';
    out += e.get(cfg);
    out += '\n';
  }
  return out;
}

inline uint64_t config_hash(const PipelineConfig& cfg) {
  return fnv1a64(canonical_string(cfg));
}

}  // namespace oceanforge::config

#endif  // OCEANFORGE_CONFIGFILE_HPP

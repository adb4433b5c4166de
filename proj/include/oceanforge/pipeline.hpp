// pipeline.hpp
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

// Stage orchestration behind the CLI: decode, build, featurize, train,
// eval, stats, selftest. Every artifact carries a config-hash header and
// every stage is a pure function of its inputs plus the seed.

#ifndef OCEANFORGE_PIPELINE_HPP
#define OCEANFORGE_PIPELINE_HPP

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "oceanforge/ais.hpp"
#include "oceanforge/bpe.hpp"
#include "oceanforge/configfile.hpp"
#include "oceanforge/corpus.hpp"
#include "oceanforge/dsp.hpp"
#include "oceanforge/errors.hpp"
#include "oceanforge/eval.hpp"
#include "oceanforge/model.hpp"
#include "oceanforge/taxonomy.hpp"
#include "oceanforge/train.hpp"
#include "oceanforge/wav.hpp"

namespace oceanforge::pipeline {

enum class Errc {
  IoError,
  MalformedArtifact,
  HashMismatch,
  EmptySelection,
};

using Error = CodedError<Errc>;

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

inline std::string hash_hex(uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string pipeline_hash_hex(const config::PipelineConfig& cfg) {
  return hash_hex(config::config_hash(cfg));
}

// The feature hash covers only what determines the features, so featurize
// does not need the rest of the pipeline config.
inline std::string dsp_config_hash(const std::string& profile) {
  const auto c = dsp::DspConfig::profile(profile);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "profile=%s sample_rate=%d win_length=%d hop=%d n_mels=%d target_frames=%d "
                "fmin=%.17g fmax=%.17g log_floor=%.17g",
                profile.c_str(), c.sample_rate, c.win_length, c.hop, c.n_mels, c.target_frames,
                c.fmin, c.fmax, c.log_floor);
  return hash_hex(fnv1a64(buf));
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot open for writing: " + path);
  out << content;
  if (!out) throw Error(Errc::IoError, "short write: " + path);
}

inline bool is_header_line(const nlohmann::json& j) {
  return j.is_object() && j.contains("format");
}

// JSONL with a leading provenance object. Headerless files are accepted so
// hand-built fixtures keep working.
inline void write_jsonl(const std::string& path, const std::string& format,
                        const std::string& config_hash,
                        const std::vector<nlohmann::json>& rows) {
  std::ostringstream out;
  out << nlohmann::json{{"format", format}, {"version", 1}, {"config_hash", config_hash},
                        {"count", rows.size()}}
             .dump()
      << '\n';
  for (const auto& r : rows) out << r.dump() << '\n';
  write_text(path, out.str());
}

inline std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::vector<nlohmann::json> rows;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedArtifact, path + ": " + e.what());
    }
    if (is_header_line(j)) continue;
    rows.push_back(std::move(j));
  }
  return rows;
}

inline std::vector<corpus::AudioTextPair> read_pairs_file(const std::string& path) {
  std::vector<corpus::AudioTextPair> pairs;
  for (const auto& j : read_jsonl(path)) {
    try {
      pairs.push_back(corpus::pair_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedArtifact, path + ": " + e.what());
    }
  }
  return pairs;
}

inline std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || (!file.empty() && file.front() == '/')) return file;
  if (dir.back() == '/') return dir + file;
  return dir + "/" + file;
}

// ---------------------------------------------------------------------------
// decode
// ---------------------------------------------------------------------------

struct DecodeOptions {
  std::string in_path;
  std::string out_path;
};

struct DecodeSummary {
  int64_t decoded = 0;       // position reports written
  int64_t statics = 0;       // type-5 reports absorbed into the join
  int64_t skipped = 0;       // unsupported or damaged lines
};

// Two passes over the stream: collect type-5 ship types and position
// reports, then anonymize the realized MMSI set and join.
inline DecodeSummary run_decode(const DecodeOptions& opt, const config::PipelineConfig& cfg) {
  struct Pending {
    ais::RawPositionReport raw;
    int64_t timestamp = 0;
  };
  std::vector<Pending> reports;
  std::map<uint32_t, int> ship_types;
  DecodeSummary summary;
  ais::MultipartAssembler assembler;

  auto consume = [&](const BitStream& bits, int64_t timestamp) {
    const int msg_type = static_cast<int>(bits.get_uint(0, 6));
    if (msg_type >= 1 && msg_type <= 3) {
      reports.push_back({ais::decode_position_report(bits), timestamp});
    } else if (msg_type == 5) {
      const auto s = ais::decode_static_report(bits);
      ship_types[s.mmsi] = s.ship_type_code;
      ++summary.statics;
    } else {
      ++summary.skipped;
    }
  };

  for (const auto& line : read_lines(opt.in_path)) {
    if (line.empty()) continue;
    try {
      if (line.front() == '!') {
        const auto sentence = ais::parse_nmea_sentence(line);
        if (auto bits = assembler.add(sentence)) consume(*bits, 0);
      } else {
        const auto tab = line.find('\t');
        const std::string payload = line.substr(0, tab);
        int64_t ts = 0;
        if (tab != std::string::npos)
          ts = ais::parse_ais_timestamp(line.substr(tab + 1));
        consume(ais::decode_sixbit(payload), ts);
      }
    } catch (const ais::Error&) {
      ++summary.skipped;
    }
  }

  std::vector<uint64_t> mmsis;
  mmsis.reserve(reports.size());
  for (const auto& p : reports) mmsis.push_back(p.raw.mmsi);
  ais::MmsiAnonymizer anonymizer(cfg.ais.salt);
  anonymizer.fit(mmsis.begin(), mmsis.end());

  std::vector<nlohmann::json> rows;
  rows.reserve(reports.size());
  for (const auto& p : reports) {
    auto rec = ais::DecodedAisRecord::from_raw(p.raw, p.timestamp, anonymizer.id_for(p.raw.mmsi));
    if (auto it = ship_types.find(p.raw.mmsi); it != ship_types.end())
      rec.ship_type_code = it->second;
    rows.push_back(ais::to_json(rec));
  }
  summary.decoded = static_cast<int64_t>(rows.size());
  write_jsonl(opt.out_path, "oceanforge-records", pipeline_hash_hex(cfg), rows);
  return summary;
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

struct BuildOptions {
  std::string ais_path;
  std::string audio_index_path;
  std::string out_path;
  std::string corpus_id = "corpus";
  std::string granularity;  // empty: take it from the config
};

struct BuildSummary {
  int64_t pairs = 0;
  int64_t train_rows = 0;
  int64_t eval_rows = 0;
  corpus::SkipReport skipped;
};

inline BuildSummary run_build(const BuildOptions& opt, const config::PipelineConfig& cfg) {
  std::vector<ais::DecodedAisRecord> records;
  for (const auto& j : read_jsonl(opt.ais_path)) {
    try {
      records.push_back(ais::record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedArtifact, opt.ais_path + ": " + e.what());
    }
  }
  std::vector<corpus::AudioSegmentRef> segments;
  for (const auto& j : read_jsonl(opt.audio_index_path)) {
    try {
      segments.push_back(corpus::segment_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedArtifact, opt.audio_index_path + ": " + e.what());
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const auto& a, const auto& b) { return a.ais_timestamp < b.ais_timestamp; });

  const std::string gran = opt.granularity.empty() ? cfg.corpus.granularity : opt.granularity;
  std::vector<corpus::Granularity> granularities;
  if (gran == "coarse" || gran == "both") granularities.push_back(corpus::Granularity::Coarse);
  if (gran == "fine" || gran == "both") granularities.push_back(corpus::Granularity::Fine);
  if (granularities.empty())
    throw Error(Errc::MalformedArtifact, "granularity must be coarse, fine or both");

  auto pairing = corpus::pair_audio_with_ais(records, segments, cfg.corpus.max_skew_ms,
                                             cfg.corpus.keep_ambiguous);
  auto pairs = corpus::build_pairs(pairing, segments, granularities, opt.corpus_id, cfg.seed);

  std::vector<nlohmann::json> rows;
  rows.reserve(pairs.size());
  BuildSummary summary;
  summary.skipped = pairing.skipped;
  for (const auto& p : pairs) {
    rows.push_back(corpus::to_json(p));
    ++summary.pairs;
    if (p.split == "train")
      ++summary.train_rows;
    else
      ++summary.eval_rows;
  }
  write_jsonl(opt.out_path, "oceanforge-manifest", pipeline_hash_hex(cfg), rows);
  return summary;
}

// ---------------------------------------------------------------------------
// featurize
// ---------------------------------------------------------------------------

struct FeaturizeOptions {
  std::string manifest_path;
  std::string out_path;
  std::string audio_dir;  // prefix for relative segment paths
  std::string profile = "default";
  int jobs = 1;
};

struct FeaturizeSummary {
  int64_t rows = 0;
  int T = 0;
  int F = 0;
  std::string config_hash;
};

// Row i of the feature file is manifest line i, so split filters downstream
// can index features without a side table.
inline FeaturizeSummary run_featurize(const FeaturizeOptions& opt) {
  const auto pairs = read_pairs_file(opt.manifest_path);
  if (pairs.empty()) throw Error(Errc::EmptySelection, "manifest has no rows");
  const auto dsp_cfg = dsp::DspConfig::profile(opt.profile);

  std::vector<dsp::MelSpectrogram> specs(pairs.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pairs.size()) return;
      try {
        const auto path = join_path(opt.audio_dir, pairs[i].segment.file_path);
        const auto audio = wav::read_wav(path);
        specs[i] = dsp::log_mel(audio.samples, audio.sample_rate, dsp_cfg);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(pairs.size());
        return;
      }
    }
  };

  const int jobs = std::max(1, opt.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  FeaturizeSummary summary;
  summary.rows = static_cast<int64_t>(specs.size());
  summary.T = specs.front().T;
  summary.F = specs.front().F;
  summary.config_hash = dsp_config_hash(opt.profile);
  dsp::write_features(opt.out_path, specs, summary.config_hash, opt.profile);
  return summary;
}

// ---------------------------------------------------------------------------
// split selection and sample assembly
// ---------------------------------------------------------------------------

inline std::vector<std::size_t> select_rows(const std::vector<corpus::AudioTextPair>& pairs,
                                            const std::string& split) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (split == "all" || pairs[i].split == split) idx.push_back(i);
  return idx;
}

inline dsp::MelSpectrogram spectrogram_at(const dsp::FeatureFile& features, std::size_t row) {
  dsp::MelSpectrogram spec;
  spec.T = features.T;
  spec.F = features.F;
  spec.real_frames = features.real_frames[row];
  const float* p = features.segment(static_cast<int64_t>(row));
  spec.values.assign(p, p + static_cast<std::size_t>(features.T) * features.F);
  return spec;
}

inline model::PatchInput patches_at(const dsp::FeatureFile& features, std::size_t row,
                                    const model::ModelConfig& mc) {
  const auto spec = spectrogram_at(features, row);
  const auto seq = dsp::extract_patches(spec, mc.patch_size, mc.patch_stride);
  if (seq.count() > mc.max_patches)
    throw Error(Errc::MalformedArtifact,
                "patch grid of " + std::to_string(seq.count()) + " exceeds max_patches " +
                    std::to_string(mc.max_patches));
  return model::live_patches(seq, spec.real_frames);
}

inline void check_feature_alignment(const std::vector<corpus::AudioTextPair>& pairs,
                                    const dsp::FeatureFile& features) {
  if (features.count != static_cast<int64_t>(pairs.size()))
    throw Error(Errc::MalformedArtifact,
                "feature rows (" + std::to_string(features.count) +
                    ") do not match manifest rows (" + std::to_string(pairs.size()) + ")");
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainCliOptions {
  std::string manifest_path;
  std::string features_path;
  std::string out_ckpt;
  std::string csv_path;  // empty: out_ckpt + ".csv"
  std::string split = "train";
};

struct TrainSummary {
  int64_t steps = 0;
  double final_loss = 0.0;
  int64_t rows_used = 0;
};

inline TrainSummary run_train(const TrainCliOptions& opt, const config::PipelineConfig& cfg) {
  const auto pairs = read_pairs_file(opt.manifest_path);
  const auto features = dsp::read_features(opt.features_path);
  check_feature_alignment(pairs, features);

  const auto rows = select_rows(pairs, opt.split);
  if (rows.size() < 2)
    throw Error(Errc::EmptySelection,
                "split '" + opt.split + "' selects " + std::to_string(rows.size()) +
                    " rows, need at least 2");

  std::vector<std::string> captions;
  captions.reserve(rows.size());
  for (std::size_t i : rows) captions.push_back(pairs[i].caption);
  const auto vocab = bpe::BpeVocab::train(captions, cfg.model.vocab_size, cfg.model.max_len);

  model::ModelConfig mc = cfg.model;
  mc.seed = cfg.seed;
  model::DualEncoder enc(mc);

  std::vector<train::TrainSample> samples;
  samples.reserve(rows.size());
  for (std::size_t i : rows)
    samples.push_back({patches_at(features, i, mc), vocab.encode(pairs[i].caption)});

  train::TrainOptions topt;
  topt.batch_size = cfg.train.batch_size;
  topt.epochs = cfg.train.epochs;
  topt.max_steps = cfg.train.max_steps;
  topt.base_lr = cfg.train.base_lr;
  topt.adamw = {cfg.train.beta1, cfg.train.beta2, cfg.train.eps, cfg.train.weight_decay};
  topt.seed = cfg.seed;
  const auto result = train::run_training(enc, samples, topt);

  nlohmann::json meta{{"corpus_id", pairs[rows.front()].corpus_id},
                      {"split", opt.split},
                      {"rows", rows.size()},
                      {"steps", result.total_steps},
                      {"final_loss", result.final_loss},
                      {"features_config_hash", features.config_hash},
                      {"pipeline_config_hash", pipeline_hash_hex(cfg)},
                      {"tokenizer", vocab.to_json()}};
  enc.save_checkpoint(opt.out_ckpt, meta);
  write_text(opt.csv_path.empty() ? opt.out_ckpt + ".csv" : opt.csv_path,
             train::epoch_csv(result));

  return {result.total_steps, result.final_loss, static_cast<int64_t>(rows.size())};
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalCliOptions {
  std::string mode = "retrieval";
  std::string ckpt_path;
  std::string manifest_path;
  std::string features_path;
  std::string out_path;
  std::string split = "eval";
};

inline nlohmann::json run_eval(const EvalCliOptions& opt) {
  auto loaded = model::DualEncoder::load_checkpoint(opt.ckpt_path);
  const auto& meta = loaded.meta;
  const auto pairs = read_pairs_file(opt.manifest_path);
  const auto features = dsp::read_features(opt.features_path);
  check_feature_alignment(pairs, features);

  const std::string ckpt_features_hash = meta.value("features_config_hash", "");
  if (ckpt_features_hash != features.config_hash)
    throw Error(Errc::HashMismatch,
                "checkpoint was trained on features with hash " + ckpt_features_hash +
                    " but these features carry " + features.config_hash);

  const auto rows = select_rows(pairs, opt.split);
  if (rows.empty())
    throw Error(Errc::EmptySelection, "split '" + opt.split + "' selects no rows");

  if (!meta.contains("tokenizer"))
    throw Error(Errc::MalformedArtifact, "checkpoint has no tokenizer");
  const auto vocab = bpe::BpeVocab::from_json(meta.at("tokenizer"));

  const auto& mc = loaded.model->config();
  std::vector<eval::EvalSample> samples;
  samples.reserve(rows.size());
  for (std::size_t i : rows)
    samples.push_back({patches_at(features, i, mc), pairs[i].category,
                       pairs[i].segment.segment_id()});

  // Prompt order follows the retrieval query list; categories outside it
  // (none in practice) keep first-appearance order at the tail.
  std::set<std::string> present;
  std::vector<std::string> prompt_names;
  for (std::size_t i : rows) present.insert(pairs[i].category);
  corpus::CategoryTaxonomy taxonomy;
  for (const auto& name : taxonomy.query_list())
    if (present.erase(name)) prompt_names.push_back(name);
  for (std::size_t i : rows)
    if (present.erase(pairs[i].category)) prompt_names.push_back(pairs[i].category);

  std::vector<eval::Prompt> prompts;
  prompts.reserve(prompt_names.size());
  for (const auto& name : prompt_names) prompts.push_back({name, vocab.encode(name)});

  eval::EvalProtocol protocol;
  protocol.train_corpus_id = meta.value("corpus_id", "");
  protocol.test_corpus_id = pairs[rows.front()].corpus_id;
  protocol.mode = eval::mode_from_string(opt.mode);

  const auto report = eval::run_protocol(protocol, *loaded.model, samples, prompts);

  nlohmann::json out = report.to_json();
  out["mode"] = opt.mode;
  out["train_corpus"] = protocol.train_corpus_id;
  out["test_corpus"] = protocol.test_corpus_id;
  out["split"] = opt.split;
  out["n_queries"] = samples.size();
  out["n_prompts"] = prompts.size();
  out["features_config_hash"] = features.config_hash;
  if (!opt.out_path.empty()) write_text(opt.out_path, out.dump(2) + "\n");
  return out;
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

struct StatsOptions {
  std::string manifest_path;
  std::string out_path;
  std::string audio_dir;
  bool analyze_audio = false;  // dominant-frequency summaries need the wavs
  std::string profile = "default";
};

inline std::string run_stats(const StatsOptions& opt) {
  const auto pairs = read_pairs_file(opt.manifest_path);
  std::vector<std::optional<double>> freqs(pairs.size());
  if (opt.analyze_audio) {
    const auto dsp_cfg = dsp::DspConfig::profile(opt.profile);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto audio = wav::read_wav(join_path(opt.audio_dir, pairs[i].segment.file_path));
      freqs[i] = dsp::dominant_frequency_hz(audio.samples, dsp_cfg);
    }
  }
  const auto csv = corpus::stats_to_csv(corpus::corpus_stats(pairs, freqs));
  if (!opt.out_path.empty()) write_text(opt.out_path, csv);
  return csv;
}

}  // namespace oceanforge::pipeline

#endif  // OCEANFORGE_PIPELINE_HPP

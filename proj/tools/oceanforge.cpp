// oceanforge.cpp
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
//
// Command line front end. Exit codes: 0 success, 1 input error, 2 internal
// invariant violation.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oceanforge/configfile.hpp"
#include "oceanforge/pipeline.hpp"
#include "oceanforge/selftest.hpp"

namespace {

oceanforge::config::PipelineConfig load_config(const std::string& path,
                                               const std::vector<std::string>& overrides) {
  oceanforge::config::PipelineConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in)
      throw oceanforge::config::Error(oceanforge::config::Errc::MalformedToml,
                                      "cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    cfg = oceanforge::config::parse_toml(buf.str());
  }
  // Precedence: --set overrides beat OCEANFORGE_SEED, which beats the file.
  oceanforge::config::apply_env(cfg);
  for (const auto& kv : overrides) oceanforge::config::apply_override(cfg, kv);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oceanforge: vessel-noise retrieval pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "TOML config file");
  app.add_option("--set", overrides, "config override as key=value, repeatable");

  oceanforge::pipeline::DecodeOptions dec;
  auto* decode = app.add_subcommand("decode", "decode an AIS stream to anonymized records");
  decode->fallthrough();
  decode->add_option("--in", dec.in_path, "AIS input stream")->required();
  decode->add_option("--out", dec.out_path, "records JSONL")->required();

  oceanforge::pipeline::BuildOptions bld;
  auto* build = app.add_subcommand("build", "pair audio segments with records into a manifest");
  build->fallthrough();
  build->add_option("--ais", bld.ais_path, "records JSONL from decode")->required();
  build->add_option("--audio", bld.audio_index_path, "audio segment index JSONL")->required();
  build->add_option("--granularity", bld.granularity, "coarse, fine or both")
      ->check(CLI::IsMember({"coarse", "fine", "both"}));
  build->add_option("--corpus-id", bld.corpus_id, "corpus identifier stored per row");
  build->add_option("--out", bld.out_path, "manifest JSONL")->required();

  oceanforge::pipeline::FeaturizeOptions feat;
  feat.profile.clear();
  auto* featurize = app.add_subcommand("featurize", "compute log-mel features for a manifest");
  featurize->fallthrough();
  featurize->add_option("--manifest", feat.manifest_path, "manifest JSONL")->required();
  featurize->add_option("--profile", feat.profile, "dsp profile: default or imagebind128")
      ->check(CLI::IsMember({"default", "imagebind128"}));
  featurize->add_option("--audio-dir", feat.audio_dir, "prefix for relative wav paths");
  featurize->add_option("--jobs", feat.jobs, "worker threads")->check(CLI::PositiveNumber);
  featurize->add_option("--out", feat.out_path, "feature file")->required();

  oceanforge::pipeline::TrainCliOptions trn;
  auto* train = app.add_subcommand("train", "train the dual encoder on a manifest");
  train->fallthrough();
  train->add_option("--manifest", trn.manifest_path, "manifest JSONL")->required();
  train->add_option("--features", trn.features_path, "feature file from featurize")->required();
  train->add_option("--split", trn.split, "train, eval or all")
      ->check(CLI::IsMember({"train", "eval", "all"}));
  train->add_option("--csv", trn.csv_path, "per-epoch loss CSV, default <out>.csv");
  train->add_option("--out", trn.out_ckpt, "checkpoint file")->required();

  oceanforge::pipeline::EvalCliOptions evl;
  evl.mode.clear();
  evl.split.clear();
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a manifest");
  eval->fallthrough();
  eval->add_option("--mode", evl.mode, "retrieval, zeroshot or supervised")
      ->check(CLI::IsMember({"retrieval", "zeroshot", "supervised"}));
  eval->add_option("--ckpt", evl.ckpt_path, "checkpoint from train")->required();
  eval->add_option("--manifest", evl.manifest_path, "manifest JSONL")->required();
  eval->add_option("--features", evl.features_path, "feature file for the manifest")->required();
  eval->add_option("--split", evl.split, "train, eval or all");
  eval->add_option("--out", evl.out_path, "report JSON");

  oceanforge::pipeline::StatsOptions sts;
  auto* stats = app.add_subcommand("stats", "per-category corpus statistics as CSV");
  stats->fallthrough();
  stats->add_option("--manifest", sts.manifest_path, "manifest JSONL")->required();
  stats->add_option("--audio-dir", sts.audio_dir, "prefix for relative wav paths");
  stats->add_flag("--analyze-audio", sts.analyze_audio, "add dominant-frequency summaries");
  stats->add_option("--profile", sts.profile, "dsp profile for audio analysis");
  stats->add_option("--out", sts.out_path, "stats CSV, stdout when omitted");

  auto* selftest = app.add_subcommand("selftest", "run the built-in property suite");
  selftest->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 1;
  }

  try {
    const auto cfg = load_config(config_path, overrides);

    if (*decode) {
      const auto s = oceanforge::pipeline::run_decode(dec, cfg);
      std::cout << "decoded " << s.decoded << " position reports, " << s.statics
                << " static, " << s.skipped << " skipped -> " << dec.out_path << "\n";
    } else if (*build) {
      const auto s = oceanforge::pipeline::run_build(bld, cfg);
      std::cout << "built " << s.pairs << " pairs (" << s.train_rows << " train, "
                << s.eval_rows << " eval; skipped " << s.skipped.no_segment << " unmatched, "
                << s.skipped.ambiguous << " ambiguous, " << s.skipped.indeterminate
                << " indeterminate) -> " << bld.out_path << "\n";
    } else if (*featurize) {
      if (feat.profile.empty()) feat.profile = cfg.dsp.profile;
      const auto s = oceanforge::pipeline::run_featurize(feat);
      std::cout << "featurized " << s.rows << " segments at " << s.T << "x" << s.F
                << " (config " << s.config_hash << ") -> " << feat.out_path << "\n";
    } else if (*train) {
      const auto s = oceanforge::pipeline::run_train(trn, cfg);
      std::cout << "trained " << s.steps << " steps on " << s.rows_used
                << " rows, final loss " << s.final_loss << " -> " << trn.out_ckpt << "\n";
    } else if (*eval) {
      if (evl.mode.empty()) evl.mode = cfg.eval.mode;
      if (evl.split.empty()) evl.split = cfg.eval.split;
      const auto report = oceanforge::pipeline::run_eval(evl);
      std::cout << report.dump(2) << "\n";
    } else if (*stats) {
      const auto csv = oceanforge::pipeline::run_stats(sts);
      if (sts.out_path.empty()) std::cout << csv;
    } else if (*selftest) {
      return oceanforge::selftest::run(std::cout);
    }
  } catch (const oceanforge::CodedErrorBase& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

// selftest.hpp
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
// In-process property suite behind `oceanforge selftest`. One line per
// check; returns 0 when everything holds, 2 otherwise.

#ifndef OCEANFORGE_SELFTEST_HPP
#define OCEANFORGE_SELFTEST_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "oceanforge/eval.hpp"
#include "oceanforge/pipeline.hpp"
#include "oceanforge/train.hpp"

namespace oceanforge::selftest {

namespace detail {

inline bool sixbit_roundtrip() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 60);
  std::uniform_int_distribution<int> six(0, 63);
  for (int trial = 0; trial < 100; ++trial) {
    std::string payload;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      int v = six(rng);
      payload.push_back(static_cast<char>(v < 40 ? v + 48 : v + 56));
    }
    if (ais::encode_sixbit(ais::decode_sixbit(payload)) != payload) return false;
  }
  return true;
}

inline bool position_report_roundtrip() {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> type(1, 3);
  std::uniform_int_distribution<uint32_t> mmsi(100000000u, 999999999u);
  std::uniform_int_distribution<int> sog(0, ais::kSogRawMax);
  std::uniform_int_distribution<int64_t> lon(-ais::kLonRawMax, ais::kLonRawMax);
  std::uniform_int_distribution<int64_t> lat(-ais::kLatRawMax, ais::kLatRawMax);
  std::uniform_int_distribution<int> cog(0, ais::kCogRawMax);
  std::uniform_int_distribution<int> hdg(0, ais::kHeadingMax);
  for (int trial = 0; trial < 100; ++trial) {
    ais::RawPositionReport r;
    r.msg_type = type(rng);
    r.mmsi = mmsi(rng);
    r.sog_raw = sog(rng);
    r.lon_raw = lon(rng);
    r.lat_raw = lat(rng);
    r.cog_raw = cog(rng);
    r.heading = trial % 7 == 0 ? ais::kHeadingUnavailable : hdg(rng);
    if (ais::decode_position_report(ais::encode_position_report(r)) != r) return false;
  }
  return true;
}

inline bool timestamp_epoch() {
  return ais::parse_ais_timestamp("20200715T000000.036Z") == 1594771200036;
}

inline bool shiptype_map() {
  return corpus::map_shiptype(70) == "Cargo" && corpus::map_shiptype(84) == "Tanker" &&
         corpus::map_shiptype(36) == "Sailing" && corpus::map_shiptype(52) == "Tug" &&
         corpus::map_shiptype(30) == "Fishing" &&
         corpus::map_shiptype(99) == corpus::kIndeterminate;
}

inline bool caption_inversion() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> lon(-180.0, 180.0);
  std::uniform_real_distribution<double> lat(-90.0, 90.0);
  std::uniform_real_distribution<double> sog(0.0, 102.2);
  std::uniform_int_distribution<int> hdg(0, 359);
  const std::vector<std::string> cats = {"Cargo", "Tanker", "Tug", "Sailing"};
  for (int trial = 0; trial < 50; ++trial) {
    ais::DecodedAisRecord r;
    r.x = lon(rng);
    r.y = lat(rng);
    r.sog = sog(rng);
    r.true_heading = trial % 5 == 0 ? ais::kHeadingUnavailable : hdg(rng);
    const std::string& cat = cats[static_cast<std::size_t>(trial) % cats.size()];
    const std::string fine = corpus::render_caption(r, cat, corpus::Granularity::Fine);
    if (corpus::parse_fine_caption(fine) != corpus::caption_fields(r, cat)) return false;
  }
  return true;
}

inline bool quantile_convention() {
  std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto f = corpus::five_number_summary(v);
  return f.q1 == 2.5 && f.median == 5.0 && f.q3 == 7.5 && f.min == 1.0 && f.max == 9.0;
}

inline bool fft_matches_dft() {
  const int n = 64;
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<std::complex<double>> a(n);
  for (auto& z : a) z = {nd(rng), nd(rng)};
  std::vector<std::complex<double>> want(n);
  for (int k = 0; k < n; ++k) {
    std::complex<double> sum = 0.0;
    for (int t = 0; t < n; ++t)
      sum += a[static_cast<std::size_t>(t)] *
             std::polar(1.0, -2.0 * M_PI * k * t / n);
    want[static_cast<std::size_t>(k)] = sum;
  }
  dsp::fft_radix2(a);
  for (int k = 0; k < n; ++k)
    if (std::abs(a[static_cast<std::size_t>(k)] - want[static_cast<std::size_t>(k)]) > 1e-9)
      return false;
  return true;
}

inline bool logmel_and_patches() {
  const dsp::DspConfig cfg;
  std::vector<double> samples(3200);
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i] = std::sin(2.0 * M_PI * 1000.0 * static_cast<double>(i) / cfg.sample_rate);
  const auto spec = dsp::log_mel(samples, cfg);
  if (spec.T != 1024 || spec.F != 64) return false;
  const int want_real = static_cast<int>(
      (samples.size() + static_cast<std::size_t>(cfg.hop) - 1) / cfg.hop);
  if (spec.real_frames != want_real) return false;
  const auto seq = dsp::extract_patches(spec, 16, 10);
  return seq.count() == 505;
}

inline bool contrastive_loss_values() {
  tensor::Tensor ea = tensor::make_tensor(4, 3, false);
  tensor::Tensor et = tensor::make_tensor(4, 3, false);
  for (int i = 0; i < 12; ++i) {
    ea->value[static_cast<std::size_t>(i)] = 0.7;
    et->value[static_cast<std::size_t>(i)] = 0.7;
  }
  const auto uniform = train::contrastive_loss(ea, et, 1.0);
  if (std::abs(uniform->value[0] - std::log(4.0)) > 1e-12) return false;

  std::mt19937_64 rng(15);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n = 6, d = 8;
  const double tau = 0.2;
  tensor::Tensor ra = tensor::make_tensor(n, d, false);
  tensor::Tensor rt = tensor::make_tensor(n, d, false);
  for (auto& v : ra->value) v = nd(rng);
  for (auto& v : rt->value) v = nd(rng);
  auto unit_rows = [&](const tensor::Tensor& t) {
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (int i = 0; i < n; ++i) {
      double norm = 0.0;
      for (int j = 0; j < d; ++j) {
        const double v = t->value[static_cast<std::size_t>(i * d + j)];
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (int j = 0; j < d; ++j)
        rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            t->value[static_cast<std::size_t>(i * d + j)] / norm;
    }
    return rows;
  };
  const auto a = unit_rows(ra), t = unit_rows(rt);
  double by_hand = 0.0;
  for (int i = 0; i < n; ++i) {
    double row_max = -1e300, col_max = -1e300;
    std::vector<double> row(n), col(n);
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int k = 0; k < d; ++k)
        dot += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
               t[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      row[static_cast<std::size_t>(j)] = dot / tau;
      row_max = std::max(row_max, row[static_cast<std::size_t>(j)]);
      dot = 0.0;
      for (int k = 0; k < d; ++k)
        dot += a[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] *
               t[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      col[static_cast<std::size_t>(j)] = dot / tau;
      col_max = std::max(col_max, col[static_cast<std::size_t>(j)]);
    }
    double row_lse = 0.0, col_lse = 0.0;
    for (int j = 0; j < n; ++j) {
      row_lse += std::exp(row[static_cast<std::size_t>(j)] - row_max);
      col_lse += std::exp(col[static_cast<std::size_t>(j)] - col_max);
    }
    by_hand += row[static_cast<std::size_t>(i)] - row_max - std::log(row_lse);
    by_hand += col[static_cast<std::size_t>(i)] - col_max - std::log(col_lse);
  }
  by_hand *= -0.5 / n;
  const auto got = train::contrastive_loss(ra, rt, tau);
  return std::abs(got->value[0] - by_hand) <= 1e-10;
}

inline bool recall_against_sort() {
  std::mt19937_64 rng(16);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_int_distribution<int> level(0, 4);
  const std::vector<std::string> cats = {"Cargo", "Tug"};
  for (int trial = 0; trial < 50; ++trial) {
    const int nq = size(rng), nt = size(rng);
    eval::SimilarityMatrix m;
    for (int i = 0; i < nq; ++i) {
      m.query_ids.push_back("q" + std::to_string(i));
      m.query_category.push_back(cats[static_cast<std::size_t>(i % 2)]);
      std::vector<double> row(static_cast<std::size_t>(nt));
      for (auto& s : row) s = level(rng) / 4.0;
      m.scores.push_back(std::move(row));
    }
    for (int j = 0; j < nt; ++j) {
      m.target_ids.push_back("t" + std::to_string(j));
      m.target_category.push_back(cats[static_cast<std::size_t>(j % 2)]);
    }
    for (int i = 0; i < nq; ++i) {
      struct Entry {
        double score;
        bool right;
      };
      std::vector<Entry> order;
      for (int j = 0; j < nt; ++j)
        order.push_back({m.scores[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                         m.target_category[static_cast<std::size_t>(j)] ==
                             m.query_category[static_cast<std::size_t>(i)]});
      std::stable_sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
        if (a.score != b.score) return a.score > b.score;
        return !a.right && b.right;
      });
      int want = 0;
      for (std::size_t k = 0; k < order.size(); ++k)
        if (order[k].right) {
          want = static_cast<int>(k) + 1;
          break;
        }
      const int got = eval::pessimistic_rank(m.scores[static_cast<std::size_t>(i)],
                                             m.target_category,
                                             m.query_category[static_cast<std::size_t>(i)]);
      if (got != want) return false;
    }
    const auto rec = eval::recall_at_k(m, {1, 3});
    int hits1 = 0, hits3 = 0;
    for (int i = 0; i < nq; ++i) {
      const int rank = eval::pessimistic_rank(m.scores[static_cast<std::size_t>(i)],
                                              m.target_category,
                                              m.query_category[static_cast<std::size_t>(i)]);
      hits1 += rank <= 1;
      hits3 += rank <= 3;
    }
    if (rec.at(1) != 100.0 * hits1 / nq || rec.at(3) != 100.0 * hits3 / nq) return false;
  }
  return true;
}

inline bool checkpoint_roundtrip() {
  model::ModelConfig mc;
  mc.n_layers = 1;
  mc.d_model = 8;
  mc.n_heads = 2;
  mc.d_ff = 16;
  mc.embed_dim = 4;
  mc.head_hidden = 6;
  mc.vocab_size = 32;
  mc.max_len = 8;
  mc.patch_size = 4;
  mc.patch_stride = 4;
  mc.max_patches = 16;
  mc.lora_rank = 2;
  mc.lora_alpha = 4;
  mc.seed = 7;
  model::DualEncoder enc(mc);
  const auto dir = std::filesystem::temp_directory_path() / "oceanforge_selftest";
  std::filesystem::create_directories(dir);
  const std::string first = (dir / "a.ckpt").string();
  const std::string second = (dir / "b.ckpt").string();
  enc.save_checkpoint(first, {{"note", "selftest"}});
  auto loaded = model::DualEncoder::load_checkpoint(first);
  loaded.model->save_checkpoint(second, loaded.meta);
  std::ifstream fa(first, std::ios::binary), fb(second, std::ios::binary);
  const std::string ba((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string bb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  std::filesystem::remove_all(dir);
  return !ba.empty() && ba == bb;
}

inline bool split_fraction() {
  int eval_rows = 0;
  const int n = 5000;
  for (int i = 0; i < n; ++i) {
    corpus::AudioSegmentRef seg;
    seg.file_path = "clip_" + std::to_string(i) + ".wav";
    seg.start = 1594771200000 + 5000ll * i;
    seg.hydrophone_id = "H" + std::to_string(i % 4);
    if (corpus::split_of_segment(seg, 42) == "eval") ++eval_rows;
  }
  const double frac = static_cast<double>(eval_rows) / n;
  return frac > 0.06 && frac < 0.14;
}

}  // namespace detail

// Runs every check, printing one ok/FAIL line per property.
inline int run(std::ostream& out) {
  const std::vector<std::pair<const char*, std::function<bool()>>> checks = {
      {"sixbit roundtrip", detail::sixbit_roundtrip},
      {"position report roundtrip", detail::position_report_roundtrip},
      {"timestamp epoch", detail::timestamp_epoch},
      {"shiptype taxonomy", detail::shiptype_map},
      {"caption inversion", detail::caption_inversion},
      {"quantile convention", detail::quantile_convention},
      {"fft vs direct dft", detail::fft_matches_dft},
      {"log-mel shape and patch grid", detail::logmel_and_patches},
      {"contrastive loss values", detail::contrastive_loss_values},
      {"recall vs sort oracle", detail::recall_against_sort},
      {"checkpoint roundtrip", detail::checkpoint_roundtrip},
      {"split fraction", detail::split_fraction},
  };
  int failures = 0;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    std::string why;
    try {
      ok = check();
    } catch (const std::exception& e) {
      why = e.what();
    }
    if (ok) {
      out << "ok " << name << "\n";
    } else {
      ++failures;
      out << "FAIL " << name;
      if (!why.empty()) out << " (" << why << ")";
      out << "\n";
    }
  }
  out << (failures == 0 ? "selftest passed" : "selftest FAILED") << " ("
      << checks.size() - static_cast<std::size_t>(failures) << "/" << checks.size() << ")\n";
  return failures == 0 ? 0 : 2;
}

}  // namespace oceanforge::selftest

#endif  // OCEANFORGE_SELFTEST_HPP

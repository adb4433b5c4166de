// corpus.hpp
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

#ifndef OCEANFORGE_CORPUS_HPP
#define OCEANFORGE_CORPUS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oceanforge/ais.hpp"
#include "oceanforge/hash.hpp"
#include "oceanforge/taxonomy.hpp"

#include "json.hpp"

namespace oceanforge::corpus {

// ---------------------------------------------------------------------------
// Data model
// ---------------------------------------------------------------------------

struct AudioSegmentRef {
  std::string file_path;
  int sample_rate = 16000;
  int64_t start = 0;      // epoch milliseconds
  int64_t duration = 5000;  // milliseconds
  std::string hydrophone_id;

  bool operator==(const AudioSegmentRef&) const = default;

  std::string segment_id() const {
    return file_path + "@" + std::to_string(start) + "/" + hydrophone_id;
  }
  bool contains(int64_t t) const { return t >= start && t < start + duration; }
  // Distance in ms from a timestamp to the segment interval; 0 if contained.
  int64_t distance_to(int64_t t) const {
    if (t < start) return start - t;
    if (t >= start + duration) return t - (start + duration) + 1;
    return 0;
  }
};

enum class Granularity { Coarse, Fine };

inline const char* to_string(Granularity g) {
  return g == Granularity::Coarse ? "coarse" : "fine";
}
inline Granularity granularity_from_string(const std::string& s) {
  if (s == "coarse") return Granularity::Coarse;
  if (s == "fine") return Granularity::Fine;
  throw Error(Errc::MalformedManifest, "unknown granularity: " + s);
}

struct AudioTextPair {
  AudioSegmentRef segment;
  std::string caption;
  std::string category;
  Granularity granularity = Granularity::Coarse;
  ais::DecodedAisRecord source_record;
  std::string split = "train";
  std::string corpus_id;
};

// ---------------------------------------------------------------------------
// Captions
// ---------------------------------------------------------------------------

struct CaptionFields {
  std::string category;
  double x = 0.0;
  double y = 0.0;
  int heading = 0;  // 511 when rendered as unavailable
  double sog = 0.0;

  bool operator==(const CaptionFields&) const = default;
};

// Field values at the precision the fine template prints them.
inline CaptionFields caption_fields(const ais::DecodedAisRecord& r,
                                    const std::string& category) {
  char buf[64];
  CaptionFields f;
  f.category = category;
  std::snprintf(buf, sizeof buf, "%.4f", r.x);
  f.x = std::strtod(buf, nullptr);
  std::snprintf(buf, sizeof buf, "%.4f", r.y);
  f.y = std::strtod(buf, nullptr);
  f.heading = r.true_heading;
  std::snprintf(buf, sizeof buf, "%.1f", r.sog);
  f.sog = std::strtod(buf, nullptr);
  return f;
}

inline std::string render_caption(const ais::DecodedAisRecord& r,
                                  const std::string& category, Granularity g) {
  if (category == kIndeterminate)
    throw Error(Errc::IndeterminateCategory,
                "cannot caption a record with indeterminate vessel type");
  if (g == Granularity::Coarse) return category;
  char buf[256];
  if (r.true_heading == ais::kHeadingUnavailable) {
    std::snprintf(buf, sizeof buf,
                  "A %s vessel at longitude %.4f, latitude %.4f, "
                  "heading unavailable, speed %.1f knots.",
                  category.c_str(), r.x, r.y, r.sog);
  } else {
    std::snprintf(buf, sizeof buf,
                  "A %s vessel at longitude %.4f, latitude %.4f, "
                  "heading %d degrees, speed %.1f knots.",
                  category.c_str(), r.x, r.y, r.true_heading, r.sog);
  }
  return buf;
}

// Inverts the fine template exactly; captions are machine-readable.
inline CaptionFields parse_fine_caption(const std::string& caption) {
  auto fail = [&]() -> CaptionFields {
    throw Error(Errc::MalformedCaption, "caption does not match template: " + caption);
  };
  CaptionFields f;
  if (caption.rfind("A ", 0) != 0) return fail();
  const std::string at = " vessel at longitude ";
  const std::size_t at_pos = caption.find(at);
  if (at_pos == std::string::npos) return fail();
  f.category = caption.substr(2, at_pos - 2);

  std::size_t pos = at_pos + at.size();
  auto expect = [&](const char* lit) {
    const std::size_t n = std::string(lit).size();
    if (caption.compare(pos, n, lit) != 0) fail();
    pos += n;
  };
  auto number = [&]() {
    const char* begin = caption.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail();
    pos += static_cast<std::size_t>(end - begin);
    return v;
  };
  f.x = number();
  expect(", latitude ");
  f.y = number();
  expect(", heading ");
  if (caption.compare(pos, 11, "unavailable") == 0) {
    f.heading = ais::kHeadingUnavailable;
    pos += 11;
  } else {
    f.heading = static_cast<int>(number());
    expect(" degrees");
  }
  expect(", speed ");
  f.sog = number();
  expect(" knots.");
  if (pos != caption.size()) fail();
  return f;
}

// ---------------------------------------------------------------------------
// Pairing
// ---------------------------------------------------------------------------

enum class SkipReason { IndeterminateCategory, NoSegmentWithinSkew, AmbiguousSegment };

struct SkipReport {
  int64_t indeterminate = 0;
  int64_t no_segment = 0;
  int64_t ambiguous = 0;
  int64_t total() const { return indeterminate + no_segment + ambiguous; }
};

struct Match {
  ais::DecodedAisRecord record;
  std::size_t segment_index = 0;
  std::string category;
};

struct PairingResult {
  std::vector<Match> matches;
  SkipReport skipped;
};

// Sweeps time-sorted records against the segment index. A record pairs with
// the segment containing its timestamp, or the nearest within max_skew_ms.
// Segments holding records from more than one vessel drop all their records
// unless keep_ambiguous is set.
inline PairingResult pair_audio_with_ais(const std::vector<ais::DecodedAisRecord>& records,
                                         const std::vector<AudioSegmentRef>& segments,
                                         int64_t max_skew_ms,
                                         bool keep_ambiguous = false) {
  if (max_skew_ms < 0)
    throw Error(Errc::NegativeSkew, "max_skew_ms must be non-negative");
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].ais_timestamp < records[i - 1].ais_timestamp)
      throw Error(Errc::UnsortedInput, "records must be sorted by ais_timestamp");

  std::vector<std::size_t> order(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (segments[a].start != segments[b].start) return segments[a].start < segments[b].start;
    return segments[a].hydrophone_id < segments[b].hydrophone_id;
  });

  PairingResult result;
  std::vector<Match> tentative;
  for (const auto& rec : records) {
    const std::string category = map_shiptype(rec.ship_type_code.value_or(0));
    if (category == kIndeterminate) {
      ++result.skipped.indeterminate;
      continue;
    }
    int64_t best_dist = -1;
    std::size_t best_idx = 0;
    for (std::size_t oi : order) {
      const int64_t d = segments[oi].distance_to(rec.ais_timestamp);
      if (best_dist < 0 || d < best_dist) {
        best_dist = d;
        best_idx = oi;
        if (d == 0) break;
      }
    }
    if (best_dist < 0 || best_dist > max_skew_ms) {
      ++result.skipped.no_segment;
      continue;
    }
    tentative.push_back({rec, best_idx, category});
  }

  // Ambiguity pass: a segment claimed by multiple distinct vessels is not a
  // usable single-vessel label.
  std::map<std::size_t, std::set<uint32_t>> vessels_per_segment;
  for (const auto& m : tentative) vessels_per_segment[m.segment_index].insert(m.record.id);
  for (auto& m : tentative) {
    if (!keep_ambiguous && vessels_per_segment[m.segment_index].size() > 1) {
      ++result.skipped.ambiguous;
    } else {
      result.matches.push_back(std::move(m));
    }
  }
  return result;
}

// SipHash rather than FNV here: the split takes the hash mod 10 and FNV's
// low bit is a pure parity function of the input bytes.
inline std::string split_of_segment(const AudioSegmentRef& segment, uint64_t seed) {
  const uint64_t h = siphash24(seed, 0x736567736c697464ull, segment.segment_id());
  return (h % 10 == 9) ? "eval" : "train";
}

// Renders matches into manifest rows for one or both granularities.
inline std::vector<AudioTextPair> build_pairs(const PairingResult& pairing,
                                              const std::vector<AudioSegmentRef>& segments,
                                              const std::vector<Granularity>& granularities,
                                              const std::string& corpus_id,
                                              uint64_t split_seed) {
  std::vector<AudioTextPair> pairs;
  pairs.reserve(pairing.matches.size() * granularities.size());
  for (const auto& m : pairing.matches) {
    for (Granularity g : granularities) {
      AudioTextPair p;
      p.segment = segments[m.segment_index];
      p.category = m.category;
      p.granularity = g;
      p.caption = render_caption(m.record, m.category, g);
      p.source_record = m.record;
      p.split = split_of_segment(p.segment, split_seed);
      p.corpus_id = corpus_id;
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Manifest JSONL
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const AudioSegmentRef& s) {
  return nlohmann::json{{"file_path", s.file_path},
                        {"sample_rate", s.sample_rate},
                        {"start", s.start},
                        {"duration", s.duration},
                        {"hydrophone_id", s.hydrophone_id}};
}

inline AudioSegmentRef segment_from_json(const nlohmann::json& j) {
  AudioSegmentRef s;
  s.file_path = j.at("file_path").get<std::string>();
  s.sample_rate = j.at("sample_rate").get<int>();
  s.start = j.at("start").get<int64_t>();
  s.duration = j.at("duration").get<int64_t>();
  s.hydrophone_id = j.value("hydrophone_id", "");
  if (s.duration <= 0) throw Error(Errc::MalformedManifest, "segment duration must be > 0");
  if (s.sample_rate <= 0) throw Error(Errc::MalformedManifest, "sample rate must be > 0");
  return s;
}

inline nlohmann::json to_json(const AudioTextPair& p) {
  return nlohmann::json{{"segment", to_json(p.segment)},
                        {"caption", p.caption},
                        {"category", p.category},
                        {"granularity", to_string(p.granularity)},
                        {"source_record", ais::to_json(p.source_record)},
                        {"split", p.split},
                        {"corpus_id", p.corpus_id}};
}

inline AudioTextPair pair_from_json(const nlohmann::json& j) {
  AudioTextPair p;
  p.segment = segment_from_json(j.at("segment"));
  p.caption = j.at("caption").get<std::string>();
  p.category = j.at("category").get<std::string>();
  p.granularity = granularity_from_string(j.at("granularity").get<std::string>());
  p.source_record = ais::record_from_json(j.at("source_record"));
  p.split = j.value("split", "train");
  p.corpus_id = j.value("corpus_id", "");
  return p;
}

inline void write_manifest(const std::string& path, const std::vector<AudioTextPair>& pairs) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::MalformedManifest, "cannot open manifest for writing: " + path);
  for (const auto& p : pairs) out << to_json(p).dump() << "\n";
}

inline std::vector<AudioTextPair> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MalformedManifest, "cannot open manifest: " + path);
  std::vector<AudioTextPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    pairs.push_back(pair_from_json(nlohmann::json::parse(line)));
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

// Linear-interpolation quantile with h = (n+1)p, the convention whose Q1/Q3
// fall midway between order statistics on small samples.
inline double quantile(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) return std::nan("");
  const double h = (static_cast<double>(n) + 1.0) * p;
  if (h <= 1.0) return sorted.front();
  if (h >= static_cast<double>(n)) return sorted.back();
  const std::size_t lo = static_cast<std::size_t>(h);  // 1-based floor
  const double frac = h - static_cast<double>(lo);
  return sorted[lo - 1] * (1.0 - frac) + sorted[lo] * frac;
}

inline FiveNumber five_number_summary(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  FiveNumber f;
  f.min = values.front();
  f.q1 = quantile(values, 0.25);
  f.median = quantile(values, 0.5);
  f.q3 = quantile(values, 0.75);
  f.max = values.back();
  return f;
}

inline int count_tukey_outliers(const std::vector<double>& values, const FiveNumber& f) {
  const double iqr = f.q3 - f.q1;
  const double lo = f.q1 - 1.5 * iqr;
  const double hi = f.q3 + 1.5 * iqr;
  int n = 0;
  for (double v : values)
    if (v < lo || v > hi) ++n;
  return n;
}

struct CategoryStats {
  std::string category;
  int64_t count = 0;
  int64_t duration_ms = 0;  // exact integer sum
  std::vector<double> dominant_freqs_hz;
  FiveNumber summary;
  int n_outliers = 0;
  bool empty_summary = false;  // flagged when no frequency values were available
};

struct StatsReport {
  std::vector<CategoryStats> per_category;  // taxonomy-order by first appearance
};

// dominant_freq_hz[i] belongs to pairs[i]; entries may be absent when the
// audio could not be analyzed.
inline StatsReport corpus_stats(const std::vector<AudioTextPair>& pairs,
                                const std::vector<std::optional<double>>& dominant_freq_hz) {
  std::vector<std::string> order;
  std::map<std::string, CategoryStats> by_cat;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    auto it = by_cat.find(p.category);
    if (it == by_cat.end()) {
      order.push_back(p.category);
      it = by_cat.emplace(p.category, CategoryStats{p.category}).first;
    }
    it->second.count += 1;
    it->second.duration_ms += p.segment.duration;
    if (i < dominant_freq_hz.size() && dominant_freq_hz[i])
      it->second.dominant_freqs_hz.push_back(*dominant_freq_hz[i]);
  }
  StatsReport report;
  for (const auto& cat : order) {
    CategoryStats s = by_cat[cat];
    if (s.dominant_freqs_hz.empty()) {
      s.empty_summary = true;
    } else {
      s.summary = five_number_summary(s.dominant_freqs_hz);
      s.n_outliers = count_tukey_outliers(s.dominant_freqs_hz, s.summary);
    }
    report.per_category.push_back(std::move(s));
  }
  return report;
}

inline std::string stats_to_csv(const StatsReport& report) {
  std::ostringstream out;
  out << "category,count,duration_h,min,q1,median,q3,max,n_outliers\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (const auto& s : report.per_category) {
    out << '"' << s.category << '"' << ',' << s.count << ','
        << num(static_cast<double>(s.duration_ms) / 3.6e6) << ',';
    if (s.empty_summary) {
      out << ",,,,," << s.n_outliers << "\n";
    } else {
      out << num(s.summary.min) << ',' << num(s.summary.q1) << ','
          << num(s.summary.median) << ',' << num(s.summary.q3) << ','
          << num(s.summary.max) << ',' << s.n_outliers << "\n";
    }
  }
  return out.str();
}

}  // namespace oceanforge::corpus

#endif  // OCEANFORGE_CORPUS_HPP

// eval.hpp
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

// Retrieval and zero-shot evaluation: audio queries ranked against encoded
// category prompts by cosine similarity. Ground truth is the query's
// category, so any prompt of the right category counts as a hit.

#ifndef OCEANFORGE_EVAL_HPP
#define OCEANFORGE_EVAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "oceanforge/errors.hpp"
#include "oceanforge/model.hpp"

namespace oceanforge::eval {

enum class Errc {
  ZeroVector,
  MissingGroundTruth,
  EmptyPromptSet,
  CorpusOverlapInZeroShot,
  MalformedMatrix,
};

using Error = CodedError<Errc>;

// ---------------------------------------------------------------------------
// Similarity
// ---------------------------------------------------------------------------

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw Error(Errc::MalformedMatrix, "cosine inputs must have equal length");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

struct SimilarityMatrix {
  std::vector<std::vector<double>> scores;  // queries by targets
  std::vector<std::string> query_ids;
  std::vector<std::string> target_ids;
  std::vector<std::string> query_category;  // ground truth per query
  std::vector<std::string> target_category;

  std::size_t n_queries() const { return scores.size(); }
  std::size_t n_targets() const { return target_category.size(); }

  void validate_shape() const {
    if (scores.empty() || target_category.empty())
      throw Error(Errc::MalformedMatrix, "similarity matrix has no entries");
    if (query_category.size() != scores.size() ||
        (!query_ids.empty() && query_ids.size() != scores.size()) ||
        (!target_ids.empty() && target_ids.size() != target_category.size()))
      throw Error(Errc::MalformedMatrix, "id and category lists disagree with scores");
    for (const auto& row : scores)
      if (row.size() != target_category.size())
        throw Error(Errc::MalformedMatrix, "ragged similarity matrix");
    for (std::size_t q = 0; q < query_category.size(); ++q) {
      if (query_category[q].empty())
        throw Error(Errc::MissingGroundTruth, "query " + std::to_string(q) + " has no category");
      if (std::find(target_category.begin(), target_category.end(), query_category[q]) ==
          target_category.end())
        throw Error(Errc::MissingGroundTruth,
                    "no target carries category '" + query_category[q] + "'");
    }
  }
};

inline SimilarityMatrix build_matrix(const std::vector<std::vector<double>>& query_emb,
                                     const std::vector<std::string>& query_category,
                                     const std::vector<std::string>& query_ids,
                                     const std::vector<std::vector<double>>& target_emb,
                                     const std::vector<std::string>& target_category,
                                     const std::vector<std::string>& target_ids) {
  SimilarityMatrix m;
  m.query_category = query_category;
  m.target_category = target_category;
  m.query_ids = query_ids;
  m.target_ids = target_ids;
  m.scores.resize(query_emb.size());
  for (std::size_t q = 0; q < query_emb.size(); ++q) {
    m.scores[q].resize(target_emb.size());
    for (std::size_t t = 0; t < target_emb.size(); ++t)
      m.scores[q][t] = cosine_similarity(query_emb[q], target_emb[t]);
  }
  m.validate_shape();
  return m;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Pessimistic category rank: every tied wrong-category target is assumed to
// sort ahead of the best right-category one.
inline int pessimistic_rank(const std::vector<double>& row,
                            const std::vector<std::string>& target_category,
                            const std::string& want) {
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t t = 0; t < row.size(); ++t)
    if (target_category[t] == want) {
      best = std::max(best, row[t]);
      found = true;
    }
  if (!found) throw Error(Errc::MissingGroundTruth, "no target carries category '" + want + "'");
  int rank = 1;
  for (std::size_t t = 0; t < row.size(); ++t) {
    if (row[t] > best)
      ++rank;
    else if (row[t] == best && target_category[t] != want)
      ++rank;
  }
  return rank;
}

inline std::map<int, double> recall_at_k(const SimilarityMatrix& m, const std::vector<int>& ks) {
  m.validate_shape();
  std::map<int, int> hits;
  for (int k : ks) hits[k] = 0;
  for (std::size_t q = 0; q < m.n_queries(); ++q) {
    const int rank = pessimistic_rank(m.scores[q], m.target_category, m.query_category[q]);
    for (int k : ks)
      if (rank <= k) ++hits[k];
  }
  std::map<int, double> out;
  for (int k : ks)
    out[k] = 100.0 * hits[k] / static_cast<double>(m.n_queries());
  return out;
}

// Lowest list index wins ties, so a prediction is always well defined.
inline std::size_t argmax_lowest_index(const std::vector<double>& row) {
  std::size_t best = 0;
  for (std::size_t t = 1; t < row.size(); ++t)
    if (row[t] > row[best]) best = t;
  return best;
}

inline std::string zero_shot_classify(const std::vector<double>& audio_emb,
                                      const std::vector<std::vector<double>>& prompt_emb,
                                      const std::vector<std::string>& prompt_category) {
  if (prompt_emb.empty() || prompt_emb.size() != prompt_category.size())
    throw Error(Errc::EmptyPromptSet, "need one embedding per prompt, at least one prompt");
  std::vector<double> row(prompt_emb.size());
  for (std::size_t t = 0; t < prompt_emb.size(); ++t)
    row[t] = cosine_similarity(audio_emb, prompt_emb[t]);
  return prompt_category[argmax_lowest_index(row)];
}

struct CategoryScore {
  int count = 0;
  int hits = 0;
  double top1 = 0.0;
};

struct EvalReport {
  double r_at_1 = 0.0;
  double r_at_3 = 0.0;
  double r_at_5 = 0.0;
  double top1 = 0.0;  // micro, per sample
  std::map<std::string, CategoryScore> per_category;

  nlohmann::json to_json() const {
    nlohmann::json per;
    for (const auto& [cat, s] : per_category)
      per[cat] = {{"count", s.count}, {"hits", s.hits}, {"top1", s.top1}};
    return nlohmann::json{{"R@1", r_at_1}, {"R@3", r_at_3}, {"R@5", r_at_5},
                          {"top1", top1},  {"per_category", per}};
  }
};

inline EvalReport metrics_from_matrix(const SimilarityMatrix& m) {
  auto recalls = recall_at_k(m, {1, 3, 5});
  EvalReport report;
  report.r_at_1 = recalls[1];
  report.r_at_3 = recalls[3];
  report.r_at_5 = recalls[5];
  int hits = 0;
  for (std::size_t q = 0; q < m.n_queries(); ++q) {
    const auto& want = m.query_category[q];
    const bool hit = m.target_category[argmax_lowest_index(m.scores[q])] == want;
    auto& slot = report.per_category[want];
    ++slot.count;
    if (hit) {
      ++slot.hits;
      ++hits;
    }
  }
  for (auto& [cat, s] : report.per_category)
    s.top1 = 100.0 * s.hits / static_cast<double>(s.count);
  report.top1 = 100.0 * hits / static_cast<double>(m.n_queries());
  return report;
}

// ---------------------------------------------------------------------------
// Protocol
// ---------------------------------------------------------------------------

enum class Mode { Supervised, ZeroShot, Retrieval };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::Supervised: return "supervised";
    case Mode::ZeroShot: return "zeroshot";
    case Mode::Retrieval: return "retrieval";
  }
  return "retrieval";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "supervised") return Mode::Supervised;
  if (s == "zeroshot") return Mode::ZeroShot;
  if (s == "retrieval") return Mode::Retrieval;
  throw Error(Errc::MalformedMatrix, "unknown eval mode '" + s + "'");
}

struct EvalProtocol {
  std::string train_corpus_id;
  std::string test_corpus_id;
  Mode mode = Mode::Retrieval;
};

struct EvalSample {
  model::PatchInput audio;
  std::string category;
  std::string segment_id;
};

struct Prompt {
  std::string category;
  std::vector<int> tokens;
};

inline std::vector<double> embedding_row(const tensor::Tensor& t) {
  return t->value;
}

inline EvalReport run_protocol(const EvalProtocol& protocol, const model::DualEncoder& enc,
                               const std::vector<EvalSample>& samples,
                               const std::vector<Prompt>& prompts) {
  if (protocol.mode == Mode::ZeroShot && protocol.train_corpus_id == protocol.test_corpus_id)
    throw Error(Errc::CorpusOverlapInZeroShot,
                "zero-shot requires disjoint corpora, both are '" + protocol.train_corpus_id +
                    "'");
  if (prompts.empty()) throw Error(Errc::EmptyPromptSet, "no prompts to rank against");
  if (samples.empty()) throw Error(Errc::MalformedMatrix, "no samples to evaluate");

  std::vector<std::vector<double>> target_emb;
  std::vector<std::string> target_category, target_ids;
  for (const auto& p : prompts) {
    target_emb.push_back(embedding_row(enc.encode_text(p.tokens)));
    target_category.push_back(p.category);
    target_ids.push_back(p.category);
  }
  std::vector<std::vector<double>> query_emb;
  std::vector<std::string> query_category, query_ids;
  for (const auto& s : samples) {
    query_emb.push_back(embedding_row(enc.encode_audio(s.audio)));
    query_category.push_back(s.category);
    query_ids.push_back(s.segment_id);
  }
  auto matrix = build_matrix(query_emb, query_category, query_ids, target_emb, target_category,
                             target_ids);
  return metrics_from_matrix(matrix);
}

}  // namespace oceanforge::eval

#endif  // OCEANFORGE_EVAL_HPP

// bpe.hpp
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

// Byte-level BPE. Ids 0..2 are [SOS]/[EOS]/[PAD], 3..258 the raw bytes,
// 259+ the learned merges in training order.

#ifndef OCEANFORGE_BPE_HPP
#define OCEANFORGE_BPE_HPP

#include <cctype>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oceanforge/errors.hpp"

#include "json.hpp"

namespace oceanforge::bpe {

enum class Errc {
  VocabTooSmall,
  InvalidToken,
  MalformedVocab,
};

using Error = CodedError<Errc>;

constexpr int kSos = 0;
constexpr int kEos = 1;
constexpr int kPad = 2;
constexpr int kByteBase = 3;
constexpr int kBaseVocab = kByteBase + 256;  // specials + byte alphabet
constexpr int kMaxLen = 77;

inline std::string lowercase(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

class BpeVocab {
 public:
  BpeVocab() = default;

  static BpeVocab train(const std::vector<std::string>& corpus, int vocab_size,
                        int max_len = kMaxLen) {
    if (vocab_size < kBaseVocab)
      throw Error(Errc::VocabTooSmall,
                  "vocab_size " + std::to_string(vocab_size) + " below base alphabet " +
                      std::to_string(kBaseVocab));
    BpeVocab vocab;
    vocab.vocab_size_ = vocab_size;
    vocab.max_len_ = max_len;
    vocab.rebuild_token_bytes();

    std::vector<std::vector<int>> seqs;
    seqs.reserve(corpus.size());
    for (const auto& line : corpus) seqs.push_back(bytes_to_ids(lowercase(line)));

    const int budget = vocab_size - kBaseVocab;
    for (int round = 0; round < budget; ++round) {
      // Counts include overlapping positions.
      std::map<std::pair<int, int>, int64_t> counts;
      for (const auto& seq : seqs)
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++counts[{seq[i], seq[i + 1]}];
      if (counts.empty()) break;

      std::pair<int, int> best{-1, -1};
      int64_t best_count = 0;
      std::pair<std::string, std::string> best_key;
      for (const auto& [pair, count] : counts) {
        std::pair<std::string, std::string> key{vocab.token_bytes(pair.first),
                                                vocab.token_bytes(pair.second)};
        if (count > best_count || (count == best_count && key < best_key)) {
          best = pair;
          best_count = count;
          best_key = std::move(key);
        }
      }

      vocab.merges_.push_back(best);
      vocab.rebuild_token_bytes();
      const int merged_id = kBaseVocab + round;
      for (auto& seq : seqs) merge_in_place(seq, best, merged_id);
    }
    return vocab;
  }

  std::vector<int> encode(const std::string& text) const {
    std::vector<int> seq = bytes_to_ids(lowercase(text));
    for (std::size_t m = 0; m < merges_.size(); ++m)
      merge_in_place(seq, merges_[m], kBaseVocab + static_cast<int>(m));
    std::vector<int> out;
    out.reserve(seq.size() + 2);
    out.push_back(kSos);
    out.insert(out.end(), seq.begin(), seq.end());
    out.push_back(kEos);
    if (static_cast<int>(out.size()) > max_len_) {
      out.resize(static_cast<std::size_t>(max_len_));
      out.back() = kEos;
    }
    return out;
  }

  std::string decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
      if (id < 0 || id >= kBaseVocab + static_cast<int>(merges_.size()))
        throw Error(Errc::InvalidToken, "id " + std::to_string(id) + " outside vocab");
      out += token_bytes(id);
    }
    return out;
  }

  std::string token_bytes(int id) const {
    if (id < kByteBase) return "";  // specials carry no bytes
    return token_bytes_[static_cast<std::size_t>(id)];
  }

  int vocab_size() const { return vocab_size_; }
  int max_len() const { return max_len_; }
  const std::vector<std::pair<int, int>>& merges() const { return merges_; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"vocab_size", vocab_size_}, {"max_len", max_len_}};
    auto& m = j["merges"] = nlohmann::json::array();
    for (const auto& [l, r] : merges_) m.push_back(nlohmann::json::array({l, r}));
    return j;
  }

  static BpeVocab from_json(const nlohmann::json& j) {
    BpeVocab vocab;
    vocab.vocab_size_ = j.at("vocab_size").get<int>();
    vocab.max_len_ = j.at("max_len").get<int>();
    if (vocab.vocab_size_ < kBaseVocab)
      throw Error(Errc::MalformedVocab, "stored vocab_size below base alphabet");
    for (const auto& m : j.at("merges")) {
      if (!m.is_array() || m.size() != 2)
        throw Error(Errc::MalformedVocab, "merge entries must be [left, right]");
      const int l = m[0].get<int>();
      const int r = m[1].get<int>();
      const int limit = kBaseVocab + static_cast<int>(vocab.merges_.size());
      if (l < kByteBase || l >= limit || r < kByteBase || r >= limit)
        throw Error(Errc::MalformedVocab, "merge references an id not yet defined");
      vocab.merges_.emplace_back(l, r);
    }
    if (kBaseVocab + static_cast<int>(vocab.merges_.size()) > vocab.vocab_size_)
      throw Error(Errc::MalformedVocab, "more merges than the vocab budget allows");
    vocab.rebuild_token_bytes();
    return vocab;
  }

  bool operator==(const BpeVocab& other) const {
    return vocab_size_ == other.vocab_size_ && max_len_ == other.max_len_ &&
           merges_ == other.merges_;
  }

 private:
  static std::vector<int> bytes_to_ids(const std::string& s) {
    std::vector<int> ids;
    ids.reserve(s.size());
    for (unsigned char b : s) ids.push_back(kByteBase + static_cast<int>(b));
    return ids;
  }

  // Left-to-right replacement; a freshly merged token joins later scans only.
  static void merge_in_place(std::vector<int>& seq, std::pair<int, int> pair, int merged_id) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < seq.size();) {
      if (r + 1 < seq.size() && seq[r] == pair.first && seq[r + 1] == pair.second) {
        seq[w++] = merged_id;
        r += 2;
      } else {
        seq[w++] = seq[r++];
      }
    }
    seq.resize(w);
  }

  void rebuild_token_bytes() {
    token_bytes_.resize(static_cast<std::size_t>(kBaseVocab) + merges_.size());
    for (int b = 0; b < 256; ++b)
      token_bytes_[static_cast<std::size_t>(kByteBase + b)] =
          std::string(1, static_cast<char>(b));
    for (std::size_t m = 0; m < merges_.size(); ++m)
      token_bytes_[static_cast<std::size_t>(kBaseVocab) + m] =
          token_bytes_[static_cast<std::size_t>(merges_[m].first)] +
          token_bytes_[static_cast<std::size_t>(merges_[m].second)];
  }

  int vocab_size_ = kBaseVocab;
  int max_len_ = kMaxLen;
  std::vector<std::pair<int, int>> merges_;
  std::vector<std::string> token_bytes_ = [] {
    std::vector<std::string> t(static_cast<std::size_t>(kBaseVocab));
    for (int b = 0; b < 256; ++b)
      t[static_cast<std::size_t>(kByteBase + b)] = std::string(1, static_cast<char>(b));
    return t;
  }();
};

}  // namespace oceanforge::bpe

#endif  // OCEANFORGE_BPE_HPP

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

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oceanforge/bpe.hpp"

using namespace oceanforge::bpe;

namespace {

const std::vector<std::string> kCaptions = {
    "a cargo vessel at longitude -123.4514, latitude 48.7697, heading 285 degrees, "
    "speed 0.0 knots.",
    "a tug vessel at longitude -123.0001, latitude 48.0002, heading 90 degrees, "
    "speed 4.5 knots.",
    "cargo", "cargo", "tug", "passenger", "passenger", "passenger",
};

int byte_id(char c) { return kByteBase + static_cast<unsigned char>(c); }

}  // namespace

TEST_CASE("first merge on 'aaab' is the most frequent pair") {
  // Direct pair count: adjacent positions (0,1) (1,2) (2,3) give aa, aa, ab.
  const std::string corpus = "aaab";
  int aa = 0, ab = 0;
  for (std::size_t i = 0; i + 1 < corpus.size(); ++i) {
    if (corpus[i] == 'a' && corpus[i + 1] == 'a') ++aa;
    if (corpus[i] == 'a' && corpus[i + 1] == 'b') ++ab;
  }
  REQUIRE(aa == 2);
  REQUIRE(ab == 1);

  const auto vocab = BpeVocab::train({corpus}, kBaseVocab + 1);
  REQUIRE(vocab.merges().size() == 1);
  CHECK(vocab.merges()[0] == std::make_pair(byte_id('a'), byte_id('a')));
}

TEST_CASE("vocab budget below the base alphabet is rejected") {
  CHECK_THROWS_MATCHES(BpeVocab::train({"abc"}, kBaseVocab - 1), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::VocabTooSmall; }));
  CHECK_NOTHROW(BpeVocab::train({"abc"}, kBaseVocab));
}

TEST_CASE("training is deterministic") {
  const auto a = BpeVocab::train(kCaptions, 300);
  const auto b = BpeVocab::train(kCaptions, 300);
  CHECK(a == b);
}

TEST_CASE("merge ties break lexicographically") {
  // "xy" and "ab" both occur exactly once; "ab" sorts first.
  const auto vocab = BpeVocab::train({"ab", "xy"}, kBaseVocab + 1);
  REQUIRE(vocab.merges().size() == 1);
  CHECK(vocab.merges()[0] == std::make_pair(byte_id('a'), byte_id('b')));
}

TEST_CASE("empty text encodes to the frame tokens alone") {
  const auto vocab = BpeVocab::train(kCaptions, 300);
  const auto ids = vocab.encode("");
  REQUIRE(ids.size() == 2);
  CHECK(ids[0] == kSos);
  CHECK(ids[1] == kEos);
}

TEST_CASE("encoding lowercases its input") {
  const auto vocab = BpeVocab::train(kCaptions, 300);
  CHECK(vocab.encode("CARGO") == vocab.encode("cargo"));
  CHECK(vocab.encode("Passenger Vessel") == vocab.encode("passenger vessel"));
}

TEST_CASE("long captions truncate to max_len with a final EOS") {
  const auto vocab = BpeVocab::train(kCaptions, 300);
  std::string long_caption;
  std::mt19937_64 rng(0xb9e01);
  std::uniform_int_distribution<int> ch('a', 'z');
  for (int i = 0; i < 500; ++i) long_caption.push_back(static_cast<char>(ch(rng)));
  const auto ids = vocab.encode(long_caption);
  CHECK(ids.size() == kMaxLen);
  CHECK(ids.front() == kSos);
  CHECK(ids.back() == kEos);
}

TEST_CASE("every emitted id stays below vocab_size") {
  const auto vocab = BpeVocab::train(kCaptions, 280);
  for (const auto& text : kCaptions) {
    const auto ids = vocab.encode(text);
    for (int id : ids) {
      CHECK(id >= 0);
      CHECK(id < vocab.vocab_size());
    }
  }
}

TEST_CASE("decode inverts encode up to lowercasing") {
  const auto vocab = BpeVocab::train(kCaptions, 300);
  for (const std::string text :
       {"Cargo", "A Tug vessel.", "heading 285 degrees", "", "MIXED case 123!"}) {
    CHECK(vocab.decode(vocab.encode(text)) == lowercase(text));
  }

  std::mt19937_64 rng(0xb9e02);
  std::uniform_int_distribution<int> ch(32, 126);
  std::uniform_int_distribution<int> len(0, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::string s;
    for (int i = 0, n = len(rng); i < n; ++i) s.push_back(static_cast<char>(ch(rng)));
    CHECK(vocab.decode(vocab.encode(s)) == lowercase(s));
  }
}

TEST_CASE("merges compress repeated corpus words") {
  const auto vocab = BpeVocab::train(kCaptions, 320);
  const auto ids = vocab.encode("cargo");
  // 5 bytes + SOS + EOS unmerged; training must have shortened it.
  CHECK(ids.size() < 7);
  CHECK(vocab.decode(ids) == "cargo");
}

TEST_CASE("bytes outside the training corpus fall back to byte tokens") {
  const auto vocab = BpeVocab::train(kCaptions, 300);
  const std::string utf8 = "caf\xc3\xa9";  // bytes absent from kCaptions
  const auto ids = vocab.encode(utf8);
  CHECK(vocab.decode(ids) == utf8);
}

TEST_CASE("vocabulary round-trips through json") {
  const auto vocab = BpeVocab::train(kCaptions, 300);
  const auto restored = BpeVocab::from_json(vocab.to_json());
  CHECK(restored == vocab);
  CHECK(restored.encode(kCaptions[0]) == vocab.encode(kCaptions[0]));

  nlohmann::json bad = vocab.to_json();
  bad["merges"].push_back(nlohmann::json::array({9999, 3}));
  CHECK_THROWS_MATCHES(BpeVocab::from_json(bad), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::MalformedVocab; }));
}

TEST_CASE("decode rejects ids outside the vocabulary") {
  const auto vocab = BpeVocab::train(kCaptions, 300);
  CHECK_THROWS_MATCHES(vocab.decode({kSos, 100000, kEos}), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.code() == Errc::InvalidToken; }));
}

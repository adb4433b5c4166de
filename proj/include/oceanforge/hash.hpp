// hash.hpp
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

#ifndef OCEANFORGE_HASH_HPP
#define OCEANFORGE_HASH_HPP

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace oceanforge {

inline uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ull) {
  uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// SipHash-2-4 (Aumasson & Bernstein). Keyed 64-bit PRF over short inputs.
inline uint64_t siphash24(uint64_t k0, uint64_t k1, std::string_view data) {
  auto rotl = [](uint64_t x, int b) { return (x << b) | (x >> (64 - b)); };

  uint64_t v0 = 0x736f6d6570736575ull ^ k0;
  uint64_t v1 = 0x646f72616e646f6dull ^ k1;
  uint64_t v2 = 0x6c7967656e657261ull ^ k0;
  uint64_t v3 = 0x7465646279746573ull ^ k1;

  auto sipround = [&] {
    v0 += v1; v1 = rotl(v1, 13); v1 ^= v0; v0 = rotl(v0, 32);
    v2 += v3; v3 = rotl(v3, 16); v3 ^= v2;
    v0 += v3; v3 = rotl(v3, 21); v3 ^= v0;
    v2 += v1; v1 = rotl(v1, 17); v1 ^= v2; v2 = rotl(v2, 32);
  };

  const std::size_t n = data.size();
  const std::size_t end = n - (n % 8);
  for (std::size_t i = 0; i < end; i += 8) {
    uint64_t m;
    std::memcpy(&m, data.data() + i, 8);
    v3 ^= m;
    sipround();
    sipround();
    v0 ^= m;
  }

  uint64_t b = static_cast<uint64_t>(n) << 56;
  for (std::size_t i = 0; i < n % 8; ++i)
    b |= static_cast<uint64_t>(static_cast<unsigned char>(data[end + i])) << (8 * i);
  v3 ^= b;
  sipround();
  sipround();
  v0 ^= b;

  v2 ^= 0xff;
  sipround();
  sipround();
  sipround();
  sipround();
  return v0 ^ v1 ^ v2 ^ v3;
}

inline uint64_t siphash24(std::string_view key_material, std::string_view data) {
  const uint64_t k0 = fnv1a64(key_material, 0xcbf29ce484222325ull);
  const uint64_t k1 = fnv1a64(key_material, 0x84222325cbf29ce4ull);
  return siphash24(k0, k1, data);
}

}  // namespace oceanforge

#endif  // OCEANFORGE_HASH_HPP

// bitstream.hpp
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

#ifndef OCEANFORGE_BITSTREAM_HPP
#define OCEANFORGE_BITSTREAM_HPP

#include <cstdint>
#include <cstddef>
#include <vector>

namespace oceanforge {

// Bit-addressable view of an unpacked message body, MSB-first.
class BitStream {
 public:
  BitStream() = default;
  explicit BitStream(std::vector<uint8_t> bits) : bits_(std::move(bits)) {}

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  void push_back(bool bit) { bits_.push_back(bit ? 1 : 0); }
  uint8_t operator[](std::size_t i) const { return bits_[i]; }

  // Unsigned field of `len` bits starting at bit `off`, MSB-first.
  uint64_t get_uint(std::size_t off, std::size_t len) const {
    uint64_t v = 0;
    for (std::size_t i = 0; i < len; ++i) v = (v << 1) | bits_[off + i];
    return v;
  }

  // Two's-complement signed field.
  int64_t get_int(std::size_t off, std::size_t len) const {
    uint64_t v = get_uint(off, len);
    const uint64_t sign = uint64_t{1} << (len - 1);
    if (v & sign) return static_cast<int64_t>(v) - (int64_t{1} << len);
    return static_cast<int64_t>(v);
  }

  void put_uint(std::size_t off, std::size_t len, uint64_t value) {
    if (off + len > bits_.size()) bits_.resize(off + len, 0);
    for (std::size_t i = 0; i < len; ++i)
      bits_[off + i] = static_cast<uint8_t>((value >> (len - 1 - i)) & 1u);
  }

  void put_int(std::size_t off, std::size_t len, int64_t value) {
    put_uint(off, len, static_cast<uint64_t>(value) & ((uint64_t{1} << len) - 1));
  }

  const std::vector<uint8_t>& bits() const noexcept { return bits_; }

 private:
  std::vector<uint8_t> bits_;
};

}  // namespace oceanforge

#endif  // OCEANFORGE_BITSTREAM_HPP

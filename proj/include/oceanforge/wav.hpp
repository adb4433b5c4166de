// wav.hpp
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

// Minimal RIFF/WAVE reader and writer, PCM16 mono only.

#ifndef OCEANFORGE_WAV_HPP
#define OCEANFORGE_WAV_HPP

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "oceanforge/errors.hpp"

namespace oceanforge::wav {

enum class Errc {
  MalformedWav,
  UnsupportedFormat,
};

using Error = CodedError<Errc>;

struct WavData {
  int sample_rate = 16000;
  std::vector<double> samples;  // [-1, 1), PCM16 / 32768
};

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
inline uint32_t get_u32(const char* p) {
  uint32_t v = 0;
  std::memcpy(&v, p, 4);
  return v;  // little-endian hosts only, same as the rest of the artifact IO
}
inline uint16_t get_u16(const char* p) {
  uint16_t v = 0;
  std::memcpy(&v, p, 2);
  return v;
}

}  // namespace detail

inline void write_wav(const std::string& path, const std::vector<double>& samples,
                      int sample_rate) {
  std::string out;
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  out.reserve(44 + data_bytes);
  out += "RIFF";
  detail::put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  detail::put_u32(out, 16);
  detail::put_u16(out, 1);  // PCM
  detail::put_u16(out, 1);  // mono
  detail::put_u32(out, static_cast<uint32_t>(sample_rate));
  detail::put_u32(out, static_cast<uint32_t>(sample_rate * 2));
  detail::put_u16(out, 2);
  detail::put_u16(out, 16);
  out += "data";
  detail::put_u32(out, data_bytes);
  for (double s : samples) {
    double clipped = s;
    if (clipped > 1.0) clipped = 1.0;
    if (clipped < -1.0) clipped = -1.0;
    const auto v = static_cast<int16_t>(std::lround(clipped * 32767.0));
    detail::put_u16(out, static_cast<uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::MalformedWav, "cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

inline WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::MalformedWav, "cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (buf.size() < 44 || buf.compare(0, 4, "RIFF") != 0 || buf.compare(8, 4, "WAVE") != 0)
    throw Error(Errc::MalformedWav, "not a RIFF/WAVE file: " + path);

  WavData wav;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const std::string id = buf.substr(pos, 4);
    const uint32_t size = detail::get_u32(buf.data() + pos + 4);
    pos += 8;
    if (pos + size > buf.size())
      throw Error(Errc::MalformedWav, "truncated chunk '" + id + "': " + path);
    if (id == "fmt ") {
      if (size < 16) throw Error(Errc::MalformedWav, "short fmt chunk: " + path);
      const uint16_t format = detail::get_u16(buf.data() + pos);
      const uint16_t channels = detail::get_u16(buf.data() + pos + 2);
      const uint16_t bits = detail::get_u16(buf.data() + pos + 14);
      if (format != 1 || channels != 1 || bits != 16)
        throw Error(Errc::UnsupportedFormat, "only PCM16 mono is supported: " + path);
      wav.sample_rate = static_cast<int>(detail::get_u32(buf.data() + pos + 4));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error(Errc::MalformedWav, "data chunk before fmt: " + path);
      wav.samples.reserve(size / 2);
      for (uint32_t i = 0; i + 1 < size; i += 2) {
        const auto v = static_cast<int16_t>(detail::get_u16(buf.data() + pos + i));
        wav.samples.push_back(static_cast<double>(v) / 32768.0);
      }
      return wav;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }
  throw Error(Errc::MalformedWav, "no data chunk: " + path);
}

}  // namespace oceanforge::wav

#endif  // OCEANFORGE_WAV_HPP

// dsp.hpp
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

// Log-mel spectrogram front end: Hann STFT, HTK mel filterbank, patch
// extraction, and the binary feature-file format.

#ifndef OCEANFORGE_DSP_HPP
#define OCEANFORGE_DSP_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "oceanforge/errors.hpp"

#include "json.hpp"

namespace oceanforge::dsp {

enum class Errc {
  EmptySignal,
  InvalidBandEdges,
  SampleRateMismatch,
  PatchLargerThanInput,
  InvalidConfig,
  MalformedArtifact,
};

using Error = CodedError<Errc>;

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

struct DspConfig {
  int sample_rate = 16000;
  int win_length = 1024;
  int hop = 240;
  int n_mels = 64;
  int target_frames = 1024;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;

  bool operator==(const DspConfig&) const = default;

  void validate() const {
    if (sample_rate <= 0 || win_length <= 0 || hop <= 0 || n_mels <= 0 ||
        target_frames <= 0 || log_floor <= 0.0)
      throw Error(Errc::InvalidConfig, "all sizes must be positive");
    if ((win_length & (win_length - 1)) != 0)
      throw Error(Errc::InvalidConfig, "win_length must be a power of two");
    if (hop > win_length) throw Error(Errc::InvalidConfig, "hop must be <= win_length");
    if (n_mels >= win_length / 2 + 1)
      throw Error(Errc::InvalidConfig, "n_mels must be < win_length/2+1");
    if (fmin < 0.0 || fmax > sample_rate / 2.0 || fmin >= fmax)
      throw Error(Errc::InvalidBandEdges, "need 0 <= fmin < fmax <= sample_rate/2");
  }

  static DspConfig default_profile() { return DspConfig{}; }
  static DspConfig imagebind128() {
    DspConfig c;
    c.n_mels = 128;
    return c;
  }
  static DspConfig profile(const std::string& name) {
    if (name == "default") return default_profile();
    if (name == "imagebind128") return imagebind128();
    throw Error(Errc::InvalidConfig, "unknown dsp profile: " + name);
  }
};

// ---------------------------------------------------------------------------
// FFT
// ---------------------------------------------------------------------------

// Iterative radix-2 Cooley-Tukey, in place. Size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw Error(Errc::InvalidConfig, "fft size must be a nonzero power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// Periodic Hann: w[k] = 0.5 (1 - cos(2 pi k / N)).
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    w[static_cast<std::size_t>(k)] =
        0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k / static_cast<double>(n)));
  return w;
}

namespace detail {

// Reflect index into [0, n) without repeating the edge sample.
inline int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// STFT
// ---------------------------------------------------------------------------

// Frames centered at t*hop with reflect padding; ceil(len/hop) frames total.
// Returns frames x (win/2 + 1) magnitudes, row major.
inline std::vector<std::vector<double>> stft_magnitude(const std::vector<double>& samples,
                                                       const DspConfig& config) {
  config.validate();
  if (samples.empty()) throw Error(Errc::EmptySignal, "cannot transform an empty signal");
  for (double s : samples)
    if (!std::isfinite(s)) throw Error(Errc::EmptySignal, "samples must be finite");

  const int64_t len = static_cast<int64_t>(samples.size());
  const int64_t n_frames = (len + config.hop - 1) / config.hop;
  const int win = config.win_length;
  const int n_bins = win / 2 + 1;
  const auto window = hann_window(win);

  std::vector<std::vector<double>> frames;
  frames.reserve(static_cast<std::size_t>(n_frames));
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(win));
  for (int64_t t = 0; t < n_frames; ++t) {
    const int64_t start = t * config.hop - win / 2;
    for (int k = 0; k < win; ++k) {
      const int64_t idx = detail::reflect_index(start + k, len);
      buf[static_cast<std::size_t>(k)] = samples[static_cast<std::size_t>(idx)] *
                                         window[static_cast<std::size_t>(k)];
    }
    fft_radix2(buf);
    std::vector<double> mags(static_cast<std::size_t>(n_bins));
    for (int b = 0; b < n_bins; ++b) mags[static_cast<std::size_t>(b)] = std::abs(buf[static_cast<std::size_t>(b)]);
    frames.push_back(std::move(mags));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Mel filterbank
// ---------------------------------------------------------------------------

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// n_mels x (win/2+1) triangular filters, centers uniform on the mel scale.
inline std::vector<std::vector<double>> mel_filterbank(const DspConfig& config) {
  config.validate();
  const int n_bins = config.win_length / 2 + 1;
  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);

  std::vector<double> edges(static_cast<std::size_t>(config.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(config.n_mels + 1));

  std::vector<std::vector<double>> fb(static_cast<std::size_t>(config.n_mels),
                                      std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
  for (int m = 0; m < config.n_mels; ++m) {
    const double left = edges[static_cast<std::size_t>(m)];
    const double center = edges[static_cast<std::size_t>(m) + 1];
    const double right = edges[static_cast<std::size_t>(m) + 2];
    for (int b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * config.sample_rate / config.win_length;
      double w = 0.0;
      if (f > left && f < right)
        w = f <= center ? (f - left) / (center - left) : (right - f) / (right - center);
      fb[static_cast<std::size_t>(m)][static_cast<std::size_t>(b)] = std::max(0.0, w);
    }
  }
  return fb;
}

// ---------------------------------------------------------------------------
// Log-mel spectrogram
// ---------------------------------------------------------------------------

struct MelSpectrogram {
  int T = 0;            // frames, padded or truncated to target
  int F = 0;            // mel bins
  int real_frames = 0;  // frames backed by signal before padding
  std::vector<double> values;  // row major, T x F

  double& at(int t, int f) { return values[static_cast<std::size_t>(t) * F + f]; }
  double at(int t, int f) const { return values[static_cast<std::size_t>(t) * F + f]; }
};

inline MelSpectrogram log_mel(const std::vector<double>& samples, const DspConfig& config) {
  const auto stft = stft_magnitude(samples, config);
  const auto fb = mel_filterbank(config);
  const int n_bins = config.win_length / 2 + 1;

  MelSpectrogram spec;
  spec.T = config.target_frames;
  spec.F = config.n_mels;
  spec.real_frames = std::min<int>(static_cast<int>(stft.size()), config.target_frames);
  spec.values.assign(static_cast<std::size_t>(spec.T) * spec.F, std::log(config.log_floor));

  for (int t = 0; t < spec.real_frames; ++t) {
    const auto& mags = stft[static_cast<std::size_t>(t)];
    for (int m = 0; m < spec.F; ++m) {
      double acc = 0.0;
      const auto& row = fb[static_cast<std::size_t>(m)];
      for (int b = 0; b < n_bins; ++b) {
        const double mag = mags[static_cast<std::size_t>(b)];
        acc += row[static_cast<std::size_t>(b)] * mag * mag;
      }
      spec.at(t, m) = std::log(acc + config.log_floor);
    }
  }
  return spec;
}

inline MelSpectrogram log_mel(const std::vector<double>& samples, int sample_rate,
                              const DspConfig& config) {
  if (sample_rate != config.sample_rate)
    throw Error(Errc::SampleRateMismatch,
                "signal is at " + std::to_string(sample_rate) + " Hz, config expects " +
                    std::to_string(config.sample_rate));
  return log_mel(samples, config);
}

// ---------------------------------------------------------------------------
// Patches
// ---------------------------------------------------------------------------

struct PatchSequence {
  int P = 16;
  int S = 10;
  int grid_rows = 0;  // along T
  int grid_cols = 0;  // along F
  std::vector<std::vector<double>> patches;  // each P*P, row major within patch

  int count() const { return grid_rows * grid_cols; }
  int row_of(int k) const { return k / grid_cols; }
  int col_of(int k) const { return k % grid_cols; }
};

inline PatchSequence extract_patches(const MelSpectrogram& spec, int P, int S) {
  if (P <= 0 || S <= 0) throw Error(Errc::InvalidConfig, "P and S must be positive");
  if (spec.T < P || spec.F < P)
    throw Error(Errc::PatchLargerThanInput,
                "patch " + std::to_string(P) + " exceeds spectrogram " +
                    std::to_string(spec.T) + "x" + std::to_string(spec.F));
  PatchSequence seq;
  seq.P = P;
  seq.S = S;
  seq.grid_rows = (spec.T - P) / S + 1;
  seq.grid_cols = (spec.F - P) / S + 1;
  seq.patches.reserve(static_cast<std::size_t>(seq.count()));
  for (int i = 0; i < seq.grid_rows; ++i) {
    for (int j = 0; j < seq.grid_cols; ++j) {
      std::vector<double> patch(static_cast<std::size_t>(P) * P);
      for (int r = 0; r < P; ++r)
        for (int c = 0; c < P; ++c)
          patch[static_cast<std::size_t>(r) * P + c] = spec.at(i * S + r, j * S + c);
      seq.patches.push_back(std::move(patch));
    }
  }
  return seq;
}

// A patch carries signal if any of its frame rows precede the padding region.
inline bool patch_has_real_frames(const PatchSequence& seq, int k, int real_frames) {
  return seq.row_of(k) * seq.S < real_frames;
}

// ---------------------------------------------------------------------------
// Summary statistics
// ---------------------------------------------------------------------------

// Peak of the mean power spectrum across real frames, DC excluded.
inline double dominant_frequency_hz(const std::vector<double>& samples,
                                    const DspConfig& config) {
  const auto stft = stft_magnitude(samples, config);
  const int n_bins = config.win_length / 2 + 1;
  std::vector<double> mean_power(static_cast<std::size_t>(n_bins), 0.0);
  for (const auto& frame : stft)
    for (int b = 0; b < n_bins; ++b)
      mean_power[static_cast<std::size_t>(b)] += frame[static_cast<std::size_t>(b)] * frame[static_cast<std::size_t>(b)];
  int best = 1;
  for (int b = 2; b < n_bins; ++b)
    if (mean_power[static_cast<std::size_t>(b)] > mean_power[static_cast<std::size_t>(best)]) best = b;
  return static_cast<double>(best) * config.sample_rate / config.win_length;
}

// ---------------------------------------------------------------------------
// Feature file
// ---------------------------------------------------------------------------
//
// Layout: u64 little-endian header length, JSON header, then count * T * F
// IEEE-754 float32 little-endian values. The header records the real frame
// count per segment so downstream consumers can mask padding.

struct FeatureFile {
  int T = 0;
  int F = 0;
  int64_t count = 0;
  std::vector<int> real_frames;
  std::string config_hash;
  std::string profile;
  std::vector<float> data;  // count * T * F

  const float* segment(int64_t i) const {
    return data.data() + static_cast<std::size_t>(i) * T * F;
  }
};

inline void write_features(const std::string& path, const std::vector<MelSpectrogram>& specs,
                           const std::string& config_hash, const std::string& profile) {
  if (specs.empty()) throw Error(Errc::MalformedArtifact, "no spectrograms to write");
  const int T = specs.front().T;
  const int F = specs.front().F;
  nlohmann::json header{{"format", "oceanforge-features"},
                        {"version", 1},
                        {"T", T},
                        {"F", F},
                        {"count", specs.size()},
                        {"config_hash", config_hash},
                        {"profile", profile}};
  auto& rf = header["real_frames"] = nlohmann::json::array();
  for (const auto& s : specs) {
    if (s.T != T || s.F != F)
      throw Error(Errc::MalformedArtifact, "mixed spectrogram shapes in one feature file");
    rf.push_back(s.real_frames);
  }
  const std::string hdr = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::MalformedArtifact, "cannot open for writing: " + path);
  const uint64_t hdr_len = hdr.size();
  out.write(reinterpret_cast<const char*>(&hdr_len), sizeof hdr_len);
  out.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  std::vector<float> row(static_cast<std::size_t>(T) * F);
  for (const auto& s : specs) {
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = static_cast<float>(s.values[i]);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

inline FeatureFile read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MalformedArtifact, "cannot open: " + path);
  uint64_t hdr_len = 0;
  in.read(reinterpret_cast<char*>(&hdr_len), sizeof hdr_len);
  if (!in || hdr_len == 0 || hdr_len > (1ull << 30))
    throw Error(Errc::MalformedArtifact, "bad header length: " + path);
  std::string hdr(hdr_len, '\0');
  in.read(hdr.data(), static_cast<std::streamsize>(hdr_len));
  if (!in) throw Error(Errc::MalformedArtifact, "truncated header: " + path);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(hdr);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedArtifact, std::string("header is not JSON: ") + e.what());
  }
  if (j.value("format", "") != "oceanforge-features")
    throw Error(Errc::MalformedArtifact, "not a feature file: " + path);

  FeatureFile f;
  f.T = j.at("T").get<int>();
  f.F = j.at("F").get<int>();
  f.count = j.at("count").get<int64_t>();
  f.config_hash = j.value("config_hash", "");
  f.profile = j.value("profile", "");
  f.real_frames = j.at("real_frames").get<std::vector<int>>();
  if (static_cast<int64_t>(f.real_frames.size()) != f.count)
    throw Error(Errc::MalformedArtifact, "real_frames length disagrees with count");

  const std::size_t n = static_cast<std::size_t>(f.count) * f.T * f.F;
  f.data.resize(n);
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw Error(Errc::MalformedArtifact, "truncated data: " + path);
  return f;
}

}  // namespace oceanforge::dsp

#endif  // OCEANFORGE_DSP_HPP

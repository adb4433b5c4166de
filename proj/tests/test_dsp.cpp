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

#include <complex>
#include <filesystem>
#include <random>

#include "oceanforge/dsp.hpp"
#include "oceanforge/wav.hpp"

using namespace oceanforge;
using namespace oceanforge::dsp;

namespace {

auto ErrcMatcher(Errc want) {
  return Catch::Matchers::Predicate<Error>(
      [want](const Error& e) { return e.code() == want; });
}

// O(n^2) reference transform.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) *
                         static_cast<double>(t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> sine(double freq_hz, double seconds, int sample_rate, double amp = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(seconds * sample_rate));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / sample_rate);
  return x;
}

std::vector<double> white_noise(double seconds, int sample_rate, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  std::vector<double> x(static_cast<std::size_t>(seconds * sample_rate));
  for (auto& v : x) v = dist(rng);
  return x;
}

// Mirror fold written out longhand, independent of the library's index math.
int64_t mirror(int64_t idx, int64_t len) {
  while (idx < 0 || idx >= len) {
    if (idx < 0) idx = -idx;
    if (idx >= len) idx = 2 * (len - 1) - idx;
  }
  return idx;
}

}  // namespace

TEST_CASE("radix-2 fft agrees with the naive dft") {
  std::mt19937_64 rng(0xd5b01);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (std::size_t n : {std::size_t{8}, std::size_t{64}, std::size_t{256}}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {dist(rng), dist(rng)};
    auto got = x;
    fft_radix2(got);
    const auto want = naive_dft(x);
    double scale = 0.0;
    for (const auto& w : want) scale = std::max(scale, std::abs(w));
    for (std::size_t k = 0; k < n; ++k)
      REQUIRE(std::abs(got[k] - want[k]) <= 1e-9 * std::max(scale, 1.0));
  }
  std::vector<std::complex<double>> bad(3);
  CHECK_THROWS_AS(fft_radix2(bad), Error);
}

TEST_CASE("stft frames equal the dft of the windowed reflect-padded frame") {
  const DspConfig config;
  std::mt19937_64 rng(0xd5b02);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(4800);
  for (auto& v : x) v = dist(rng);

  const auto stft = stft_magnitude(x, config);
  REQUIRE(stft.size() == 20);  // ceil(4800/240)

  const auto window = hann_window(config.win_length);
  const int64_t len = static_cast<int64_t>(x.size());
  for (int64_t t : {int64_t{0}, int64_t{5}, int64_t{19}}) {
    std::vector<std::complex<double>> frame(static_cast<std::size_t>(config.win_length));
    for (int k = 0; k < config.win_length; ++k) {
      const int64_t idx = mirror(t * config.hop - config.win_length / 2 + k, len);
      frame[static_cast<std::size_t>(k)] =
          x[static_cast<std::size_t>(idx)] * window[static_cast<std::size_t>(k)];
    }
    const auto want = naive_dft(frame);
    double scale = 0.0;
    for (const auto& w : want) scale = std::max(scale, std::abs(w));
    for (int b = 0; b <= config.win_length / 2; ++b)
      REQUIRE(std::abs(stft[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)] -
                       std::abs(want[static_cast<std::size_t>(b)])) <=
              1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("a 1 kHz sine concentrates at bin 64") {
  const DspConfig config;
  const auto x = sine(1000.0, 5.0, config.sample_rate);
  const auto stft = stft_magnitude(x, config);
  REQUIRE(stft.size() == 334);

  // Frames whose window lies inside the signal see a pure windowed tone.
  // Edge frames mix in the reflected tail and may land one bin off.
  std::vector<double> total(stft.front().size(), 0.0);
  for (std::size_t t = 0; t < stft.size(); ++t) {
    const auto& frame = stft[t];
    for (std::size_t b = 0; b < frame.size(); ++b) total[b] += frame[b] * frame[b];
    const int64_t center = static_cast<int64_t>(t) * config.hop;
    const bool interior = center >= config.win_length / 2 &&
                          center + config.win_length / 2 <= static_cast<int64_t>(x.size());
    const auto it = std::max_element(frame.begin(), frame.end());
    if (interior) {
      CHECK(std::distance(frame.begin(), it) == 64);
    } else {
      CHECK(std::abs(std::distance(frame.begin(), it) - 64) <= 1);
    }
  }
  const auto peak = std::max_element(total.begin(), total.end());
  CHECK(std::distance(total.begin(), peak) == 64);
}

TEST_CASE("silence transforms to zero magnitudes and the log floor") {
  const DspConfig config;
  const std::vector<double> x(80000, 0.0);
  const auto stft = stft_magnitude(x, config);
  for (const auto& frame : stft)
    for (double m : frame) CHECK(m == 0.0);

  const auto spec = log_mel(x, config);
  CHECK(spec.T == 1024);
  CHECK(spec.F == 64);
  CHECK(spec.real_frames == 334);
  const double floor = std::log(config.log_floor);
  for (double v : spec.values) CHECK(v == floor);
}

TEST_CASE("empty or non-finite signals are rejected") {
  const DspConfig config;
  CHECK_THROWS_MATCHES(stft_magnitude({}, config), Error, ErrcMatcher(Errc::EmptySignal));
  std::vector<double> nan_signal(100, 0.0);
  nan_signal[50] = std::nan("");
  CHECK_THROWS_AS(stft_magnitude(nan_signal, config), Error);
}

TEST_CASE("mel scale formula hits its anchor points") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(std::abs(hz_to_mel(1000.0) - 1000.0) < 0.5);
  CHECK(std::abs(mel_to_hz(hz_to_mel(3456.0)) - 3456.0) < 1e-9);
}

TEST_CASE("filterbank rows are triangles with live support") {
  for (const auto& config : {DspConfig::default_profile(), DspConfig::imagebind128()}) {
    const auto fb = mel_filterbank(config);
    REQUIRE(static_cast<int>(fb.size()) == config.n_mels);
    for (const auto& row : fb) {
      REQUIRE(static_cast<int>(row.size()) == config.win_length / 2 + 1);
      double peak = 0.0;
      std::size_t first = row.size(), last = 0;
      for (std::size_t b = 0; b < row.size(); ++b) {
        CHECK(row[b] >= 0.0);
        if (row[b] > 0.0) {
          first = std::min(first, b);
          last = b;
          peak = std::max(peak, row[b]);
        }
      }
      REQUIRE(peak > 0.0);  // no dead band
      bool falling = false;
      for (std::size_t b = first + 1; b <= last; ++b) {
        if (row[b] < row[b - 1]) falling = true;
        if (falling) CHECK(row[b] <= row[b - 1]);  // rises then falls
        CHECK(row[b] > 0.0);                       // contiguous support
      }
    }
  }
}

TEST_CASE("band edges are validated") {
  DspConfig config;
  config.fmax = 9000.0;  // beyond Nyquist
  CHECK_THROWS_MATCHES(mel_filterbank(config), Error, ErrcMatcher(Errc::InvalidBandEdges));
  config.fmax = 8000.0;
  config.fmin = -1.0;
  CHECK_THROWS_MATCHES(mel_filterbank(config), Error, ErrcMatcher(Errc::InvalidBandEdges));
  config.fmin = 5000.0;
  config.fmax = 4000.0;
  CHECK_THROWS_MATCHES(mel_filterbank(config), Error, ErrcMatcher(Errc::InvalidBandEdges));
}

TEST_CASE("log_mel pads short signals and truncates long ones") {
  const DspConfig config;
  const auto five_sec = log_mel(sine(440.0, 5.0, config.sample_rate), config);
  CHECK(five_sec.T == 1024);
  CHECK(five_sec.F == 64);
  CHECK(five_sec.real_frames == 334);
  const double floor = std::log(config.log_floor);
  for (int t = five_sec.real_frames; t < five_sec.T; ++t)
    for (int f = 0; f < five_sec.F; ++f) CHECK(five_sec.at(t, f) == floor);
  bool any_signal = false;
  for (int t = 0; t < five_sec.real_frames; ++t)
    for (int f = 0; f < five_sec.F; ++f) any_signal |= five_sec.at(t, f) > floor;
  CHECK(any_signal);
  for (double v : five_sec.values) CHECK(std::isfinite(v));

  const auto twenty_sec = log_mel(white_noise(20.0, config.sample_rate, 0xd5b03), config);
  CHECK(twenty_sec.real_frames == 1024);
}

TEST_CASE("log_mel rejects a mismatched sample rate") {
  const DspConfig config;
  const auto x = sine(440.0, 0.5, 22050);
  CHECK_THROWS_MATCHES(log_mel(x, 22050, config), Error,
                       ErrcMatcher(Errc::SampleRateMismatch));
  CHECK(log_mel(sine(440.0, 0.5, 16000), 16000, config).F == 64);
}

TEST_CASE("log_mel is deterministic bit for bit") {
  const DspConfig config;
  const auto x = white_noise(2.0, config.sample_rate, 0xd5b04);
  const auto a = log_mel(x, config);
  const auto b = log_mel(x, config);
  REQUIRE(a.values.size() == b.values.size());
  CHECK(std::memcmp(a.values.data(), b.values.data(),
                    a.values.size() * sizeof(double)) == 0);
}

TEST_CASE("patch counts follow the sliding-window formula") {
  MelSpectrogram spec;
  spec.T = 1024;
  spec.F = 64;
  spec.values.assign(static_cast<std::size_t>(spec.T) * spec.F, 0.0);

  const auto overlapping = extract_patches(spec, 16, 10);
  CHECK(overlapping.grid_rows == 101);
  CHECK(overlapping.grid_cols == 5);
  CHECK(overlapping.count() == 505);
  CHECK(overlapping.patches.size() == 505);
  CHECK(overlapping.patches.front().size() == 256);

  const auto tiled = extract_patches(spec, 16, 16);
  CHECK(tiled.count() == 256);
  CHECK(tiled.count() == spec.T * spec.F / (16 * 16));

  MelSpectrogram small;
  small.T = 8;
  small.F = 8;
  small.values.assign(64, 0.0);
  CHECK_THROWS_MATCHES(extract_patches(small, 16, 10), Error,
                       ErrcMatcher(Errc::PatchLargerThanInput));
}

TEST_CASE("non-overlapping patches tile the spectrogram exactly") {
  const DspConfig config;
  const auto spec = log_mel(white_noise(1.0, config.sample_rate, 0xd5b05), config);
  const auto seq = extract_patches(spec, 16, 16);
  for (int k = 0; k < seq.count(); ++k) {
    const int i = seq.row_of(k), j = seq.col_of(k);
    for (int r = 0; r < 16; ++r)
      for (int c = 0; c < 16; ++c)
        REQUIRE(seq.patches[static_cast<std::size_t>(k)][static_cast<std::size_t>(r) * 16 + c] ==
                spec.at(i * 16 + r, j * 16 + c));
  }
}

TEST_CASE("patches know whether they cover real frames") {
  const DspConfig config;
  const auto spec = log_mel(sine(440.0, 5.0, config.sample_rate), config);  // 334 real
  const auto seq = extract_patches(spec, 16, 10);
  int live = 0;
  for (int k = 0; k < seq.count(); ++k) {
    const bool has = patch_has_real_frames(seq, k, spec.real_frames);
    if (has) ++live;
    // row start at or past the padding boundary means a dead patch
    CHECK(has == (seq.row_of(k) * 10 < 334));
  }
  // rows 0..33 start below frame 334: 34 live rows of 5 patches
  CHECK(live == 34 * 5);
}

TEST_CASE("white noise energy grows linearly with duration") {
  const DspConfig config;
  std::vector<double> durations, energies;
  for (int s = 1; s <= 10; ++s) {
    const auto stft = stft_magnitude(white_noise(s, config.sample_rate, 0xd5b06 + s), config);
    double e = 0.0;
    for (const auto& frame : stft)
      for (double m : frame) e += m * m;
    durations.push_back(s);
    energies.push_back(e);
  }
  const auto n = static_cast<double>(durations.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    sx += durations[i];
    sy += energies[i];
    sxx += durations[i] * durations[i];
    sxy += durations[i] * energies[i];
    syy += energies[i] * energies[i];
  }
  const double r_num = n * sxy - sx * sy;
  const double r2 = (r_num * r_num) / ((n * sxx - sx * sx) * (n * syy - sy * sy));
  CHECK(r2 > 0.99);
}

TEST_CASE("dominant frequency finds a pure tone") {
  const DspConfig config;
  CHECK(std::abs(dominant_frequency_hz(sine(3000.0, 1.0, 16000), config) - 3000.0) < 16.0);
  CHECK(std::abs(dominant_frequency_hz(sine(500.0, 1.0, 16000), config) - 500.0) < 16.0);
}

TEST_CASE("feature files round-trip through the binary format") {
  const DspConfig config;
  const std::vector<MelSpectrogram> specs = {
      log_mel(sine(1000.0, 1.0, config.sample_rate), config),
      log_mel(white_noise(5.0, config.sample_rate, 0xd5b07), config),
  };
  const auto path = std::filesystem::temp_directory_path() / "oceanforge_features_test.bin";
  write_features(path.string(), specs, "deadbeef01234567", "default");
  const auto loaded = read_features(path.string());
  std::filesystem::remove(path);

  CHECK(loaded.T == 1024);
  CHECK(loaded.F == 64);
  CHECK(loaded.count == 2);
  CHECK(loaded.config_hash == "deadbeef01234567");
  CHECK(loaded.profile == "default");
  REQUIRE(loaded.real_frames.size() == 2);
  CHECK(loaded.real_frames[0] == specs[0].real_frames);
  CHECK(loaded.real_frames[1] == specs[1].real_frames);
  REQUIRE(loaded.data.size() == 2u * 1024 * 64);
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t i = 0; i < specs[s].values.size(); ++i)
      REQUIRE(loaded.segment(static_cast<int64_t>(s))[i] ==
              static_cast<float>(specs[s].values[i]));
}

TEST_CASE("corrupt feature files are rejected") {
  const auto path = std::filesystem::temp_directory_path() / "oceanforge_features_bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "this is not a feature file at all, padded to get past the header length";
  }
  CHECK_THROWS_MATCHES(read_features(path.string()), Error,
                       ErrcMatcher(Errc::MalformedArtifact));
  std::filesystem::remove(path);
}

TEST_CASE("wav files round-trip PCM16 mono") {
  const auto x = sine(440.0, 0.25, 16000);
  const auto path = std::filesystem::temp_directory_path() / "oceanforge_wav_test.wav";
  wav::write_wav(path.string(), x, 16000);
  const auto loaded = wav::read_wav(path.string());
  std::filesystem::remove(path);
  CHECK(loaded.sample_rate == 16000);
  REQUIRE(loaded.samples.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(std::abs(loaded.samples[i] - x[i]) <= 1.0 / 32768.0);
}

TEST_CASE("wav reader rejects other encodings") {
  const auto path = std::filesystem::temp_directory_path() / "oceanforge_wav_bad.wav";
  {
    std::ofstream out(path, std::ios::binary);
    out << "RIFFxxxxWAVEjunk";
  }
  CHECK_THROWS_AS(wav::read_wav(path.string()), wav::Error);
  std::filesystem::remove(path);
}

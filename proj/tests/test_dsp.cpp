// Copyright 2026 The timbreid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "timbreid/dsp.hpp"
#include "timbreid/error.hpp"
#include "timbreid/rng.hpp"
#include "reference_dsp.hpp"
#include "test_util.hpp"

using namespace timbreid;
using namespace timbreid::test;

namespace {

Frame frame_of(std::vector<double> samples) {
  Frame f;
  f.samples = std::move(samples);
  return f;
}

Frame noise_frame(std::uint64_t seed, std::size_t n, double amplitude = 0.8) {
  Rng rng(seed);
  std::vector<double> s(n);
  for (double& v : s) v = rng.uniform(-amplitude, amplitude);
  return frame_of(std::move(s));
}

}  // namespace

TEST_CASE("radix-2 FFT matches a direct DFT") {
  Rng rng(21);
  for (std::size_t n : {8u, 64u, 512u}) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    std::vector<std::complex<double>> data(x.begin(), x.end());
    fft_radix2(data);
    const auto ref = reference_dft(x);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(data[k] - ref[k]) <
            1e-9 * std::max(1.0, std::abs(ref[k])));
    }
  }
}

TEST_CASE("a pure 1 kHz tone at 16 kHz peaks in bin 32 of a 512 FFT") {
  DspConfig cfg;
  const auto spec =
      stft_magnitude(frame_of(sine_wave(1000.0, 16000.0, 4800)), 16000.0, cfg);
  REQUIRE(spec.intensity.size() == 257);
  REQUIRE(spec.time_axis.size() == 34);
  for (std::size_t j = 0; j < spec.time_axis.size(); ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 0; i < spec.intensity.size(); ++i) {
      if (spec.intensity[i][j] > spec.intensity[arg][j]) arg = i;
    }
    CHECK(arg == 32);  // 1000 * 512 / 16000
  }
}

TEST_CASE("degenerate frames") {
  DspConfig cfg;
  SUBCASE("all-zero frame gives an all-zero intensity matrix") {
    const auto spec =
        stft_magnitude(frame_of(std::vector<double>(4800, 0.0)), 16000.0, cfg);
    for (const auto& row : spec.intensity) {
      for (double v : row) CHECK(v == 0.0);
    }
  }
  SUBCASE("DC frame concentrates in bin 0") {
    const auto spec =
        stft_magnitude(frame_of(std::vector<double>(4800, 0.7)), 16000.0, cfg);
    for (std::size_t j = 0; j < spec.time_axis.size(); ++j) {
      for (std::size_t i = 1; i < spec.intensity.size(); ++i) {
        CHECK(spec.intensity[0][j] >= spec.intensity[i][j]);
      }
    }
  }
  SUBCASE("short frame is rejected") {
    CHECK_THROWS_AS(
        stft_magnitude(frame_of(std::vector<double>(100, 0.1)), 16000.0, cfg),
        FrameTooShort);
    CHECK_THROWS_AS(
        mfcc_spectrogram(frame_of(std::vector<double>(100, 0.1)), 16000.0, cfg),
        FrameTooShort);
  }
}

TEST_CASE("axes follow the declared convention") {
  DspConfig cfg;
  const auto spec = stft_magnitude(noise_frame(2, 4800), 16000.0, cfg);
  const std::size_t n = spec.freq_axis.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(spec.freq_axis[i] ==
          doctest::Approx(static_cast<double>(i + 1) / static_cast<double>(n)));
    CHECK(spec.freq_axis[i] > 0.0);
  }
  for (std::size_t j = 0; j < spec.time_axis.size(); ++j) {
    CHECK(spec.time_axis[j] ==
          doctest::Approx(static_cast<double>(j + 1) * 128.0 / 16000.0));
    if (j > 0) CHECK(spec.time_axis[j] > spec.time_axis[j - 1]);
  }

  const auto mfcc = mfcc_spectrogram(noise_frame(2, 4800), 16000.0, cfg);
  REQUIRE(mfcc.freq_axis.size() == 13);
  CHECK(mfcc.freq_axis.front() == doctest::Approx(1.0 / 13.0));
  CHECK(mfcc.freq_axis.back() == doctest::Approx(1.0));
}

TEST_CASE("column energy respects Parseval") {
  DspConfig cfg;
  const Frame frame = noise_frame(7, 4800);
  const auto spec = stft_magnitude(frame, 16000.0, cfg);

  // Windowed energy per column versus the one-sided spectrum, middle bins
  // counted twice.
  std::vector<double> window(cfg.fft_size);
  for (std::size_t i = 0; i < cfg.fft_size; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * kRefPi * static_cast<double>(i) /
                                      static_cast<double>(cfg.fft_size)));
  }
  for (std::size_t j = 0; j < spec.time_axis.size(); ++j) {
    double time_energy = 0.0;
    for (std::size_t i = 0; i < cfg.fft_size; ++i) {
      const double v = frame.samples[j * cfg.hop_size + i] * window[i];
      time_energy += v * v;
    }
    double freq_energy = spec.intensity[0][j] * spec.intensity[0][j] +
                         spec.intensity[256][j] * spec.intensity[256][j];
    for (std::size_t i = 1; i < 256; ++i) {
      freq_energy += 2.0 * spec.intensity[i][j] * spec.intensity[i][j];
    }
    freq_energy /= static_cast<double>(cfg.fft_size);
    CHECK(std::abs(freq_energy - time_energy) <= 1e-6 * time_energy);
  }
}

TEST_CASE("MFCCs match the reference implementation within 1e-4") {
  DspConfig cfg;
  for (std::uint64_t seed : {13u, 14u}) {
    Frame frame = seed == 13u ? noise_frame(seed, 4800)
                              : frame_of(sine_wave(740.0, 16000.0, 4800, 0.9));
    const auto mine = mfcc_spectrogram(frame, 16000.0, cfg);
    const auto ref = reference_mfcc(frame.samples, 16000.0, cfg.fft_size,
                                    cfg.hop_size, cfg.mel_filters,
                                    cfg.mfcc_coeffs);
    REQUIRE(mine.intensity.size() == ref.size());
    double max_diff = 0.0;
    for (std::size_t c = 0; c < ref.size(); ++c) {
      REQUIRE(mine.intensity[c].size() == ref[c].size());
      for (std::size_t j = 0; j < ref[c].size(); ++j) {
        max_diff = std::max(max_diff,
                            std::abs(mine.intensity[c][j] - ref[c][j]));
      }
    }
    CHECK(max_diff < 1e-4);
  }
}

TEST_CASE("white noise and a sine produce different MFCC patterns") {
  DspConfig cfg;
  const auto a = mfcc_spectrogram(noise_frame(4, 4800), 16000.0, cfg);
  const auto b = mfcc_spectrogram(frame_of(sine_wave(500.0, 16000.0, 4800)),
                                  16000.0, cfg);
  double diff = 0.0;
  for (std::size_t c = 0; c < a.intensity.size(); ++c) {
    for (std::size_t j = 0; j < a.intensity[c].size(); ++j) {
      diff += std::abs(a.intensity[c][j] - b.intensity[c][j]);
    }
  }
  CHECK(diff > 1.0);
}

TEST_CASE("a constant frame yields identical MFCC columns") {
  DspConfig cfg;
  const auto spec =
      mfcc_spectrogram(frame_of(std::vector<double>(4800, 0.0)), 16000.0, cfg);
  for (const auto& row : spec.intensity) {
    for (double v : row) CHECK(v == doctest::Approx(row[0]).epsilon(1e-12));
  }
}

TEST_CASE("weighted_sum reduces the matrix exactly") {
  Spectrogram spec;
  spec.intensity = {{1.0, 1.0}, {1.0, 1.0}};
  spec.freq_axis = {1.0, 2.0};
  spec.time_axis = {0.1, 0.2};
  CHECK(weighted_sum(spec) == doctest::Approx(0.9).epsilon(1e-12));

  spec.intensity = {{0.0, 0.0}, {0.0, 0.0}};
  CHECK(weighted_sum(spec) == 0.0);

  spec.intensity = {{1.0, 2.0}, {3.0, 4.0}};
  spec.freq_axis = {1.0, 1.0};
  spec.time_axis = {1.0, 1.0};
  CHECK(weighted_sum(spec) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("single-column weighted sum is t(1) times the weighted row sum") {
  DspConfig cfg;
  cfg.hop_size = cfg.fft_size;  // 512-sample frame -> one column
  const Frame frame = noise_frame(6, 512);
  const auto spec = mfcc_spectrogram(frame, 16000.0, cfg);
  REQUIRE(spec.time_axis.size() == 1);
  double manual = 0.0;
  for (std::size_t i = 0; i < spec.intensity.size(); ++i) {
    manual += spec.freq_axis[i] * spec.intensity[i][0];
  }
  manual *= spec.time_axis[0];
  CHECK(weighted_sum(spec) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("weighted_sum is linear in intensity") {
  Rng rng(31);
  Spectrogram s1, s2;
  s1.freq_axis = s2.freq_axis = {0.5, 1.0, 1.5};
  s1.time_axis = s2.time_axis = {0.1, 0.2};
  for (int i = 0; i < 3; ++i) {
    s1.intensity.push_back({rng.uniform(), rng.uniform()});
    s2.intensity.push_back({rng.uniform(), rng.uniform()});
  }
  const double a = 2.25, b = 0.75;
  Spectrogram mix = s1;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      mix.intensity[i][j] = a * s1.intensity[i][j] + b * s2.intensity[i][j];
    }
  }
  CHECK(weighted_sum(mix) ==
        doctest::Approx(a * weighted_sum(s1) + b * weighted_sum(s2))
            .epsilon(1e-12));
}

TEST_CASE("frame_features composes deterministically") {
  DspConfig cfg;
  const Frame frame = noise_frame(8, 4800);
  const FeaturePair fp1 = frame_features(frame, 16000.0, cfg);
  const FeaturePair fp2 = frame_features(frame, 16000.0, cfg);
  CHECK(fp1.mfcc_weighted_sum == fp2.mfcc_weighted_sum);
  CHECK(fp1.spec_weighted_sum == fp2.spec_weighted_sum);
  CHECK(std::isfinite(fp1.mfcc_weighted_sum));
  CHECK(std::isfinite(fp1.spec_weighted_sum));
}

TEST_CASE("a zero frame reduces to the log-floor features") {
  DspConfig cfg;
  const FeaturePair fp =
      frame_features(frame_of(std::vector<double>(4800, 0.0)), 16000.0, cfg);
  CHECK(fp.spec_weighted_sum == 0.0);
  // MFCC of silence is the DCT of the constant log-floor vector: finite and
  // carried entirely by the first coefficient row.
  CHECK(std::isfinite(fp.mfcc_weighted_sum));
  CHECK(fp.mfcc_weighted_sum > 0.0);
}

TEST_CASE("doubling the amplitude doubles the magnitude weighted sum") {
  DspConfig cfg;
  const Frame frame = noise_frame(9, 4800, 0.45);
  Frame doubled = frame;
  for (double& v : doubled.samples) v *= 2.0;
  const double ws1 = weighted_sum(stft_magnitude(frame, 16000.0, cfg));
  const double ws2 = weighted_sum(stft_magnitude(doubled, 16000.0, cfg));
  CHECK(ws2 == doctest::Approx(2.0 * ws1).epsilon(1e-12));
}

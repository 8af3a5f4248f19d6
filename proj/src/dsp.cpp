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

#include "timbreid/dsp.hpp"

#include <cmath>

#include "timbreid/error.hpp"

namespace timbreid {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = 1e-10;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void validate(const DspConfig& cfg) {
  if (!is_power_of_two(cfg.fft_size)) {
    throw ConfigError("fft_size must be a power of two");
  }
  if (cfg.hop_size == 0 || cfg.hop_size > cfg.fft_size) {
    throw ConfigError("require fft_size >= hop_size > 0");
  }
  if (cfg.mfcc_coeffs > cfg.mel_filters || cfg.mfcc_coeffs == 0) {
    throw ConfigError("require 0 < mfcc_coeffs <= mel_filters");
  }
  if (cfg.window != "hann") {
    throw ConfigError("unknown window '" + cfg.window + "'");
  }
}

// Periodic Hann window.
std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                 static_cast<double>(n)));
  }
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular mel filterbank over [0, sample_rate/2], unit peak per filter.
// Returned as dense [filter][bin] weights.
std::vector<std::vector<double>> mel_filterbank(std::size_t n_filters,
                                                std::size_t n_bins,
                                                std::size_t fft_size,
                                                double sample_rate) {
  const double mel_lo = hz_to_mel(0.0);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> centers_hz(n_filters + 2);
  for (std::size_t i = 0; i < centers_hz.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_filters + 1);
    centers_hz[i] = mel_to_hz(mel);
  }
  std::vector<std::vector<double>> bank(n_filters,
                                        std::vector<double>(n_bins, 0.0));
  for (std::size_t f = 0; f < n_filters; ++f) {
    const double lo = centers_hz[f];
    const double mid = centers_hz[f + 1];
    const double hi = centers_hz[f + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double bin_hz =
          static_cast<double>(k) * sample_rate / static_cast<double>(fft_size);
      double w = 0.0;
      if (bin_hz > lo && bin_hz < hi) {
        w = bin_hz <= mid ? (bin_hz - lo) / (mid - lo) : (hi - bin_hz) / (hi - mid);
      }
      bank[f][k] = w;
    }
  }
  return bank;
}

std::size_t column_count(std::size_t frame_len, const DspConfig& cfg) {
  if (frame_len < cfg.fft_size) {
    throw FrameTooShort("frame of " + std::to_string(frame_len) +
                        " samples < fft_size " + std::to_string(cfg.fft_size));
  }
  return (frame_len - cfg.fft_size) / cfg.hop_size + 1;
}

std::vector<double> time_axis_for(std::size_t m, double sample_rate,
                                  const DspConfig& cfg) {
  std::vector<double> t(m);
  for (std::size_t j = 0; j < m; ++j) {
    t[j] = static_cast<double>(j + 1) * static_cast<double>(cfg.hop_size) /
           sample_rate;
  }
  return t;
}

// One-sided complex spectra, one vector of fft_size/2 + 1 bins per column.
std::vector<std::vector<std::complex<double>>> stft_columns(
    const Frame& frame, const DspConfig& cfg) {
  const std::size_t m = column_count(frame.samples.size(), cfg);
  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  const std::vector<double> window = hann_window(cfg.fft_size);

  std::vector<std::vector<std::complex<double>>> cols(m);
  std::vector<std::complex<double>> buf(cfg.fft_size);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t start = j * cfg.hop_size;
    for (std::size_t i = 0; i < cfg.fft_size; ++i) {
      buf[i] = frame.samples[start + i] * window[i];
    }
    fft_radix2(buf);
    cols[j].assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n_bins));
  }
  return cols;
}

}  // namespace

void fft_radix2(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

Spectrogram stft_magnitude(const Frame& frame, double sample_rate,
                           const DspConfig& cfg) {
  validate(cfg);
  const auto cols = stft_columns(frame, cfg);
  const std::size_t m = cols.size();
  const std::size_t n_bins = cfg.fft_size / 2 + 1;

  Spectrogram spec;
  spec.intensity.assign(n_bins, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n_bins; ++i) {
      spec.intensity[i][j] = std::abs(cols[j][i]);
    }
  }
  spec.freq_axis.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    spec.freq_axis[i] =
        static_cast<double>(i + 1) / static_cast<double>(n_bins);
  }
  spec.time_axis = time_axis_for(m, sample_rate, cfg);
  return spec;
}

Spectrogram mfcc_spectrogram(const Frame& frame, double sample_rate,
                             const DspConfig& cfg) {
  validate(cfg);
  const auto cols = stft_columns(frame, cfg);
  const std::size_t m = cols.size();
  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  const auto bank =
      mel_filterbank(cfg.mel_filters, n_bins, cfg.fft_size, sample_rate);

  Spectrogram spec;
  spec.intensity.assign(cfg.mfcc_coeffs, std::vector<double>(m, 0.0));
  std::vector<double> power(n_bins), log_mel(cfg.mel_filters);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n_bins; ++i) power[i] = std::norm(cols[j][i]);
    for (std::size_t f = 0; f < cfg.mel_filters; ++f) {
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += bank[f][k] * power[k];
      log_mel[f] = std::log(std::max(e, kLogFloor));
    }
    // Orthonormal DCT-II over the filter axis; |coefficient| keeps the
    // intensity matrix non-negative.
    const auto mf = static_cast<double>(cfg.mel_filters);
    for (std::size_t c = 0; c < cfg.mfcc_coeffs; ++c) {
      double acc = 0.0;
      for (std::size_t f = 0; f < cfg.mel_filters; ++f) {
        acc += log_mel[f] *
               std::cos(kPi * (static_cast<double>(f) + 0.5) *
                        static_cast<double>(c) / mf);
      }
      const double scale =
          c == 0 ? std::sqrt(1.0 / mf) : std::sqrt(2.0 / mf);
      spec.intensity[c][j] = std::abs(scale * acc);
    }
  }
  spec.freq_axis.resize(cfg.mfcc_coeffs);
  for (std::size_t i = 0; i < cfg.mfcc_coeffs; ++i) {
    spec.freq_axis[i] =
        static_cast<double>(i + 1) / static_cast<double>(cfg.mfcc_coeffs);
  }
  spec.time_axis = time_axis_for(m, sample_rate, cfg);
  return spec;
}

double weighted_sum(const Spectrogram& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < spec.intensity.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < spec.intensity[i].size(); ++j) {
      row += spec.time_axis[j] * spec.intensity[i][j];
    }
    total += spec.freq_axis[i] * row;
  }
  return total;
}

FeaturePair frame_features(const Frame& frame, double sample_rate,
                           const DspConfig& cfg) {
  FeaturePair fp;
  fp.mfcc_weighted_sum = weighted_sum(mfcc_spectrogram(frame, sample_rate, cfg));
  fp.spec_weighted_sum = weighted_sum(stft_magnitude(frame, sample_rate, cfg));
  return fp;
}

}  // namespace timbreid

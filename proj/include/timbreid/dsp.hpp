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

#pragma once

#include <complex>
#include <string>
#include <vector>

#include "timbreid/framing.hpp"

namespace timbreid {

/// Identifies the axis-weight convention baked into FeaturePair values.
/// Serialized models carry this string; a model trained under one convention
/// refuses to score features produced under another.
inline constexpr const char* kFeatureConvention = "ws-axes/1";

struct DspConfig {
  std::size_t fft_size = 512;  // power of two
  std::size_t hop_size = 128;
  std::size_t mel_filters = 40;
  std::size_t mfcc_coeffs = 13;
  std::string window = "hann";  // only tapering currently implemented
};

/// Non-negative intensity matrix with per-row frequency weights and
/// per-column time weights, the shape both weighted sums reduce over.
struct Spectrogram {
  std::vector<std::vector<double>> intensity;  // [row][col], n x m
  std::vector<double> freq_axis;               // length n, dimensionless
  std::vector<double> time_axis;               // length m, seconds, increasing
};

/// The two per-frame scalars used as regression inputs.
struct FeaturePair {
  double mfcc_weighted_sum = 0.0;
  double spec_weighted_sum = 0.0;
};

/// Short-time magnitude spectrogram of one frame. Rows are the one-sided
/// fft_size/2 + 1 bins with freq_axis (i+1)/n_rows; columns are window
/// positions with time_axis (j+1) * hop / sample_rate. No padding, no
/// centering; windows that do not fit entirely inside the frame are dropped.
/// Throws FrameTooShort when the frame cannot hold one window.
Spectrogram stft_magnitude(const Frame& frame, double sample_rate,
                           const DspConfig& cfg);

/// MFCC analogue of the above: mel filterbank on the power spectrum, natural
/// log with a 1e-10 floor, orthonormal DCT-II, first mfcc_coeffs rows kept.
/// Intensity stores |coefficient| so the matrix stays non-negative; the
/// frequency axis is the normalized coefficient index (i+1)/mfcc_coeffs.
Spectrogram mfcc_spectrogram(const Frame& frame, double sample_rate,
                             const DspConfig& cfg);

/// Sum over all cells of freq_weight * time_weight * intensity.
double weighted_sum(const Spectrogram& spec);

/// Composes the three operations above into the per-frame feature pair.
FeaturePair frame_features(const Frame& frame, double sample_rate,
                           const DspConfig& cfg);

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& data);

}  // namespace timbreid

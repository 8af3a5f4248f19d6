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

#include <vector>

#include "timbreid/audio_io.hpp"

namespace timbreid {

/// One fixed-duration slice of a stream; the unit of all downstream work.
struct Frame {
  std::vector<double> samples;  // length == round(frame_seconds * sample_rate)
  std::size_t index = 0;        // ordinal within the stream
  double start_time = 0.0;      // seconds, == index * frame_seconds
};

struct FramingConfig {
  double frame_seconds = 0.3;
  double silence_threshold = 0.05;  // mean-|amplitude| cutoff
};

/// Splits a scaled stream into consecutive non-overlapping frames. A trailing
/// remainder shorter than one frame is dropped. Throws StreamTooShort when
/// the stream does not cover even one frame.
std::vector<Frame> partition(const AudioStream& stream,
                             const FramingConfig& cfg);

/// Mean absolute amplitude of the frame. The absolute value matters: the
/// plain mean of zero-centered audio is near zero for speech and silence
/// alike, which would make any threshold useless.
double frame_energy(const Frame& frame);

/// Keeps frames whose energy is >= cfg.silence_threshold (equality keeps).
/// An empty result is legal and means the stream was all silence.
std::vector<Frame> filter_silence(std::vector<Frame> frames,
                                  const FramingConfig& cfg);

}  // namespace timbreid

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

#include <string>
#include <vector>

namespace timbreid {

/// A mono audio stream. Immutable by convention once constructed; all
/// pipeline operations take it by const reference and return new values.
struct AudioStream {
  std::vector<double> samples;
  double sample_rate = 0.0;  // Hz
  bool scaled = false;       // true once peak-normalized to max |x| == 1
};

/// Reads a RIFF/WAVE file. Supported encodings: PCM 8/16/24-bit integer and
/// 32-bit IEEE float, any channel count (channels are averaged to mono).
/// Integer samples map linearly to [-1, 1). The result is not yet scaled.
///
/// Throws IoError, UnsupportedFormat, or EmptyAudio.
AudioStream read_wav(const std::string& path);

/// Writes a mono stream as 32-bit IEEE float WAV. Float samples survive a
/// write/read round trip exactly, which the synthetic-data tools rely on.
/// Throws IoError.
void write_wav(const std::string& path, const AudioStream& stream);

/// Peak normalization: divides every sample by max |x_i| so the loudest
/// sample becomes exactly +/-1. Throws SilentStream when max |x_i| == 0,
/// since a pure-silence stream has no meaningful scale.
AudioStream scale_stream(const AudioStream& stream);

}  // namespace timbreid

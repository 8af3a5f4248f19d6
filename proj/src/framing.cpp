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

#include "timbreid/framing.hpp"

#include <cmath>

#include "timbreid/error.hpp"

namespace timbreid {

std::vector<Frame> partition(const AudioStream& stream,
                             const FramingConfig& cfg) {
  const auto frame_len =
      static_cast<std::size_t>(std::llround(cfg.frame_seconds * stream.sample_rate));
  if (frame_len == 0) throw StreamTooShort("frame length rounds to zero samples");
  const std::size_t n_frames = stream.samples.size() / frame_len;
  if (n_frames == 0) {
    throw StreamTooShort("stream shorter than one frame (" +
                         std::to_string(stream.samples.size()) + " < " +
                         std::to_string(frame_len) + " samples)");
  }
  std::vector<Frame> frames;
  frames.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    Frame f;
    f.index = i;
    f.start_time = static_cast<double>(i) * cfg.frame_seconds;
    f.samples.assign(stream.samples.begin() + static_cast<std::ptrdiff_t>(i * frame_len),
                     stream.samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * frame_len));
    frames.push_back(std::move(f));
  }
  return frames;
}

double frame_energy(const Frame& frame) {
  if (frame.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : frame.samples) acc += std::abs(s);
  return acc / static_cast<double>(frame.samples.size());
}

std::vector<Frame> filter_silence(std::vector<Frame> frames,
                                  const FramingConfig& cfg) {
  std::vector<Frame> kept;
  kept.reserve(frames.size());
  for (auto& f : frames) {
    if (frame_energy(f) >= cfg.silence_threshold) kept.push_back(std::move(f));
  }
  return kept;
}

}  // namespace timbreid

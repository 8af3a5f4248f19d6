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

#include <cstdint>
#include <vector>

#include "timbreid/recognition.hpp"
#include "timbreid/rng.hpp"

namespace timbreid {

/// Parameters of one synthetic voice: a handful of sinusoidal partials plus
/// band-passed noise. Distinct profiles occupy distinct regions of the
/// feature plane, which is what makes the surrogate corpora separable.
struct VoiceProfile {
  std::vector<double> partial_hz;
  std::vector<double> partial_amp;
  double noise_level = 0.2;       // noise mix relative to the partial sum
  double noise_center_hz = 2000.0;
  double noise_bandwidth_hz = 800.0;
};

/// One frame of the profile's sine mixture plus band-limited noise, with
/// random phases. Not normalized; peak is on the order of the amplitude sum.
std::vector<double> synth_tone_frame(Rng& rng, std::size_t n_samples,
                                     double sample_rate,
                                     const VoiceProfile& profile);

/// Wide-coverage random profile, used for the surrogate timbre dataset.
VoiceProfile random_voice_profile(Rng& rng);

/// Deterministic base profile for speaker `index` of a corpus. Profiles are
/// log-spaced in fundamental frequency with varying noise character, so
/// early speakers are far apart and larger populations crowd together.
VoiceProfile speaker_base_profile(std::uint64_t corpus_seed, std::size_t index);

/// Random per-frame variation around a base profile: frequency jitter,
/// amplitude wobble, noise-level drift.
VoiceProfile jitter_profile(const VoiceProfile& base, Rng& rng,
                            double relative_amount);

struct SpeakerCorpusSpec {
  std::size_t n_speakers = 10;
  std::size_t streams_per_speaker = 10;
  double stream_seconds = 2.0;
  double sample_rate = 16000.0;
  double silence_probability = 0.06;  // chance a 0.3 s slot is near-silent
};

/// Synthesizes a deterministic corpus of named speakers ("spk00", ...).
/// Streams occasionally contain near-silent slots so the silence filter has
/// real work to do.
Corpus synth_speaker_corpus(std::uint64_t seed, const SpeakerCorpusSpec& spec);

/// Writes a corpus as <dir>/<speaker>/stream_<k>.wav.
void save_corpus_dir(const Corpus& corpus, const std::string& dir);

}  // namespace timbreid

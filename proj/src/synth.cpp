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

#include "timbreid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "timbreid/error.hpp"

namespace timbreid {
namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

// Second-order resonator (constant peak gain) used to band-limit noise.
struct Resonator {
  double b0, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  Resonator(double center_hz, double bandwidth_hz, double sample_rate) {
    const double r = std::exp(-kTwoPi / 2.0 * bandwidth_hz / sample_rate);
    const double theta = kTwoPi * center_hz / sample_rate;
    a1 = -2.0 * r * std::cos(theta);
    a2 = r * r;
    b0 = (1.0 - r * r) / 2.0;
  }

  double process(double x) {
    const double y = b0 * x - a1 * z1 - a2 * z2;
    z2 = z1;
    z1 = y;
    return y;
  }
};

}  // namespace

std::vector<double> synth_tone_frame(Rng& rng, std::size_t n_samples,
                                     double sample_rate,
                                     const VoiceProfile& profile) {
  std::vector<double> out(n_samples, 0.0);
  for (std::size_t p = 0; p < profile.partial_hz.size(); ++p) {
    const double freq = profile.partial_hz[p];
    if (freq >= sample_rate / 2.0) continue;
    const double amp = profile.partial_amp[p];
    const double phase = rng.uniform(0.0, kTwoPi);
    for (std::size_t i = 0; i < n_samples; ++i) {
      out[i] += amp * std::sin(kTwoPi * freq * static_cast<double>(i) /
                                   sample_rate +
                               phase);
    }
  }
  double amp_sum = 0.0;
  for (double a : profile.partial_amp) amp_sum += a;
  if (profile.noise_level > 0.0) {
    Resonator filter(profile.noise_center_hz, profile.noise_bandwidth_hz,
                     sample_rate);
    const double gain = profile.noise_level * amp_sum;
    // Let the resonator ring in before the frame starts.
    for (int i = 0; i < 256; ++i) filter.process(rng.uniform(-1.0, 1.0));
    for (std::size_t i = 0; i < n_samples; ++i) {
      out[i] += gain * 3.0 * filter.process(rng.uniform(-1.0, 1.0));
    }
  }
  return out;
}

VoiceProfile random_voice_profile(Rng& rng) {
  VoiceProfile p;
  const double fundamental = rng.uniform(120.0, 1400.0);
  const std::size_t n_partials = 2 + static_cast<std::size_t>(rng.bounded(3));
  for (std::size_t i = 0; i < n_partials; ++i) {
    const double ratio = 1.0 + static_cast<double>(i) * rng.uniform(1.2, 2.6);
    p.partial_hz.push_back(fundamental * ratio);
    p.partial_amp.push_back(rng.uniform(0.2, 1.0));
  }
  p.noise_level = rng.uniform(0.02, 0.7);
  p.noise_center_hz = rng.uniform(300.0, 6000.0);
  p.noise_bandwidth_hz = rng.uniform(200.0, 2200.0);
  return p;
}

VoiceProfile speaker_base_profile(std::uint64_t corpus_seed,
                                  std::size_t index) {
  Rng rng(derive_seed(corpus_seed, 0xC0D5 + index));
  VoiceProfile p;
  // Log-spaced fundamentals: neighbors are ~13% apart, so small speaker
  // subsets sit far apart in the feature plane and large ones crowd.
  const double fundamental =
      260.0 * std::pow(1.13, static_cast<double>(index));
  const double detune = rng.uniform(0.98, 1.02);
  p.partial_hz = {fundamental * detune, fundamental * 2.9 * detune,
                  fundamental * 4.7 * detune};
  p.partial_amp = {1.0, 0.35 + 0.06 * static_cast<double>(index % 4),
                   0.15 + 0.05 * static_cast<double>(index % 3)};
  p.noise_level = 0.08 + 0.07 * static_cast<double>(index % 5);
  p.noise_center_hz = 900.0 + 520.0 * static_cast<double>(index % 7);
  p.noise_bandwidth_hz = 500.0 + 90.0 * static_cast<double>(index % 4);
  return p;
}

VoiceProfile jitter_profile(const VoiceProfile& base, Rng& rng,
                            double relative_amount) {
  VoiceProfile p = base;
  for (double& f : p.partial_hz) {
    f *= 1.0 + rng.uniform(-relative_amount, relative_amount);
  }
  for (double& a : p.partial_amp) {
    a *= 1.0 + rng.uniform(-2.0 * relative_amount, 2.0 * relative_amount);
  }
  p.noise_level *= 1.0 + rng.uniform(-2.0 * relative_amount,
                                     2.0 * relative_amount);
  return p;
}

Corpus synth_speaker_corpus(std::uint64_t seed,
                            const SpeakerCorpusSpec& spec) {
  const auto frame_len = static_cast<std::size_t>(
      std::llround(0.3 * spec.sample_rate));
  const auto slots_per_stream = static_cast<std::size_t>(
      std::llround(spec.stream_seconds / 0.3));

  Corpus corpus;
  for (std::size_t s = 0; s < spec.n_speakers; ++s) {
    char name[16];
    std::snprintf(name, sizeof(name), "spk%02zu", s);
    corpus.speakers.emplace_back(name);
    const VoiceProfile base = speaker_base_profile(seed, s);

    std::vector<AudioStream> streams;
    for (std::size_t k = 0; k < spec.streams_per_speaker; ++k) {
      Rng rng(derive_seed(seed, 1 + s * 1000 + k));
      // Per-stream session drift on top of per-frame jitter.
      const VoiceProfile session = jitter_profile(base, rng, 0.015);
      AudioStream stream;
      stream.sample_rate = spec.sample_rate;
      stream.samples.reserve(slots_per_stream * frame_len);
      for (std::size_t slot = 0; slot < slots_per_stream; ++slot) {
        const bool silent = slot != 0 &&
                            rng.uniform() < spec.silence_probability;
        const VoiceProfile frame_profile =
            jitter_profile(session, rng, 0.025);
        auto frame = synth_tone_frame(rng, frame_len, spec.sample_rate,
                                      frame_profile);
        double peak = 0.0;
        for (double v : frame) peak = std::max(peak, std::abs(v));
        // Loud slots land near full scale; silent slots stay far below the
        // default 0.05 energy cutoff even after stream-level scaling.
        const double target = silent ? 0.002 : rng.uniform(0.55, 0.95);
        const double gain = peak > 0.0 ? target / peak : 0.0;
        for (double v : frame) stream.samples.push_back(v * gain);
      }
      streams.push_back(std::move(stream));
    }
    corpus.streams.push_back(std::move(streams));
  }
  return corpus;
}

void save_corpus_dir(const Corpus& corpus, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    const fs::path speaker_dir = fs::path(dir) / corpus.speakers[s];
    fs::create_directories(speaker_dir, ec);
    if (ec) throw IoError("cannot create " + speaker_dir.string());
    for (std::size_t k = 0; k < corpus.streams[s].size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "stream_%03zu.wav", k);
      write_wav((speaker_dir / name).string(), corpus.streams[s][k]);
    }
  }
}

}  // namespace timbreid

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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "timbreid/dsp.hpp"
#include "timbreid/forest.hpp"
#include "timbreid/framing.hpp"

namespace timbreid {

inline constexpr std::size_t kTimbralPropertyCount = 7;
inline constexpr std::array<const char*, kTimbralPropertyCount>
    kTimbralPropertyNames = {"boominess", "brightness", "depth",  "hardness",
                             "roughness", "sharpness",  "warmth"};

/// The seven regressed timbral properties of a frame, each in [0, 100].
struct TimbralVector {
  double boominess = 0.0;
  double brightness = 0.0;
  double depth = 0.0;
  double hardness = 0.0;
  double roughness = 0.0;
  double sharpness = 0.0;
  double warmth = 0.0;

  std::array<double, kTimbralPropertyCount> as_array() const {
    return {boominess, brightness, depth,     hardness,
            roughness, sharpness,  warmth};
  }
  std::vector<double> as_vector() const {
    const auto a = as_array();
    return {a.begin(), a.end()};
  }
  static TimbralVector from_array(
      const std::array<double, kTimbralPropertyCount>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
  }
};

/// One labeled example: a 0.3 s audio snippet (on disk or inline) plus its
/// seven property labels.
struct TimbreRow {
  std::string audio_path;        // relative to the dataset's base_dir
  std::vector<double> samples;   // inline audio when audio_path is empty
  double sample_rate = 0.0;
  TimbralVector labels;
};

struct TimbreDataset {
  std::vector<TimbreRow> rows;
  std::string provenance;  // "labeled" or "synthetic"
  std::string base_dir;    // directory audio_path entries resolve against
};

/// Parses the dataset CSV. Header must be exactly
///   path,boominess,brightness,depth,hardness,roughness,sharpness,warmth
/// Audio files are not touched until a row is materialized. Labels outside
/// [0, 100] are rejected. Throws MissingColumn, LabelOutOfRange,
/// EmptyDataset, IoError.
TimbreDataset load_timbre_dataset(const std::string& csv_path);

/// Writes rows back out as CSV plus one WAV per row under
/// <out_dir>/audio/. Used by the synthetic-data command.
void save_timbre_dataset(const TimbreDataset& ds, const std::string& out_dir);

/// Generates a surrogate dataset of band-limited noise + sine frames whose
/// labels are a fixed function of each frame's FeaturePair (see
/// synth_ground_truth) plus clamped Gaussian noise of sd noise_sd.
/// Deterministic per seed; audio is float32-quantized so a WAV round trip
/// reproduces features exactly. Uses the default framing/DSP settings at
/// 16 kHz.
TimbreDataset synth_timbre_dataset(std::uint64_t seed, std::size_t n_rows,
                                   double noise_sd);

/// The generator's label model: seven distinct affine-plus-saturating maps
/// of the two features, producing values in [0, 100]. Exposed so tests can
/// use the generator as its own oracle.
TimbralVector synth_ground_truth(const FeaturePair& fp);

/// Materializes one row to its FeaturePair: load (if on disk), peak-scale,
/// take the first full frame, run the feature pipeline. Throws
/// MissingAudioFile when the referenced audio cannot be read.
FeaturePair row_features(const TimbreRow& row, const std::string& base_dir,
                         const FramingConfig& framing, const DspConfig& dsp);

/// Seven fitted regressors, one per property, all over FeaturePair inputs.
struct TimbreExtractor {
  std::array<RegressorModel, kTimbralPropertyCount> models;
  std::string feature_convention;
};

/// Fits the seven regressors on identical feature rows. Regressor k trains
/// with an RNG stream derived from cfg.rng_seed and k, so properties are
/// independent of one another's label columns.
TimbreExtractor train_timbre_regressors(const TimbreDataset& ds,
                                        const FramingConfig& framing,
                                        const DspConfig& dsp,
                                        const ForestConfig& cfg);

/// Predicts all seven properties, clamped to [0, 100]. Throws
/// ConventionMismatch when the extractor was trained under a different
/// feature convention than the caller's pipeline.
TimbralVector extract_timbre(const TimbreExtractor& ex, const FeaturePair& fp,
                             const std::string& convention = kFeatureConvention);

nlohmann::json timbre_extractor_to_json(const TimbreExtractor& ex);
TimbreExtractor timbre_extractor_from_json(const nlohmann::json& j);
void save_timbre_extractor(const TimbreExtractor& ex, const std::string& path);
TimbreExtractor load_timbre_extractor(const std::string& path);

}  // namespace timbreid

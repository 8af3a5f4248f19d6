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

#include "timbreid/config.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "timbreid/error.hpp"

namespace timbreid {
namespace {

void reject_unknown_keys(const nlohmann::json& j,
                         std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json framing_to_json(const FramingConfig& cfg) {
  return nlohmann::json{{"frame_seconds", cfg.frame_seconds},
                        {"silence_threshold", cfg.silence_threshold}};
}

FramingConfig framing_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, {"frame_seconds", "silence_threshold"}, "framing");
  FramingConfig cfg;
  maybe(j, "frame_seconds", cfg.frame_seconds);
  maybe(j, "silence_threshold", cfg.silence_threshold);
  return cfg;
}

nlohmann::json dsp_to_json(const DspConfig& cfg) {
  return nlohmann::json{{"fft_size", cfg.fft_size},
                        {"hop_size", cfg.hop_size},
                        {"mel_filters", cfg.mel_filters},
                        {"mfcc_coeffs", cfg.mfcc_coeffs},
                        {"window", cfg.window}};
}

DspConfig dsp_from_json(const nlohmann::json& j) {
  reject_unknown_keys(
      j, {"fft_size", "hop_size", "mel_filters", "mfcc_coeffs", "window"},
      "dsp");
  DspConfig cfg;
  maybe(j, "fft_size", cfg.fft_size);
  maybe(j, "hop_size", cfg.hop_size);
  maybe(j, "mel_filters", cfg.mel_filters);
  maybe(j, "mfcc_coeffs", cfg.mfcc_coeffs);
  maybe(j, "window", cfg.window);
  return cfg;
}

nlohmann::json forest_cfg_to_json(const ForestConfig& cfg) {
  return nlohmann::json{{"n_trees", cfg.n_trees},
                        {"max_depth", cfg.max_depth},
                        {"min_samples_split", cfg.min_samples_split},
                        {"features_per_split", cfg.features_per_split},
                        {"bootstrap", cfg.bootstrap},
                        {"rng_seed", cfg.rng_seed}};
}

ForestConfig forest_cfg_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j,
                      {"n_trees", "max_depth", "min_samples_split",
                       "features_per_split", "bootstrap", "rng_seed"},
                      "forest config");
  ForestConfig cfg;
  maybe(j, "n_trees", cfg.n_trees);
  maybe(j, "max_depth", cfg.max_depth);
  maybe(j, "min_samples_split", cfg.min_samples_split);
  maybe(j, "features_per_split", cfg.features_per_split);
  maybe(j, "bootstrap", cfg.bootstrap);
  maybe(j, "rng_seed", cfg.rng_seed);
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/true,
                              /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  reject_unknown_keys(j, {"framing", "dsp", "classifier", "regressor"}, path);

  PipelineConfig cfg;
  try {
    if (j.contains("framing")) cfg.framing = framing_from_json(j["framing"]);
    if (j.contains("dsp")) cfg.dsp = dsp_from_json(j["dsp"]);
    if (j.contains("classifier")) {
      cfg.classifier_forest = forest_cfg_from_json(j["classifier"]);
    }
    if (j.contains("regressor")) {
      cfg.regressor_forest = forest_cfg_from_json(j["regressor"]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  validate(cfg);
  return cfg;
}

void validate(const PipelineConfig& cfg) {
  if (!(cfg.framing.frame_seconds > 0.0)) {
    throw ConfigError("frame_seconds must be positive");
  }
  if (!(cfg.framing.silence_threshold >= 0.0 &&
        cfg.framing.silence_threshold < 1.0)) {
    throw ConfigError("silence_threshold must lie in [0, 1)");
  }
  const auto check_forest = [](const ForestConfig& f, const char* which) {
    if (f.n_trees < 1) {
      throw ConfigError(std::string(which) + ": n_trees must be >= 1");
    }
    if (f.min_samples_split < 2) {
      throw ConfigError(std::string(which) +
                        ": min_samples_split must be >= 2");
    }
  };
  check_forest(cfg.classifier_forest, "classifier");
  check_forest(cfg.regressor_forest, "regressor");
  if ((cfg.dsp.fft_size & (cfg.dsp.fft_size - 1)) != 0 ||
      cfg.dsp.fft_size == 0) {
    throw ConfigError("fft_size must be a power of two");
  }
  if (cfg.dsp.hop_size == 0 || cfg.dsp.hop_size > cfg.dsp.fft_size) {
    throw ConfigError("require fft_size >= hop_size > 0");
  }
  if (cfg.dsp.mfcc_coeffs == 0 || cfg.dsp.mfcc_coeffs > cfg.dsp.mel_filters) {
    throw ConfigError("require 0 < mfcc_coeffs <= mel_filters");
  }
  if (cfg.dsp.window != "hann") {
    throw ConfigError("unknown window '" + cfg.dsp.window + "'");
  }
}

std::string pipeline_fingerprint(const FramingConfig& framing,
                                 const DspConfig& dsp) {
  const nlohmann::json j{{"framing", framing_to_json(framing)},
                         {"dsp", dsp_to_json(dsp)},
                         {"feature_convention", kFeatureConvention}};
  const std::string canonical = j.dump();
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace timbreid

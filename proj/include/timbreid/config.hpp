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

#include <json.hpp>

#include "timbreid/dsp.hpp"
#include "timbreid/forest.hpp"
#include "timbreid/framing.hpp"

namespace timbreid {

/// Everything one run needs: framing, analysis, and the two forest configs.
/// Loaded from a commented JSON file; flags may override individual values.
struct PipelineConfig {
  FramingConfig framing;
  DspConfig dsp;
  ForestConfig classifier_forest;
  // Both features are considered at every regressor split: with only two
  // inputs the d/3 subsampling rule would randomize away half the signal.
  ForestConfig regressor_forest{.features_per_split = 2};
};

nlohmann::json framing_to_json(const FramingConfig& cfg);
FramingConfig framing_from_json(const nlohmann::json& j);
nlohmann::json dsp_to_json(const DspConfig& cfg);
DspConfig dsp_from_json(const nlohmann::json& j);
nlohmann::json forest_cfg_to_json(const ForestConfig& cfg);
ForestConfig forest_cfg_from_json(const nlohmann::json& j);

/// Parses a pipeline config file. JSON with // and /* */ comments allowed.
/// Unknown keys anywhere are rejected with ConfigError.
PipelineConfig load_pipeline_config(const std::string& path);

/// Validates ranges (frame_seconds > 0, threshold in [0,1), fft power of
/// two, n_trees >= 1, min_samples_split >= 2, ...). Throws ConfigError.
void validate(const PipelineConfig& cfg);

/// FNV-1a hash (hex) of the canonical framing+dsp+convention JSON. Models
/// and reports record it so mismatched pipelines are detectable.
std::string pipeline_fingerprint(const FramingConfig& framing,
                                 const DspConfig& dsp);

}  // namespace timbreid

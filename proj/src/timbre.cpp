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

#include "timbreid/timbre.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "timbreid/error.hpp"
#include "timbreid/synth.hpp"

namespace timbreid {
namespace {

constexpr double kSynthSampleRate = 16000.0;

std::string expected_header() {
  std::string h = "path";
  for (const char* name : kTimbralPropertyNames) {
    h += ',';
    h += name;
  }
  return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_label(const std::string& text, std::size_t line_no,
                   const char* column) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw LabelOutOfRange("line " + std::to_string(line_no) + ": '" + text +
                          "' is not a number (" + column + ")");
  }
  if (pos != text.size()) {
    throw LabelOutOfRange("line " + std::to_string(line_no) +
                          ": trailing junk in '" + text + "'");
  }
  if (!(v >= 0.0 && v <= 100.0)) {
    throw LabelOutOfRange("line " + std::to_string(line_no) + ": " + column +
                          " = " + text + " outside [0, 100]");
  }
  return v;
}

// Float32 quantization, so in-memory samples match a WAV round trip.
void quantize_f32(std::vector<double>& samples) {
  for (double& s : samples) s = static_cast<double>(static_cast<float>(s));
}

double clamp01_100(double v) { return std::clamp(v, 0.0, 100.0); }

}  // namespace

TimbreDataset load_timbre_dataset(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path);

  std::string line;
  if (!std::getline(in, line)) throw EmptyDataset(csv_path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header()) {
    throw MissingColumn(csv_path + ": header must be exactly '" +
                        expected_header() + "'");
  }

  TimbreDataset ds;
  ds.provenance = "labeled";
  ds.base_dir = std::filesystem::path(csv_path).parent_path().string();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 1 + kTimbralPropertyCount) {
      throw MissingColumn(csv_path + " line " + std::to_string(line_no) +
                          ": expected " +
                          std::to_string(1 + kTimbralPropertyCount) +
                          " fields, got " + std::to_string(fields.size()));
    }
    TimbreRow row;
    row.audio_path = fields[0];
    std::array<double, kTimbralPropertyCount> labels{};
    for (std::size_t i = 0; i < kTimbralPropertyCount; ++i) {
      labels[i] = parse_label(fields[i + 1], line_no, kTimbralPropertyNames[i]);
    }
    row.labels = TimbralVector::from_array(labels);
    ds.rows.push_back(std::move(row));
  }
  if (ds.rows.empty()) {
    throw EmptyDataset(csv_path + " has a header but no rows");
  }
  return ds;
}

void save_timbre_dataset(const TimbreDataset& ds, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "audio", ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  std::ofstream csv(fs::path(out_dir) / "dataset.csv",
                    std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot write dataset.csv under " + out_dir);
  csv << expected_header() << '\n';

  char buf[64];
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const TimbreRow& row = ds.rows[i];
    std::string rel = row.audio_path;
    if (rel.empty()) {
      std::snprintf(buf, sizeof(buf), "audio/row_%05zu.wav", i);
      rel = buf;
      AudioStream stream;
      stream.samples = row.samples;
      stream.sample_rate = row.sample_rate;
      write_wav((fs::path(out_dir) / rel).string(), stream);
    }
    csv << rel;
    for (double v : row.labels.as_array()) {
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      csv << ',' << buf;
    }
    csv << '\n';
  }
  if (!csv) throw IoError("write failure under " + out_dir);
}

TimbralVector synth_ground_truth(const FeaturePair& fp) {
  // Fixed label model of the surrogate generator. The standardization
  // constants are frozen from the generator's feature distribution at the
  // default 16 kHz analysis settings; they are part of the definition, not
  // fitted per dataset.
  const double z1 = (fp.mfcc_weighted_sum - 87.0) / 33.0;
  const double z2 = (fp.spec_weighted_sum - 820.0) / 390.0;
  const auto prop = [](double w0, double w1, double w2, double z1v,
                       double z2v) {
    return clamp01_100(50.0 + 42.0 * std::tanh(w0 + w1 * z1v + w2 * z2v));
  };
  TimbralVector tv;
  tv.boominess = prop(-0.25, -0.90, 0.10, z1, z2);
  tv.brightness = prop(0.10, 0.15, 0.90, z1, z2);
  tv.depth = prop(0.30, -0.85, -0.12, z1, z2);
  tv.hardness = prop(-0.15, 0.88, 0.15, z1, z2);
  tv.roughness = prop(0.05, 0.75, -0.18, z1, z2);
  tv.sharpness = prop(-0.30, -0.10, 0.95, z1, z2);
  tv.warmth = prop(0.20, 0.15, -0.90, z1, z2);
  return tv;
}

TimbreDataset synth_timbre_dataset(std::uint64_t seed, std::size_t n_rows,
                                   double noise_sd) {
  const FramingConfig framing;
  const DspConfig dsp;
  const auto frame_len = static_cast<std::size_t>(
      std::llround(framing.frame_seconds * kSynthSampleRate));

  TimbreDataset ds;
  ds.provenance = "synthetic";
  ds.rows.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    Rng rng(derive_seed(seed, i));
    const VoiceProfile profile = random_voice_profile(rng);
    TimbreRow row;
    row.sample_rate = kSynthSampleRate;
    row.samples = synth_tone_frame(rng, frame_len, kSynthSampleRate, profile);
    quantize_f32(row.samples);

    const FeaturePair fp = row_features(row, "", framing, dsp);
    auto labels = synth_ground_truth(fp).as_array();
    for (double& v : labels) {
      v = clamp01_100(v + noise_sd * rng.gaussian());
    }
    row.labels = TimbralVector::from_array(labels);
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

FeaturePair row_features(const TimbreRow& row, const std::string& base_dir,
                         const FramingConfig& framing, const DspConfig& dsp) {
  AudioStream stream;
  if (row.audio_path.empty()) {
    stream.samples = row.samples;
    stream.sample_rate = row.sample_rate;
  } else {
    const auto path =
        (std::filesystem::path(base_dir) / row.audio_path).string();
    try {
      stream = read_wav(path);
    } catch (const IoError& e) {
      throw MissingAudioFile(e.what());
    }
  }
  const AudioStream scaled = scale_stream(stream);
  // Dataset rows are single labeled snippets: the first full frame carries
  // the label and no silence gate applies.
  const auto frames = partition(scaled, framing);
  return frame_features(frames.front(), scaled.sample_rate, dsp);
}

TimbreExtractor train_timbre_regressors(const TimbreDataset& ds,
                                        const FramingConfig& framing,
                                        const DspConfig& dsp,
                                        const ForestConfig& cfg) {
  if (ds.rows.empty()) throw EmptyDataset("timbre dataset has no rows");

  std::vector<std::vector<double>> X;
  X.reserve(ds.rows.size());
  std::vector<std::array<double, kTimbralPropertyCount>> Y;
  Y.reserve(ds.rows.size());
  for (const TimbreRow& row : ds.rows) {
    const FeaturePair fp = row_features(row, ds.base_dir, framing, dsp);
    X.push_back({fp.mfcc_weighted_sum, fp.spec_weighted_sum});
    Y.push_back(row.labels.as_array());
  }

  TimbreExtractor ex;
  ex.feature_convention = kFeatureConvention;
  for (std::size_t k = 0; k < kTimbralPropertyCount; ++k) {
    std::vector<double> y(ds.rows.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = Y[i][k];
    ForestConfig per_property = cfg;
    per_property.rng_seed = derive_seed(cfg.rng_seed, k);
    ex.models[k] = fit_regressor(X, y, per_property, kFeatureConvention);
  }
  return ex;
}

TimbralVector extract_timbre(const TimbreExtractor& ex, const FeaturePair& fp,
                             const std::string& convention) {
  if (ex.feature_convention != convention) {
    throw ConventionMismatch("extractor uses '" + ex.feature_convention +
                             "' but pipeline produces '" + convention + "'");
  }
  const std::vector<double> x = {fp.mfcc_weighted_sum, fp.spec_weighted_sum};
  std::array<double, kTimbralPropertyCount> out{};
  for (std::size_t k = 0; k < kTimbralPropertyCount; ++k) {
    out[k] = clamp01_100(predict(ex.models[k], x));
  }
  return TimbralVector::from_array(out);
}

nlohmann::json timbre_extractor_to_json(const TimbreExtractor& ex) {
  nlohmann::json models = nlohmann::json::object();
  for (std::size_t k = 0; k < kTimbralPropertyCount; ++k) {
    models[kTimbralPropertyNames[k]] = regressor_to_json(ex.models[k]);
  }
  return nlohmann::json{{"format", "timbreid-timbre-extractor"},
                        {"format_version", kModelFormatVersion},
                        {"feature_convention", ex.feature_convention},
                        {"models", std::move(models)}};
}

TimbreExtractor timbre_extractor_from_json(const nlohmann::json& j) {
  try {
    TimbreExtractor ex;
    ex.feature_convention = j.at("feature_convention").get<std::string>();
    const auto& models = j.at("models");
    for (std::size_t k = 0; k < kTimbralPropertyCount; ++k) {
      ex.models[k] = regressor_from_json(models.at(kTimbralPropertyNames[k]));
    }
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(e.what());
  }
}

void save_timbre_extractor(const TimbreExtractor& ex,
                           const std::string& path) {
  save_model_json(timbre_extractor_to_json(ex), path);
}

TimbreExtractor load_timbre_extractor(const std::string& path) {
  return timbre_extractor_from_json(
      load_model_json(path, "timbreid-timbre-extractor"));
}

}  // namespace timbreid

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

#include "timbreid/recognition.hpp"

#include <algorithm>
#include <filesystem>

#include "timbreid/config.hpp"
#include "timbreid/error.hpp"

namespace timbreid {
namespace {

// The per-stream feature pipeline minus the timbre stage.
std::vector<Frame> accepted_frames(const AudioStream& stream,
                                   const FramingConfig& framing) {
  const AudioStream scaled = stream.scaled ? stream : scale_stream(stream);
  return filter_silence(partition(scaled, framing), framing);
}

std::vector<std::vector<double>> to_feature_rows(
    const std::vector<std::vector<TimbralVector>>& frames_per_class,
    std::vector<int>& labels_out) {
  std::vector<std::vector<double>> X;
  for (std::size_t c = 0; c < frames_per_class.size(); ++c) {
    for (const TimbralVector& tv : frames_per_class[c]) {
      X.push_back(tv.as_vector());
      labels_out.push_back(static_cast<int>(c));
    }
  }
  return X;
}

nlohmann::json pipeline_section(const FramingConfig& framing,
                                const DspConfig& dsp) {
  return nlohmann::json{{"framing", framing_to_json(framing)},
                        {"dsp", dsp_to_json(dsp)},
                        {"fingerprint", pipeline_fingerprint(framing, dsp)}};
}

void load_pipeline_section(const nlohmann::json& j, FramingConfig& framing,
                           DspConfig& dsp) {
  framing = framing_from_json(j.at("framing"));
  dsp = dsp_from_json(j.at("dsp"));
}

}  // namespace

Corpus load_corpus_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");

  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  for (const auto& speaker_entry : fs::directory_iterator(dir)) {
    if (!speaker_entry.is_directory()) continue;
    std::vector<std::string> wavs;
    for (const auto& file : fs::directory_iterator(speaker_entry.path())) {
      if (file.is_regular_file() && file.path().extension() == ".wav") {
        wavs.push_back(file.path().string());
      }
    }
    if (wavs.empty()) continue;
    std::sort(wavs.begin(), wavs.end());
    entries.emplace_back(speaker_entry.path().filename().string(),
                         std::move(wavs));
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  Corpus corpus;
  for (auto& [speaker, wavs] : entries) {
    corpus.speakers.push_back(speaker);
    std::vector<AudioStream> streams;
    streams.reserve(wavs.size());
    for (const auto& wav : wavs) streams.push_back(read_wav(wav));
    corpus.streams.push_back(std::move(streams));
  }
  return corpus;
}

std::vector<TimbralVector> stream_timbral_vectors(const AudioStream& stream,
                                                  const TimbreExtractor& ex,
                                                  const FramingConfig& framing,
                                                  const DspConfig& dsp) {
  std::vector<TimbralVector> out;
  std::vector<Frame> frames;
  try {
    frames = accepted_frames(stream, framing);
  } catch (const SilentStream&) {
    return out;  // all-zero stream: zero accepted frames
  }
  out.reserve(frames.size());
  for (const Frame& frame : frames) {
    out.push_back(
        extract_timbre(ex, frame_features(frame, stream.sample_rate, dsp)));
  }
  return out;
}

ClassifierModel fit_frame_classifier(
    const std::vector<std::vector<TimbralVector>>& frames_per_class,
    const ForestConfig& cfg) {
  std::vector<int> labels;
  const auto X = to_feature_rows(frames_per_class, labels);
  return fit_classifier(X, labels, cfg, kFeatureConvention);
}

SpeakerModel train_identifier(const Corpus& corpus, const TimbreExtractor& ex,
                              const FramingConfig& framing,
                              const DspConfig& dsp, const ForestConfig& cfg) {
  if (corpus.speakers.size() < 2) {
    throw InsufficientSpeakers("need at least 2 speakers, got " +
                               std::to_string(corpus.speakers.size()));
  }
  std::vector<std::vector<TimbralVector>> frames_per_class;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    std::vector<TimbralVector> frames;
    for (const AudioStream& stream : corpus.streams[s]) {
      auto tvs = stream_timbral_vectors(stream, ex, framing, dsp);
      frames.insert(frames.end(), tvs.begin(), tvs.end());
    }
    if (frames.empty()) {
      throw NoAcceptedFrames("speaker '" + corpus.speakers[s] +
                             "' contributed no non-silent frames");
    }
    frames_per_class.push_back(std::move(frames));
  }

  SpeakerModel model;
  model.classifier = fit_frame_classifier(frames_per_class, cfg);
  model.labels = corpus.speakers;
  model.extractor = ex;
  model.framing = framing;
  model.dsp = dsp;
  return model;
}

std::size_t argmax_index(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;  // ties keep the lowest index
  }
  return best;
}

FrameDecision identify_frame(const SpeakerModel& model,
                             const TimbralVector& tv) {
  FrameDecision decision;
  decision.probabilities = predict_proba(model.classifier, tv.as_vector());
  decision.class_index = argmax_index(decision.probabilities);
  decision.label = model.labels[decision.class_index];
  return decision;
}

std::vector<double> aggregate(const ProbabilityMatrix& m) {
  if (m.rows.empty()) throw EmptyMatrix("probability matrix has no rows");
  std::vector<double> sums(m.rows.front().size(), 0.0);
  for (const auto& row : m.rows) {
    if (row.size() != sums.size()) {
      throw DimensionMismatch("ragged probability matrix");
    }
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += row[i];
  }
  return sums;
}

StreamDecision identify_stream(const SpeakerModel& model,
                               const AudioStream& stream) {
  const auto tvs =
      stream_timbral_vectors(stream, model.extractor, model.framing, model.dsp);
  if (tvs.empty()) {
    throw NoAcceptedFrames("stream yields no non-silent frames");
  }
  ProbabilityMatrix probs;
  probs.rows.reserve(tvs.size());
  for (const TimbralVector& tv : tvs) {
    probs.rows.push_back(predict_proba(model.classifier, tv.as_vector()));
  }
  StreamDecision decision;
  decision.scores = aggregate(probs);
  decision.class_index = argmax_index(decision.scores);
  decision.label = model.labels[decision.class_index];
  decision.frames_used = tvs.size();
  return decision;
}

VerifierModel train_verifier(const std::vector<AudioStream>& target,
                             const std::vector<AudioStream>& impostors,
                             const TimbreExtractor& ex,
                             const FramingConfig& framing, const DspConfig& dsp,
                             const ForestConfig& cfg,
                             std::string target_label) {
  std::vector<std::vector<TimbralVector>> sides(2);
  for (const AudioStream& stream : impostors) {
    auto tvs = stream_timbral_vectors(stream, ex, framing, dsp);
    sides[0].insert(sides[0].end(), tvs.begin(), tvs.end());
  }
  for (const AudioStream& stream : target) {
    auto tvs = stream_timbral_vectors(stream, ex, framing, dsp);
    sides[1].insert(sides[1].end(), tvs.begin(), tvs.end());
  }
  if (sides[1].empty()) {
    throw NoAcceptedFrames("target side contributed no non-silent frames");
  }
  if (sides[0].empty()) {
    throw NoAcceptedFrames("impostor side contributed no non-silent frames");
  }

  VerifierModel model;
  model.classifier = fit_frame_classifier(sides, cfg);
  model.target_label = std::move(target_label);
  model.extractor = ex;
  model.framing = framing;
  model.dsp = dsp;

  std::size_t correct = 0, total = 0;
  for (int side = 0; side < 2; ++side) {
    for (const TimbralVector& tv : sides[side]) {
      const auto p = predict_proba(model.classifier, tv.as_vector());
      correct += (p[1] >= 0.5) == (side == 1) ? 1 : 0;
      ++total;
    }
  }
  model.training_frame_accuracy =
      static_cast<double>(correct) / static_cast<double>(total);
  return model;
}

VerifyDecision verify_stream(const VerifierModel& model,
                             const AudioStream& stream) {
  const auto tvs =
      stream_timbral_vectors(stream, model.extractor, model.framing, model.dsp);
  if (tvs.empty()) {
    throw NoAcceptedFrames("stream yields no non-silent frames");
  }
  double sum = 0.0;
  for (const TimbralVector& tv : tvs) {
    sum += predict_proba(model.classifier, tv.as_vector())[1];
  }
  VerifyDecision decision;
  decision.score = sum / static_cast<double>(tvs.size());
  decision.accept = decision.score >= model.threshold;
  decision.frames_used = tvs.size();
  return decision;
}

void save_speaker_model(const SpeakerModel& model, const std::string& path) {
  nlohmann::json j{{"format", "timbreid-speaker-model"},
                   {"format_version", kModelFormatVersion},
                   {"classifier", classifier_to_json(model.classifier)},
                   {"labels", model.labels},
                   {"extractor", timbre_extractor_to_json(model.extractor)},
                   {"pipeline", pipeline_section(model.framing, model.dsp)}};
  save_model_json(j, path);
}

SpeakerModel load_speaker_model(const std::string& path) {
  const auto j = load_model_json(path, "timbreid-speaker-model");
  try {
    SpeakerModel model;
    model.classifier = classifier_from_json(j.at("classifier"));
    model.labels = j.at("labels").get<std::vector<std::string>>();
    model.extractor = timbre_extractor_from_json(j.at("extractor"));
    load_pipeline_section(j.at("pipeline"), model.framing, model.dsp);
    if (model.labels.size() != model.classifier.n_classes) {
      throw CorruptModel(path + ": label table does not match class count");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(e.what());
  }
}

void save_verifier_model(const VerifierModel& model, const std::string& path) {
  nlohmann::json j{{"format", "timbreid-verifier-model"},
                   {"format_version", kModelFormatVersion},
                   {"classifier", classifier_to_json(model.classifier)},
                   {"target_label", model.target_label},
                   {"threshold", model.threshold},
                   {"training_frame_accuracy", model.training_frame_accuracy},
                   {"extractor", timbre_extractor_to_json(model.extractor)},
                   {"pipeline", pipeline_section(model.framing, model.dsp)}};
  save_model_json(j, path);
}

VerifierModel load_verifier_model(const std::string& path) {
  const auto j = load_model_json(path, "timbreid-verifier-model");
  try {
    VerifierModel model;
    model.classifier = classifier_from_json(j.at("classifier"));
    model.target_label = j.at("target_label").get<std::string>();
    model.threshold = j.at("threshold").get<double>();
    if (!(model.threshold >= 0.0 && model.threshold <= 1.0)) {
      throw CorruptModel(path + ": threshold outside [0, 1]");
    }
    model.training_frame_accuracy =
        j.at("training_frame_accuracy").get<double>();
    model.extractor = timbre_extractor_from_json(j.at("extractor"));
    load_pipeline_section(j.at("pipeline"), model.framing, model.dsp);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(e.what());
  }
}

}  // namespace timbreid

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

#include "timbreid/audio_io.hpp"
#include "timbreid/timbre.hpp"

namespace timbreid {

/// Enrollment corpus: one entry per speaker, each with that speaker's
/// streams. Speakers are kept sorted by name so every derived artifact is
/// order-independent of filesystem enumeration.
struct Corpus {
  std::vector<std::string> speakers;
  std::vector<std::vector<AudioStream>> streams;  // parallel to speakers
};

/// Loads a directory-per-speaker corpus: <dir>/<speaker>/*.wav, with WAVs
/// taken in sorted filename order.
Corpus load_corpus_dir(const std::string& dir);

/// Per-frame probability rows (accepted frames) by speaker columns.
struct ProbabilityMatrix {
  std::vector<ProbabilityVector> rows;
};

/// Full pipeline for one stream: scale, partition, drop silence, features,
/// timbre extraction. Returns one TimbralVector per accepted frame; the
/// result may be empty when every frame is silent.
std::vector<TimbralVector> stream_timbral_vectors(const AudioStream& stream,
                                                  const TimbreExtractor& ex,
                                                  const FramingConfig& framing,
                                                  const DspConfig& dsp);

/// Multiclass speaker-identification model over timbral vectors.
struct SpeakerModel {
  ClassifierModel classifier;
  std::vector<std::string> labels;  // class id -> speaker name
  TimbreExtractor extractor;
  FramingConfig framing;
  DspConfig dsp;
};

/// Binary target-vs-impostor verification model.
struct VerifierModel {
  ClassifierModel classifier;  // class 1 = target, class 0 = impostor
  std::string target_label;
  double threshold = 0.5;
  TimbreExtractor extractor;
  FramingConfig framing;
  DspConfig dsp;
  // Training-set frame accuracy; ~0.5 marks a degenerate (inseparable)
  // training pair, which is reported rather than treated as an error.
  double training_frame_accuracy = 0.0;
};

/// Trains the identifier on frame-level timbral vectors labeled by speaker.
/// Throws InsufficientSpeakers (< 2) and NoAcceptedFrames naming any
/// speaker whose audio yields no accepted frame.
SpeakerModel train_identifier(const Corpus& corpus, const TimbreExtractor& ex,
                              const FramingConfig& framing,
                              const DspConfig& dsp, const ForestConfig& cfg);

/// Low-level fit over precomputed per-class frame vectors; the experiment
/// harness uses this to reuse cached features across runs.
ClassifierModel fit_frame_classifier(
    const std::vector<std::vector<TimbralVector>>& frames_per_class,
    const ForestConfig& cfg);

struct FrameDecision {
  std::size_t class_index = 0;
  std::string label;
  ProbabilityVector probabilities;
};

/// Argmax of the classifier's probabilities; ties go to the lowest class
/// index.
FrameDecision identify_frame(const SpeakerModel& model,
                             const TimbralVector& tv);

/// Column sums of the per-frame probability matrix. Deliberately left
/// unnormalized; the argmax is unaffected by the missing 1/n.
std::vector<double> aggregate(const ProbabilityMatrix& m);

std::size_t argmax_index(const std::vector<double>& scores);

struct StreamDecision {
  std::size_t class_index = 0;
  std::string label;
  std::vector<double> scores;  // aggregated column sums
  std::size_t frames_used = 0;
};

/// Stream-level identification: per-frame probabilities, aggregated, argmax.
/// Throws NoAcceptedFrames when the stream has no accepted frame.
StreamDecision identify_stream(const SpeakerModel& model,
                               const AudioStream& stream);

/// Trains the binary verifier on target (class 1) vs impostor (class 0)
/// frames. Throws NoAcceptedFrames naming the empty side.
VerifierModel train_verifier(const std::vector<AudioStream>& target,
                             const std::vector<AudioStream>& impostors,
                             const TimbreExtractor& ex,
                             const FramingConfig& framing, const DspConfig& dsp,
                             const ForestConfig& cfg,
                             std::string target_label = "target");

struct VerifyDecision {
  bool accept = false;
  double score = 0.0;  // mean per-frame target probability
  std::size_t frames_used = 0;
};

/// Mean target probability over accepted frames; accept when the score
/// reaches the model threshold (>=).
VerifyDecision verify_stream(const VerifierModel& model,
                             const AudioStream& stream);

// Model containers: forest format plus label table, embedded extractor and
// the pipeline-config fingerprint.
void save_speaker_model(const SpeakerModel& model, const std::string& path);
SpeakerModel load_speaker_model(const std::string& path);
void save_verifier_model(const VerifierModel& model, const std::string& path);
VerifierModel load_verifier_model(const std::string& path);

}  // namespace timbreid

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
//
// timbreid: lightweight CPU speaker identification and verification from
// timbral speech properties. Subcommands cover the whole pipeline: surrogate
// data synthesis, timbre-regressor training, enrollment, identification,
// verification, and the evaluation harness.

#include <charconv>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "timbreid/config.hpp"
#include "timbreid/error.hpp"
#include "timbreid/eval.hpp"
#include "timbreid/recognition.hpp"
#include "timbreid/synth.hpp"
#include "timbreid/timbre.hpp"

namespace {

using namespace timbreid;

constexpr int kExitAccept = 0;
constexpr int kExitReject = 1;
constexpr int kExitError = 2;

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

PipelineConfig config_or_default(const std::string& path) {
  if (path.empty()) return PipelineConfig{};
  return load_pipeline_config(path);
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(static_cast<std::size_t>(
        std::stoull(text.substr(pos, comma - pos))));
    pos = comma + 1;
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (std::size_t v : parse_size_list(text)) {
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

void warn_on_convention(const std::string& model_convention) {
  if (model_convention != kFeatureConvention) {
    std::cerr << "warning: VersionMismatch: model feature convention '"
              << model_convention << "' differs from this build's '"
              << kFeatureConvention << "'\n";
  }
}

int cmd_synth_data(std::uint64_t seed, std::size_t rows, double noise_sd,
                   const std::string& out_dir) {
  const TimbreDataset ds = synth_timbre_dataset(seed, rows, noise_sd);
  save_timbre_dataset(ds, out_dir);
  std::cout << "wrote " << ds.rows.size() << " rows under " << out_dir << "\n";
  return kExitAccept;
}

int cmd_synth_corpus(std::uint64_t seed, std::size_t speakers,
                     std::size_t streams, double stream_seconds,
                     const std::string& out_dir) {
  SpeakerCorpusSpec spec;
  spec.n_speakers = speakers;
  spec.streams_per_speaker = streams;
  spec.stream_seconds = stream_seconds;
  const Corpus corpus = synth_speaker_corpus(seed, spec);
  save_corpus_dir(corpus, out_dir);
  std::cout << "wrote " << corpus.speakers.size() << " speakers x " << streams
            << " streams under " << out_dir << "\n";
  return kExitAccept;
}

int cmd_train_timbre(const std::string& dataset, const std::string& config,
                     std::uint64_t seed, bool seed_given,
                     const std::string& out) {
  PipelineConfig cfg = config_or_default(config);
  if (seed_given) cfg.regressor_forest.rng_seed = seed;
  const TimbreDataset ds = load_timbre_dataset(dataset);
  const TimbreExtractor ex =
      train_timbre_regressors(ds, cfg.framing, cfg.dsp, cfg.regressor_forest);
  save_timbre_extractor(ex, out);
  std::cout << "trained 7 regressors on " << ds.rows.size()
            << " rows -> " << out << "\n";
  return kExitAccept;
}

int cmd_enroll(const std::string& corpus_dir, const std::string& timbre_model,
               const std::string& config, std::uint64_t seed, bool seed_given,
               const std::string& out) {
  PipelineConfig cfg = config_or_default(config);
  if (seed_given) cfg.classifier_forest.rng_seed = seed;
  const TimbreExtractor ex = load_timbre_extractor(timbre_model);
  warn_on_convention(ex.feature_convention);
  const Corpus corpus = load_corpus_dir(corpus_dir);
  const SpeakerModel model = train_identifier(corpus, ex, cfg.framing, cfg.dsp,
                                              cfg.classifier_forest);
  save_speaker_model(model, out);
  std::cout << "enrolled " << model.labels.size() << " speakers -> " << out
            << "\n";
  return kExitAccept;
}

int cmd_enroll_verifier(const std::string& corpus_dir,
                        const std::string& target,
                        const std::string& timbre_model,
                        const std::string& config, std::uint64_t seed,
                        bool seed_given, double threshold,
                        const std::string& out) {
  PipelineConfig cfg = config_or_default(config);
  if (seed_given) cfg.classifier_forest.rng_seed = seed;
  const TimbreExtractor ex = load_timbre_extractor(timbre_model);
  warn_on_convention(ex.feature_convention);
  const Corpus corpus = load_corpus_dir(corpus_dir);

  std::vector<AudioStream> target_streams, impostor_streams;
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    auto& side =
        corpus.speakers[s] == target ? target_streams : impostor_streams;
    side.insert(side.end(), corpus.streams[s].begin(),
                corpus.streams[s].end());
  }
  if (target_streams.empty()) {
    throw CorpusTooSmall("no speaker named '" + target + "' in " + corpus_dir);
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("--threshold must lie in [0, 1]");
  }
  VerifierModel model =
      train_verifier(target_streams, impostor_streams, ex, cfg.framing,
                     cfg.dsp, cfg.classifier_forest, target);
  model.threshold = threshold;
  save_verifier_model(model, out);
  if (model.training_frame_accuracy < 0.6) {
    std::cerr << "warning: training frame accuracy "
              << fmt(model.training_frame_accuracy)
              << " is near chance; target and impostors may be "
                 "indistinguishable\n";
  }
  std::cout << "verifier for '" << target << "' -> " << out << "\n";
  return kExitAccept;
}

int cmd_identify(const std::string& model_path, const std::string& audio,
                 bool per_frame) {
  const SpeakerModel model = load_speaker_model(model_path);
  warn_on_convention(model.classifier.feature_convention);
  const AudioStream stream = read_wav(audio);

  if (per_frame) {
    const auto tvs = stream_timbral_vectors(stream, model.extractor,
                                            model.framing, model.dsp);
    if (tvs.empty()) throw NoAcceptedFrames("no non-silent frames in " + audio);
    for (std::size_t i = 0; i < tvs.size(); ++i) {
      const FrameDecision d = identify_frame(model, tvs[i]);
      std::cout << "frame " << i << ": " << d.label;
      for (double p : d.probabilities) std::cout << ' ' << fmt(p);
      std::cout << "\n";
    }
  }
  const StreamDecision d = identify_stream(model, stream);
  std::cout << "label: " << d.label << "\n";
  std::cout << "scores:";
  for (std::size_t i = 0; i < d.scores.size(); ++i) {
    std::cout << ' ' << model.labels[i] << '=' << fmt(d.scores[i]);
  }
  std::cout << "\n";
  std::cout << "frames_used: " << d.frames_used << "\n";
  return kExitAccept;
}

int cmd_verify(const std::string& model_path, const std::string& audio,
               double threshold, bool threshold_given) {
  VerifierModel model = load_verifier_model(model_path);
  warn_on_convention(model.classifier.feature_convention);
  if (threshold_given) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
      throw ConfigError("--threshold must lie in [0, 1]");
    }
    model.threshold = threshold;
  }
  const AudioStream stream = read_wav(audio);
  const VerifyDecision d = verify_stream(model, stream);
  std::cout << (d.accept ? "accept" : "reject") << "\n";
  std::cout << "score: " << fmt(d.score) << "\n";
  std::cout << "frames_used: " << d.frames_used << "\n";
  return d.accept ? kExitAccept : kExitReject;
}

int cmd_evaluate(const std::string& corpus_dir, const std::string& mode,
                 const std::string& timbre_model, const std::string& config,
                 const std::string& populations, const std::string& targets,
                 const std::string& seeds, double split,
                 const std::string& scoring, const std::string& out_dir) {
  const PipelineConfig cfg = config_or_default(config);
  const TimbreExtractor ex = load_timbre_extractor(timbre_model);
  warn_on_convention(ex.feature_convention);
  const Corpus corpus = load_corpus_dir(corpus_dir);

  ExperimentConfig exp;
  exp.train_fraction = split;
  exp.seeds = parse_seed_list(seeds);
  if (exp.seeds.empty()) throw ConfigError("--seeds must name at least one");

  EvalReport report;
  if (mode == "identify") {
    if (populations.empty()) {
      throw ConfigError("--populations is required for --mode identify");
    }
    exp.population_sizes = parse_size_list(populations);
    report = run_identification_experiment(corpus, ex, cfg.framing, cfg.dsp,
                                           cfg.classifier_forest, exp);
  } else if (mode == "verify") {
    if (!targets.empty()) {
      std::stringstream ss(targets);
      std::string t;
      while (std::getline(ss, t, ',')) exp.targets.push_back(t);
    }
    if (scoring == "ovr") {
      exp.scoring = VerificationScoring::kOneVsRest;
    } else if (scoring != "binary") {
      throw ConfigError("--scoring must be 'binary' or 'ovr'");
    }
    report = run_verification_experiment(corpus, ex, cfg.framing, cfg.dsp,
                                         cfg.classifier_forest, exp);
  } else {
    throw ConfigError("--mode must be 'identify' or 'verify'");
  }
  emit_report(report, out_dir);
  std::cout << "report written to " << out_dir << "\n";
  return kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "timbreid - speaker identification and verification from timbral "
      "speech properties"};
  app.require_subcommand(1);

  // synth-data
  auto* synth_data = app.add_subcommand(
      "synth-data", "Generate the surrogate timbre dataset (WAVs + CSV)");
  std::uint64_t sd_seed = 1;
  std::size_t sd_rows = 400;
  double sd_noise = 2.0;
  std::string sd_out;
  synth_data->add_option("--seed", sd_seed, "RNG seed")->capture_default_str();
  synth_data->add_option("--rows", sd_rows, "number of rows")
      ->capture_default_str();
  synth_data->add_option("--noise-sd", sd_noise, "label noise stddev")
      ->capture_default_str();
  synth_data->add_option("--out", sd_out, "output directory")->required();

  // synth-corpus
  auto* synth_corpus = app.add_subcommand(
      "synth-corpus", "Generate a synthetic speaker corpus (dir per speaker)");
  std::uint64_t sc_seed = 1;
  std::size_t sc_speakers = 5;
  std::size_t sc_streams = 10;
  double sc_seconds = 2.0;
  std::string sc_out;
  synth_corpus->add_option("--seed", sc_seed, "RNG seed")
      ->capture_default_str();
  synth_corpus->add_option("--speakers", sc_speakers, "number of speakers")
      ->capture_default_str();
  synth_corpus->add_option("--streams", sc_streams, "streams per speaker")
      ->capture_default_str();
  synth_corpus
      ->add_option("--stream-seconds", sc_seconds, "seconds per stream")
      ->capture_default_str();
  synth_corpus->add_option("--out", sc_out, "output directory")->required();

  // train-timbre
  auto* train_timbre = app.add_subcommand(
      "train-timbre", "Train the seven timbral regressors from a dataset CSV");
  std::string tt_dataset, tt_config, tt_out;
  std::uint64_t tt_seed = 0;
  train_timbre->add_option("--dataset", tt_dataset, "dataset CSV")->required();
  train_timbre->add_option("--config", tt_config, "pipeline config JSON");
  auto* tt_seed_opt =
      train_timbre->add_option("--seed", tt_seed, "override regressor seed");
  train_timbre->add_option("--out", tt_out, "output model path")->required();

  // enroll
  auto* enroll = app.add_subcommand(
      "enroll", "Train a speaker-identification model from a corpus dir");
  std::string en_corpus, en_timbre, en_config, en_out;
  std::uint64_t en_seed = 0;
  enroll->add_option("--corpus", en_corpus, "dir with one subdir per speaker")
      ->required();
  enroll->add_option("--timbre-model", en_timbre, "trained timbre extractor")
      ->required();
  enroll->add_option("--config", en_config, "pipeline config JSON");
  auto* en_seed_opt =
      enroll->add_option("--seed", en_seed, "override classifier seed");
  enroll->add_option("--out", en_out, "output model path")->required();

  // enroll-verifier
  auto* enroll_verifier = app.add_subcommand(
      "enroll-verifier",
      "Train a target-vs-rest verification model from a corpus dir");
  std::string ev2_corpus, ev2_target, ev2_timbre, ev2_config, ev2_out;
  std::uint64_t ev2_seed = 0;
  double ev2_threshold = 0.5;
  enroll_verifier
      ->add_option("--corpus", ev2_corpus, "dir with one subdir per speaker")
      ->required();
  enroll_verifier->add_option("--target", ev2_target, "target speaker name")
      ->required();
  enroll_verifier
      ->add_option("--timbre-model", ev2_timbre, "trained timbre extractor")
      ->required();
  enroll_verifier->add_option("--config", ev2_config, "pipeline config JSON");
  auto* ev2_seed_opt = enroll_verifier->add_option(
      "--seed", ev2_seed, "override classifier seed");
  enroll_verifier
      ->add_option("--threshold", ev2_threshold, "stored decision threshold")
      ->capture_default_str();
  enroll_verifier->add_option("--out", ev2_out, "output model path")
      ->required();

  // identify
  auto* identify = app.add_subcommand(
      "identify", "Identify the speaker of a WAV stream");
  std::string id_model, id_audio;
  bool id_per_frame = false;
  identify->add_option("--model", id_model, "speaker model")->required();
  identify->add_option("--audio", id_audio, "input WAV")->required();
  identify->add_flag("--per-frame", id_per_frame,
                     "also print per-frame decisions");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Verify a WAV stream against a target model");
  std::string vf_model, vf_audio;
  double vf_threshold = 0.5;
  verify->add_option("--model", vf_model, "verifier model")->required();
  verify->add_option("--audio", vf_audio, "input WAV")->required();
  auto* vf_threshold_opt =
      verify->add_option("--threshold", vf_threshold, "decision threshold")
          ->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "Run the identification/verification evaluation harness");
  std::string ev_corpus, ev_mode, ev_timbre, ev_config, ev_populations,
      ev_targets, ev_out;
  std::string ev_seeds = "1";
  double ev_split = 0.7;
  evaluate->add_option("--corpus", ev_corpus, "corpus directory")->required();
  evaluate->add_option("--mode", ev_mode, "identify or verify")->required();
  evaluate
      ->add_option("--timbre-model", ev_timbre, "trained timbre extractor")
      ->required();
  evaluate->add_option("--config", ev_config, "pipeline config JSON");
  evaluate->add_option("--populations", ev_populations,
                       "comma-separated population sizes (identify mode)");
  evaluate->add_option("--targets", ev_targets,
                       "comma-separated targets (verify mode; default all)");
  evaluate->add_option("--seeds", ev_seeds, "comma-separated seeds")
      ->capture_default_str();
  evaluate->add_option("--split", ev_split, "train fraction of streams")
      ->capture_default_str();
  std::string ev_scoring = "binary";
  evaluate
      ->add_option("--scoring", ev_scoring,
                   "verify-mode stream scoring: binary (per-target forest) "
                   "or ovr (one-vs-rest from the multiclass model)")
      ->capture_default_str();
  evaluate->add_option("--out", ev_out, "report output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_data->parsed()) {
      return cmd_synth_data(sd_seed, sd_rows, sd_noise, sd_out);
    }
    if (synth_corpus->parsed()) {
      return cmd_synth_corpus(sc_seed, sc_speakers, sc_streams, sc_seconds,
                              sc_out);
    }
    if (train_timbre->parsed()) {
      return cmd_train_timbre(tt_dataset, tt_config, tt_seed,
                              tt_seed_opt->count() > 0, tt_out);
    }
    if (enroll->parsed()) {
      return cmd_enroll(en_corpus, en_timbre, en_config, en_seed,
                        en_seed_opt->count() > 0, en_out);
    }
    if (enroll_verifier->parsed()) {
      return cmd_enroll_verifier(ev2_corpus, ev2_target, ev2_timbre,
                                 ev2_config, ev2_seed,
                                 ev2_seed_opt->count() > 0, ev2_threshold,
                                 ev2_out);
    }
    if (identify->parsed()) {
      return cmd_identify(id_model, id_audio, id_per_frame);
    }
    if (verify->parsed()) {
      return cmd_verify(vf_model, vf_audio, vf_threshold,
                        vf_threshold_opt->count() > 0);
    }
    if (evaluate->parsed()) {
      return cmd_evaluate(ev_corpus, ev_mode, ev_timbre, ev_config,
                          ev_populations, ev_targets, ev_seeds, ev_split,
                          ev_scoring, ev_out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

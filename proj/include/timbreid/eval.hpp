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
#include <string>
#include <vector>

#include "timbreid/recognition.hpp"

namespace timbreid {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
};

/// (tp + tn) / total. Throws EmptyCounts when all four counts are zero.
double accuracy(const ConfusionCounts& c);

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Threshold sweep over unique scores descending, tied scores grouped.
/// Points run from (fpr 0, tpr 0) at threshold +inf to (1, 1) at the lowest
/// score; both rates are non-decreasing along the curve.
struct RocCurve {
  std::vector<RocPoint> points;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
};

/// Builds the ROC for scores with boolean labels (nonzero = positive).
/// A sample is predicted positive when score >= threshold. Throws
/// SingleClassLabels unless both classes are present.
RocCurve roc_curve(const std::vector<double>& scores,
                   const std::vector<int>& labels);

/// Trapezoidal area under the curve over fpr.
double auc(const RocCurve& curve);

/// The operating point where fpr == 1 - tpr, linearly interpolated between
/// the bracketing curve points.
RocPoint eer_point(const RocCurve& curve);

/// The common error rate at that point, in [0, 1].
double eer(const RocCurve& curve);

/// Spearman rank correlation with average ranks for ties. Defined as 0 when
/// either input is constant (a flat trend counts as non-increasing).
double spearman_rho(const std::vector<double>& xs,
                    const std::vector<double>& ys);

/// Coefficient of determination of predictions against observations.
double r_squared(const std::vector<double>& y_true,
                 const std::vector<double>& y_pred);

struct PopulationResult {
  std::size_t population = 0;
  std::vector<double> per_seed_accuracy;
  double mean_accuracy = 0.0;
  std::size_t skipped_streams = 0;  // test streams with no accepted frame
};

struct TargetResult {
  std::string target;
  std::string error;  // non-empty when this target could not be evaluated
  double stream_accuracy = 0.0;  // mean over seeds, threshold 0.5
  double frame_accuracy = 0.0;
  double auc_value = 0.0;
  double eer_value = 0.0;
  bool degenerate = false;  // training accuracy near chance
  RocCurve roc;             // pooled per-stream scores across seeds
};

/// Self-contained record of one experiment run; re-runnable from the
/// recorded seeds and fingerprint. Wall-clock timings are diagnostics and
/// are emitted to a sidecar file, never into the canonical report.
struct EvalReport {
  std::string experiment;  // "identification" or "verification"
  std::string config_fingerprint;
  std::string scoring;  // verification only: "binary" or "ovr"
  std::vector<std::uint64_t> seeds;
  double train_fraction = 0.7;
  std::vector<PopulationResult> populations;
  std::vector<TargetResult> targets;
  std::vector<std::pair<std::string, double>> timings_ms;
};

/// How verification scores a stream for a target: a dedicated
/// target-vs-rest binary forest, or the per-target probability column of
/// one shared multiclass identification model.
enum class VerificationScoring { kBinary, kOneVsRest };

struct ExperimentConfig {
  std::vector<std::size_t> population_sizes;  // identification
  std::vector<std::string> targets;           // verification; empty = all
  double train_fraction = 0.7;
  std::vector<std::uint64_t> seeds = {1};
  VerificationScoring scoring = VerificationScoring::kBinary;
};

/// For each population size k and seed: sample k speakers, split each
/// speaker's streams train/test at the stream level, train an identifier,
/// and score held-out streams. Speaker subsets are nested per seed so
/// growing the population never swaps out earlier speakers. Throws
/// CorpusTooSmall when k exceeds the corpus or a speaker cannot be split.
EvalReport run_identification_experiment(const Corpus& corpus,
                                         const TimbreExtractor& ex,
                                         const FramingConfig& framing,
                                         const DspConfig& dsp,
                                         const ForestConfig& forest,
                                         const ExperimentConfig& exp);

/// Per target: train target-vs-rest verifiers per seed, score held-out
/// streams, and report stream/frame accuracy at threshold 0.5 plus
/// ROC/AUC/EER over the pooled per-stream scores. Unknown targets and
/// targets with no test stream are recorded as per-target errors.
EvalReport run_verification_experiment(const Corpus& corpus,
                                       const TimbreExtractor& ex,
                                       const FramingConfig& framing,
                                       const DspConfig& dsp,
                                       const ForestConfig& forest,
                                       const ExperimentConfig& exp);

/// Writes report.json (canonical key order), accuracy_vs_population.csv,
/// roc_<target>.csv, an SVG plot per CSV, and timings.txt. Re-emitting the
/// same report yields byte-identical canonical files.
void emit_report(const EvalReport& report, const std::string& out_dir);

}  // namespace timbreid

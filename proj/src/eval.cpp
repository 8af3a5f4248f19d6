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

#include "timbreid/eval.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "timbreid/config.hpp"
#include "timbreid/error.hpp"
#include "timbreid/rng.hpp"

namespace timbreid {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest round-trip decimal form; the one double formatter used in every
// emitted file so reruns are byte-identical.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int precision) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed,
                    precision);
  return std::string(buf, res.ptr);
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

struct StreamSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

StreamSplit split_streams(std::size_t n_streams, double train_fraction,
                          Rng& rng) {
  std::vector<std::size_t> order(n_streams);
  for (std::size_t i = 0; i < n_streams; ++i) order[i] = i;
  rng.shuffle(order);
  auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n_streams)));
  n_train = std::clamp<std::size_t>(n_train, 1, n_streams - 1);
  StreamSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

// Frame timbral vectors for every stream, computed once and reused across
// populations and seeds.
using FrameCache = std::vector<std::vector<std::vector<TimbralVector>>>;

FrameCache build_frame_cache(const Corpus& corpus, const TimbreExtractor& ex,
                             const FramingConfig& framing,
                             const DspConfig& dsp) {
  FrameCache cache(corpus.speakers.size());
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    cache[s].reserve(corpus.streams[s].size());
    for (const AudioStream& stream : corpus.streams[s]) {
      cache[s].push_back(stream_timbral_vectors(stream, ex, framing, dsp));
    }
  }
  return cache;
}

std::vector<double> frame_probability_sums(const ClassifierModel& model,
                                           const std::vector<TimbralVector>& tvs) {
  std::vector<double> sums(model.n_classes, 0.0);
  for (const TimbralVector& tv : tvs) {
    const auto p = predict_proba(model, tv.as_vector());
    for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += p[i];
  }
  return sums;
}

nlohmann::json roc_to_json(const RocCurve& curve) {
  nlohmann::json points = nlohmann::json::array();
  for (const RocPoint& p : curve.points) {
    nlohmann::json threshold;
    if (std::isinf(p.threshold)) {
      threshold = p.threshold > 0 ? "inf" : "-inf";
    } else {
      threshold = p.threshold;
    }
    points.push_back(nlohmann::json::array({threshold, p.fpr, p.tpr}));
  }
  return nlohmann::json{{"n_positive", curve.n_positive},
                        {"n_negative", curve.n_negative},
                        {"points", std::move(points)}};
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("write failure on " + path.string());
}

// Minimal line plot: one polyline over labeled axes. Enough to eyeball the
// accuracy and ROC shapes without pulling in a plotting stack.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<std::pair<double, double>>& pts,
                          double x_min, double x_max, double y_min,
                          double y_max) {
  const double width = 640.0, height = 480.0;
  const double ml = 64.0, mr = 24.0, mt = 40.0, mb = 56.0;
  const auto sx = [&](double x) {
    return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr);
  };
  const auto sy = [&](double y) {
    return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"480\" viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";
  // axes
  svg += "<line x1=\"" + format_fixed(ml, 2) + "\" y1=\"" +
         format_fixed(mt, 2) + "\" x2=\"" + format_fixed(ml, 2) + "\" y2=\"" +
         format_fixed(height - mb, 2) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_fixed(ml, 2) + "\" y1=\"" +
         format_fixed(height - mb, 2) + "\" x2=\"" +
         format_fixed(width - mr, 2) + "\" y2=\"" +
         format_fixed(height - mb, 2) + "\" stroke=\"black\"/>\n";
  // axis labels and extrema ticks
  svg += "<text x=\"320\" y=\"470\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"13\">" + x_label +
         "</text>\n";
  svg += "<text x=\"16\" y=\"240\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 16 240)\">" + y_label + "</text>\n";
  svg += "<text x=\"" + format_fixed(ml, 2) + "\" y=\"" +
         format_fixed(height - mb + 18.0, 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + format_double(x_min) + "</text>\n";
  svg += "<text x=\"" + format_fixed(width - mr, 2) + "\" y=\"" +
         format_fixed(height - mb + 18.0, 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + format_double(x_max) + "</text>\n";
  svg += "<text x=\"" + format_fixed(ml - 8.0, 2) + "\" y=\"" +
         format_fixed(height - mb + 4.0, 2) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + format_double(y_min) + "</text>\n";
  svg += "<text x=\"" + format_fixed(ml - 8.0, 2) + "\" y=\"" +
         format_fixed(mt + 4.0, 2) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">" + format_double(y_max) + "</text>\n";

  svg += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\" "
         "points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i != 0) svg += ' ';
    svg += format_fixed(sx(pts[i].first), 2) + "," +
           format_fixed(sy(pts[i].second), 2);
  }
  svg += "\"/>\n</svg>\n";
  return svg;
}

}  // namespace

double accuracy(const ConfusionCounts& c) {
  const std::uint64_t total = c.tp + c.tn + c.fp + c.fn;
  if (total == 0) throw EmptyCounts("confusion counts are all zero");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

RocCurve roc_curve(const std::vector<double>& scores,
                   const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatch("scores and labels differ in length");
  }
  RocCurve curve;
  for (int l : labels) (l ? curve.n_positive : curve.n_negative)++;
  if (curve.n_positive == 0 || curve.n_negative == 0) {
    throw SingleClassLabels("ROC needs both positive and negative samples");
  }

  std::vector<std::pair<double, int>> ordered(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ordered[i] = {scores[i], labels[i] ? 1 : 0};
  }
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  curve.points.push_back({kInf, 0.0, 0.0});
  std::size_t cum_tp = 0, cum_fp = 0, i = 0;
  while (i < ordered.size()) {
    const double s = ordered[i].first;
    // Equal scores move across the threshold together.
    while (i < ordered.size() && ordered[i].first == s) {
      (ordered[i].second ? cum_tp : cum_fp)++;
      ++i;
    }
    curve.points.push_back(
        {s, static_cast<double>(cum_tp) / static_cast<double>(curve.n_positive),
         static_cast<double>(cum_fp) / static_cast<double>(curve.n_negative)});
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

RocPoint eer_point(const RocCurve& curve) {
  const auto crossing = [](const RocPoint& p) { return p.fpr + p.tpr - 1.0; };
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const double f = crossing(curve.points[i]);
    if (f < 0.0) continue;
    if (f == 0.0 || i == 0) return curve.points[i];
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    const double denom = (b.fpr - a.fpr) + (b.tpr - a.tpr);
    const double s = (1.0 - a.fpr - a.tpr) / denom;
    RocPoint p;
    p.threshold = std::isinf(a.threshold)
                      ? b.threshold
                      : a.threshold + s * (b.threshold - a.threshold);
    p.fpr = a.fpr + s * (b.fpr - a.fpr);
    p.tpr = a.tpr + s * (b.tpr - a.tpr);
    return p;
  }
  return curve.points.back();  // unreachable for a well-formed curve
}

double eer(const RocCurve& curve) {
  const RocPoint p = eer_point(curve);
  return (p.fpr + (1.0 - p.tpr)) / 2.0;
}

double spearman_rho(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  const auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double r_squared(const std::vector<double>& y_true,
                 const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw DimensionMismatch("r_squared inputs differ in length");
  }
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

EvalReport run_identification_experiment(const Corpus& corpus,
                                         const TimbreExtractor& ex,
                                         const FramingConfig& framing,
                                         const DspConfig& dsp,
                                         const ForestConfig& forest,
                                         const ExperimentConfig& exp) {
  Stopwatch total;
  EvalReport report;
  report.experiment = "identification";
  report.config_fingerprint = pipeline_fingerprint(framing, dsp);
  report.seeds = exp.seeds;
  report.train_fraction = exp.train_fraction;

  Stopwatch features;
  const FrameCache cache = build_frame_cache(corpus, ex, framing, dsp);
  report.timings_ms.emplace_back("feature_extraction", features.ms());

  std::vector<std::size_t> sizes;  // deduplicated, first occurrence wins
  for (std::size_t k : exp.population_sizes) {
    if (k < 2 || k > corpus.speakers.size()) {
      throw CorpusTooSmall("population " + std::to_string(k) +
                           " not satisfiable with " +
                           std::to_string(corpus.speakers.size()) +
                           " speakers");
    }
    if (std::find(sizes.begin(), sizes.end(), k) == sizes.end()) {
      sizes.push_back(k);
    }
  }

  std::map<std::size_t, PopulationResult> results;
  for (std::size_t k : sizes) results[k].population = k;

  Stopwatch runs;
  for (std::uint64_t seed : exp.seeds) {
    // One speaker order per seed; populations take nested prefixes of it.
    std::vector<std::size_t> order(corpus.speakers.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng order_rng(derive_seed(seed, 0));
    order_rng.shuffle(order);

    std::vector<StreamSplit> splits(corpus.speakers.size());
    for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
      if (corpus.streams[s].size() < 2) {
        throw CorpusTooSmall("speaker '" + corpus.speakers[s] +
                             "' has fewer than 2 streams to split");
      }
      Rng split_rng(derive_seed(seed, 1 + s));
      splits[s] = split_streams(corpus.streams[s].size(), exp.train_fraction,
                                split_rng);
    }

    for (std::size_t k : sizes) {
      std::vector<std::size_t> subset(order.begin(),
                                      order.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(subset.begin(), subset.end());

      std::vector<std::vector<TimbralVector>> train_frames(k);
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t s = subset[c];
        for (std::size_t stream_idx : splits[s].train) {
          const auto& tvs = cache[s][stream_idx];
          train_frames[c].insert(train_frames[c].end(), tvs.begin(), tvs.end());
        }
        if (train_frames[c].empty()) {
          throw NoAcceptedFrames("speaker '" + corpus.speakers[s] +
                                 "' has no non-silent training frames");
        }
      }
      ForestConfig run_cfg = forest;
      run_cfg.rng_seed = forest.rng_seed ^ derive_seed(seed, 0x1000 + k);
      const ClassifierModel model = fit_frame_classifier(train_frames, run_cfg);

      std::size_t correct = 0, scored = 0, skipped = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t s = subset[c];
        for (std::size_t stream_idx : splits[s].test) {
          const auto& tvs = cache[s][stream_idx];
          if (tvs.empty()) {
            ++skipped;
            continue;
          }
          const auto sums = frame_probability_sums(model, tvs);
          correct += argmax_index(sums) == c ? 1 : 0;
          ++scored;
        }
      }
      PopulationResult& r = results[k];
      r.per_seed_accuracy.push_back(
          scored == 0 ? 0.0
                      : static_cast<double>(correct) / static_cast<double>(scored));
      r.skipped_streams += skipped;
    }
  }
  report.timings_ms.emplace_back("train_and_score", runs.ms());

  for (std::size_t k : sizes) {
    PopulationResult& r = results[k];
    double mean = 0.0;
    for (double a : r.per_seed_accuracy) mean += a;
    r.mean_accuracy = r.per_seed_accuracy.empty()
                          ? 0.0
                          : mean / static_cast<double>(r.per_seed_accuracy.size());
    report.populations.push_back(r);
  }
  report.timings_ms.emplace_back("total", total.ms());
  return report;
}

namespace {

// Shared per-seed state for one-vs-rest scoring: one multiclass model over
// every speaker, with per-frame probability vectors cached for each test
// stream.
struct OvrSeedScores {
  bool ok = false;
  std::string error;
  std::vector<StreamSplit> splits;
  // [speaker][test-stream position][frame] -> probability vector
  std::vector<std::vector<std::vector<ProbabilityVector>>> frame_probas;
};

OvrSeedScores build_ovr_seed(const Corpus& corpus, const FrameCache& cache,
                             const ForestConfig& forest, double train_fraction,
                             std::uint64_t seed) {
  OvrSeedScores out;
  out.splits.resize(corpus.speakers.size());
  std::vector<std::vector<TimbralVector>> train_frames(corpus.speakers.size());
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    if (corpus.streams[s].size() < 2) {
      out.error = "CorpusTooSmall: speaker '" + corpus.speakers[s] +
                  "' has fewer than 2 streams";
      return out;
    }
    Rng split_rng(derive_seed(seed, 1 + s));
    out.splits[s] =
        split_streams(corpus.streams[s].size(), train_fraction, split_rng);
    for (std::size_t stream_idx : out.splits[s].train) {
      const auto& tvs = cache[s][stream_idx];
      train_frames[s].insert(train_frames[s].end(), tvs.begin(), tvs.end());
    }
    if (train_frames[s].empty()) {
      out.error = "NoAcceptedFrames: speaker '" + corpus.speakers[s] +
                  "' has no non-silent training frames";
      return out;
    }
  }
  ForestConfig run_cfg = forest;
  run_cfg.rng_seed = forest.rng_seed ^ derive_seed(seed, 0x3000);
  const ClassifierModel model = fit_frame_classifier(train_frames, run_cfg);

  out.frame_probas.resize(corpus.speakers.size());
  for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
    for (std::size_t stream_idx : out.splits[s].test) {
      std::vector<ProbabilityVector> probas;
      for (const TimbralVector& tv : cache[s][stream_idx]) {
        probas.push_back(predict_proba(model, tv.as_vector()));
      }
      out.frame_probas[s].push_back(std::move(probas));
    }
  }
  out.ok = true;
  return out;
}

}  // namespace

EvalReport run_verification_experiment(const Corpus& corpus,
                                       const TimbreExtractor& ex,
                                       const FramingConfig& framing,
                                       const DspConfig& dsp,
                                       const ForestConfig& forest,
                                       const ExperimentConfig& exp) {
  Stopwatch total;
  const bool ovr = exp.scoring == VerificationScoring::kOneVsRest;
  EvalReport report;
  report.experiment = "verification";
  report.config_fingerprint = pipeline_fingerprint(framing, dsp);
  report.scoring = ovr ? "ovr" : "binary";
  report.seeds = exp.seeds;
  report.train_fraction = exp.train_fraction;

  Stopwatch features;
  const FrameCache cache = build_frame_cache(corpus, ex, framing, dsp);
  report.timings_ms.emplace_back("feature_extraction", features.ms());

  std::vector<std::string> targets =
      exp.targets.empty() ? corpus.speakers : exp.targets;

  // The shared identification model per seed, when one-vs-rest is asked for.
  std::vector<OvrSeedScores> ovr_seeds;
  if (ovr) {
    for (std::uint64_t seed : exp.seeds) {
      ovr_seeds.push_back(
          build_ovr_seed(corpus, cache, forest, exp.train_fraction, seed));
    }
  }

  Stopwatch runs;
  for (const std::string& target : targets) {
    if (ovr) {
      TargetResult result;
      result.target = target;
      const auto it =
          std::find(corpus.speakers.begin(), corpus.speakers.end(), target);
      if (it == corpus.speakers.end()) {
        result.error = "CorpusTooSmall: no speaker named '" + target + "'";
        report.targets.push_back(std::move(result));
        continue;
      }
      const auto target_idx =
          static_cast<std::size_t>(it - corpus.speakers.begin());

      std::vector<double> stream_scores;
      std::vector<int> stream_labels;
      double stream_acc_sum = 0.0, frame_acc_sum = 0.0;
      std::size_t usable_seeds = 0;
      std::string error;
      for (const OvrSeedScores& seed_scores : ovr_seeds) {
        if (!seed_scores.ok) {
          error = seed_scores.error;
          break;
        }
        std::size_t stream_correct = 0, stream_total = 0;
        std::size_t frame_correct = 0, frame_total = 0;
        std::size_t positive_streams = 0;
        for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
          const bool is_target = s == target_idx;
          for (const auto& probas : seed_scores.frame_probas[s]) {
            if (probas.empty()) continue;
            double sum = 0.0;
            for (const ProbabilityVector& p : probas) {
              sum += p[target_idx];
              frame_correct += (p[target_idx] >= 0.5) == is_target ? 1 : 0;
              ++frame_total;
            }
            const double score = sum / static_cast<double>(probas.size());
            stream_scores.push_back(score);
            stream_labels.push_back(is_target ? 1 : 0);
            stream_correct += (score >= 0.5) == is_target ? 1 : 0;
            ++stream_total;
            positive_streams += is_target ? 1 : 0;
          }
        }
        if (positive_streams == 0) {
          error = "no test streams for target '" + target + "'";
          break;
        }
        stream_acc_sum += static_cast<double>(stream_correct) /
                          static_cast<double>(stream_total);
        frame_acc_sum += static_cast<double>(frame_correct) /
                         static_cast<double>(frame_total);
        ++usable_seeds;
      }
      if (!error.empty() || usable_seeds == 0) {
        result.error = error.empty() ? "no usable seeds" : error;
        report.targets.push_back(std::move(result));
        continue;
      }
      result.stream_accuracy =
          stream_acc_sum / static_cast<double>(usable_seeds);
      result.frame_accuracy = frame_acc_sum / static_cast<double>(usable_seeds);
      // Degeneracy is a property of the binary training pair; the shared
      // multiclass model has no equivalent, so the flag stays false.
      result.roc = roc_curve(stream_scores, stream_labels);
      result.auc_value = auc(result.roc);
      result.eer_value = eer(result.roc);
      report.targets.push_back(std::move(result));
      continue;
    }
    TargetResult result;
    result.target = target;

    const auto it =
        std::find(corpus.speakers.begin(), corpus.speakers.end(), target);
    if (it == corpus.speakers.end()) {
      result.error = "CorpusTooSmall: no speaker named '" + target + "'";
      report.targets.push_back(std::move(result));
      continue;
    }
    const auto target_idx =
        static_cast<std::size_t>(it - corpus.speakers.begin());

    std::vector<double> stream_scores;
    std::vector<int> stream_labels;
    double stream_acc_sum = 0.0, frame_acc_sum = 0.0, train_acc_sum = 0.0;
    std::size_t usable_seeds = 0;
    std::string error;

    for (std::uint64_t seed : exp.seeds) {
      std::vector<StreamSplit> splits(corpus.speakers.size());
      bool splittable = true;
      for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
        if (corpus.streams[s].size() < 2) {
          splittable = false;
          break;
        }
        Rng split_rng(derive_seed(seed, 1 + s));
        splits[s] = split_streams(corpus.streams[s].size(),
                                  exp.train_fraction, split_rng);
      }
      if (!splittable) {
        error = "CorpusTooSmall: a speaker has fewer than 2 streams";
        break;
      }

      std::vector<std::vector<TimbralVector>> sides(2);
      for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
        auto& side = sides[s == target_idx ? 1 : 0];
        for (std::size_t stream_idx : splits[s].train) {
          const auto& tvs = cache[s][stream_idx];
          side.insert(side.end(), tvs.begin(), tvs.end());
        }
      }
      if (sides[1].empty() || sides[0].empty()) {
        error = "NoAcceptedFrames: empty training side for '" + target + "'";
        break;
      }

      ForestConfig run_cfg = forest;
      run_cfg.rng_seed =
          forest.rng_seed ^ derive_seed(seed, 0x2000 + target_idx);
      const ClassifierModel model = fit_frame_classifier(sides, run_cfg);

      std::size_t train_correct = 0, train_total = 0;
      for (int side = 0; side < 2; ++side) {
        for (const TimbralVector& tv : sides[side]) {
          const auto p = predict_proba(model, tv.as_vector());
          train_correct += (p[1] >= 0.5) == (side == 1) ? 1 : 0;
          ++train_total;
        }
      }

      std::size_t stream_correct = 0, stream_total = 0;
      std::size_t frame_correct = 0, frame_total = 0;
      std::size_t positive_streams = 0;
      for (std::size_t s = 0; s < corpus.speakers.size(); ++s) {
        const bool is_target = s == target_idx;
        for (std::size_t stream_idx : splits[s].test) {
          const auto& tvs = cache[s][stream_idx];
          if (tvs.empty()) continue;
          double sum = 0.0;
          for (const TimbralVector& tv : tvs) {
            const double p = predict_proba(model, tv.as_vector())[1];
            sum += p;
            frame_correct += (p >= 0.5) == is_target ? 1 : 0;
            ++frame_total;
          }
          const double score = sum / static_cast<double>(tvs.size());
          stream_scores.push_back(score);
          stream_labels.push_back(is_target ? 1 : 0);
          stream_correct += (score >= 0.5) == is_target ? 1 : 0;
          ++stream_total;
          positive_streams += is_target ? 1 : 0;
        }
      }
      if (positive_streams == 0) {
        error = "no test streams for target '" + target + "'";
        break;
      }

      stream_acc_sum += static_cast<double>(stream_correct) /
                        static_cast<double>(stream_total);
      frame_acc_sum +=
          static_cast<double>(frame_correct) / static_cast<double>(frame_total);
      train_acc_sum += static_cast<double>(train_correct) /
                       static_cast<double>(train_total);
      ++usable_seeds;
    }

    if (!error.empty() || usable_seeds == 0) {
      result.error = error.empty() ? "no usable seeds" : error;
      report.targets.push_back(std::move(result));
      continue;
    }

    result.stream_accuracy = stream_acc_sum / static_cast<double>(usable_seeds);
    result.frame_accuracy = frame_acc_sum / static_cast<double>(usable_seeds);
    result.degenerate =
        train_acc_sum / static_cast<double>(usable_seeds) < 0.6;
    result.roc = roc_curve(stream_scores, stream_labels);
    result.auc_value = auc(result.roc);
    result.eer_value = eer(result.roc);
    report.targets.push_back(std::move(result));
  }
  report.timings_ms.emplace_back("train_and_score", runs.ms());
  report.timings_ms.emplace_back("total", total.ms());
  return report;
}

void emit_report(const EvalReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  nlohmann::json j{{"experiment", report.experiment},
                   {"config_fingerprint", report.config_fingerprint},
                   {"seeds", report.seeds},
                   {"train_fraction", report.train_fraction}};
  if (!report.scoring.empty()) j["scoring"] = report.scoring;
  j["populations"] = nlohmann::json::array();
  for (const PopulationResult& p : report.populations) {
    j["populations"].push_back(
        nlohmann::json{{"population", p.population},
                       {"mean_accuracy", p.mean_accuracy},
                       {"per_seed_accuracy", p.per_seed_accuracy},
                       {"skipped_streams", p.skipped_streams}});
  }
  j["targets"] = nlohmann::json::array();
  for (const TargetResult& t : report.targets) {
    nlohmann::json tj{{"target", t.target}, {"error", t.error}};
    if (t.error.empty()) {
      tj["stream_accuracy"] = t.stream_accuracy;
      tj["frame_accuracy"] = t.frame_accuracy;
      tj["auc"] = t.auc_value;
      tj["eer"] = t.eer_value;
      tj["degenerate"] = t.degenerate;
      tj["roc"] = roc_to_json(t.roc);
    }
    j["targets"].push_back(std::move(tj));
  }
  write_text_file(fs::path(out_dir) / "report.json", j.dump(2) + "\n");

  if (!report.populations.empty()) {
    std::string csv = "population,mean_accuracy";
    for (std::size_t i = 0; i < report.seeds.size(); ++i) {
      csv += ",accuracy_seed_" + std::to_string(i);
    }
    csv += '\n';
    std::vector<std::pair<double, double>> pts;
    for (const PopulationResult& p : report.populations) {
      csv += std::to_string(p.population) + "," +
             format_double(p.mean_accuracy);
      for (double a : p.per_seed_accuracy) csv += "," + format_double(a);
      csv += '\n';
      pts.emplace_back(static_cast<double>(p.population), p.mean_accuracy);
    }
    write_text_file(fs::path(out_dir) / "accuracy_vs_population.csv", csv);
    write_text_file(
        fs::path(out_dir) / "accuracy_vs_population.svg",
        line_plot_svg("identification accuracy vs population", "population",
                      "accuracy", pts, pts.front().first, pts.back().first,
                      0.0, 1.0));
  }

  for (const TargetResult& t : report.targets) {
    if (!t.error.empty()) continue;
    std::string csv = "threshold,fpr,tpr\n";
    std::vector<std::pair<double, double>> pts;
    for (const RocPoint& p : t.roc.points) {
      csv += format_double(p.threshold) + "," + format_double(p.fpr) + "," +
             format_double(p.tpr) + '\n';
      pts.emplace_back(p.fpr, p.tpr);
    }
    write_text_file(fs::path(out_dir) / ("roc_" + t.target + ".csv"), csv);
    write_text_file(fs::path(out_dir) / ("roc_" + t.target + ".svg"),
                    line_plot_svg("ROC for " + t.target, "false positive rate",
                                  "true positive rate", pts, 0.0, 1.0, 0.0,
                                  1.0));
  }

  // Diagnostics only; excluded from the byte-identical rerun contract.
  std::string timings;
  for (const auto& [name, ms] : report.timings_ms) {
    timings += name + "\t" + format_fixed(ms, 3) + " ms\n";
  }
  write_text_file(fs::path(out_dir) / "timings.txt", timings);
}

}  // namespace timbreid

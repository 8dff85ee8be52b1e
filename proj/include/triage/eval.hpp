#pragma once
// Classification metrics, ROC/AUC, percentile-bootstrap confidence
// intervals, learning curves and grid tuning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/error.hpp"
#include "triage/rng.hpp"

namespace triage {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Metrics with the 0/0 -> 0 convention; each flag marks a value that hit it.
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

namespace detail {

inline void check_pairs(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::LengthMismatch, "inputs differ in length");
  if (a == 0) throw Error(ErrorCode::EmptyInput, "no examples");
}

}  // namespace detail

inline ConfusionMatrix confusion_matrix(std::span<const int> labels,
                                        std::span<const int> predictions) {
  detail::check_pairs(labels.size(), predictions.size());
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool y = labels[i] != 0;
    const bool p = predictions[i] != 0;
    if (y && p) ++cm.tp;
    else if (!y && p) ++cm.fp;
    else if (!y && !p) ++cm.tn;
    else ++cm.fn;
  }
  return cm;
}

inline Metrics classification_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::EmptyInput, "empty confusion matrix");
  Metrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  if (cm.tp + cm.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  }
  if (cm.tp + cm.fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  }
  // Harmonic mean of p = tp/(tp+fp) and r = tp/(tp+fn), reduced to counts
  // so it is rounded once rather than built from rounded p and r.
  if (cm.tp == 0) {
    m.f1_undefined = true;
  } else {
    m.f1 = static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn);
  }
  return m;
}

inline double accuracy(std::span<const int> labels, std::span<const int> predictions) {
  return classification_metrics(confusion_matrix(labels, predictions)).accuracy;
}

/// Positive iff score > threshold.
inline std::vector<int> threshold_scores(std::span<const double> scores, double threshold) {
  std::vector<int> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
  return out;
}

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  std::vector<double> thresholds;  // score at which each point is reached; +inf first
};

struct RocResult {
  RocCurve curve;
  double auc = 0.0;
};

/// One curve step per distinct score (ties grouped), so the trapezoidal area
/// equals the Mann-Whitney statistic with ties counted one half.
inline RocResult roc_and_auc(std::span<const int> labels, std::span<const double> scores) {
  detail::check_pairs(labels.size(), scores.size());
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(scores[i])) throw Error(ErrorCode::InvalidArgument, "NaN score");
    if (labels[i] != 0) ++n_pos;
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(ErrorCode::SingleClass, "ROC needs both classes");

  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocResult r;
  r.curve.fpr.push_back(0.0);
  r.curve.tpr.push_back(0.0);
  r.curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0;
  std::size_t fp = 0;
  double area2 = 0.0;  // twice the area, in count units
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    const std::size_t tp0 = tp;
    const std::size_t fp0 = fp;
    while (i < order.size() && scores[order[i]] == s) {
      labels[order[i]] != 0 ? ++tp : ++fp;
      ++i;
    }
    area2 += static_cast<double>(fp - fp0) * static_cast<double>(tp + tp0);
    r.curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
    r.curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
    r.curve.thresholds.push_back(s);
  }
  r.auc = area2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return r;
}

enum class MetricKind { Accuracy, Precision, Recall, F1, Auc };

inline const char* to_string(MetricKind k) {
  switch (k) {
    case MetricKind::Accuracy: return "accuracy";
    case MetricKind::Precision: return "precision";
    case MetricKind::Recall: return "recall";
    case MetricKind::F1: return "f1";
    case MetricKind::Auc: return "auc";
  }
  return "?";
}

struct ConfidenceInterval {
  double low = std::numeric_limits<double>::quiet_NaN();
  double high = std::numeric_limits<double>::quiet_NaN();
  std::size_t defined_replicates = 0;
};

namespace detail {

// Metric value on (labels, scores); NaN when the sample leaves it undefined.
inline double metric_value(std::span<const int> labels, std::span<const double> scores,
                           MetricKind kind, double threshold) {
  if (kind == MetricKind::Auc) {
    const bool has_pos = std::find_if(labels.begin(), labels.end(), [](int y) { return y != 0; }) !=
                         labels.end();
    const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
    if (!has_pos || !has_neg) return std::numeric_limits<double>::quiet_NaN();
    return roc_and_auc(labels, scores).auc;
  }
  const auto preds = threshold_scores(scores, threshold);
  const auto m = classification_metrics(confusion_matrix(labels, preds));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  switch (kind) {
    case MetricKind::Accuracy: return m.accuracy;
    case MetricKind::Precision: return m.precision_undefined ? nan : m.precision;
    case MetricKind::Recall: return m.recall_undefined ? nan : m.recall;
    case MetricKind::F1: return m.f1_undefined ? nan : m.f1;
    case MetricKind::Auc: break;
  }
  return nan;
}

// Linear interpolation between order statistics of sorted data.
inline double percentile(const std::vector<double>& sorted, double q) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Percentile 95% interval over `replicates` seeded resamples (with
/// replacement) of the (label, output) pairs. Outputs are scores; threshold
/// metrics call an output positive iff it exceeds `threshold`, so 0/1
/// predictions work with the default 0.5. Resamples that leave the metric
/// undefined are skipped.
inline ConfidenceInterval bootstrap_ci(std::span<const int> labels, std::span<const double> outputs,
                                       MetricKind kind, std::size_t replicates,
                                       std::uint64_t seed, double threshold = 0.5) {
  detail::check_pairs(labels.size(), outputs.size());
  if (replicates < 100) throw Error(ErrorCode::InvalidArgument, "need at least 100 replicates");
  Rng rng(seed);
  const auto n = labels.size();
  std::vector<int> ys(n);
  std::vector<double> xs(n);
  std::vector<double> values;
  values.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_index(n));
      ys[i] = labels[j];
      xs[i] = outputs[j];
    }
    const double v = detail::metric_value(ys, xs, kind, threshold);
    if (!std::isnan(v)) values.push_back(v);
  }
  ConfidenceInterval ci;
  ci.defined_replicates = values.size();
  if (values.empty()) return ci;
  std::sort(values.begin(), values.end());
  ci.low = detail::percentile(values, 0.025);
  ci.high = detail::percentile(values, 0.975);
  return ci;
}

struct EvalReport {
  std::size_t n = 0;
  double threshold = 0.0;
  ConfusionMatrix confusion;
  Metrics metrics;
  double auc = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, ConfidenceInterval> confidence_intervals;
  std::size_t bootstrap_replicates = 0;
  std::uint64_t seed = 0;
};

/// Point metrics, AUC and a 95% interval per metric. Each interval is
/// widened to include its point estimate if the percentiles miss it. AUC is
/// NaN when the labels hold one class.
inline EvalReport evaluate_scores(std::span<const int> labels, std::span<const double> scores,
                                  double threshold, std::size_t replicates, std::uint64_t seed) {
  detail::check_pairs(labels.size(), scores.size());
  EvalReport rep;
  rep.n = labels.size();
  rep.threshold = threshold;
  rep.bootstrap_replicates = replicates;
  rep.seed = seed;
  rep.confusion = confusion_matrix(labels, threshold_scores(scores, threshold));
  rep.metrics = classification_metrics(rep.confusion);
  rep.auc = detail::metric_value(labels, scores, MetricKind::Auc, threshold);

  const std::pair<MetricKind, double> points[] = {
      {MetricKind::Accuracy, rep.metrics.accuracy},
      {MetricKind::Precision, rep.metrics.precision},
      {MetricKind::Recall, rep.metrics.recall},
      {MetricKind::F1, rep.metrics.f1},
      {MetricKind::Auc, rep.auc},
  };
  for (std::size_t k = 0; k < std::size(points); ++k) {
    const auto [kind, point] = points[k];
    // Distinct stream per metric, fixed by position.
    auto ci = bootstrap_ci(labels, scores, kind, replicates, seed + k, threshold);
    if (!std::isnan(ci.low) && !std::isnan(point)) {
      ci.low = std::min(ci.low, point);
      ci.high = std::max(ci.high, point);
    }
    rep.confidence_intervals[to_string(kind)] = ci;
  }
  return rep;
}

struct LearningCurvePoint {
  std::size_t training_size = 0;
  double accuracy = 0.0;
};

struct LearningCurve {
  std::vector<LearningCurvePoint> points;
};

/// For each size, trains on that prefix of one seeded shuffle of the training
/// split and scores accuracy on the evaluation split. Prefixes are nested.
///
/// `trainer(const LabeledSet& train, const LabeledSet& eval)` returns 0/1
/// predictions for `eval`.
template <typename Trainer>
LearningCurve learning_curve(const Split& split, std::span<const std::size_t> sizes,
                             Trainer&& trainer, std::uint64_t seed) {
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sizes must be positive and strictly increasing");
    }
    if (sizes[i] > split.train.size()) {
      throw Error(ErrorCode::SizeExceedsTrainSet,
                  "size " + std::to_string(sizes[i]) + " exceeds training set of " +
                      std::to_string(split.train.size()));
    }
  }
  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  const auto eval_labels = split.eval.labels();
  LearningCurve curve;
  for (const auto size : sizes) {
    LabeledSet subset;
    subset.task = split.train.task;
    subset.examples.reserve(size);
    for (std::size_t i = 0; i < size; ++i) subset.examples.push_back(split.train.examples[order[i]]);
    const std::vector<int> preds = trainer(static_cast<const LabeledSet&>(subset), split.eval);
    curve.points.push_back({size, accuracy(eval_labels, preds)});
  }
  return curve;
}

template <typename Config>
struct TuneResult {
  Config best;
  std::size_t best_index = 0;
  double best_accuracy = 0.0;
  std::vector<double> accuracies;  // per config, input order
};

/// Trains one model per config and keeps the best tuning accuracy; ties go
/// to the earliest config.
///
/// `trainer(const Config&, const LabeledSet& train, const LabeledSet& tune)`
/// returns 0/1 predictions for `tune`.
template <typename Config, typename Trainer>
TuneResult<Config> grid_tune(const LabeledSet& train, const LabeledSet& tune,
                             std::span<const Config> configs, Trainer&& trainer) {
  if (configs.empty()) throw Error(ErrorCode::EmptyGrid, "no configurations to tune");
  const auto tune_labels = tune.labels();
  TuneResult<Config> result{configs.front(), 0, -1.0, {}};
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::vector<int> preds = trainer(configs[i], train, tune);
    const double acc = accuracy(tune_labels, preds);
    result.accuracies.push_back(acc);
    if (acc > result.best_accuracy) {
      result.best_accuracy = acc;
      result.best_index = i;
      result.best = configs[i];
    }
  }
  return result;
}

}  // namespace triage

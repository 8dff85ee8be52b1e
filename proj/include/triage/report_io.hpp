#pragma once
// Report JSON and curve CSV writers.

#include <charconv>
#include <cmath>
#include <string>

#include "json.hpp"
#include "triage/corpus.hpp"
#include "triage/eval.hpp"

namespace triage {

/// Shortest round-trip decimal; "inf"/"-inf"/"nan" for non-finite values.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace detail {

inline nlohmann::ordered_json number_or_null(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

}  // namespace detail

inline nlohmann::ordered_json report_json(const EvalReport& r, const std::string& model_kind,
                                          Task task) {
  nlohmann::ordered_json j;
  j["model_kind"] = model_kind;
  j["task"] = to_string(task);
  j["n"] = r.n;
  j["threshold"] = r.threshold;
  j["confusion"] = {{"tp", r.confusion.tp},
                    {"fp", r.confusion.fp},
                    {"tn", r.confusion.tn},
                    {"fn", r.confusion.fn}};
  j["accuracy"] = r.metrics.accuracy;
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["f1"] = r.metrics.f1;
  j["auc"] = detail::number_or_null(r.auc);
  j["degenerate"] = {{"precision", r.metrics.precision_undefined},
                     {"recall", r.metrics.recall_undefined},
                     {"f1", r.metrics.f1_undefined}};
  nlohmann::ordered_json cis;
  for (const char* name : {"accuracy", "precision", "recall", "f1", "auc"}) {
    const auto it = r.confidence_intervals.find(name);
    if (it == r.confidence_intervals.end()) continue;
    cis[name] = {{"level", 0.95},
                 {"low", detail::number_or_null(it->second.low)},
                 {"high", detail::number_or_null(it->second.high)},
                 {"defined_replicates", it->second.defined_replicates}};
  }
  j["confidence_intervals"] = std::move(cis);
  j["bootstrap_replicates"] = r.bootstrap_replicates;
  j["seed"] = r.seed;
  return j;
}

inline nlohmann::ordered_json stats_json(const StatsReport& s) {
  const auto pair = [](const FieldCount& c) {
    return nlohmann::ordered_json{{"positive", c.positive}, {"negative", c.negative}};
  };
  nlohmann::ordered_json j;
  j["total"] = s.total;
  j["original"] = {{"penetrance", pair(s.penetrance)},
                   {"prevalence", pair(s.prevalence)},
                   {"polymorphism", pair(s.polymorphism)},
                   {"ambiguous_penetrance", pair(s.ambiguous_penetrance)},
                   {"ambiguous_prevalence", pair(s.ambiguous_prevalence)}};
  j["after_exclusion"] = {{"penetrance", pair(s.penetrance_after_exclusion)},
                          {"prevalence", pair(s.prevalence_after_exclusion)}};
  return j;
}

inline std::string roc_csv(const RocCurve& c) {
  std::string out = "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < c.fpr.size(); ++i) {
    out += format_double(c.thresholds[i]) + "," + format_double(c.fpr[i]) + "," +
           format_double(c.tpr[i]) + "\n";
  }
  return out;
}

inline std::string learning_curve_csv(const LearningCurve& c) {
  std::string out = "size,accuracy\n";
  for (const auto& p : c.points) {
    out += std::to_string(p.training_size) + "," + format_double(p.accuracy) + "\n";
  }
  return out;
}

}  // namespace triage

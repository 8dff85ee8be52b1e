#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "triage/eval.hpp"
#include "triage/rng.hpp"

using namespace triage;
using Catch::Matchers::WithinAbs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

LabeledSet labeled(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  LabeledSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.examples.push_back({Paper(std::to_string(i), "t", "a"), rng.bernoulli(0.4)});
  }
  return s;
}

}  // namespace

TEST_CASE("confusion_matrix", "[eval]") {
  CHECK(confusion_matrix(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 0, 1}) ==
        ConfusionMatrix{1, 1, 1, 1});
  const std::vector<int> y{1, 0, 1, 1, 0};
  const auto cm = confusion_matrix(y, y);
  CHECK(cm.fp == 0);
  CHECK(cm.fn == 0);
  CHECK(code_of([] { confusion_matrix({}, {}); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { confusion_matrix(std::vector<int>{1}, std::vector<int>{1, 0}); }) ==
        ErrorCode::LengthMismatch);
}

TEST_CASE("classification_metrics", "[eval]") {
  const auto m = classification_metrics({1, 1, 2, 0});
  CHECK(m.precision == 0.5);
  CHECK(m.recall == 1.0);
  CHECK(m.f1 == 2.0 / 3.0);
  CHECK(m.accuracy == 0.75);

  const auto none = classification_metrics({0, 0, 3, 2});
  CHECK(none.precision == 0.0);
  CHECK(none.precision_undefined);
  CHECK(none.f1_undefined);
  CHECK_FALSE(none.recall_undefined);

  const auto perfect = classification_metrics({5, 0, 5, 0});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
  CHECK_FALSE(perfect.f1_undefined);
}

TEST_CASE("F1 is the harmonic mean of precision and recall", "[eval][property]") {
  Rng rng(6);
  for (int trial = 0; trial < 10000; ++trial) {
    const ConfusionMatrix cm{rng.uniform_index(50), rng.uniform_index(50), rng.uniform_index(50),
                             rng.uniform_index(50)};
    if (cm.total() == 0) continue;
    const auto m = classification_metrics(cm);
    if (m.precision_undefined || m.recall_undefined || cm.tp == 0) {
      CHECK(m.f1 == 0.0);
      continue;
    }
    const double h = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    CHECK(std::abs(m.f1 - h) <= 4 * std::numeric_limits<double>::epsilon() * h);
    CHECK(m.f1 == static_cast<double>(2 * cm.tp) / static_cast<double>(2 * cm.tp + cm.fp + cm.fn));
  }
}

TEST_CASE("roc_and_auc examples", "[eval]") {
  CHECK(roc_and_auc(std::vector<int>{1, 1, 0, 0}, std::vector<double>{0.9, 0.8, 0.4, 0.3}).auc == 1.0);
  CHECK(roc_and_auc(std::vector<int>{1, 1, 0, 0}, std::vector<double>{0.9, 0.4, 0.8, 0.3}).auc == 0.75);
  const auto flat = roc_and_auc(std::vector<int>{1, 0, 1, 0}, std::vector<double>{0.2, 0.2, 0.2, 0.2});
  CHECK(flat.auc == 0.5);
  CHECK(flat.curve.fpr == std::vector<double>{0.0, 1.0});
  CHECK(flat.curve.tpr == std::vector<double>{0.0, 1.0});
  CHECK(std::isinf(flat.curve.thresholds.front()));
  CHECK(code_of([] { roc_and_auc(std::vector<int>{1, 1}, std::vector<double>{0.1, 0.2}); }) ==
        ErrorCode::SingleClass);
}

TEST_CASE("AUC equals tie-corrected pair counting", "[eval][property]") {
  Rng rng(42);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(199);
    std::vector<int> y(n);
    std::vector<double> s(n);
    const bool coarse = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.3) ? 1 : 0;
      s[i] = coarse ? static_cast<double>(rng.uniform_index(6)) : rng.normal();
    }
    y[0] = 1;
    y[1] = 0;
    const auto r = roc_and_auc(y, s);
    CHECK_THAT(r.auc, WithinAbs(oracle::auc_pairs(y, s), 1e-10));
    CHECK(r.curve.fpr.front() == 0.0);
    CHECK(r.curve.tpr.front() == 0.0);
    CHECK(r.curve.fpr.back() == 1.0);
    CHECK(r.curve.tpr.back() == 1.0);
    for (std::size_t k = 1; k < r.curve.fpr.size(); ++k) {
      CHECK(r.curve.fpr[k] >= r.curve.fpr[k - 1]);
      CHECK(r.curve.tpr[k] >= r.curve.tpr[k - 1]);
      CHECK(r.curve.thresholds[k] < r.curve.thresholds[k - 1]);
    }
  }
}

TEST_CASE("bootstrap_ci", "[eval]") {
  const std::vector<int> y{1, 0, 1, 1, 0, 0, 1, 0};
  const std::vector<double> perfect{1, 0, 1, 1, 0, 0, 1, 0};
  const auto ci = bootstrap_ci(y, perfect, MetricKind::Accuracy, 200, 3);
  CHECK(ci.low == 1.0);
  CHECK(ci.high == 1.0);
  CHECK(ci.defined_replicates == 200);

  const std::vector<double> noisy{1, 1, 0, 1, 0, 0, 1, 1};
  const auto a = bootstrap_ci(y, noisy, MetricKind::F1, 500, 9);
  const auto b = bootstrap_ci(y, noisy, MetricKind::F1, 500, 9);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  CHECK(a.low <= a.high);

  // Single-class resamples drop out of AUC only.
  const std::vector<int> rare{1, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  const std::vector<double> rs{0.9, 0.1, 0.2, 0.3, 0.1, 0.2, 0.5, 0.4, 0.3, 0.2};
  CHECK(bootstrap_ci(rare, rs, MetricKind::Auc, 300, 1).defined_replicates < 300);
  CHECK(bootstrap_ci(rare, rs, MetricKind::Accuracy, 300, 1).defined_replicates == 300);

  CHECK(code_of([&] { bootstrap_ci(y, noisy, MetricKind::Accuracy, 99, 1); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([] { bootstrap_ci({}, {}, MetricKind::Accuracy, 100, 1); }) == ErrorCode::EmptyInput);
}

TEST_CASE("bootstrap intervals narrow with more data", "[eval][property]") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    double width[2];
    for (int k = 0; k < 2; ++k) {
      const std::size_t n = k == 0 ? 100 : 1000;
      Rng rng(seed * 31 + static_cast<std::uint64_t>(k));
      std::vector<int> y(n);
      std::vector<double> pred(n);
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = rng.bernoulli(0.4);
        pred[i] = rng.bernoulli(0.85) ? y[i] : 1 - y[i];
      }
      const auto ci = bootstrap_ci(y, pred, MetricKind::Accuracy, 1000, seed);
      width[k] = ci.high - ci.low;
    }
    CHECK(width[1] < width[0]);
  }
}

TEST_CASE("evaluate_scores intervals contain their point estimates", "[eval][property]") {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng.uniform_index(200);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.3);
      s[i] = y[i] + rng.normal();
    }
    const auto rep = evaluate_scores(y, s, 0.5, 200, static_cast<std::uint64_t>(trial));
    const std::pair<const char*, double> points[] = {{"accuracy", rep.metrics.accuracy},
                                                     {"precision", rep.metrics.precision},
                                                     {"recall", rep.metrics.recall},
                                                     {"f1", rep.metrics.f1},
                                                     {"auc", rep.auc}};
    for (const auto& [name, value] : points) {
      const auto& ci = rep.confidence_intervals.at(name);
      if (std::isnan(ci.low) || std::isnan(value)) continue;
      CHECK(ci.low <= value);
      CHECK(value <= ci.high);
    }
  }
}

TEST_CASE("learning_curve", "[eval]") {
  Split split;
  split.train = labeled(5, 1);
  split.eval = labeled(4, 2);
  const auto majority = [](const LabeledSet& train, const LabeledSet& eval) {
    const int guess = 2 * train.positives() >= train.size() ? 1 : 0;
    return std::vector<int>(eval.size(), guess);
  };
  CHECK(code_of([&] {
          learning_curve(split, std::vector<std::size_t>{10}, majority, 1);
        }) == ErrorCode::SizeExceedsTrainSet);
  CHECK(code_of([&] {
          learning_curve(split, std::vector<std::size_t>{3, 3}, majority, 1);
        }) == ErrorCode::InvalidArgument);

  // Prefixes are nested.
  std::vector<std::vector<std::string>> seen;
  const auto record = [&](const LabeledSet& train, const LabeledSet& eval) {
    std::vector<std::string> ids;
    for (const auto& e : train.examples) ids.push_back(e.paper.pmid);
    seen.push_back(ids);
    return std::vector<int>(eval.size(), 0);
  };
  const auto curve = learning_curve(split, std::vector<std::size_t>{1, 3, 5}, record, 4);
  REQUIRE(seen.size() == 3);
  CHECK(std::equal(seen[0].begin(), seen[0].end(), seen[1].begin()));
  CHECK(std::equal(seen[1].begin(), seen[1].end(), seen[2].begin()));
  CHECK(curve.points[2].training_size == 5);
}

TEST_CASE("grid_tune", "[eval]") {
  const auto train = labeled(10, 1);
  const auto tune = labeled(10, 2);
  const auto labels = tune.labels();
  // Config k gets the first k tuning labels wrong.
  const auto trainer = [&](const int& k, const LabeledSet&, const LabeledSet&) {
    auto out = labels;
    for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = 1 - out[static_cast<std::size_t>(i)];
    return out;
  };
  const std::vector<int> configs{3, 1, 2, 1};
  const auto r = grid_tune<int>(train, tune, configs, trainer);
  CHECK(r.best == 1);
  CHECK(r.best_index == 1);
  CHECK(r.best_accuracy == 0.9);
  CHECK(r.accuracies == std::vector<double>{0.7, 0.9, 0.8, 0.9});
  CHECK(code_of([&] { grid_tune<int>(train, tune, std::vector<int>{}, trainer); }) ==
        ErrorCode::EmptyGrid);
}

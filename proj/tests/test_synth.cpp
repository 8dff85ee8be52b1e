#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "triage/pipeline.hpp"
#include "triage/synth.hpp"

using namespace triage;

namespace {

bool contains_any(const std::string& text, const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    if (text.find(p) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("background words are distinct", "[synth]") {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 20000; ++i) CHECK(seen.insert(background_word(i)).second);
}

TEST_CASE("noiseless corpus labels follow planted signals", "[synth]") {
  SynthSpec spec;
  spec.num_docs = 100;
  spec.seed = 5;
  const auto corpus = generate_synthetic(spec);
  REQUIRE(corpus.dataset.size() == 100);
  std::size_t positives = 0;
  for (const auto& e : corpus.dataset.entries()) {
    const auto& a = e.annotation;
    CHECK_FALSE(a.polymorphism);
    CHECK_FALSE(a.ambiguous_penetrance);
    CHECK_FALSE(a.ambiguous_prevalence);
    CHECK_FALSE(a.prevalence);
    const bool pos_signal = contains_any(e.paper.abstract, spec.positive_signals);
    const bool neg_signal = contains_any(e.paper.abstract, spec.negative_signals);
    CHECK(pos_signal != neg_signal);
    CHECK(a.penetrance == pos_signal);
    positives += a.penetrance;
  }
  CHECK(positives > 0);
  CHECK(positives < 100);
}

TEST_CASE("the prevalence task labels the prevalence field", "[synth]") {
  SynthSpec spec;
  spec.num_docs = 30;
  spec.task = Task::Prevalence;
  const auto corpus = generate_synthetic(spec);
  for (std::size_t i = 0; i < corpus.dataset.size(); ++i) {
    const auto& a = corpus.dataset.entries()[i].annotation;
    CHECK_FALSE(a.penetrance);
    CHECK(a.prevalence == corpus.true_labels[i]);
  }
}

TEST_CASE("label noise flips a bounded, reproducible subset", "[synth]") {
  SynthSpec spec;
  spec.num_docs = 100;
  spec.label_noise = 0.1;
  spec.seed = 19;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  const auto flips = std::count(a.flipped.begin(), a.flipped.end(), true);
  CHECK(flips >= 4);
  CHECK(flips <= 16);
  CHECK(a.flipped == b.flipped);
  for (std::size_t i = 0; i < a.dataset.size(); ++i) {
    CHECK(a.dataset.entries()[i].annotation.penetrance == (a.true_labels[i] != a.flipped[i]));
  }
}

TEST_CASE("empty and invalid specs", "[synth]") {
  SynthSpec spec;
  spec.num_docs = 0;
  CHECK(generate_synthetic_corpus(spec).empty());
  spec.negative_signals.push_back(spec.positive_signals.front());
  CHECK_THROWS_AS(generate_synthetic_corpus(spec), Error);
  SynthSpec lengths;
  lengths.doc_length_min = 10;
  lengths.doc_length_max = 5;
  CHECK_THROWS_AS(generate_synthetic_corpus(lengths), Error);
}

TEST_CASE("identical specs serialize to identical bytes", "[synth]") {
  SynthSpec spec;
  spec.num_docs = 300;
  spec.label_noise = 0.1;
  spec.seed = 8;
  const auto a = serialize_jsonl(generate_synthetic_corpus(spec));
  const auto b = serialize_jsonl(generate_synthetic_corpus(spec));
  CHECK(a == b);
  spec.seed = 9;
  CHECK(serialize_jsonl(generate_synthetic_corpus(spec)) != a);
}

TEST_CASE("noiseless corpus with two signals is linearly separable", "[synth][svm]") {
  SynthSpec spec;
  spec.num_docs = 300;
  spec.signals_min = 2;
  spec.signals_max = 3;
  spec.seed = 23;
  const auto set = filter_for_task(generate_synthetic_corpus(spec), Task::Penetrance);
  SvmConfig config;
  config.C = 100.0;
  const auto clf = fit_svm_classifier(set, config, FeatureConfig{{1, 1}, 1});
  CHECK(accuracy(set.labels(), predict_papers(clf, set)) == 1.0);
}

TEST_CASE("more training data does not hurt the SVM", "[synth][eval]") {
  SynthSpec spec;
  spec.num_docs = 3334;
  spec.label_noise = 0.1;
  spec.seed = 2;
  const auto set = filter_for_task(generate_synthetic_corpus(spec), Task::Penetrance);
  const auto split = split_dataset(set, SplitRatios{}, 2);
  REQUIRE(split.train.size() == 2000);
  const std::vector<std::size_t> sizes{200, 2000};
  const auto curve = learning_curve(
      split, sizes,
      [](const LabeledSet& train, const LabeledSet& eval) {
        return predict_papers(fit_svm_classifier(train, SvmConfig{}), eval);
      },
      2);
  CHECK(curve.points[1].accuracy >= curve.points[0].accuracy - 0.02);
}

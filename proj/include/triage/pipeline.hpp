#pragma once
// Paper-level classifiers: the tf-idf + linear SVM route and the CNN route,
// both fit on a training LabeledSet and scored per Paper.

#include <span>
#include <vector>

#include "triage/cnn.hpp"
#include "triage/corpus.hpp"
#include "triage/eval.hpp"
#include "triage/svm.hpp"
#include "triage/textfeat.hpp"

namespace triage {

inline TokenList paper_tokens(const Paper& paper) { return tokenize(paper.text()); }

inline std::vector<TokenList> paper_tokens(const LabeledSet& set) {
  std::vector<TokenList> out;
  out.reserve(set.size());
  for (const auto& e : set.examples) out.push_back(paper_tokens(e.paper));
  return out;
}

struct FeatureConfig {
  NgramRange ngrams{1, 2};
  std::size_t min_df = 2;
};

struct SvmClassifier {
  Task task = Task::Penetrance;
  Vocabulary vocabulary;
  LinearModel model;

  double score(const Paper& paper) const {
    return svm_decision(model, vectorize(paper_tokens(paper), vocabulary));
  }
  static constexpr double kThreshold = 0.0;
};

struct CnnClassifier {
  Task task = Task::Penetrance;
  CnnModel model;

  double score(const Paper& paper) const { return cnn_predict(model, paper_tokens(paper)); }
  static constexpr double kThreshold = 0.5;
};

template <typename Classifier>
std::vector<double> score_papers(const Classifier& clf, const LabeledSet& set) {
  std::vector<double> out;
  out.reserve(set.size());
  for (const auto& e : set.examples) out.push_back(clf.score(e.paper));
  return out;
}

template <typename Classifier>
std::vector<int> predict_papers(const Classifier& clf, const LabeledSet& set) {
  return threshold_scores(score_papers(clf, set), Classifier::kThreshold);
}

/// tf-idf features for a training set, fit on that set alone.
struct SvmFeatures {
  Vocabulary vocabulary;
  std::vector<SparseVector> vectors;
  std::vector<int> signed_labels;
};

inline SvmFeatures svm_features(const LabeledSet& train, const FeatureConfig& features) {
  const auto docs = paper_tokens(train);
  SvmFeatures f;
  f.vocabulary = build_vocabulary(docs, features.ngrams, features.min_df);
  f.vectors.reserve(docs.size());
  for (const auto& d : docs) f.vectors.push_back(vectorize(d, f.vocabulary));
  for (const auto& e : train.examples) f.signed_labels.push_back(e.positive ? 1 : -1);
  return f;
}

inline SvmClassifier fit_svm_classifier(const SvmFeatures& features, Task task,
                                        const SvmConfig& config) {
  SvmClassifier clf;
  clf.task = task;
  clf.vocabulary = features.vocabulary;
  clf.model = train_svm(features.vectors, features.signed_labels, config,
                        features.vocabulary.size());
  clf.model.vocabulary_digest = features.vocabulary.digest();
  return clf;
}

inline SvmClassifier fit_svm_classifier(const LabeledSet& train, const SvmConfig& config,
                                        const FeatureConfig& features = {}) {
  return fit_svm_classifier(svm_features(train, features), train.task, config);
}

/// Tries each C on the tuning set; earliest wins ties. Config i trains with
/// seed base.seed + i.
inline TuneResult<SvmConfig> tune_svm(const LabeledSet& train, const LabeledSet& tune,
                                      std::span<const double> c_grid, const SvmConfig& base,
                                      const FeatureConfig& features = {}) {
  std::vector<SvmConfig> configs;
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    SvmConfig cfg = base;
    cfg.C = c_grid[i];
    cfg.seed = base.seed + i;
    configs.push_back(cfg);
  }
  const auto feats = svm_features(train, features);
  return grid_tune<SvmConfig>(train, tune, configs,
                              [&](const SvmConfig& cfg, const LabeledSet& tr, const LabeledSet& tu) {
                                return predict_papers(fit_svm_classifier(feats, tr.task, cfg), tu);
                              });
}

inline CnnFit fit_cnn_for(const LabeledSet& train, const LabeledSet& tune, const CnnConfig& config) {
  const auto docs = paper_tokens(train);
  const auto tune_docs = paper_tokens(tune);
  const auto labels = train.labels();
  const auto tune_labels = tune.labels();
  return fit_cnn(docs, labels, config, tune_docs, tune_labels);
}

inline CnnClassifier fit_cnn_classifier(const LabeledSet& train, const LabeledSet& tune,
                                        const CnnConfig& config) {
  return CnnClassifier{train.task, fit_cnn_for(train, tune, config).model};
}

inline const std::vector<double>& default_c_grid() {
  static const std::vector<double> grid{0.01, 0.1, 1.0, 10.0, 100.0};
  return grid;
}

}  // namespace triage

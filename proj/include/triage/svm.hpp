#pragma once
// L2-regularized L1-hinge linear SVM trained by dual coordinate descent.
//
// The bias is a constant feature of value 1 appended to every example, so it
// is regularized together with the weights:
//
//   P(w, b) = 1/2 (|w|^2 + b^2) + C * sum_i c_i * max(0, 1 - y_i (w.x_i + b))
//
// with c_i = 1 (uniform) or n / (2 n_{y_i}) (balanced). The solver works on
// the box-constrained dual, 0 <= alpha_i <= C c_i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triage/error.hpp"
#include "triage/rng.hpp"
#include "triage/textfeat.hpp"

namespace triage {

enum class ClassWeighting { Uniform, Balanced };

inline const char* to_string(ClassWeighting w) {
  return w == ClassWeighting::Uniform ? "uniform" : "balanced";
}

inline ClassWeighting parse_class_weighting(std::string_view s) {
  if (s == "uniform") return ClassWeighting::Uniform;
  if (s == "balanced") return ClassWeighting::Balanced;
  throw Error(ErrorCode::InvalidArgument, "unknown class weighting '" + std::string(s) + "'");
}

struct SvmConfig {
  double C = 1.0;
  double tolerance = 1e-3;  // on the largest projected-gradient violation
  int max_iterations = 1000;  // epochs
  ClassWeighting class_weighting = ClassWeighting::Uniform;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(C > 0.0) || !std::isfinite(C)) throw Error(ErrorCode::InvalidArgument, "C must be > 0");
    if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be > 0");
    if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be >= 1");
  }
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  SvmConfig config;
  std::uint64_t vocabulary_digest = 0;
};

/// Everything the solver knows at exit, for diagnostics and oracle checks.
struct SvmFit {
  LinearModel model;
  std::vector<double> alpha;
  /// Dual objective in minimization form, 1/2 |w~|^2 - sum(alpha), after
  /// each epoch. Coordinate steps never increase it.
  std::vector<double> epoch_dual_loss;
  int epochs = 0;
  double max_violation = 0.0;
  bool converged = false;
};

namespace detail {

inline void check_svm_inputs(std::span<const SparseVector> vectors, std::span<const int> labels) {
  if (vectors.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "vectors and labels differ in length");
  }
  if (vectors.empty()) throw Error(ErrorCode::EmptyInput, "no training examples");
  for (int y : labels) {
    if (y != 1 && y != -1) throw Error(ErrorCode::InvalidArgument, "labels must be +1 or -1");
  }
}

inline std::vector<double> example_costs(std::span<const int> labels, const SvmConfig& config) {
  const auto n = labels.size();
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const auto n_neg = n - n_pos;
  std::vector<double> costs(n, config.C);
  if (config.class_weighting == ClassWeighting::Balanced) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto n_class = labels[i] == 1 ? n_pos : n_neg;
      costs[i] = config.C * static_cast<double>(n) / (2.0 * static_cast<double>(n_class));
    }
  }
  return costs;
}

}  // namespace detail

/// Exact primal objective (bias regularized, see header comment).
inline double svm_objective(std::span<const double> weights, double bias,
                            std::span<const SparseVector> vectors, std::span<const int> labels,
                            const SvmConfig& config) {
  if (vectors.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "vectors and labels differ in length");
  }
  double reg = bias * bias;
  for (double w : weights) reg += w * w;
  const auto costs = detail::example_costs(labels, config);
  double loss = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const double margin = labels[i] * (vectors[i].dot(weights) + bias);
    loss += costs[i] * std::max(0.0, 1.0 - margin);
  }
  return 0.5 * reg + loss;
}

/// Dual coordinate descent over examples in a seeded random order per epoch.
/// `dimension` defaults to one past the largest index seen.
inline SvmFit fit_svm(std::span<const SparseVector> vectors, std::span<const int> labels,
                      const SvmConfig& config, std::optional<std::size_t> dimension = {}) {
  config.validate();
  detail::check_svm_inputs(vectors, labels);
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass, "training labels have one class");

  std::size_t dim = 0;
  for (const auto& v : vectors) {
    if (!v.indices.empty()) dim = std::max<std::size_t>(dim, v.indices.back() + 1);
  }
  if (dimension) {
    if (*dimension < dim) {
      throw Error(ErrorCode::VocabularyMismatch, "feature index exceeds dimension");
    }
    dim = *dimension;
  }
  const std::uint64_t digest = vectors.front().vocabulary_digest;
  for (const auto& v : vectors) {
    if (v.vocabulary_digest != digest) {
      throw Error(ErrorCode::VocabularyMismatch, "training vectors come from different vocabularies");
    }
  }

  const auto n = vectors.size();
  const auto upper = detail::example_costs(labels, config);
  std::vector<double> qii(n);
  for (std::size_t i = 0; i < n; ++i) qii[i] = vectors[i].squared_norm() + 1.0;

  SvmFit fit;
  fit.alpha.assign(n, 0.0);
  auto& w = fit.model.weights;
  w.assign(dim, 0.0);
  double b = 0.0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(config.seed);

  for (int epoch = 0; epoch < config.max_iterations; ++epoch) {
    rng.shuffle(order);
    double max_violation = 0.0;
    for (const auto i : order) {
      const auto& x = vectors[i];
      const double y = labels[i];
      const double g = y * (x.dot(w) + b) - 1.0;
      double& a = fit.alpha[i];
      double pg = g;
      if (a <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (a >= upper[i]) {
        pg = std::max(g, 0.0);
      }
      max_violation = std::max(max_violation, std::abs(pg));
      if (std::abs(pg) <= 1e-15) continue;
      const double old = a;
      a = std::clamp(old - g / qii[i], 0.0, upper[i]);
      const double step = (a - old) * y;
      if (step == 0.0) continue;
      for (std::size_t k = 0; k < x.indices.size(); ++k) w[x.indices[k]] += step * x.values[k];
      b += step;
    }

    double sq = b * b;
    for (double wi : w) sq += wi * wi;
    double sum_alpha = 0.0;
    for (double a : fit.alpha) sum_alpha += a;
    fit.epoch_dual_loss.push_back(0.5 * sq - sum_alpha);
    fit.epochs = epoch + 1;
    fit.max_violation = max_violation;
    if (max_violation < config.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.model.bias = b;
  fit.model.config = config;
  fit.model.vocabulary_digest = digest;
  return fit;
}

inline LinearModel train_svm(std::span<const SparseVector> vectors, std::span<const int> labels,
                             const SvmConfig& config,
                             std::optional<std::size_t> dimension = {}) {
  return fit_svm(vectors, labels, config, dimension).model;
}

/// w.x + b. Vectors stamped with a different vocabulary, or reaching past
/// the weight vector, are rejected.
inline double svm_decision(const LinearModel& model, const SparseVector& x) {
  if (x.vocabulary_digest != 0 && model.vocabulary_digest != 0 &&
      x.vocabulary_digest != model.vocabulary_digest) {
    throw Error(ErrorCode::VocabularyMismatch, "vector and model use different vocabularies");
  }
  if (!x.indices.empty() && x.indices.back() >= model.weights.size()) {
    throw Error(ErrorCode::VocabularyMismatch, "feature index outside the model");
  }
  return x.dot(model.weights) + model.bias;
}

/// Positive iff the score is strictly above zero.
inline bool svm_predict(const LinearModel& model, const SparseVector& x) {
  return svm_decision(model, x) > 0.0;
}

}  // namespace triage

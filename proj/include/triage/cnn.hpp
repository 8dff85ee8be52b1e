#pragma once
// Convolutional text classifier: learned token embeddings, banks of
// fixed-width filters with ReLU, max-over-time pooling, inverted dropout on
// the pooled features, and one sigmoid output unit trained with binary
// cross-entropy and Adam.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "triage/error.hpp"
#include "triage/rng.hpp"
#include "triage/textfeat.hpp"

namespace triage {

struct CnnConfig {
  int embedding_dim = 64;
  std::vector<int> filter_widths{3, 4, 5};
  int filters_per_width = 32;
  int max_sequence_length = 512;
  double dropout_rate = 0.5;
  double learning_rate = 1e-3;
  int epochs = 30;
  int batch_size = 32;
  std::size_t min_token_df = 2;
  std::uint64_t seed = 0;

  int max_width() const {
    return filter_widths.empty() ? 0 : *std::max_element(filter_widths.begin(), filter_widths.end());
  }

  void validate() const {
    const auto bad = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (embedding_dim < 1) bad("embedding_dim must be positive");
    if (filter_widths.empty()) bad("at least one filter width is required");
    for (int w : filter_widths) {
      if (w < 1) bad("filter widths must be positive");
    }
    if (filters_per_width < 1) bad("filters_per_width must be positive");
    if (max_sequence_length < 1) bad("max_sequence_length must be positive");
    if (max_width() > max_sequence_length) bad("filter width exceeds max_sequence_length");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) bad("dropout_rate must be in [0, 1)");
    if (!(learning_rate > 0.0)) bad("learning_rate must be positive");
    if (epochs < 1) bad("epochs must be positive");
    if (batch_size < 1) bad("batch_size must be positive");
    if (min_token_df < 1) bad("min_token_df must be at least 1");
  }
};

/// Unigram index with 0 reserved for padding and 1 for out-of-vocabulary.
class TokenIndex {
 public:
  static constexpr int kPadding = 0;
  static constexpr int kUnknown = 1;

  TokenIndex() = default;

  /// `tokens` must be sorted and unique; token i gets index i + 2.
  explicit TokenIndex(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (!std::is_sorted(tokens_.begin(), tokens_.end()) ||
        std::adjacent_find(tokens_.begin(), tokens_.end()) != tokens_.end()) {
      throw Error(ErrorCode::InvalidArgument, "token index must be sorted and unique");
    }
    lookup_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      lookup_.emplace(tokens_[i], static_cast<int>(i) + 2);
    }
  }

  int index_of(const std::string& token) const {
    const auto it = lookup_.find(token);
    return it == lookup_.end() ? kUnknown : it->second;
  }

  /// Rows in the embedding table, including padding and OOV.
  std::size_t size() const { return tokens_.size() + 2; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> lookup_;
};

inline TokenIndex build_token_index(std::span<const TokenList> docs, std::size_t min_df) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[std::move(t)];
  }
  std::vector<std::string> kept;
  for (const auto& [token, count] : df) {
    if (count >= min_df) kept.push_back(token);
  }
  return TokenIndex(std::move(kept));
}

struct FilterBank {
  int width = 0;
  std::vector<double> weights;  // filters x width x embedding_dim
  std::vector<double> biases;   // filters
};

/// Trainable tensors. Also used, zero-filled, as a gradient accumulator.
struct CnnParams {
  std::size_t vocab_size = 0;
  std::size_t dim = 0;
  std::vector<double> embeddings;  // vocab_size x dim; row 0 is padding
  std::vector<FilterBank> banks;
  std::vector<double> output_weights;  // one per pooled feature, bank-major
  double output_bias = 0.0;

  std::size_t pooled_size() const { return output_weights.size(); }

  /// Every tensor as a flat span, in a fixed order.
  std::vector<std::span<double>> blocks() {
    std::vector<std::span<double>> out{std::span<double>(embeddings)};
    for (auto& b : banks) {
      out.emplace_back(b.weights);
      out.emplace_back(b.biases);
    }
    out.emplace_back(output_weights);
    out.emplace_back(&output_bias, 1);
    return out;
  }
  std::vector<std::span<const double>> blocks() const {
    auto self = const_cast<CnnParams*>(this)->blocks();
    return {self.begin(), self.end()};
  }

  CnnParams zeros_like() const {
    CnnParams z = *this;
    for (auto block : z.blocks()) std::fill(block.begin(), block.end(), 0.0);
    return z;
  }

  bool all_finite() const {
    for (auto block : blocks()) {
      for (double x : block) {
        if (!std::isfinite(x)) return false;
      }
    }
    return true;
  }
};

struct CnnModel {
  TokenIndex token_index;
  CnnParams params;
  CnnConfig config;
};

/// Fresh parameters: uniform(-0.25, 0.25) embeddings with a zero padding
/// row, Glorot-uniform filters and output weights, zero biases.
inline CnnModel init_cnn(TokenIndex token_index, const CnnConfig& config) {
  config.validate();
  CnnModel m;
  m.config = config;
  m.token_index = std::move(token_index);
  Rng rng(config.seed);
  auto& p = m.params;
  p.vocab_size = m.token_index.size();
  p.dim = static_cast<std::size_t>(config.embedding_dim);
  p.embeddings.assign(p.vocab_size * p.dim, 0.0);
  for (std::size_t i = p.dim; i < p.embeddings.size(); ++i) p.embeddings[i] = rng.uniform(-0.25, 0.25);
  const auto filters = static_cast<std::size_t>(config.filters_per_width);
  for (int w : config.filter_widths) {
    FilterBank bank;
    bank.width = w;
    const auto fan_in = static_cast<double>(w) * static_cast<double>(p.dim);
    const double limit = std::sqrt(6.0 / (fan_in + static_cast<double>(filters)));
    bank.weights.resize(filters * static_cast<std::size_t>(w) * p.dim);
    for (double& x : bank.weights) x = rng.uniform(-limit, limit);
    bank.biases.assign(filters, 0.0);
    p.banks.push_back(std::move(bank));
  }
  const auto pooled = filters * config.filter_widths.size();
  const double limit = std::sqrt(6.0 / (static_cast<double>(pooled) + 1.0));
  p.output_weights.resize(pooled);
  for (double& x : p.output_weights) x = rng.uniform(-limit, limit);
  p.output_bias = 0.0;
  return m;
}

/// Token indices for a document, truncated to max_sequence_length.
inline std::vector<int> encode_tokens(const CnnModel& model, std::span<const std::string> doc) {
  const auto limit = static_cast<std::size_t>(model.config.max_sequence_length);
  std::vector<int> out;
  out.reserve(std::min(limit, doc.size()));
  for (std::size_t i = 0; i < doc.size() && i < limit; ++i) {
    out.push_back(model.token_index.index_of(doc[i]));
  }
  return out;
}

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// -log p(y | z) for a sigmoid unit.
inline double bce_from_logit(double z, int y) {
  const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - (y ? z : 0.0);
}

struct CnnForward {
  std::vector<int> seq;      // padded
  std::vector<double> pre;   // best pre-activation per pooled feature
  std::vector<int> argmax;   // window start of that pre-activation
  std::vector<double> mask;  // dropout scale per pooled feature
  double logit = 0.0;
};

// Trailing padding is dropped and the sequence is padded back only up to the
// widest filter, so extra padding can never add windows.
inline CnnForward cnn_forward(const CnnParams& p, const CnnConfig& config,
                              std::span<const int> indices, Rng* dropout) {
  CnnForward f;
  std::size_t len = std::min(indices.size(), static_cast<std::size_t>(config.max_sequence_length));
  while (len > 0 && indices[len - 1] == TokenIndex::kPadding) --len;
  const auto padded_len = std::max(len, static_cast<std::size_t>(config.max_width()));
  f.seq.assign(padded_len, TokenIndex::kPadding);
  std::copy_n(indices.begin(), len, f.seq.begin());

  const std::size_t d = p.dim;
  const std::size_t n_filters = static_cast<std::size_t>(config.filters_per_width);
  f.pre.assign(p.pooled_size(), -std::numeric_limits<double>::infinity());
  f.argmax.assign(p.pooled_size(), 0);
  std::vector<double> acc(n_filters);

  std::size_t offset = 0;
  for (const auto& bank : p.banks) {
    const auto w = static_cast<std::size_t>(bank.width);
    const std::size_t windows = padded_len - w + 1;
    for (std::size_t pos = 0; pos < windows; ++pos) {
      std::copy(bank.biases.begin(), bank.biases.end(), acc.begin());
      for (std::size_t k = 0; k < w; ++k) {
        const int tok = f.seq[pos + k];
        if (tok == TokenIndex::kPadding) continue;
        const double* e = &p.embeddings[static_cast<std::size_t>(tok) * d];
        for (std::size_t fi = 0; fi < n_filters; ++fi) {
          const double* wk = &bank.weights[(fi * w + k) * d];
          double s = 0.0;
          for (std::size_t j = 0; j < d; ++j) s += e[j] * wk[j];
          acc[fi] += s;
        }
      }
      for (std::size_t fi = 0; fi < n_filters; ++fi) {
        if (acc[fi] > f.pre[offset + fi]) {
          f.pre[offset + fi] = acc[fi];
          f.argmax[offset + fi] = static_cast<int>(pos);
        }
      }
    }
    offset += n_filters;
  }

  f.mask.assign(p.pooled_size(), 1.0);
  if (dropout != nullptr && config.dropout_rate > 0.0) {
    const double keep_scale = 1.0 / (1.0 - config.dropout_rate);
    for (double& m : f.mask) m = dropout->uniform01() < config.dropout_rate ? 0.0 : keep_scale;
  }
  f.logit = p.output_bias;
  for (std::size_t j = 0; j < f.pre.size(); ++j) {
    f.logit += p.output_weights[j] * std::max(0.0, f.pre[j]) * f.mask[j];
  }
  return f;
}

// Adds scale * d(loss)/d(params) into `grad`. The padding row never receives
// gradient.
inline void cnn_backward(const CnnParams& p, const CnnConfig& config, const CnnForward& f, int label,
                         double scale, CnnParams& grad) {
  const double dz = (sigmoid(f.logit) - label) * scale;
  grad.output_bias += dz;
  const std::size_t d = p.dim;
  const std::size_t n_filters = static_cast<std::size_t>(config.filters_per_width);
  std::size_t offset = 0;
  for (std::size_t b = 0; b < p.banks.size(); ++b) {
    const auto& bank = p.banks[b];
    auto& gbank = grad.banks[b];
    const auto w = static_cast<std::size_t>(bank.width);
    for (std::size_t fi = 0; fi < n_filters; ++fi) {
      const std::size_t j = offset + fi;
      const double h = std::max(0.0, f.pre[j]);
      grad.output_weights[j] += dz * h * f.mask[j];
      if (!(f.pre[j] > 0.0) || f.mask[j] == 0.0) continue;
      const double g = dz * p.output_weights[j] * f.mask[j];
      gbank.biases[fi] += g;
      const auto start = static_cast<std::size_t>(f.argmax[j]);
      for (std::size_t k = 0; k < w; ++k) {
        const int tok = f.seq[start + k];
        if (tok == TokenIndex::kPadding) continue;
        const std::size_t row = static_cast<std::size_t>(tok) * d;
        const std::size_t wrow = (fi * w + k) * d;
        for (std::size_t e = 0; e < d; ++e) {
          gbank.weights[wrow + e] += g * p.embeddings[row + e];
          grad.embeddings[row + e] += g * bank.weights[wrow + e];
        }
      }
    }
    offset += n_filters;
  }
}

inline void check_binary_labels(std::span<const int> labels) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
}

}  // namespace detail

/// Probability of the positive class for pre-encoded token indices.
/// Dropout is off; the call has no side effects.
inline double cnn_predict_indices(const CnnModel& model, std::span<const int> indices) {
  return detail::sigmoid(detail::cnn_forward(model.params, model.config, indices, nullptr).logit);
}

inline double cnn_predict(const CnnModel& model, std::span<const std::string> doc) {
  const auto idx = encode_tokens(model, doc);
  return cnn_predict_indices(model, idx);
}

struct CnnLossGradient {
  double loss = 0.0;
  CnnParams gradient;
};

/// Summed cross-entropy over `docs` and its exact gradient, dropout off.
inline CnnLossGradient cnn_loss_gradient(const CnnModel& model, std::span<const TokenList> docs,
                                         std::span<const int> labels) {
  if (docs.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "docs and labels differ in length");
  }
  detail::check_binary_labels(labels);
  CnnLossGradient out{0.0, model.params.zeros_like()};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto idx = encode_tokens(model, docs[i]);
    const auto f = detail::cnn_forward(model.params, model.config, idx, nullptr);
    out.loss += detail::bce_from_logit(f.logit, labels[i]);
    detail::cnn_backward(model.params, model.config, f, labels[i], 1.0, out.gradient);
  }
  return out;
}

inline double cnn_loss(const CnnModel& model, std::span<const TokenList> docs,
                       std::span<const int> labels) {
  double loss = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto idx = encode_tokens(model, docs[i]);
    loss += detail::bce_from_logit(
        detail::cnn_forward(model.params, model.config, idx, nullptr).logit, labels[i]);
  }
  return loss;
}

struct GradientCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
};

/// Compares the analytic gradient with central differences over
/// `coordinate_sample` coordinates drawn (seeded) from the parameters this
/// document can influence: every filter and output parameter plus the
/// embedding rows of its tokens. Relative error is |a - n| / max(|a|, |n|,
/// 1e-8).
///
/// The loss is piecewise smooth: it has kinks where a ReLU changes sign or a
/// max-over-time winner changes. A coordinate whose +/- epsilon probes land
/// on different pieces has no meaningful central difference, so it is
/// skipped (and counted) and the next candidate is used instead.
inline GradientCheck gradient_check_report(const CnnModel& model, const TokenList& doc, int label,
                                           double epsilon, std::size_t coordinate_sample,
                                           std::uint64_t seed = 0) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  const TokenList docs[1] = {doc};
  const int labels[1] = {label};
  auto analytic = cnn_loss_gradient(model, docs, labels);
  const auto idx = encode_tokens(model, doc);

  CnnModel probe = model;
  auto params = probe.params.blocks();
  auto grads = analytic.gradient.blocks();

  struct Coord {
    std::size_t block;
    std::size_t offset;
  };
  std::vector<Coord> candidates;
  std::vector<int> rows = idx;
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  for (int r : rows) {
    if (r == TokenIndex::kPadding) continue;
    for (std::size_t e = 0; e < model.params.dim; ++e) {
      candidates.push_back({0, static_cast<std::size_t>(r) * model.params.dim + e});
    }
  }
  for (std::size_t b = 1; b < params.size(); ++b) {
    for (std::size_t k = 0; k < params[b].size(); ++k) candidates.push_back({b, k});
  }

  // Which piece of the loss a forward pass lands on.
  const auto piece = [&](const detail::CnnForward& f) {
    std::vector<int> key(f.pre.size());
    for (std::size_t j = 0; j < f.pre.size(); ++j) key[j] = f.pre[j] > 0.0 ? f.argmax[j] : -1;
    return key;
  };
  const auto probe_at = [&](double value, Coord c) {
    params[c.block][c.offset] = value;
    return detail::cnn_forward(probe.params, probe.config, idx, nullptr);
  };

  Rng rng(seed);
  rng.shuffle(candidates);
  GradientCheck out;
  for (std::size_t c = 0; c < candidates.size() && out.checked < coordinate_sample; ++c) {
    const auto coord = candidates[c];
    const double saved = params[coord.block][coord.offset];
    const auto up = probe_at(saved + epsilon, coord);
    const auto down = probe_at(saved - epsilon, coord);
    params[coord.block][coord.offset] = saved;
    if (piece(up) != piece(down)) {
      ++out.skipped_kinks;
      continue;
    }
    const double numeric =
        (detail::bce_from_logit(up.logit, label) - detail::bce_from_logit(down.logit, label)) /
        (2.0 * epsilon);
    const double a = grads[coord.block][coord.offset];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    out.max_relative_error = std::max(out.max_relative_error, std::abs(a - numeric) / denom);
    ++out.checked;
  }
  return out;
}

/// Largest relative error of `gradient_check_report`.
inline double gradient_check(const CnnModel& model, const TokenList& doc, int label,
                             double epsilon, std::size_t coordinate_sample,
                             std::uint64_t seed = 0) {
  return gradient_check_report(model, doc, label, epsilon, coordinate_sample, seed)
      .max_relative_error;
}

struct CnnFit {
  CnnModel model;
  std::vector<double> epoch_train_loss;  // mean, dropout on
  std::vector<double> epoch_tune_accuracy;
  int best_epoch = 0;  // 1-based
};

/// Trains with Adam on shuffled minibatches. The token index is built from
/// `docs` (unigrams, min_token_df). After each epoch the tuning accuracy is
/// measured and the best epoch's parameters are kept (earliest on ties);
/// without tuning data the last epoch is kept.
inline CnnFit fit_cnn(std::span<const TokenList> docs, std::span<const int> labels,
                      const CnnConfig& config, std::span<const TokenList> tune_docs = {},
                      std::span<const int> tune_labels = {}) {
  config.validate();
  if (docs.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training documents");
  if (docs.size() != labels.size() || tune_docs.size() != tune_labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "docs and labels differ in length");
  }
  detail::check_binary_labels(labels);
  detail::check_binary_labels(tune_labels);
  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (!has_pos || !has_neg) throw Error(ErrorCode::SingleClass, "training labels have one class");

  CnnFit fit;
  fit.model = init_cnn(build_token_index(docs, config.min_token_df), config);
  auto& model = fit.model;

  std::vector<std::vector<int>> encoded;
  encoded.reserve(docs.size());
  for (const auto& d : docs) encoded.push_back(encode_tokens(model, d));
  std::vector<std::vector<int>> tune_encoded;
  tune_encoded.reserve(tune_docs.size());
  for (const auto& d : tune_docs) tune_encoded.push_back(encode_tokens(model, d));

  // Separate streams so the shuffle does not depend on dropout draws.
  Rng order_rng(config.seed ^ 0x5bd1e995ULL);
  Rng dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  CnnParams grad = model.params.zeros_like();
  CnnParams m1 = grad;
  CnnParams m2 = grad;
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double adam_eps = 1e-8;
  long step = 0;

  std::vector<std::size_t> order(docs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  CnnParams best = model.params;
  double best_acc = -1.0;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      for (std::size_t t = start; t < end; ++t) {
        const auto i = order[t];
        const auto f = detail::cnn_forward(model.params, config, encoded[i], &dropout_rng);
        loss_sum += detail::bce_from_logit(f.logit, labels[i]);
        detail::cnn_backward(model.params, config, f, labels[i], scale, grad);
      }

      ++step;
      const double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto pb = model.params.blocks();
      auto gb = grad.blocks();
      auto mb = m1.blocks();
      auto vb = m2.blocks();
      for (std::size_t b = 0; b < pb.size(); ++b) {
        // Block 0 is the embedding table; skip its padding row.
        const std::size_t first = b == 0 ? model.params.dim : 0;
        for (std::size_t k = first; k < pb[b].size(); ++k) {
          const double g = gb[b][k];
          mb[b][k] = beta1 * mb[b][k] + (1.0 - beta1) * g;
          vb[b][k] = beta2 * vb[b][k] + (1.0 - beta2) * g * g;
          pb[b][k] -= config.learning_rate * (mb[b][k] / corr1) /
                      (std::sqrt(vb[b][k] / corr2) + adam_eps);
          gb[b][k] = 0.0;
        }
      }
    }
    fit.epoch_train_loss.push_back(loss_sum / static_cast<double>(docs.size()));

    if (tune_encoded.empty()) {
      fit.best_epoch = epoch;
      continue;
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < tune_encoded.size(); ++i) {
      const bool pos = cnn_predict_indices(model, tune_encoded[i]) > 0.5;
      if (pos == (tune_labels[i] == 1)) ++correct;
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(tune_encoded.size());
    fit.epoch_tune_accuracy.push_back(acc);
    if (acc > best_acc) {
      best_acc = acc;
      best = model.params;
      fit.best_epoch = epoch;
    }
  }
  if (!tune_encoded.empty()) model.params = std::move(best);
  return fit;
}

inline CnnModel train_cnn(std::span<const TokenList> docs, std::span<const int> labels,
                          const CnnConfig& config, std::span<const TokenList> tune_docs = {},
                          std::span<const int> tune_labels = {}) {
  return fit_cnn(docs, labels, config, tune_docs, tune_labels).model;
}

}  // namespace triage

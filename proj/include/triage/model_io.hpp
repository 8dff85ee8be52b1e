#pragma once
// Self-describing JSON model files. Doubles are written in shortest
// round-trip form, so load(save(m)) restores every parameter bit for bit.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>

#include "json.hpp"
#include "triage/cnn.hpp"
#include "triage/error.hpp"
#include "triage/pipeline.hpp"
#include "triage/svm.hpp"

namespace triage {

inline constexpr int kModelFormatVersion = 1;

struct ModelMetadata {
  std::uint64_t seed = 0;
  std::string timestamp = "1970-01-01T00:00:00Z";
};

struct ModelFile {
  std::variant<SvmClassifier, CnnClassifier> model;
  ModelMetadata metadata;

  bool is_svm() const { return std::holds_alternative<SvmClassifier>(model); }
  const char* kind() const { return is_svm() ? "svm" : "cnn"; }

  const SvmClassifier& svm() const {
    if (!is_svm()) throw Error(ErrorCode::KindMismatch, "expected an svm model, found cnn");
    return std::get<SvmClassifier>(model);
  }
  const CnnClassifier& cnn() const {
    if (is_svm()) throw Error(ErrorCode::KindMismatch, "expected a cnn model, found svm");
    return std::get<CnnClassifier>(model);
  }
  Task task() const {
    return std::visit([](const auto& m) { return m.task; }, model);
  }
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline ojson svm_config_json(const SvmConfig& c) {
  ojson j;
  j["C"] = c.C;
  j["tolerance"] = c.tolerance;
  j["max_iterations"] = c.max_iterations;
  j["class_weighting"] = to_string(c.class_weighting);
  j["seed"] = c.seed;
  return j;
}

inline SvmConfig svm_config_from(const nlohmann::json& j) {
  SvmConfig c;
  c.C = j.at("C").get<double>();
  c.tolerance = j.at("tolerance").get<double>();
  c.max_iterations = j.at("max_iterations").get<int>();
  c.class_weighting = parse_class_weighting(j.at("class_weighting").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline ojson cnn_config_json(const CnnConfig& c) {
  ojson j;
  j["embedding_dim"] = c.embedding_dim;
  j["filter_widths"] = c.filter_widths;
  j["filters_per_width"] = c.filters_per_width;
  j["max_sequence_length"] = c.max_sequence_length;
  j["dropout_rate"] = c.dropout_rate;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["min_token_df"] = c.min_token_df;
  j["seed"] = c.seed;
  return j;
}

inline CnnConfig cnn_config_from(const nlohmann::json& j) {
  CnnConfig c;
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.filter_widths = j.at("filter_widths").get<std::vector<int>>();
  c.filters_per_width = j.at("filters_per_width").get<int>();
  c.max_sequence_length = j.at("max_sequence_length").get<int>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.min_token_df = j.at("min_token_df").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

inline void corrupt_unless(bool ok, const std::string& reason) {
  if (!ok) throw Error(ErrorCode::CorruptFile, reason);
}

}  // namespace detail

inline std::string model_to_json(const ModelFile& file) {
  using detail::ojson;
  ojson j;
  j["format_version"] = kModelFormatVersion;
  j["model_kind"] = file.kind();
  j["task"] = to_string(file.task());
  j["created"] = {{"seed", file.metadata.seed}, {"timestamp", file.metadata.timestamp}};

  if (file.is_svm()) {
    const auto& clf = file.svm();
    const auto& v = clf.vocabulary;
    j["config"] = detail::svm_config_json(clf.model.config);
    ojson vocab;
    vocab["ngram_min"] = v.ngram_range().min;
    vocab["ngram_max"] = v.ngram_range().max;
    vocab["min_df"] = v.min_df();
    vocab["doc_count"] = v.doc_count();
    vocab["ngrams"] = v.ngrams();
    vocab["df"] = v.document_frequencies();
    vocab["idf"] = v.idf();
    j["vocabulary"] = std::move(vocab);
    j["vocabulary_digest"] = detail::hex64(clf.model.vocabulary_digest);
    j["weights"] = clf.model.weights;
    j["bias"] = clf.model.bias;
  } else {
    const auto& clf = file.cnn();
    const auto& p = clf.model.params;
    j["config"] = detail::cnn_config_json(clf.model.config);
    j["token_index"] = clf.model.token_index.tokens();
    j["embeddings"] = p.embeddings;
    ojson banks = ojson::array();
    for (const auto& b : p.banks) {
      ojson bank;
      bank["width"] = b.width;
      bank["weights"] = b.weights;
      bank["biases"] = b.biases;
      banks.push_back(std::move(bank));
    }
    j["filters"] = std::move(banks);
    j["output_weights"] = p.output_weights;
    j["output_bias"] = p.output_bias;
  }
  return j.dump(1, ' ') + "\n";
}

inline ModelFile model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("not valid JSON: ") + e.what());
  }
  try {
    detail::corrupt_unless(j.is_object(), "model file is not a JSON object");
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::VersionMismatch, "model format " + std::to_string(version) +
                                                  ", reader expects " +
                                                  std::to_string(kModelFormatVersion));
    }
    ModelFile file;
    file.metadata.seed = j.at("created").at("seed").get<std::uint64_t>();
    file.metadata.timestamp = j.at("created").at("timestamp").get<std::string>();
    const Task task = parse_task(j.at("task").get<std::string>());
    const auto kind = j.at("model_kind").get<std::string>();

    if (kind == "svm") {
      SvmClassifier clf;
      clf.task = task;
      const auto& vj = j.at("vocabulary");
      clf.vocabulary = Vocabulary::from_parts(
          vj.at("ngrams").get<std::vector<std::string>>(),
          vj.at("df").get<std::vector<std::size_t>>(),
          NgramRange{vj.at("ngram_min").get<int>(), vj.at("ngram_max").get<int>()},
          vj.at("min_df").get<std::size_t>(), vj.at("doc_count").get<std::size_t>());
      const auto idf = vj.at("idf").get<std::vector<double>>();
      detail::corrupt_unless(idf == clf.vocabulary.idf(), "stored idf disagrees with df table");
      clf.model.config = detail::svm_config_from(j.at("config"));
      clf.model.weights = j.at("weights").get<std::vector<double>>();
      clf.model.bias = j.at("bias").get<double>();
      detail::corrupt_unless(clf.model.weights.size() == clf.vocabulary.size(),
                             "weight count does not match vocabulary size");
      clf.model.vocabulary_digest = clf.vocabulary.digest();
      detail::corrupt_unless(j.at("vocabulary_digest").get<std::string>() ==
                                 detail::hex64(clf.vocabulary.digest()),
                             "vocabulary digest mismatch");
      file.model = std::move(clf);
    } else if (kind == "cnn") {
      CnnClassifier clf;
      clf.task = task;
      auto& m = clf.model;
      m.config = detail::cnn_config_from(j.at("config"));
      m.token_index = TokenIndex(j.at("token_index").get<std::vector<std::string>>());
      auto& p = m.params;
      p.vocab_size = m.token_index.size();
      p.dim = static_cast<std::size_t>(m.config.embedding_dim);
      p.embeddings = j.at("embeddings").get<std::vector<double>>();
      detail::corrupt_unless(p.embeddings.size() == p.vocab_size * p.dim,
                             "embedding table does not match token index");
      const auto filters = static_cast<std::size_t>(m.config.filters_per_width);
      const auto& banks = j.at("filters");
      detail::corrupt_unless(banks.is_array() && banks.size() == m.config.filter_widths.size(),
                             "filter bank count does not match config");
      for (std::size_t b = 0; b < banks.size(); ++b) {
        FilterBank bank;
        bank.width = banks[b].at("width").get<int>();
        bank.weights = banks[b].at("weights").get<std::vector<double>>();
        bank.biases = banks[b].at("biases").get<std::vector<double>>();
        detail::corrupt_unless(bank.width == m.config.filter_widths[b] &&
                                   bank.weights.size() ==
                                       filters * static_cast<std::size_t>(bank.width) * p.dim &&
                                   bank.biases.size() == filters,
                               "filter bank shape mismatch");
        p.banks.push_back(std::move(bank));
      }
      p.output_weights = j.at("output_weights").get<std::vector<double>>();
      p.output_bias = j.at("output_bias").get<double>();
      detail::corrupt_unless(p.output_weights.size() == filters * p.banks.size(),
                             "output layer shape mismatch");
      for (std::size_t e = 0; e < p.dim; ++e) {
        detail::corrupt_unless(p.embeddings[e] == 0.0, "padding embedding row is not zero");
      }
      file.model = std::move(clf);
    } else {
      throw Error(ErrorCode::CorruptFile, "unknown model_kind '" + kind + "'");
    }
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionMismatch || e.code() == ErrorCode::CorruptFile) throw;
    throw Error(ErrorCode::CorruptFile, e.what());
  }
}

inline void save_model(const ModelFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << model_to_json(file);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace triage

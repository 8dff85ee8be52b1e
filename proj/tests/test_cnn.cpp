#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "triage/cnn.hpp"
#include "triage/pipeline.hpp"
#include "triage/rng.hpp"
#include "triage/synth.hpp"

using namespace triage;

namespace {

std::vector<TokenList> word_docs(Rng& rng, std::size_t n, std::size_t vocab, std::size_t len) {
  std::vector<TokenList> docs;
  for (std::size_t i = 0; i < n; ++i) {
    TokenList d;
    const std::size_t l = 1 + rng.uniform_index(len);
    for (std::size_t k = 0; k < l; ++k) d.push_back("t" + std::to_string(rng.uniform_index(vocab)));
    docs.push_back(d);
  }
  return docs;
}

CnnModel random_model(std::uint64_t seed, const CnnConfig& base = {}) {
  Rng rng(seed);
  const auto docs = word_docs(rng, 40, 50, 30);
  CnnConfig config = base;
  config.seed = seed;
  return init_cnn(build_token_index(docs, 1), config);
}

CnnConfig small_config() {
  CnnConfig c;
  c.embedding_dim = 8;
  c.filter_widths = {2, 3};
  c.filters_per_width = 4;
  c.max_sequence_length = 40;
  c.dropout_rate = 0.0;
  return c;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("TokenIndex reserves padding and OOV", "[cnn]") {
  const std::vector<TokenList> docs = {{"b", "a", "a"}, {"a", "c"}, {"b"}};
  const auto idx = build_token_index(docs, 2);
  CHECK(idx.tokens() == std::vector<std::string>{"a", "b"});
  CHECK(idx.size() == 4);
  CHECK(idx.index_of("a") == 2);
  CHECK(idx.index_of("b") == 3);
  CHECK(idx.index_of("c") == TokenIndex::kUnknown);
}

TEST_CASE("gradient check at three initializations", "[cnn]") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto model = random_model(seed);
    Rng rng(seed + 100);
    const auto doc = word_docs(rng, 1, 60, 40).front();
    for (int label : {0, 1}) {
      const double err = gradient_check(model, doc, label, 1e-4, 100, seed);
      INFO("seed " << seed << " label " << label);
      CHECK(err < 1e-4);
    }
  }
}

TEST_CASE("gradient check steps over kinks instead of failing on them", "[cnn]") {
  // This initialization puts a max-pool tie within 1e-4 of two coordinates.
  Rng rng(22);
  std::vector<TokenList> docs;
  for (int i = 0; i < 30; ++i) {
    TokenList d;
    const std::size_t len = 1 + rng.uniform_index(40);
    for (std::size_t k = 0; k < len; ++k) d.push_back("t" + std::to_string(rng.uniform_index(80)));
    docs.push_back(d);
  }
  CnnConfig cfg;
  cfg.seed = 22;
  const auto model = init_cnn(build_token_index(docs, 1), cfg);
  const auto r = gradient_check_report(model, docs[0], 0, 1e-4, 100, 22);
  CHECK(r.checked == 100);
  CHECK(r.skipped_kinks > 0);
  CHECK(r.max_relative_error < 1e-4);

  // A smaller step stays on one piece for the same coordinates.
  const auto fine = gradient_check_report(model, docs[0], 0, 1e-6, 100, 22);
  CHECK(fine.skipped_kinks < r.skipped_kinks);
  CHECK(fine.max_relative_error < 1e-4);

  CHECK_THROWS_AS(gradient_check(model, docs[0], 0, 0.0, 10), Error);
}

TEST_CASE("padding row has zero gradient and stays zero", "[cnn]") {
  const auto model = random_model(5);
  const std::vector<TokenList> docs = {{"t1", "t2"}, {"zzz", "t3", "t4", "t5", "t6", "t7"}};
  const std::vector<int> labels = {1, 0};
  const auto g = cnn_loss_gradient(model, docs, labels);
  for (std::size_t e = 0; e < model.params.dim; ++e) CHECK(g.gradient.embeddings[e] == 0.0);

  CnnConfig c = small_config();
  c.epochs = 3;
  c.dropout_rate = 0.5;
  Rng rng(6);
  const auto train = word_docs(rng, 30, 20, 10);
  std::vector<int> ys;
  for (std::size_t i = 0; i < train.size(); ++i) ys.push_back(static_cast<int>(i % 2));
  const auto trained = train_cnn(train, ys, c);
  for (std::size_t e = 0; e < trained.params.dim; ++e) CHECK(trained.params.embeddings[e] == 0.0);
  CHECK(trained.params.all_finite());
}

TEST_CASE("duplicating an example doubles the gradient", "[cnn]") {
  const auto model = random_model(9);
  const std::vector<TokenList> one = {{"t1", "t2", "t3", "t4", "t5"}};
  const std::vector<TokenList> two = {one[0], one[0]};
  const auto g1 = cnn_loss_gradient(model, one, std::vector<int>{1});
  const auto g2 = cnn_loss_gradient(model, two, std::vector<int>{1, 1});
  // Equal up to summation order inside the accumulator.
  CHECK_THAT(g2.loss, Catch::Matchers::WithinRel(2.0 * g1.loss, 1e-12));
  const auto b1 = g1.gradient.blocks();
  const auto b2 = g2.gradient.blocks();
  for (std::size_t b = 0; b < b1.size(); ++b) {
    for (std::size_t k = 0; k < b1[b].size(); ++k) {
      CHECK(std::abs(b2[b][k] - 2.0 * b1[b][k]) <= 1e-12 * std::max(1.0, std::abs(b2[b][k])));
    }
  }
}

TEST_CASE("cnn_predict examples", "[cnn]") {
  auto model = random_model(11);
  SECTION("zero output layer gives one half") {
    std::fill(model.params.output_weights.begin(), model.params.output_weights.end(), 0.0);
    model.params.output_bias = 0.0;
    CHECK(cnn_predict(model, TokenList{"t1", "t2", "t3"}) == 0.5);
    CHECK(cnn_predict(model, TokenList{}) == 0.5);
  }
  SECTION("documents shorter than the widest filter") {
    for (const TokenList& d : {TokenList{}, TokenList{"t1"}, TokenList{"t1", "nope"}}) {
      const double p = cnn_predict(model, d);
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
  SECTION("extreme logits stay inside the open interval") {
    model.params.output_bias = 30.0;
    CHECK(cnn_predict(model, TokenList{"t1"}) < 1.0);
    model.params.output_bias = -30.0;
    CHECK(cnn_predict(model, TokenList{"t1"}) > 0.0);
  }
}

TEST_CASE("padding never changes predictions and prediction is pure", "[cnn][property]") {
  const auto model = random_model(13);
  Rng rng(14);
  for (const auto& doc : word_docs(rng, 50, 60, 30)) {
    const auto idx = encode_tokens(model, doc);
    const double base = cnn_predict_indices(model, idx);
    CHECK(cnn_predict_indices(model, idx) == base);
    CHECK(cnn_predict(model, doc) == base);
    for (std::size_t extra : {1u, 2u, 7u, 40u}) {
      auto padded = idx;
      padded.insert(padded.end(), extra, TokenIndex::kPadding);
      CHECK(cnn_predict_indices(model, padded) == base);
    }
  }
}

TEST_CASE("truncation keeps the first max_sequence_length tokens", "[cnn]") {
  CnnConfig c = small_config();
  c.max_sequence_length = 5;
  const auto model = random_model(15, c);
  TokenList doc{"t1", "t2", "t3", "t4", "t5"};
  const double base = cnn_predict(model, doc);
  doc.push_back("t6");
  doc.push_back("t7");
  CHECK(cnn_predict(model, doc) == base);
  CHECK(encode_tokens(model, doc).size() == 5);
}

TEST_CASE("training is deterministic and validates its input", "[cnn]") {
  CnnConfig c = small_config();
  c.epochs = 4;
  c.dropout_rate = 0.5;
  c.seed = 3;
  Rng rng(2);
  const auto docs = word_docs(rng, 40, 30, 12);
  std::vector<int> ys;
  for (std::size_t i = 0; i < docs.size(); ++i) ys.push_back(static_cast<int>(i % 3 == 0));
  const auto a = fit_cnn(docs, ys, c, docs, ys);
  const auto b = fit_cnn(docs, ys, c, docs, ys);
  const auto pa = a.model.params.blocks();
  const auto pb = b.model.params.blocks();
  for (std::size_t k = 0; k < pa.size(); ++k) {
    CHECK(std::equal(pa[k].begin(), pa[k].end(), pb[k].begin(), pb[k].end()));
  }
  CHECK(a.best_epoch == b.best_epoch);
  CHECK(a.epoch_tune_accuracy == b.epoch_tune_accuracy);

  // Earliest epoch among the best tuning accuracies.
  const auto& acc = a.epoch_tune_accuracy;
  const auto best = std::max_element(acc.begin(), acc.end());
  CHECK(a.best_epoch == static_cast<int>(best - acc.begin()) + 1);

  const std::vector<int> zeros(docs.size(), 0);
  CHECK(code_of([&] { train_cnn(docs, zeros, c); }) == ErrorCode::SingleClass);
  CHECK(code_of([&] { train_cnn({}, {}, c); }) == ErrorCode::EmptyTrainingSet);
  auto bad = c;
  bad.filter_widths = {3, 9};
  bad.max_sequence_length = 8;
  CHECK(code_of([&] { train_cnn(docs, ys, bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("memorizes ten examples", "[cnn]") {
  Rng rng(17);
  const auto docs = word_docs(rng, 10, 25, 15);
  const std::vector<int> ys{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  CnnConfig c;
  c.min_token_df = 1;
  c.epochs = 500;
  c.seed = 4;
  const auto model = train_cnn(docs, ys, c);
  CHECK(cnn_loss(model, docs, ys) / 10.0 < 0.05);
}

TEST_CASE("separable synthetic corpus reaches 0.9 tuning accuracy", "[cnn]") {
  SynthSpec spec;
  spec.num_docs = 200;
  spec.seed = 7;
  spec.positive_rate = 0.5;
  const auto data = filter_for_task(generate_synthetic_corpus(spec), Task::Penetrance);
  const auto split = split_dataset(data, SplitRatios{}, 7);
  CnnConfig c;
  c.epochs = 20;
  c.seed = 7;
  const auto fit = fit_cnn_for(split.train, split.tune, c);
  CHECK(*std::max_element(fit.epoch_tune_accuracy.begin(), fit.epoch_tune_accuracy.end()) >= 0.9);
}

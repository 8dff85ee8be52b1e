#pragma once
// Seeded synthetic corpus: Zipf-distributed background words with planted
// class-specific signal phrases and optional label noise.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/error.hpp"
#include "triage/rng.hpp"
#include "triage/textfeat.hpp"

namespace triage {

struct SynthSpec {
  std::size_t num_docs = 3740;
  double positive_rate = 904.0 / 3740.0;
  std::vector<std::string> positive_signals{"cumulative risk", "hazard ratio", "lifetime risk",
                                            "penetrance estimate", "relative risk"};
  std::vector<std::string> negative_signals{"mutation frequency", "carrier proportion",
                                            "prevalence estimate", "carrier frequency",
                                            "detection rate"};
  std::size_t background_vocab_size = 2000;
  std::size_t doc_length_min = 50;
  std::size_t doc_length_max = 150;
  std::size_t signals_min = 1;  // signal phrases planted per document
  std::size_t signals_max = 3;
  double label_noise = 0.0;
  double zipf_exponent = 1.1;
  Task task = Task::Penetrance;
  std::uint64_t seed = 0;

  void validate() const {
    const auto bad = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
    if (!(positive_rate > 0.0 && positive_rate < 1.0)) bad("positive_rate must be in (0, 1)");
    if (positive_signals.empty() || negative_signals.empty()) bad("signal vocabularies are empty");
    for (const auto& p : positive_signals) {
      if (std::find(negative_signals.begin(), negative_signals.end(), p) != negative_signals.end()) {
        bad("signal vocabularies must be disjoint");
      }
    }
    if (background_vocab_size < 1) bad("background_vocab_size must be positive");
    if (doc_length_min > doc_length_max) bad("doc_length_min exceeds doc_length_max");
    if (signals_min < 1 || signals_min > signals_max) bad("need 1 <= signals_min <= signals_max");
    if (!(label_noise >= 0.0 && label_noise < 1.0)) bad("label_noise must be in [0, 1)");
    if (!(zipf_exponent > 0.0)) bad("zipf_exponent must be positive");
  }
};

struct SynthCorpus {
  Dataset dataset;
  std::vector<bool> true_labels;
  std::vector<bool> flipped;
};

/// Pronounceable filler word for background rank `i`: two consonant-vowel
/// syllables below 4900, three above. Distinct ranks give distinct words.
inline std::string background_word(std::size_t i) {
  static constexpr char kConsonants[] = "bdfgklmnprstvz";
  static constexpr char kVowels[] = "aeiou";
  constexpr std::size_t kSyllables = 14 * 5;
  const auto syllable = [&](std::size_t s, std::string& out) {
    out += kConsonants[s / 5];
    out += kVowels[s % 5];
  };
  std::string w;
  if (i < kSyllables * kSyllables) {
    syllable(i % kSyllables, w);
    syllable(i / kSyllables, w);
  } else {
    const std::size_t j = i - kSyllables * kSyllables;
    syllable(j % kSyllables, w);
    syllable((j / kSyllables) % kSyllables, w);
    syllable((j / kSyllables / kSyllables) % kSyllables, w);
  }
  return w;
}

inline SynthCorpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  std::unordered_set<std::string> signal_tokens;
  for (const auto* list : {&spec.positive_signals, &spec.negative_signals}) {
    for (const auto& phrase : *list) {
      for (auto& t : tokenize(phrase)) signal_tokens.insert(std::move(t));
    }
  }
  std::vector<std::string> background;
  background.reserve(spec.background_vocab_size);
  for (std::size_t i = 0; background.size() < spec.background_vocab_size; ++i) {
    auto w = background_word(i);
    if (!signal_tokens.count(w)) background.push_back(std::move(w));
  }
  std::vector<double> cdf(background.size());
  double acc = 0.0;
  for (std::size_t r = 0; r < cdf.size(); ++r) {
    acc += 1.0 / std::pow(static_cast<double>(r + 1), spec.zipf_exponent);
    cdf[r] = acc;
  }
  const auto draw_background = [&]() -> const std::string& {
    const double u = rng.uniform01() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return background[static_cast<std::size_t>(it - cdf.begin())];
  };
  const auto draw_range = [&](std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform_index(hi - lo + 1));
  };

  SynthCorpus out;
  for (std::size_t d = 0; d < spec.num_docs; ++d) {
    const bool truth = rng.bernoulli(spec.positive_rate);
    const auto& signals = truth ? spec.positive_signals : spec.negative_signals;

    std::vector<std::string> title;
    const std::size_t title_len = draw_range(6, 14);
    for (std::size_t i = 0; i < title_len; ++i) title.push_back(draw_background());

    std::vector<std::string> body;
    const std::size_t body_len = draw_range(spec.doc_length_min, spec.doc_length_max);
    for (std::size_t i = 0; i < body_len; ++i) body.push_back(draw_background());
    const std::size_t k = draw_range(spec.signals_min, spec.signals_max);
    for (std::size_t s = 0; s < k; ++s) {
      const auto& phrase = signals[rng.uniform_index(signals.size())];
      const auto at = static_cast<std::ptrdiff_t>(rng.uniform_index(body.size() + 1));
      body.insert(body.begin() + at, phrase);
    }

    const auto join = [](const std::vector<std::string>& words) {
      std::string s;
      for (const auto& w : words) {
        if (!s.empty()) s += ' ';
        s += w;
      }
      return s;
    };
    std::string title_text = join(title);
    if (!title_text.empty()) title_text[0] = static_cast<char>(title_text[0] - 'a' + 'A');
    std::string abstract_text = join(body) + ".";

    const bool flip = spec.label_noise > 0.0 && rng.bernoulli(spec.label_noise);
    AnnotationRecord a;
    (spec.task == Task::Penetrance ? a.penetrance : a.prevalence) = truth != flip;
    out.dataset.add(Paper(std::to_string(30000000 + d), std::move(title_text),
                          std::move(abstract_text)),
                    a);
    out.true_labels.push_back(truth);
    out.flipped.push_back(flip);
  }
  return out;
}

inline Dataset generate_synthetic_corpus(const SynthSpec& spec) {
  return generate_synthetic(spec).dataset;
}

}  // namespace triage

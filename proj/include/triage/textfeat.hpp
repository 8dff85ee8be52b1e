#pragma once
// Tokenization, ngram extraction, document-frequency vocabularies and
// L2-normalized tf-idf sparse vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "triage/error.hpp"

namespace triage {

using TokenList = std::vector<std::string>;

namespace utf8 {

/// Decodes one code point at `pos`; malformed input yields U+FFFD of length 1.
inline std::pair<char32_t, std::size_t> decode(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (pos + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[pos + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return {0xFFFD, 1};
  return {cp, len};
}

inline void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Letter/digit coverage: Latin (incl. extended and IPA), Greek, Cyrillic,
// Hebrew, Arabic, kana, CJK ideographs, Hangul and fullwidth ASCII forms.
inline bool is_word_char(char32_t c) {
  if (c < 0x80) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  }
  if (c == 0xAA || c == 0xB5 || c == 0xBA) return true;
  if (c >= 0xC0 && c <= 0x2AF) return c != 0xD7 && c != 0xF7;
  if (c >= 0x370 && c <= 0x3FF) {
    return c != 0x374 && c != 0x375 && c != 0x37E && c != 0x384 && c != 0x385 &&
           c != 0x387 && c != 0x3F6;
  }
  if (c >= 0x400 && c <= 0x52F) return c < 0x482 || c > 0x489;
  if (c >= 0x5D0 && c <= 0x5EA) return true;
  if ((c >= 0x620 && c <= 0x64A) || (c >= 0x660 && c <= 0x669)) return true;
  if (c >= 0x1E00 && c <= 0x1EFF) return true;
  if (c >= 0x3041 && c <= 0x3096) return true;
  if (c >= 0x30A1 && c <= 0x30FA) return true;
  if (c >= 0x4E00 && c <= 0x9FFF) return true;
  if (c >= 0xAC00 && c <= 0xD7A3) return true;
  if ((c >= 0xFF10 && c <= 0xFF19) || (c >= 0xFF21 && c <= 0xFF3A) ||
      (c >= 0xFF41 && c <= 0xFF5A)) {
    return true;
  }
  return false;
}

inline char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return (c % 2 == 0) ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if ((c >= 0x1E00 && c <= 0x1E95) || (c >= 0x1EA0 && c <= 0x1EFF)) {
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0xFF21 && c <= 0xFF3A) return c + 32;
  return c;
}

}  // namespace utf8

/// Lowercased maximal runs of letters/digits; everything else separates.
inline TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto [cp, len] = utf8::decode(text, pos);
    pos += len;
    if (utf8::is_word_char(cp)) {
      utf8::encode(utf8::to_lower(cp), current);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

struct NgramRange {
  int min = 1;
  int max = 2;

  void validate() const {
    if (min < 1 || max < min) {
      throw Error(ErrorCode::InvalidArgument, "ngram range must satisfy 1 <= min <= max");
    }
  }
  friend bool operator==(const NgramRange&, const NgramRange&) = default;
};

/// Contiguous ngrams for every n in range, ordered by (start position, n),
/// tokens joined with single spaces.
inline std::vector<std::string> extract_ngrams(std::span<const std::string> tokens,
                                               NgramRange range) {
  range.validate();
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string gram;
    for (int n = 1; n <= range.max && i + static_cast<std::size_t>(n) <= tokens.size(); ++n) {
      if (n > 1) gram += ' ';
      gram += tokens[i + static_cast<std::size_t>(n) - 1];
      if (n >= range.min) out.push_back(gram);
    }
  }
  return out;
}

/// Smoothed inverse document frequency, ln((1 + N) / (1 + df)) + 1.
inline double smoothed_idf(std::size_t doc_count, std::size_t df) {
  return std::log((1.0 + static_cast<double>(doc_count)) / (1.0 + static_cast<double>(df))) +
         1.0;
}

/// Ngram-to-column map with document frequencies and idf weights.
/// Columns follow lexicographic (bytewise) ngram order.
class Vocabulary {
 public:
  Vocabulary() { digest_ = compute_digest(); }

  /// Rebuilds a vocabulary from stored columns (used by model loading).
  static Vocabulary from_parts(std::vector<std::string> ngrams, std::vector<std::size_t> df,
                               NgramRange range, std::size_t min_df, std::size_t doc_count) {
    range.validate();
    if (ngrams.size() != df.size()) {
      throw Error(ErrorCode::LengthMismatch, "ngram and df columns differ in length");
    }
    if (!std::is_sorted(ngrams.begin(), ngrams.end()) ||
        std::adjacent_find(ngrams.begin(), ngrams.end()) != ngrams.end()) {
      throw Error(ErrorCode::InvalidArgument, "vocabulary ngrams must be sorted and unique");
    }
    Vocabulary v;
    v.range_ = range;
    v.min_df_ = min_df;
    v.doc_count_ = doc_count;
    v.ngrams_ = std::move(ngrams);
    v.df_ = std::move(df);
    v.idf_.reserve(v.df_.size());
    v.index_.reserve(v.ngrams_.size());
    for (std::size_t i = 0; i < v.ngrams_.size(); ++i) {
      if (v.df_[i] < min_df || v.df_[i] > doc_count) {
        throw Error(ErrorCode::InvalidArgument, "document frequency out of range");
      }
      v.idf_.push_back(smoothed_idf(doc_count, v.df_[i]));
      v.index_.emplace(v.ngrams_[i], static_cast<std::uint32_t>(i));
    }
    v.digest_ = v.compute_digest();
    return v;
  }

  std::size_t size() const { return ngrams_.size(); }
  NgramRange ngram_range() const { return range_; }
  std::size_t min_df() const { return min_df_; }
  std::size_t doc_count() const { return doc_count_; }
  const std::vector<std::string>& ngrams() const { return ngrams_; }
  const std::vector<std::size_t>& document_frequencies() const { return df_; }
  const std::vector<double>& idf() const { return idf_; }
  std::uint64_t digest() const { return digest_; }

  std::optional<std::uint32_t> index_of(const std::string& ngram) const {
    const auto it = index_.find(ngram);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  // FNV-1a over every field that affects vectorization.
  std::uint64_t compute_digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix_bytes = [&h](const void* data, std::size_t n) {
      const auto* p = static_cast<const unsigned char*>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
      }
    };
    const auto mix_u64 = [&](std::uint64_t x) {
      unsigned char b[8];
      for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
      mix_bytes(b, 8);
    };
    mix_u64(static_cast<std::uint64_t>(range_.min));
    mix_u64(static_cast<std::uint64_t>(range_.max));
    mix_u64(min_df_);
    mix_u64(doc_count_);
    for (std::size_t i = 0; i < ngrams_.size(); ++i) {
      mix_u64(ngrams_[i].size());
      mix_bytes(ngrams_[i].data(), ngrams_[i].size());
      mix_u64(df_[i]);
    }
    return h;
  }

  NgramRange range_{};
  std::size_t min_df_ = 1;
  std::size_t doc_count_ = 0;
  std::vector<std::string> ngrams_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::uint64_t digest_ = 0;
};

/// Keeps ngrams appearing in at least `min_df` documents. Intended for
/// training-split documents only.
inline Vocabulary build_vocabulary(std::span<const TokenList> docs, NgramRange range,
                                   std::size_t min_df) {
  range.validate();
  if (min_df < 1) throw Error(ErrorCode::InvalidArgument, "min_df must be at least 1");
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    auto grams = extract_ngrams(doc, range);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [gram, count] : df) {
    if (count >= min_df) kept.emplace_back(gram, count);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<std::string> ngrams;
  std::vector<std::size_t> counts;
  ngrams.reserve(kept.size());
  counts.reserve(kept.size());
  for (auto& [gram, count] : kept) {
    ngrams.push_back(std::move(gram));
    counts.push_back(count);
  }
  return Vocabulary::from_parts(std::move(ngrams), std::move(counts), range, min_df,
                                docs.size());
}

/// Sparse row with ascending unique indices. Vectors produced by `vectorize`
/// carry the digest of their vocabulary; hand-built ones leave it 0.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::uint64_t vocabulary_digest = 0;

  std::size_t nnz() const { return indices.size(); }
  bool empty() const { return indices.empty(); }

  double squared_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
  }

  double dot(std::span<const double> dense) const {
    double s = 0.0;
    for (std::size_t k = 0; k < indices.size(); ++k) s += values[k] * dense[indices[k]];
    return s;
  }

  static SparseVector from_pairs(std::vector<std::pair<std::uint32_t, double>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    SparseVector v;
    for (const auto& [i, x] : pairs) {
      if (!v.indices.empty() && v.indices.back() == i) {
        throw Error(ErrorCode::InvalidArgument, "duplicate sparse index");
      }
      if (x == 0.0) continue;
      v.indices.push_back(i);
      v.values.push_back(x);
    }
    return v;
  }
};

/// Raw ngram count times idf, out-of-vocabulary ngrams dropped, then scaled
/// to unit L2 norm. Documents with no known ngram give the empty vector.
inline SparseVector vectorize(std::span<const std::string> doc, const Vocabulary& vocab) {
  std::unordered_map<std::uint32_t, std::size_t> counts;
  for (const auto& gram : extract_ngrams(doc, vocab.ngram_range())) {
    if (const auto idx = vocab.index_of(gram)) ++counts[*idx];
  }
  std::vector<std::pair<std::uint32_t, std::size_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());

  SparseVector v;
  v.vocabulary_digest = vocab.digest();
  v.indices.reserve(sorted.size());
  v.values.reserve(sorted.size());
  for (const auto& [idx, count] : sorted) {
    v.indices.push_back(idx);
    v.values.push_back(static_cast<double>(count) * vocab.idf()[idx]);
  }
  const double norm = std::sqrt(v.squared_norm());
  if (norm > 0.0) {
    for (double& x : v.values) x /= norm;
  }
  return v;
}

}  // namespace triage

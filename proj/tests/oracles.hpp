#pragma once
// Brute-force reference computations used only by the tests. None of these
// call into the code paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "triage/corpus.hpp"

namespace oracle {

/// Count every ngram into a map, multiply by its idf, then divide by the
/// Euclidean norm. `idf_of` maps ngram -> idf for in-vocabulary ngrams.
inline std::map<std::string, double> tfidf(const std::vector<std::string>& tokens, int n_min,
                                           int n_max,
                                           const std::map<std::string, double>& idf_of) {
  std::map<std::string, int> counts;
  for (int n = n_min; n <= n_max; ++n) {
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
      std::string g = tokens[i];
      for (int k = 1; k < n; ++k) g += " " + tokens[i + static_cast<std::size_t>(k)];
      ++counts[g];
    }
  }
  std::map<std::string, double> out;
  double sq = 0.0;
  for (const auto& [g, c] : counts) {
    auto it = idf_of.find(g);
    if (it == idf_of.end()) continue;
    out[g] = c * it->second;
    sq += out[g] * out[g];
  }
  for (auto& [g, v] : out) v /= std::sqrt(sq);
  return out;
}

/// Mann-Whitney concordance: P(score_pos > score_neg) + 0.5 P(tie).
inline double auc_pairs(const std::vector<int>& labels, const std::vector<double>& scores) {
  double num = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) num += 1.0;
      else if (scores[i] == scores[j]) num += 0.5;
    }
  }
  return num / pairs;
}

struct SvmOptimum {
  std::vector<double> w;  // weights followed by the bias
  double objective = std::numeric_limits<double>::infinity();
  int kkt_points = 0;
};

// Solves A x = b by Gaussian elimination with partial pivoting; false when
// (numerically) singular.
inline bool solve(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-10) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < n; ++k) s -= a[c][k] * x[k];
    x[c] = s / a[c][c];
  }
  return true;
}

/// Exact minimizer of 1/2 |w~|^2 + sum_i U_i max(0, 1 - y_i w~.(x_i, 1)) by
/// enumerating every assignment of points to {at bound, on margin, inactive}
/// and solving the on-margin equations. The primal is strictly convex, so
/// any assignment satisfying the optimality conditions gives the optimum.
inline SvmOptimum svm_exhaustive(const std::vector<std::vector<double>>& x,
                                 const std::vector<int>& y, const std::vector<double>& upper) {
  const std::size_t n = x.size();
  const std::size_t d = x.front().size() + 1;
  std::vector<std::vector<double>> z(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k + 1 < d; ++k) z[i][k] = y[i] * x[i][k];
    z[i][d - 1] = y[i];
  }
  const auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += a[k] * b[k];
    return s;
  };
  const double tol = 1e-9;

  SvmOptimum best;
  std::size_t states = 1;
  for (std::size_t i = 0; i < n; ++i) states *= 3;
  std::vector<int> s(n);
  for (std::size_t code = 0; code < states; ++code) {
    std::size_t c = code;
    std::vector<std::size_t> margin;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<int>(c % 3);  // 0 inactive, 1 on margin, 2 at bound
      c /= 3;
      if (s[i] == 1) margin.push_back(i);
    }
    if (margin.size() > d) continue;
    std::vector<double> g(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] == 2) {
        for (std::size_t k = 0; k < d; ++k) g[k] += upper[i] * z[i][k];
      }
    }
    std::vector<double> beta;
    if (!margin.empty()) {
      std::vector<std::vector<double>> gram(margin.size(), std::vector<double>(margin.size()));
      std::vector<double> rhs(margin.size());
      for (std::size_t a = 0; a < margin.size(); ++a) {
        for (std::size_t b = 0; b < margin.size(); ++b) gram[a][b] = dot(z[margin[a]], z[margin[b]]);
        rhs[a] = 1.0 - dot(z[margin[a]], g);
      }
      if (!solve(gram, rhs, beta)) continue;
    }
    bool ok = true;
    std::vector<double> w = g;
    for (std::size_t a = 0; a < margin.size(); ++a) {
      if (beta[a] < -tol || beta[a] > upper[margin[a]] + tol) ok = false;
      for (std::size_t k = 0; k < d; ++k) w[k] += beta[a] * z[margin[a]][k];
    }
    for (std::size_t i = 0; i < n && ok; ++i) {
      const double m = dot(z[i], w);
      if (s[i] == 0 && m < 1.0 - tol) ok = false;
      if (s[i] == 2 && m > 1.0 + tol) ok = false;
    }
    if (!ok) continue;
    double obj = 0.5 * dot(w, w);
    for (std::size_t i = 0; i < n; ++i) obj += upper[i] * std::max(0.0, 1.0 - dot(z[i], w));
    ++best.kkt_points;
    if (obj < best.objective) {
      best.objective = obj;
      best.w = w;
    }
  }
  return best;
}

/// Annotated corpus whose per-task exclusion reproduces the post-exclusion
/// counts (904/2836 penetrance, 1230/2523 prevalence) and the raw
/// penetrance, prevalence and ambiguity counts over 3919 papers. Only 65
/// papers are polymorphism studies: with 295, no overlap pattern satisfies
/// every other count under the exclusion rule.
inline triage::Dataset annotated_fixture() {
  triage::Dataset ds;
  std::size_t id = 0;
  const auto add = [&](std::size_t count, auto&& make) {
    for (std::size_t i = 0; i < count; ++i) {
      triage::AnnotationRecord a = make(i);
      const auto pmid = std::to_string(1000000 + id++);
      ds.add(triage::Paper(pmid, "Title " + pmid, "Abstract " + pmid), a);
    }
  };
  // Polymorphism only.
  add(60, [](std::size_t) { return triage::AnnotationRecord{false, false, true, false, false}; });
  // Polymorphism and ambiguous penetrance.
  add(5, [](std::size_t) { return triage::AnnotationRecord{false, false, true, true, false}; });
  // Ambiguous penetrance only; 85 carry a positive penetrance label.
  add(114, [](std::size_t i) { return triage::AnnotationRecord{i < 85, false, false, true, false}; });
  // Ambiguous prevalence only; 61 carry a positive prevalence label.
  add(101, [](std::size_t i) { return triage::AnnotationRecord{false, i < 61, false, false, true}; });
  // Unambiguous remainder.
  add(3639, [](std::size_t i) {
    return triage::AnnotationRecord{i < 904, i >= 500 && i < 1730, false, false, false};
  });
  return ds;
}

}  // namespace oracle

#pragma once
// Annotated-paper data model: JSONL and MEDLINE ingestion, per-task
// filtering, seeded splitting, PubMed query construction, dataset statistics.

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "triage/error.hpp"
#include "triage/rng.hpp"

namespace triage {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace detail

struct Paper {
  std::string pmid;
  std::string title;
  std::string abstract;
  bool abstract_missing = true;

  Paper() = default;
  Paper(std::string pmid_, std::string title_, std::string abstract_)
      : pmid(std::move(pmid_)), title(std::move(title_)), abstract(std::move(abstract_)) {
    abstract_missing = detail::trim(abstract).empty();
  }

  /// Title and abstract joined by one space; the unit every model reads.
  std::string text() const { return title + " " + abstract; }
};

struct AnnotationRecord {
  bool penetrance = false;
  bool prevalence = false;
  bool polymorphism = false;
  bool ambiguous_penetrance = false;
  bool ambiguous_prevalence = false;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

struct DatasetEntry {
  Paper paper;
  AnnotationRecord annotation;
};

/// Ordered, pmid-unique collection of annotated papers.
class Dataset {
 public:
  void add(Paper paper, AnnotationRecord annotation) {
    if (paper.pmid.empty()) throw Error(ErrorCode::MissingField, "empty pmid");
    if (!pmids_.insert(paper.pmid).second) {
      throw Error(ErrorCode::DuplicatePmid, "duplicate pmid " + paper.pmid);
    }
    entries_.push_back({std::move(paper), annotation});
  }

  const std::vector<DatasetEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<DatasetEntry> entries_;
  std::unordered_set<std::string> pmids_;
};

enum class Task { Penetrance, Prevalence };

inline const char* to_string(Task task) {
  return task == Task::Penetrance ? "penetrance" : "prevalence";
}

inline Task parse_task(std::string_view name) {
  if (name == "penetrance") return Task::Penetrance;
  if (name == "prevalence") return Task::Prevalence;
  throw Error(ErrorCode::InvalidArgument, "unknown task '" + std::string(name) + "'");
}

inline bool task_label(const AnnotationRecord& a, Task task) {
  return task == Task::Penetrance ? a.penetrance : a.prevalence;
}

inline bool task_ambiguous(const AnnotationRecord& a, Task task) {
  return task == Task::Penetrance ? a.ambiguous_penetrance : a.ambiguous_prevalence;
}

struct Example {
  Paper paper;
  bool positive = false;
};

struct LabeledSet {
  Task task = Task::Penetrance;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::size_t positives() const {
    return static_cast<std::size_t>(std::count_if(
        examples.begin(), examples.end(), [](const Example& e) { return e.positive; }));
  }
  std::vector<int> labels() const {
    std::vector<int> out;
    out.reserve(examples.size());
    for (const auto& e : examples) out.push_back(e.positive ? 1 : 0);
    return out;
  }
};

/// Split proportions as integer weights over a common denominator, so the
/// floor rule is exact (60/20/20 of 3740 is 2244/748/748, never 2243).
struct SplitRatios {
  std::uint64_t train = 3;
  std::uint64_t tune = 1;
  std::uint64_t eval = 1;

  std::uint64_t total() const { return train + tune + eval; }

  /// Parses three decimal fractions such as "0.6,0.2,0.2"; they must sum to 1.
  static SplitRatios parse(std::string_view text) {
    std::vector<std::pair<std::uint64_t, int>> parts;  // (digits, decimals)
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string_view::npos) end = text.size();
      const auto item = detail::trim(text.substr(start, end - start));
      std::uint64_t digits = 0;
      int decimals = -1;
      bool any = false;
      for (char c : item) {
        if (c == '.' && decimals < 0) {
          decimals = 0;
        } else if (c >= '0' && c <= '9') {
          digits = digits * 10 + static_cast<std::uint64_t>(c - '0');
          if (decimals >= 0) ++decimals;
          any = true;
          if (digits > 1'000'000'000'000ULL) {
            throw Error(ErrorCode::InvalidArgument, "ratio has too many digits");
          }
        } else {
          throw Error(ErrorCode::InvalidArgument, "bad ratio '" + std::string(item) + "'");
        }
      }
      if (!any) throw Error(ErrorCode::InvalidArgument, "empty ratio");
      parts.emplace_back(digits, std::max(decimals, 0));
      start = end + 1;
    }
    if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "expected three ratios");
    int scale = 0;
    for (const auto& p : parts) scale = std::max(scale, p.second);
    if (scale > 9) throw Error(ErrorCode::InvalidArgument, "too many decimals in ratio");
    std::uint64_t denom = 1;
    for (int i = 0; i < scale; ++i) denom *= 10;
    std::uint64_t w[3];
    for (int i = 0; i < 3; ++i) {
      w[i] = parts[i].first;
      for (int k = parts[i].second; k < scale; ++k) w[i] *= 10;
    }
    SplitRatios r{w[0], w[1], w[2]};
    if (r.total() != denom) throw Error(ErrorCode::InvalidArgument, "ratios must sum to 1");
    return r;
  }
};

struct Split {
  LabeledSet train;
  LabeledSet tune;
  LabeledSet eval;
  std::uint64_t seed = 0;
  SplitRatios ratios;
};

enum class QueryVariant { RiskFiltered, GeneOnly };

struct QuerySpec {
  std::string gene_name;
  std::optional<std::string> gene_mesh;
  std::optional<std::string> syndrome_name;
  std::optional<std::string> syndrome_mesh;
  std::optional<std::string> cancer_name;
  std::optional<std::string> cancer_mesh;
  QueryVariant variant = QueryVariant::RiskFiltered;
};

struct FieldCount {
  std::size_t positive = 0;
  std::size_t negative = 0;
  friend bool operator==(const FieldCount&, const FieldCount&) = default;
};

struct StatsReport {
  std::size_t total = 0;
  FieldCount penetrance;
  FieldCount prevalence;
  FieldCount polymorphism;
  FieldCount ambiguous_penetrance;
  FieldCount ambiguous_prevalence;
  FieldCount penetrance_after_exclusion;
  FieldCount prevalence_after_exclusion;
};

// ---------------------------------------------------------------------------
// JSONL

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* field,
                                     std::size_t line, bool want_string) {
  const auto it = obj.find(field);
  if (it == obj.end() || (want_string ? !it->is_string() : !it->is_boolean())) {
    throw Error(ErrorCode::MissingField,
                "line " + std::to_string(line) + ": field '" + field + "'", line);
  }
  return *it;
}

inline nlohmann::json parse_object_line(const std::string& line, std::size_t line_no) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no), line_no);
  }
  if (!obj.is_object()) {
    throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no), line_no);
  }
  return obj;
}

inline Paper paper_from_json(const nlohmann::json& obj, std::size_t line_no) {
  auto pmid = require(obj, "pmid", line_no, true).get<std::string>();
  if (pmid.empty()) {
    throw Error(ErrorCode::MissingField, "line " + std::to_string(line_no) + ": empty pmid",
                line_no);
  }
  return Paper(std::move(pmid), require(obj, "title", line_no, true).get<std::string>(),
               require(obj, "abstract", line_no, true).get<std::string>());
}

// Blank lines are skipped; the line counter still advances.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    fn(line, line_no);
  }
}

}  // namespace detail

/// Reads the annotated corpus format: one JSON object per line carrying
/// pmid, title, abstract and the five annotation booleans.
inline Dataset parse_jsonl(std::istream& in) {
  Dataset ds;
  detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const auto obj = detail::parse_object_line(line, line_no);
    Paper paper = detail::paper_from_json(obj, line_no);
    AnnotationRecord a;
    a.penetrance = detail::require(obj, "penetrance", line_no, false).get<bool>();
    a.prevalence = detail::require(obj, "prevalence", line_no, false).get<bool>();
    a.polymorphism = detail::require(obj, "polymorphism", line_no, false).get<bool>();
    a.ambiguous_penetrance =
        detail::require(obj, "ambiguous_penetrance", line_no, false).get<bool>();
    a.ambiguous_prevalence =
        detail::require(obj, "ambiguous_prevalence", line_no, false).get<bool>();
    ds.add(std::move(paper), a);
  });
  return ds;
}

inline Dataset parse_jsonl(const std::string& text) {
  std::istringstream in(text);
  return parse_jsonl(in);
}

/// Reads pmid/title/abstract only; annotation fields, if present, are ignored.
inline std::vector<Paper> parse_papers_jsonl(std::istream& in) {
  std::vector<Paper> papers;
  std::unordered_set<std::string> seen;
  detail::for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    Paper p = detail::paper_from_json(detail::parse_object_line(line, line_no), line_no);
    if (!seen.insert(p.pmid).second) {
      throw Error(ErrorCode::DuplicatePmid, "duplicate pmid " + p.pmid, line_no);
    }
    papers.push_back(std::move(p));
  });
  return papers;
}

inline void serialize_jsonl(const Dataset& ds, std::ostream& out) {
  for (const auto& e : ds.entries()) {
    nlohmann::ordered_json obj;
    obj["pmid"] = e.paper.pmid;
    obj["title"] = e.paper.title;
    obj["abstract"] = e.paper.abstract;
    obj["penetrance"] = e.annotation.penetrance;
    obj["prevalence"] = e.annotation.prevalence;
    obj["polymorphism"] = e.annotation.polymorphism;
    obj["ambiguous_penetrance"] = e.annotation.ambiguous_penetrance;
    obj["ambiguous_prevalence"] = e.annotation.ambiguous_prevalence;
    out << obj.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  }
}

inline std::string serialize_jsonl(const Dataset& ds) {
  std::ostringstream out;
  serialize_jsonl(ds, out);
  return out.str();
}

inline void serialize_papers_jsonl(const std::vector<Paper>& papers, std::ostream& out) {
  for (const auto& p : papers) {
    nlohmann::ordered_json obj;
    obj["pmid"] = p.pmid;
    obj["title"] = p.title;
    obj["abstract"] = p.abstract;
    out << obj.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace) << '\n';
  }
}

// ---------------------------------------------------------------------------
// MEDLINE

/// Parses the MEDLINE tagged flat format (PMID, TI and AB are kept).
/// Continuation lines start with six spaces and are joined with one space.
/// `MissingPmid` carries the 0-based record index.
inline std::vector<Paper> parse_medline(std::istream& in) {
  struct Record {
    std::optional<std::string> pmid;
    std::string title;
    std::string abstract;
    bool any = false;
  };
  std::vector<Paper> papers;
  Record rec;
  std::string* current = nullptr;
  std::size_t record_index = 0;

  const auto append = [](std::string& dst, std::string_view value) {
    if (value.empty()) return;
    if (!dst.empty()) dst += ' ';
    dst += value;
  };
  const auto flush = [&] {
    if (!rec.any) return;
    if (!rec.pmid || rec.pmid->empty()) {
      throw Error(ErrorCode::MissingPmid, "record " + std::to_string(record_index),
                  record_index);
    }
    papers.emplace_back(*rec.pmid, rec.title, rec.abstract);
    ++record_index;
    rec = Record{};
    current = nullptr;
  };

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) {
      flush();
      continue;
    }
    rec.any = true;
    if (line.size() >= 6 && line.compare(0, 6, "      ") == 0) {
      if (current != nullptr) append(*current, detail::trim(line));
      continue;
    }
    if (line.size() < 5 || line[4] != '-') {
      current = nullptr;
      continue;
    }
    const auto tag = detail::trim(std::string_view(line).substr(0, 4));
    const auto value = detail::trim(std::string_view(line).substr(5));
    if (tag == "PMID") {
      if (!rec.pmid) rec.pmid = std::string(value);
      current = nullptr;
    } else if (tag == "TI") {
      current = &rec.title;
      append(rec.title, value);
    } else if (tag == "AB") {
      current = &rec.abstract;
      append(rec.abstract, value);
    } else {
      current = nullptr;
    }
  }
  flush();
  return papers;
}

inline std::vector<Paper> parse_medline(const std::string& text) {
  std::istringstream in(text);
  return parse_medline(in);
}

// ---------------------------------------------------------------------------
// Filtering, splitting, statistics

/// Drops polymorphism papers and papers whose ambiguity flag for `task` is
/// set; the rest are labeled by the task's annotation field, order kept.
inline LabeledSet filter_for_task(const Dataset& ds, Task task) {
  LabeledSet out;
  out.task = task;
  for (const auto& e : ds.entries()) {
    if (e.annotation.polymorphism || task_ambiguous(e.annotation, task)) continue;
    out.examples.push_back({e.paper, task_label(e.annotation, task)});
  }
  return out;
}

/// Train and tune sizes are floor(n * ratio); eval takes the remainder.
inline std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  if (ratios.total() == 0) throw Error(ErrorCode::InvalidArgument, "ratios sum to zero");
  const auto big = static_cast<unsigned __int128>(n);
  const auto train = static_cast<std::size_t>(big * ratios.train / ratios.total());
  const auto tune = static_cast<std::size_t>(big * ratios.tune / ratios.total());
  return {train, tune, n - train - tune};
}

/// Fisher-Yates shuffle under `seed`, then contiguous partition.
inline Split split_dataset(const LabeledSet& set, const SplitRatios& ratios,
                           std::uint64_t seed) {
  if (set.empty()) throw Error(ErrorCode::EmptySet, "cannot split an empty set");
  std::vector<std::size_t> order(set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  const auto sizes = split_sizes(set.size(), ratios);
  Split split;
  split.seed = seed;
  split.ratios = ratios;
  LabeledSet* parts[3] = {&split.train, &split.tune, &split.eval};
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    parts[k]->task = set.task;
    parts[k]->examples.reserve(sizes[k]);
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      parts[k]->examples.push_back(set.examples[order[pos++]]);
    }
  }
  return split;
}

inline StatsReport dataset_stats(const Dataset& ds) {
  StatsReport r;
  r.total = ds.size();
  const auto tally = [](FieldCount& c, bool v) { v ? ++c.positive : ++c.negative; };
  for (const auto& e : ds.entries()) {
    tally(r.penetrance, e.annotation.penetrance);
    tally(r.prevalence, e.annotation.prevalence);
    tally(r.polymorphism, e.annotation.polymorphism);
    tally(r.ambiguous_penetrance, e.annotation.ambiguous_penetrance);
    tally(r.ambiguous_prevalence, e.annotation.ambiguous_prevalence);
  }
  for (Task task : {Task::Penetrance, Task::Prevalence}) {
    const auto set = filter_for_task(ds, task);
    FieldCount& c = task == Task::Penetrance ? r.penetrance_after_exclusion
                                             : r.prevalence_after_exclusion;
    c.positive = set.positives();
    c.negative = set.size() - c.positive;
  }
  return r;
}

// ---------------------------------------------------------------------------
// PubMed queries

/// Expands the PubMed search template. Absent optional names drop their
/// OR-alternative; RiskFiltered adds the fixed risk clause and a cancer clause.
inline std::string build_pubmed_query(const QuerySpec& spec) {
  if (spec.gene_name.empty()) throw Error(ErrorCode::InvalidArgument, "gene name is empty");
  const auto quoted = [](const std::string& v, std::string_view tag) {
    return "\"" + v + "\"" + std::string(tag);
  };
  const auto clause = [](const std::vector<std::string>& alts) {
    std::string s = "(";
    for (std::size_t i = 0; i < alts.size(); ++i) {
      if (i) s += " OR ";
      s += alts[i];
    }
    return s + ")";
  };

  std::vector<std::string> gene{quoted(spec.gene_name, "[TIAB]")};
  if (spec.gene_mesh) gene.push_back(quoted(*spec.gene_mesh, ""));
  if (spec.syndrome_name) gene.push_back(quoted(*spec.syndrome_name, "[TIAB]"));
  if (spec.syndrome_mesh) gene.push_back(quoted(*spec.syndrome_mesh, ""));
  if (spec.variant == QueryVariant::GeneOnly) return clause(gene);

  if (!spec.cancer_name && !spec.cancer_mesh) {
    throw Error(ErrorCode::MissingCancer, "risk-filtered query needs a cancer name or MeSH");
  }
  const std::vector<std::string> risk{"\"Risk\"[Mesh]", "\"Risk\"[TI]", "\"Penetrance\"[TIAB]",
                                      "\"Hazard ratio\"[TIAB]"};
  std::vector<std::string> cancer;
  if (spec.cancer_mesh) cancer.push_back(quoted(*spec.cancer_mesh, "[Mesh]"));
  if (spec.cancer_name) cancer.push_back(quoted(*spec.cancer_name, "[TIAB]"));
  return clause(gene) + " AND " + clause(risk) + " AND " + clause(cancer);
}

}  // namespace triage

#pragma once
// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data or
// model error. All randomness comes from --seed.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "triage/corpus.hpp"
#include "triage/eval.hpp"
#include "triage/model_io.hpp"
#include "triage/pipeline.hpp"
#include "triage/report_io.hpp"
#include "triage/synth.hpp"

namespace triage::cli {

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << content;
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path);
}

inline Dataset read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  return parse_jsonl(in);
}

inline void write_corpus(const std::string& path, const Dataset& ds) {
  write_file(path, serialize_jsonl(ds));
}

// Rebuilds corpus rows for a labeled subset, keeping original annotations.
inline Dataset subset_dataset(const LabeledSet& set,
                              const std::map<std::string, AnnotationRecord>& annotations) {
  Dataset ds;
  for (const auto& e : set.examples) ds.add(e.paper, annotations.at(e.paper.pmid));
  return ds;
}

inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file(path, content);
  }
}

struct ModelOptions {
  std::string kind = "svm";
  std::string task = "penetrance";
  std::uint64_t seed = 0;
  // svm
  std::optional<double> c;
  std::vector<double> c_grid = default_c_grid();
  std::string class_weighting = "uniform";
  double tolerance = 1e-3;
  int max_iterations = 1000;
  int ngram_min = 1;
  int ngram_max = 2;
  std::size_t min_df = 2;
  // cnn
  CnnConfig cnn;

  SvmConfig svm_config() const {
    SvmConfig c_cfg;
    c_cfg.C = c.value_or(1.0);
    c_cfg.tolerance = tolerance;
    c_cfg.max_iterations = max_iterations;
    c_cfg.class_weighting = parse_class_weighting(class_weighting);
    c_cfg.seed = seed;
    return c_cfg;
  }
  FeatureConfig features() const { return {NgramRange{ngram_min, ngram_max}, min_df}; }
  CnnConfig cnn_config() const {
    CnnConfig cfg = cnn;
    cfg.seed = seed;
    return cfg;
  }
};

inline void add_model_options(CLI::App* cmd, ModelOptions& o, bool with_kind) {
  if (with_kind) {
    cmd->add_option("--model", o.kind, "Model kind")
        ->check(CLI::IsMember({"svm", "cnn"}))
        ->capture_default_str();
  }
  cmd->add_option("--task", o.task, "Classification task")
      ->check(CLI::IsMember({"penetrance", "prevalence"}))
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--c", o.c, "SVM cost C (skips tuning when given)");
  cmd->add_option("--c-grid", o.c_grid, "SVM C values for tuning")->delimiter(',');
  cmd->add_option("--class-weighting", o.class_weighting, "SVM class weighting")
      ->check(CLI::IsMember({"uniform", "balanced"}))
      ->capture_default_str();
  cmd->add_option("--tolerance", o.tolerance, "SVM stopping tolerance")->capture_default_str();
  cmd->add_option("--max-iterations", o.max_iterations, "SVM epochs")->capture_default_str();
  cmd->add_option("--ngram-min", o.ngram_min, "Smallest ngram")->capture_default_str();
  cmd->add_option("--ngram-max", o.ngram_max, "Largest ngram")->capture_default_str();
  cmd->add_option("--min-df", o.min_df, "Minimum document frequency")->capture_default_str();
  cmd->add_option("--embedding-dim", o.cnn.embedding_dim, "CNN embedding size")
      ->capture_default_str();
  cmd->add_option("--filter-widths", o.cnn.filter_widths, "CNN filter widths")->delimiter(',');
  cmd->add_option("--filters", o.cnn.filters_per_width, "CNN filters per width")
      ->capture_default_str();
  cmd->add_option("--max-seq-len", o.cnn.max_sequence_length, "CNN sequence cap")
      ->capture_default_str();
  cmd->add_option("--dropout", o.cnn.dropout_rate, "CNN dropout rate")->capture_default_str();
  cmd->add_option("--learning-rate", o.cnn.learning_rate, "CNN Adam step size")
      ->capture_default_str();
  cmd->add_option("--epochs", o.cnn.epochs, "CNN epochs")->capture_default_str();
  cmd->add_option("--batch-size", o.cnn.batch_size, "CNN minibatch size")->capture_default_str();
  cmd->add_option("--min-token-df", o.cnn.min_token_df, "CNN token minimum document frequency")
      ->capture_default_str();
}

inline LabeledSet read_labeled(const std::string& path, Task task) {
  return filter_for_task(read_corpus(path), task);
}

// Fits the requested model kind; the SVM tunes C over the grid when no --c
// was given and a tuning set is available.
inline ModelFile train_model(const ModelOptions& o, const LabeledSet& train, const LabeledSet& tune,
                             std::ostream& log) {
  ModelFile file;
  file.metadata.seed = o.seed;
  if (o.kind == "svm") {
    SvmConfig cfg = o.svm_config();
    const auto feats = svm_features(train, o.features());
    if (!o.c && !tune.empty()) {
      const auto result = tune_svm(train, tune, o.c_grid, cfg, o.features());
      cfg = result.best;
      log << "tuned C=" << format_double(cfg.C)
          << " tuning accuracy=" << format_double(result.best_accuracy) << "\n";
    }
    file.model = fit_svm_classifier(feats, train.task, cfg);
  } else {
    file.model = fit_cnn_classifier(train, tune, o.cnn_config());
  }
  return file;
}

}  // namespace detail

/// Parses `argv` and runs one subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"Literature triage: penetrance/prevalence abstract classifiers", "triage"};
  app.set_config("--config", "", "Read option values from a TOML/INI file");
  app.require_subcommand(1);

  // synth
  SynthSpec synth;
  std::string synth_task = "penetrance";
  std::string synth_out;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a seeded synthetic annotated corpus");
  cmd_synth->add_option("--out", synth_out, "Output corpus JSONL")->required();
  cmd_synth->add_option("--num-docs", synth.num_docs)->capture_default_str();
  cmd_synth->add_option("--positive-rate", synth.positive_rate)->capture_default_str();
  cmd_synth->add_option("--label-noise", synth.label_noise)->capture_default_str();
  cmd_synth->add_option("--background-vocab", synth.background_vocab_size)->capture_default_str();
  cmd_synth->add_option("--doc-length-min", synth.doc_length_min)->capture_default_str();
  cmd_synth->add_option("--doc-length-max", synth.doc_length_max)->capture_default_str();
  cmd_synth->add_option("--signals-min", synth.signals_min)->capture_default_str();
  cmd_synth->add_option("--signals-max", synth.signals_max)->capture_default_str();
  cmd_synth->add_option("--task", synth_task)
      ->check(CLI::IsMember({"penetrance", "prevalence"}))
      ->capture_default_str();
  cmd_synth->add_option("--seed", synth.seed)->capture_default_str();

  // ingest
  std::string ingest_in;
  std::string ingest_out;
  auto* cmd_ingest = app.add_subcommand("ingest", "Convert MEDLINE text to unannotated JSONL");
  cmd_ingest->add_option("--input", ingest_in, "MEDLINE file")->required();
  cmd_ingest->add_option("--out", ingest_out, "Output JSONL (default stdout)");

  // stats
  std::string stats_in;
  std::string stats_out;
  auto* cmd_stats = app.add_subcommand("stats", "Annotation counts before and after exclusion");
  cmd_stats->add_option("--input", stats_in, "Corpus JSONL")->required();
  cmd_stats->add_option("--out", stats_out, "Output JSON (default stdout)");

  // filter
  std::string filter_in;
  std::string filter_out;
  std::string filter_task = "penetrance";
  auto* cmd_filter = app.add_subcommand("filter", "Apply the exclusion rules for one task");
  cmd_filter->add_option("--input", filter_in, "Corpus JSONL")->required();
  cmd_filter->add_option("--task", filter_task)
      ->check(CLI::IsMember({"penetrance", "prevalence"}))
      ->required();
  cmd_filter->add_option("--out", filter_out, "Output corpus JSONL")->required();

  // split
  std::string split_in;
  std::string split_dir;
  std::string split_task = "penetrance";
  std::string split_ratios = "0.6,0.2,0.2";
  std::uint64_t split_seed = 0;
  auto* cmd_split = app.add_subcommand("split", "Filter for a task and split train/tune/eval");
  cmd_split->add_option("--input", split_in, "Corpus JSONL")->required();
  cmd_split->add_option("--task", split_task)
      ->check(CLI::IsMember({"penetrance", "prevalence"}))
      ->required();
  cmd_split->add_option("--seed", split_seed)->capture_default_str();
  cmd_split->add_option("--ratios", split_ratios)->capture_default_str();
  cmd_split->add_option("--out-dir", split_dir, "Directory for train/tune/eval.jsonl")->required();

  // train
  ModelOptions train_opts;
  std::string train_in;
  std::string tune_in;
  std::string train_out;
  std::string timestamp;
  auto* cmd_train = app.add_subcommand("train", "Train an SVM or CNN model");
  add_model_options(cmd_train, train_opts, true);
  cmd_train->add_option("--train", train_in, "Training corpus JSONL")->required();
  cmd_train->add_option("--tune", tune_in, "Tuning corpus JSONL");
  cmd_train->add_option("--out", train_out, "Model file")->required();
  cmd_train->add_option("--timestamp", timestamp, "Creation time recorded in the model file");

  // tune
  ModelOptions tune_opts;
  std::string tune_train_in;
  std::string tune_tune_in;
  std::string tune_out;
  std::vector<double> lr_grid{1e-4, 3e-4, 1e-3, 3e-3};
  auto* cmd_tune = app.add_subcommand("tune", "Grid-search hyper-parameters on the tuning set");
  add_model_options(cmd_tune, tune_opts, true);
  cmd_tune->add_option("--train", tune_train_in)->required();
  cmd_tune->add_option("--tune", tune_tune_in)->required();
  cmd_tune->add_option("--lr-grid", lr_grid, "CNN learning rates")->delimiter(',');
  cmd_tune->add_option("--out", tune_out, "Output JSON (default stdout)");

  // evaluate
  std::string eval_model;
  std::string eval_data;
  std::string eval_report;
  std::size_t replicates = 1000;
  std::uint64_t eval_seed = 0;
  auto* cmd_eval = app.add_subcommand("evaluate", "Metrics with bootstrap 95% intervals");
  cmd_eval->add_option("--model", eval_model)->required();
  cmd_eval->add_option("--data", eval_data, "Corpus JSONL")->required();
  cmd_eval->add_option("--report", eval_report, "Output JSON (default stdout)");
  cmd_eval->add_option("--replicates", replicates)->capture_default_str();
  cmd_eval->add_option("--seed", eval_seed)->capture_default_str();

  // predict
  std::string pred_model;
  std::string pred_in;
  std::string pred_out;
  auto* cmd_predict = app.add_subcommand("predict", "Score papers (JSONL with pmid/title/abstract)");
  cmd_predict->add_option("--model", pred_model)->required();
  cmd_predict->add_option("--input", pred_in)->required();
  cmd_predict->add_option("--out", pred_out, "Output CSV (default stdout)");

  // curve
  std::string curve_kind;
  std::string curve_model;
  std::string curve_data;
  std::string curve_out;
  ModelOptions curve_opts;
  std::string curve_train;
  std::string curve_tune;
  std::string curve_eval;
  std::vector<std::size_t> curve_sizes;
  auto* cmd_curve = app.add_subcommand("curve", "ROC or learning curve as CSV");
  cmd_curve->add_option("--kind", curve_kind)->check(CLI::IsMember({"roc", "learning"}))->required();
  cmd_curve->add_option("--out", curve_out, "Output CSV (default stdout)");
  cmd_curve->add_option("--model-file", curve_model, "Trained model (roc)");
  cmd_curve->add_option("--data", curve_data, "Corpus JSONL (roc)");
  add_model_options(cmd_curve, curve_opts, true);
  cmd_curve->add_option("--train", curve_train, "Training corpus (learning)");
  cmd_curve->add_option("--tune", curve_tune, "Tuning corpus (learning)");
  cmd_curve->add_option("--eval", curve_eval, "Evaluation corpus (learning)");
  cmd_curve->add_option("--sizes", curve_sizes, "Training sizes (learning)")->delimiter(',');

  // query
  QuerySpec query;
  std::string gene_mesh, syndrome, syndrome_mesh, cancer, cancer_mesh;
  std::string variant = "risk";
  auto* cmd_query = app.add_subcommand("query", "Build a PubMed search string");
  cmd_query->add_option("--gene", query.gene_name)->required();
  cmd_query->add_option("--gene-mesh", gene_mesh);
  cmd_query->add_option("--syndrome", syndrome);
  cmd_query->add_option("--syndrome-mesh", syndrome_mesh);
  cmd_query->add_option("--cancer", cancer);
  cmd_query->add_option("--cancer-mesh", cancer_mesh);
  cmd_query->add_option("--variant", variant)->check(CLI::IsMember({"risk", "gene"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (*cmd_synth) {
      synth.task = parse_task(synth_task);
      write_corpus(synth_out, generate_synthetic_corpus(synth));
    } else if (*cmd_ingest) {
      std::ifstream in(ingest_in, std::ios::binary);
      if (!in) throw Error(ErrorCode::Io, "cannot read " + ingest_in);
      std::ostringstream buf;
      serialize_papers_jsonl(parse_medline(in), buf);
      emit(ingest_out, buf.str(), out);
    } else if (*cmd_stats) {
      emit(stats_out, stats_json(dataset_stats(read_corpus(stats_in))).dump(2) + "\n", out);
    } else if (*cmd_filter) {
      const auto ds = read_corpus(filter_in);
      std::map<std::string, AnnotationRecord> ann;
      for (const auto& e : ds.entries()) ann[e.paper.pmid] = e.annotation;
      write_corpus(filter_out, subset_dataset(filter_for_task(ds, parse_task(filter_task)), ann));
    } else if (*cmd_split) {
      const auto ds = read_corpus(split_in);
      std::map<std::string, AnnotationRecord> ann;
      for (const auto& e : ds.entries()) ann[e.paper.pmid] = e.annotation;
      const auto split = split_dataset(filter_for_task(ds, parse_task(split_task)),
                                       SplitRatios::parse(split_ratios), split_seed);
      std::filesystem::create_directories(split_dir);
      const std::filesystem::path dir(split_dir);
      write_corpus((dir / "train.jsonl").string(), subset_dataset(split.train, ann));
      write_corpus((dir / "tune.jsonl").string(), subset_dataset(split.tune, ann));
      write_corpus((dir / "eval.jsonl").string(), subset_dataset(split.eval, ann));
      out << "train " << split.train.size() << "\ntune " << split.tune.size() << "\neval "
          << split.eval.size() << "\n";
    } else if (*cmd_train) {
      const Task task = parse_task(train_opts.task);
      const auto train = read_labeled(train_in, task);
      LabeledSet tune;
      tune.task = task;
      if (!tune_in.empty()) tune = read_labeled(tune_in, task);
      auto file = train_model(train_opts, train, tune, err);
      if (!timestamp.empty()) file.metadata.timestamp = timestamp;
      save_model(file, train_out);
    } else if (*cmd_tune) {
      const Task task = parse_task(tune_opts.task);
      const auto train = read_labeled(tune_train_in, task);
      const auto tune = read_labeled(tune_tune_in, task);
      nlohmann::ordered_json j;
      j["model_kind"] = tune_opts.kind;
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      if (tune_opts.kind == "svm") {
        const auto r = tune_svm(train, tune, tune_opts.c_grid, tune_opts.svm_config(),
                                tune_opts.features());
        for (std::size_t i = 0; i < r.accuracies.size(); ++i) {
          rows.push_back({{"C", tune_opts.c_grid[i]}, {"tuning_accuracy", r.accuracies[i]}});
        }
        j["best"] = {{"C", r.best.C}, {"tuning_accuracy", r.best_accuracy}};
      } else {
        std::vector<CnnConfig> configs;
        for (std::size_t i = 0; i < lr_grid.size(); ++i) {
          auto cfg = tune_opts.cnn_config();
          cfg.learning_rate = lr_grid[i];
          cfg.seed += i;
          configs.push_back(cfg);
        }
        const auto r = grid_tune<CnnConfig>(
            train, tune, configs, [](const CnnConfig& cfg, const LabeledSet& tr, const LabeledSet& tu) {
              return predict_papers(fit_cnn_classifier(tr, tu, cfg), tu);
            });
        for (std::size_t i = 0; i < r.accuracies.size(); ++i) {
          rows.push_back({{"learning_rate", lr_grid[i]}, {"tuning_accuracy", r.accuracies[i]}});
        }
        j["best"] = {{"learning_rate", r.best.learning_rate}, {"tuning_accuracy", r.best_accuracy}};
      }
      j["grid"] = std::move(rows);
      emit(tune_out, j.dump(2) + "\n", out);
    } else if (*cmd_eval) {
      const auto file = load_model(eval_model);
      const auto data = read_labeled(eval_data, file.task());
      if (data.empty()) throw Error(ErrorCode::EmptyInput, "no examples to evaluate");
      const auto labels = data.labels();
      std::vector<double> scores;
      double threshold = 0.0;
      if (file.is_svm()) {
        scores = score_papers(file.svm(), data);
        threshold = SvmClassifier::kThreshold;
      } else {
        scores = score_papers(file.cnn(), data);
        threshold = CnnClassifier::kThreshold;
      }
      const auto rep = evaluate_scores(labels, scores, threshold, replicates, eval_seed);
      emit(eval_report, report_json(rep, file.kind(), file.task()).dump(2) + "\n", out);
    } else if (*cmd_predict) {
      const auto file = load_model(pred_model);
      std::ifstream in(pred_in, std::ios::binary);
      if (!in) throw Error(ErrorCode::Io, "cannot read " + pred_in);
      const auto papers = parse_papers_jsonl(in);
      std::string csv = "pmid,score,label,abstract_missing\n";
      for (const auto& p : papers) {
        const double s = file.is_svm() ? file.svm().score(p) : file.cnn().score(p);
        const double thr = file.is_svm() ? SvmClassifier::kThreshold : CnnClassifier::kThreshold;
        csv += p.pmid + "," + format_double(s) + "," + (s > thr ? "1" : "0") + "," +
               (p.abstract_missing ? "1" : "0") + "\n";
      }
      emit(pred_out, csv, out);
    } else if (*cmd_curve) {
      if (curve_kind == "roc") {
        if (curve_model.empty() || curve_data.empty()) {
          err << "curve --kind roc needs --model-file and --data\n";
          return 1;
        }
        const auto file = load_model(curve_model);
        const auto data = read_labeled(curve_data, file.task());
        const auto scores =
            file.is_svm() ? score_papers(file.svm(), data) : score_papers(file.cnn(), data);
        emit(curve_out, roc_csv(roc_and_auc(data.labels(), scores).curve), out);
      } else {
        if (curve_train.empty() || curve_eval.empty() || curve_sizes.empty()) {
          err << "curve --kind learning needs --train, --eval and --sizes\n";
          return 1;
        }
        const Task task = parse_task(curve_opts.task);
        Split split;
        split.train = read_labeled(curve_train, task);
        split.eval = read_labeled(curve_eval, task);
        split.tune.task = task;
        if (!curve_tune.empty()) split.tune = read_labeled(curve_tune, task);
        split.seed = curve_opts.seed;
        // One C for every size: --c if given, else tuned once on the full training split.
        ModelOptions fixed = curve_opts;
        if (fixed.kind == "svm" && !fixed.c && !split.tune.empty()) {
          fixed.c = tune_svm(split.train, split.tune, fixed.c_grid, fixed.svm_config(),
                             fixed.features())
                        .best.C;
        }
        const auto curve = learning_curve(
            split, curve_sizes,
            [&](const LabeledSet& tr, const LabeledSet& ev) {
              if (fixed.kind == "svm") {
                return predict_papers(fit_svm_classifier(tr, fixed.svm_config(), fixed.features()), ev);
              }
              return predict_papers(fit_cnn_classifier(tr, split.tune, fixed.cnn_config()), ev);
            },
            curve_opts.seed);
        emit(curve_out, learning_curve_csv(curve), out);
      }
    } else if (*cmd_query) {
      if (!gene_mesh.empty()) query.gene_mesh = gene_mesh;
      if (!syndrome.empty()) query.syndrome_name = syndrome;
      if (!syndrome_mesh.empty()) query.syndrome_mesh = syndrome_mesh;
      if (!cancer.empty()) query.cancer_name = cancer;
      if (!cancer_mesh.empty()) query.cancer_mesh = cancer_mesh;
      query.variant = variant == "risk" ? QueryVariant::RiskFiltered : QueryVariant::GeneOnly;
      out << build_pubmed_query(query) << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const bool usage = e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::MissingCancer;
    return usage ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv{"triage"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace triage::cli

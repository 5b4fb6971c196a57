// tagsem: tag-based semantic feature pipeline for scene-image
// classification. Subcommands cover the full flow: synthesize a corpus,
// build per-category filter banks, extract codebook histograms, train and
// apply an RBF-kernel SVM, and run evaluation/ablation harnesses.

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tagsem/corpus.hpp"
#include "tagsem/embeddings.hpp"
#include "tagsem/errors.hpp"
#include "tagsem/eval.hpp"
#include "tagsem/features.hpp"
#include "tagsem/filterbank.hpp"
#include "tagsem/io.hpp"
#include "tagsem/svm.hpp"
#include "tagsem/synthetic.hpp"

namespace {

using namespace tagsem;

// "name=path" or bare path (name = filename stem).
std::pair<std::string, std::filesystem::path> parse_table_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq != std::string::npos && eq > 0)
    return {spec.substr(0, eq), std::filesystem::path(spec.substr(eq + 1))};
  const std::filesystem::path path(spec);
  return {path.stem().string(), path};
}

EmbeddingEnsemble load_ensemble(const std::vector<std::string>& specs) {
  std::vector<std::shared_ptr<const EmbeddingTable>> tables;
  for (const std::string& spec : specs) {
    const auto [name, path] = parse_table_spec(spec);
    tables.push_back(std::make_shared<EmbeddingTable>(load_table(path, name)));
  }
  return EmbeddingEnsemble(std::move(tables));
}

std::vector<TagDocument> load_docs(const std::filesystem::path& path) {
  return preprocess_corpus(load_corpus(path));
}

std::vector<double> parse_threshold_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad threshold value \"" + item + "\"");
    }
  }
  if (out.empty()) throw std::invalid_argument("empty threshold list");
  return out;
}

// Shared flags for the evaluation-style subcommands.
struct EvalOptions {
  std::string corpus_path;
  std::vector<std::string> embedding_specs;
  PipelineConfig config;
  std::string splits_path;
  std::string save_splits_path;
  int sets = 10;
  int train_per_category = 70;
  int test_per_category = 0;  // 0 = all remaining
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_path;
};

void add_config_flags(CLI::App* cmd, PipelineConfig& config) {
  cmd->add_option("--delta", config.delta, "Filter-bank eligibility threshold")
      ->capture_default_str();
  cmd->add_option("--threshold-t", config.t_threshold, "Feature-counting threshold T")
      ->capture_default_str();
  cmd->add_option("--top-n", config.top_n, "Candidate tags kept per training image")
      ->capture_default_str();
  cmd->add_option("--gamma", config.gamma, "RBF kernel width")->capture_default_str();
  cmd->add_option("--c-penalty", config.c_penalty, "SVM cost C")->capture_default_str();
}

void add_eval_flags(CLI::App* cmd, EvalOptions& opt) {
  cmd->add_option("--corpus", opt.corpus_path, "Corpus file (JSON lines)")->required();
  cmd->add_option("--embeddings", opt.embedding_specs,
                  "Embedding table, as path or name=path (repeatable)")
      ->required();
  add_config_flags(cmd, opt.config);
  cmd->add_option("--splits", opt.splits_path, "Explicit split file (overrides protocol flags)");
  cmd->add_option("--save-splits", opt.save_splits_path, "Write the splits used to this file");
  cmd->add_option("--sets", opt.sets, "Number of train/test sets")->capture_default_str();
  cmd->add_option("--train-per-category", opt.train_per_category, "Training docs per category")
      ->capture_default_str();
  cmd->add_option("--test-per-category", opt.test_per_category,
                  "Test docs per category (0 = all remaining)")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Split sampling seed")->capture_default_str();
  cmd->add_option("--jobs", opt.jobs, "Concurrent split workers")->capture_default_str();
  cmd->add_option("--out", opt.out_path, "Report file (CSV)")->required();
}

std::vector<SplitSpec> resolve_splits(const EvalOptions& opt,
                                      std::span<const TagDocument> docs) {
  std::vector<SplitSpec> splits;
  if (!opt.splits_path.empty()) {
    splits = load_splits(opt.splits_path);
  } else {
    splits = make_splits(docs, opt.sets, opt.train_per_category,
                         opt.test_per_category > 0 ? std::optional<int>(opt.test_per_category)
                                                   : std::nullopt,
                         opt.seed);
  }
  if (!opt.save_splits_path.empty()) save_splits(splits, opt.save_splits_path);
  return splits;
}

int run(int argc, char** argv) {
  CLI::App app{"tag-based semantic features for scene-image classification"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus and tables");
  SynthParams sp;
  std::string synth_corpus_out, synth_emb_prefix;
  synth->add_option("--categories", sp.categories)->capture_default_str();
  synth->add_option("--docs-per-category", sp.docs_per_category)->capture_default_str();
  synth->add_option("--vocab-per-category", sp.vocab_per_category)->capture_default_str();
  synth->add_option("--dim", sp.dim)->capture_default_str();
  synth->add_option("--tightness", sp.tightness)->capture_default_str();
  synth->add_option("--noise", sp.noise_rate)->capture_default_str();
  synth->add_option("--tags-per-doc", sp.tags_per_doc)->capture_default_str();
  synth->add_option("--tables", sp.tables)->capture_default_str();
  synth->add_option("--seed", sp.seed)->capture_default_str();
  synth->add_option("--out-corpus", synth_corpus_out, "Corpus output path")->required();
  synth->add_option("--out-embeddings", synth_emb_prefix,
                    "Embedding output prefix; writes <prefix>-<name>.txt per table")
      ->required();

  // build-bank
  auto* build = app.add_subcommand("build-bank", "Build filter banks and the codebook");
  std::string build_corpus, build_out;
  std::vector<std::string> build_embeddings;
  PipelineConfig build_config;
  build->add_option("--corpus", build_corpus)->required();
  build->add_option("--embeddings", build_embeddings)->required();
  add_config_flags(build, build_config);
  build->add_option("--out", build_out, "Codebook output path (JSON)")->required();

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "Extract histogram features");
  std::string ex_corpus, ex_codebook, ex_out;
  std::vector<std::string> ex_embeddings;
  PipelineConfig ex_config;
  extract_cmd->add_option("--corpus", ex_corpus)->required();
  extract_cmd->add_option("--codebook", ex_codebook)->required();
  extract_cmd->add_option("--embeddings", ex_embeddings)->required();
  add_config_flags(extract_cmd, ex_config);
  extract_cmd->add_option("--out", ex_out, "Feature CSV output path")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a one-vs-rest RBF SVM on features");
  std::string tr_features, tr_out;
  PipelineConfig tr_config;
  add_config_flags(train_cmd, tr_config);
  train_cmd->add_option("--features", tr_features, "Feature CSV with category labels")
      ->required();
  train_cmd->add_option("--out", tr_out, "Model output path (JSON)")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict labels for features");
  std::string pr_features, pr_model, pr_out;
  predict_cmd->add_option("--features", pr_features)->required();
  predict_cmd->add_option("--model", pr_model)->required();
  predict_cmd->add_option("--out", pr_out, "Prediction CSV output path")->required();

  // eval / ablate-threshold / ablate-embeddings
  auto* eval_cmd = app.add_subcommand("eval", "Full pipeline evaluation over splits");
  EvalOptions eval_opt;
  add_eval_flags(eval_cmd, eval_opt);

  auto* abl_t = app.add_subcommand("ablate-threshold", "Accuracy per feature threshold T");
  EvalOptions ablt_opt;
  std::string thresholds_text = "0.3,0.4,0.5,0.6,0.7,0.8";
  add_eval_flags(abl_t, ablt_opt);
  abl_t->add_option("--thresholds", thresholds_text, "Comma-separated T values")
      ->capture_default_str();

  auto* abl_e = app.add_subcommand("ablate-embeddings",
                                   "Accuracy per single embedding table and averaged");
  EvalOptions able_opt;
  add_eval_flags(abl_e, able_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) {
      const SynthCorpus corpus = generate_synthetic(sp);
      save_corpus(corpus.records, synth_corpus_out);
      for (const EmbeddingTable& table : corpus.tables)
        save_table(table, synth_emb_prefix + "-" + table.name() + ".txt");
      std::cout << "wrote " << corpus.records.size() << " records, " << corpus.tables.size()
                << " tables\n";
    } else if (build->parsed()) {
      build_config.validate();
      const auto docs = load_docs(build_corpus);
      const auto ensemble = load_ensemble(build_embeddings);
      const Codebook cb = build_codebook(build_filter_banks(docs, ensemble, build_config));
      save_codebook(cb, build_out);
      std::cout << "codebook: " << cb.size() << " filter words from " << cb.categories.size()
                << " categories\n";
    } else if (extract_cmd->parsed()) {
      ex_config.validate();
      const auto docs = load_docs(ex_corpus);
      const Codebook cb = load_codebook(ex_codebook);
      const auto ensemble = load_ensemble(ex_embeddings);
      const auto features = extract_matrix(docs, cb, ensemble, ex_config.t_threshold);
      save_features(features, ex_out);
      std::cout << "features: " << features.size() << " rows x " << cb.size() << " columns\n";
    } else if (train_cmd->parsed()) {
      tr_config.validate();
      const auto features = load_features(tr_features);
      if (features.empty()) throw ParseError(tr_features + ": no feature rows");
      Eigen::MatrixXd X(static_cast<Eigen::Index>(features.size()),
                        features.front().counts.size());
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < features.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = features[i].counts.cast<double>();
        labels.push_back(features[i].category);
      }
      const SvmModel model = train(X, labels, tr_config.c_penalty, tr_config.gamma);
      save_model(model, tr_out);
      std::cout << "model: " << model.labels.size() << " classes\n";
    } else if (predict_cmd->parsed()) {
      const auto features = load_features(pr_features);
      const SvmModel model = load_model(pr_model);
      std::ostringstream out;
      out << "image_id,predicted\n";
      for (const FeatureVector& fv : features)
        out << fv.image_id << ',' << model.predict(fv.counts.cast<double>()) << '\n';
      atomic_write_text(pr_out, out.str());
      std::cout << "predictions: " << features.size() << " rows\n";
    } else if (eval_cmd->parsed()) {
      eval_opt.config.validate();
      const auto docs = load_docs(eval_opt.corpus_path);
      const auto ensemble = load_ensemble(eval_opt.embedding_specs);
      const auto splits = resolve_splits(eval_opt, docs);
      const EvalResult result =
          evaluate(docs, ensemble, eval_opt.config, splits, eval_opt.jobs);
      AblationReport report;
      report.rows.push_back({"eval", result.mean_accuracy, result.per_set});
      save_report(report, eval_opt.out_path);
      std::cout << "mean accuracy: " << result.mean_accuracy << " over " << splits.size()
                << " sets\n";
    } else if (abl_t->parsed()) {
      ablt_opt.config.validate();
      const auto thresholds = parse_threshold_list(thresholds_text);
      const auto docs = load_docs(ablt_opt.corpus_path);
      const auto ensemble = load_ensemble(ablt_opt.embedding_specs);
      const auto splits = resolve_splits(ablt_opt, docs);
      const AblationReport report = ablate_threshold(docs, ensemble, ablt_opt.config, splits,
                                                     thresholds, ablt_opt.jobs);
      save_report(report, ablt_opt.out_path);
      std::cout << "threshold ablation: " << report.rows.size() << " settings\n";
    } else if (abl_e->parsed()) {
      able_opt.config.validate();
      const auto docs = load_docs(able_opt.corpus_path);
      const auto ensemble = load_ensemble(able_opt.embedding_specs);
      const auto splits = resolve_splits(able_opt, docs);
      std::vector<EmbeddingMode> modes;
      for (std::size_t i = 0; i < ensemble.table_count(); ++i)
        modes.push_back({i, ensemble.table(i).name()});
      modes.push_back({std::nullopt, "averaged"});
      const AblationReport report =
          ablate_embeddings(docs, ensemble, able_opt.config, splits, modes, able_opt.jobs);
      save_report(report, able_opt.out_path);
      std::cout << "embedding ablation: " << report.rows.size() << " settings\n";
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "error: infeasible: " << e.what() << '\n';
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }

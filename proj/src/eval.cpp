#include "tagsem/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "tagsem/detail/rng.hpp"
#include "tagsem/errors.hpp"
#include "tagsem/io.hpp"

namespace tagsem {

namespace {

// Runs fn(0..count-1) on up to `jobs` worker threads; rethrows the first
// exception after all workers join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  const int workers = std::clamp<int>(jobs, 1, static_cast<int>(count == 0 ? 1 : count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

// Categories in order of first appearance, with per-category document
// indices in input order.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_category(
    std::span<const TagDocument> docs) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto [it, inserted] = position.try_emplace(docs[i].category, groups.size());
    if (inserted) groups.push_back({docs[i].category, {}});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

std::vector<TagDocument> select_docs(std::span<const TagDocument> docs,
                                     const std::set<std::string>& ids) {
  std::vector<TagDocument> out;
  out.reserve(ids.size());
  for (const TagDocument& doc : docs)
    if (ids.contains(doc.image_id)) out.push_back(doc);
  return out;
}

void check_split(std::span<const TagDocument> docs, const SplitSpec& split) {
  if (split.train_ids.empty() || split.test_ids.empty())
    throw std::invalid_argument("split " + std::to_string(split.set_index) +
                                ": train and test must both be nonempty");
  std::set<std::string> known;
  for (const TagDocument& doc : docs) known.insert(doc.image_id);
  for (const std::string& id : split.train_ids) {
    if (split.test_ids.contains(id))
      throw std::invalid_argument("split " + std::to_string(split.set_index) + ": id \"" + id +
                                  "\" appears in both train and test");
    if (!known.contains(id))
      throw std::invalid_argument("split " + std::to_string(split.set_index) +
                                  ": unknown train id \"" + id + "\"");
  }
  for (const std::string& id : split.test_ids)
    if (!known.contains(id))
      throw std::invalid_argument("split " + std::to_string(split.set_index) +
                                  ": unknown test id \"" + id + "\"");
}

Eigen::MatrixXd feature_matrix(std::span<const FeatureVector> features) {
  if (features.empty()) throw std::invalid_argument("no feature vectors");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(features.size()), features.front().counts.size());
  for (std::size_t i = 0; i < features.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = features[i].counts.cast<double>();
  return X;
}

std::vector<std::string> feature_labels(std::span<const FeatureVector> features) {
  std::vector<std::string> labels;
  labels.reserve(features.size());
  for (const FeatureVector& fv : features) labels.push_back(fv.category);
  return labels;
}

// Accuracy of one split for one threshold, given prebuilt banks and a
// shared similarity index.
double run_split_with_threshold(std::span<const TagDocument> train_docs,
                                std::span<const TagDocument> test_docs, SimilarityIndex& index,
                                const PipelineConfig& config, double t_threshold) {
  const std::vector<FeatureVector> train_features = [&] {
    std::vector<FeatureVector> fs;
    fs.reserve(train_docs.size());
    for (const TagDocument& doc : train_docs) fs.push_back(extract(doc, index, t_threshold));
    return fs;
  }();
  const SvmModel model = train(feature_matrix(train_features), feature_labels(train_features),
                               config.c_penalty, config.gamma);
  std::vector<std::string> truth, predicted;
  truth.reserve(test_docs.size());
  predicted.reserve(test_docs.size());
  for (const TagDocument& doc : test_docs) {
    const FeatureVector fv = extract(doc, index, t_threshold);
    truth.push_back(doc.category);
    predicted.push_back(model.predict(fv.counts.cast<double>()));
  }
  return accuracy(truth, predicted);
}

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::string format_setting(double value) {
  std::ostringstream out;
  out << value;
  return out.str();
}

}  // namespace

std::vector<SplitSpec> make_splits(std::span<const TagDocument> docs, int n_sets,
                                   int train_per_category,
                                   std::optional<int> test_per_category, std::uint64_t seed) {
  if (n_sets < 1) throw std::invalid_argument("make_splits: n_sets must be >= 1");
  if (train_per_category < 1)
    throw std::invalid_argument("make_splits: train_per_category must be >= 1");
  if (test_per_category && *test_per_category < 1)
    throw std::invalid_argument("make_splits: test_per_category must be >= 1");

  const auto groups = group_by_category(docs);
  if (groups.empty()) throw std::invalid_argument("make_splits: empty corpus");
  for (const auto& [category, indices] : groups) {
    const std::size_t needed =
        static_cast<std::size_t>(train_per_category) +
        static_cast<std::size_t>(test_per_category.value_or(1));
    if (indices.size() < needed)
      throw std::invalid_argument("make_splits: category \"" + category + "\" has " +
                                  std::to_string(indices.size()) + " documents, needs " +
                                  std::to_string(needed));
  }

  std::vector<SplitSpec> splits;
  splits.reserve(static_cast<std::size_t>(n_sets));
  for (int s = 0; s < n_sets; ++s) {
    detail::Rng rng(detail::mix_seed(seed, static_cast<std::uint64_t>(s)));
    SplitSpec split;
    split.set_index = s;
    for (const auto& [category, indices] : groups) {
      std::vector<std::size_t> order = indices;
      rng.shuffle(order);
      const std::size_t n_train = static_cast<std::size_t>(train_per_category);
      const std::size_t n_test =
          test_per_category ? static_cast<std::size_t>(*test_per_category)
                            : order.size() - n_train;
      for (std::size_t i = 0; i < n_train; ++i) split.train_ids.insert(docs[order[i]].image_id);
      for (std::size_t i = n_train; i < n_train + n_test; ++i)
        split.test_ids.insert(docs[order[i]].image_id);
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

double accuracy(std::span<const std::string> truth, std::span<const std::string> predicted) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("accuracy: size mismatch");
  if (truth.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] == predicted[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

std::vector<FilterBank> build_split_banks(std::span<const TagDocument> docs,
                                          const SplitSpec& split,
                                          const EmbeddingEnsemble& ensemble,
                                          const PipelineConfig& config) {
  // Banks see training documents only; test documents cannot influence them.
  return build_filter_banks(select_docs(docs, split.train_ids), ensemble, config);
}

EvalResult evaluate(std::span<const TagDocument> docs, const EmbeddingEnsemble& ensemble,
                    const PipelineConfig& config, std::span<const SplitSpec> splits, int jobs) {
  config.validate();
  if (splits.empty()) throw std::invalid_argument("evaluate: no splits");
  for (const SplitSpec& split : splits) check_split(docs, split);

  EvalResult result;
  result.per_set.resize(splits.size());
  parallel_for(splits.size(), jobs, [&](std::size_t i) {
    const SplitSpec& split = splits[i];
    const std::vector<FilterBank> banks = build_split_banks(docs, split, ensemble, config);
    const Codebook cb = build_codebook(banks);
    SimilarityIndex index(cb, ensemble);
    const std::vector<TagDocument> train_docs = select_docs(docs, split.train_ids);
    const std::vector<TagDocument> test_docs = select_docs(docs, split.test_ids);
    result.per_set[i] =
        run_split_with_threshold(train_docs, test_docs, index, config, config.t_threshold);
  });
  result.mean_accuracy = mean_of(result.per_set);
  return result;
}

AblationReport ablate_threshold(std::span<const TagDocument> docs,
                                const EmbeddingEnsemble& ensemble, const PipelineConfig& config,
                                std::span<const SplitSpec> splits,
                                std::span<const double> thresholds, int jobs) {
  config.validate();
  if (splits.empty()) throw std::invalid_argument("ablate_threshold: no splits");
  if (thresholds.empty()) throw std::invalid_argument("ablate_threshold: no thresholds");
  for (double t : thresholds)
    if (!(t > 0.0 && t <= 1.0))
      throw std::invalid_argument("ablate_threshold: threshold " + std::to_string(t) +
                                  " outside (0, 1]");
  for (const SplitSpec& split : splits) check_split(docs, split);

  // acc[t][s]; banks and the similarity index are built once per split and
  // reused across thresholds (delta does not depend on T).
  std::vector<std::vector<double>> acc(thresholds.size(),
                                       std::vector<double>(splits.size(), 0.0));
  parallel_for(splits.size(), jobs, [&](std::size_t s) {
    const SplitSpec& split = splits[s];
    const Codebook cb = build_codebook(build_split_banks(docs, split, ensemble, config));
    SimilarityIndex index(cb, ensemble);
    const std::vector<TagDocument> train_docs = select_docs(docs, split.train_ids);
    const std::vector<TagDocument> test_docs = select_docs(docs, split.test_ids);
    for (std::size_t t = 0; t < thresholds.size(); ++t)
      acc[t][s] = run_split_with_threshold(train_docs, test_docs, index, config, thresholds[t]);
  });

  AblationReport report;
  report.axis = AblationAxis::threshold;
  for (std::size_t t = 0; t < thresholds.size(); ++t)
    report.rows.push_back({format_setting(thresholds[t]), mean_of(acc[t]), acc[t]});
  return report;
}

AblationReport ablate_embeddings(std::span<const TagDocument> docs,
                                 const EmbeddingEnsemble& ensemble, const PipelineConfig& config,
                                 std::span<const SplitSpec> splits,
                                 std::span<const EmbeddingMode> modes, int jobs) {
  if (modes.empty()) throw std::invalid_argument("ablate_embeddings: no modes");
  AblationReport report;
  report.axis = AblationAxis::embedding_mode;
  for (const EmbeddingMode& mode : modes) {
    const EmbeddingEnsemble restricted =
        mode.table_index ? ensemble.restricted(*mode.table_index) : ensemble;
    const EvalResult r = evaluate(docs, restricted, config, splits, jobs);
    report.rows.push_back({mode.name, r.mean_accuracy, r.per_set});
  }
  return report;
}

void save_splits(std::span<const SplitSpec> splits, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const SplitSpec& split : splits) {
    for (const std::string& id : split.train_ids)
      out << split.set_index << ',' << id << ",train\n";
    for (const std::string& id : split.test_ids) out << split.set_index << ',' << id << ",test\n";
  }
  atomic_write_text(path, out.str());
}

std::vector<SplitSpec> load_splits(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::map<int, SplitSpec> by_index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto first = line.find(',');
    const auto second = line.rfind(',');
    if (first == std::string::npos || second == first)
      throw ParseError(where + ": expected set_index,image_id,train|test");
    const std::string index_text = line.substr(0, first);
    const std::string id = line.substr(first + 1, second - first - 1);
    const std::string role = line.substr(second + 1);
    int set_index = 0;
    auto [p, ec] =
        std::from_chars(index_text.data(), index_text.data() + index_text.size(), set_index);
    if (ec != std::errc() || p != index_text.data() + index_text.size())
      throw ParseError(where + ": bad set index \"" + index_text + "\"");
    if (id.empty()) throw ParseError(where + ": empty image_id");
    SplitSpec& split = by_index[set_index];
    split.set_index = set_index;
    if (role == "train")
      split.train_ids.insert(id);
    else if (role == "test")
      split.test_ids.insert(id);
    else
      throw ParseError(where + ": role must be train or test, got \"" + role + "\"");
  }
  std::vector<SplitSpec> splits;
  for (auto& [index, split] : by_index) {
    for (const std::string& id : split.train_ids)
      if (split.test_ids.contains(id))
        throw ParseError(path.string() + ": id \"" + id + "\" is both train and test in set " +
                         std::to_string(index));
    if (split.train_ids.empty() || split.test_ids.empty())
      throw ParseError(path.string() + ": set " + std::to_string(index) +
                       " lacks train or test documents");
    splits.push_back(std::move(split));
  }
  if (splits.empty()) throw ParseError(path.string() + ": no splits");
  return splits;
}

void save_report(const AblationReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out.precision(17);
  const std::size_t sets = report.rows.empty() ? 0 : report.rows.front().per_set.size();
  out << "setting,mean_accuracy";
  for (std::size_t s = 0; s < sets; ++s) out << ",acc_set_" << s;
  out << '\n';
  for (const AblationRow& row : report.rows) {
    out << row.setting << ',' << row.mean_accuracy;
    for (double a : row.per_set) out << ',' << a;
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

}  // namespace tagsem

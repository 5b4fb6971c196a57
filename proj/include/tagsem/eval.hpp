#ifndef TAGSEM_EVAL_HPP
#define TAGSEM_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tagsem/corpus.hpp"
#include "tagsem/embeddings.hpp"
#include "tagsem/features.hpp"
#include "tagsem/filterbank.hpp"
#include "tagsem/svm.hpp"

namespace tagsem {

// One train/test partition of a corpus by image id.
struct SplitSpec {
  int set_index = 0;
  std::set<std::string> train_ids;
  std::set<std::string> test_ids;
  bool operator==(const SplitSpec&) const = default;
};

struct EvalResult {
  double mean_accuracy = 0.0;
  std::vector<double> per_set;
};

enum class AblationAxis { threshold, embedding_mode };

struct AblationRow {
  std::string setting;
  double mean_accuracy = 0.0;
  std::vector<double> per_set;
};

struct AblationReport {
  AblationAxis axis = AblationAxis::threshold;
  std::vector<AblationRow> rows;
};

// Mode for the embedding ablation: a single table by index, or the full
// averaged ensemble when table_index is absent.
struct EmbeddingMode {
  std::optional<std::size_t> table_index;
  std::string name;
};

// Draws n_sets random per-category train/test partitions without
// replacement. test_per_category absent means "all remaining documents".
// Deterministic given the seed; throws std::invalid_argument naming any
// category with too few documents.
std::vector<SplitSpec> make_splits(std::span<const TagDocument> docs, int n_sets,
                                   int train_per_category,
                                   std::optional<int> test_per_category, std::uint64_t seed);

// Fraction of predictions equal to the true label.
double accuracy(std::span<const std::string> truth, std::span<const std::string> predicted);

// Builds the per-category filter banks for one split, from that split's
// training documents only.
std::vector<FilterBank> build_split_banks(std::span<const TagDocument> docs,
                                          const SplitSpec& split,
                                          const EmbeddingEnsemble& ensemble,
                                          const PipelineConfig& config);

// Full pipeline per split: banks and codebook from training docs, feature
// extraction, one-vs-rest SVM, accuracy on the test docs; mean over sets.
// `jobs` caps the number of splits evaluated concurrently.
EvalResult evaluate(std::span<const TagDocument> docs, const EmbeddingEnsemble& ensemble,
                    const PipelineConfig& config, std::span<const SplitSpec> splits,
                    int jobs = 1);

// Re-runs evaluation with T overridden per setting; banks are built once
// per split and reused across thresholds (delta does not depend on T).
AblationReport ablate_threshold(std::span<const TagDocument> docs,
                                const EmbeddingEnsemble& ensemble, const PipelineConfig& config,
                                std::span<const SplitSpec> splits,
                                std::span<const double> thresholds, int jobs = 1);

// Re-runs evaluation with the ensemble restricted per mode.
AblationReport ablate_embeddings(std::span<const TagDocument> docs,
                                 const EmbeddingEnsemble& ensemble, const PipelineConfig& config,
                                 std::span<const SplitSpec> splits,
                                 std::span<const EmbeddingMode> modes, int jobs = 1);

// Split file: lines of "set_index,image_id,train|test".
void save_splits(std::span<const SplitSpec> splits, const std::filesystem::path& path);
std::vector<SplitSpec> load_splits(const std::filesystem::path& path);

// Report file: CSV with header setting,mean_accuracy,acc_set_0,...
void save_report(const AblationReport& report, const std::filesystem::path& path);

}  // namespace tagsem

#endif  // TAGSEM_EVAL_HPP

#ifndef TAGSEM_FILTERBANK_HPP
#define TAGSEM_FILTERBANK_HPP

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tagsem/corpus.hpp"
#include "tagsem/embeddings.hpp"

namespace tagsem {

// Pipeline-wide knobs. Defaults follow the standard configuration:
// filter-bank threshold 0.50, feature threshold 0.40, top-500 candidate
// tags per image, RBF gamma 1e-5, SVM cost 50.
struct PipelineConfig {
  double delta = 0.50;
  double t_threshold = 0.40;
  int top_n = 500;
  double gamma = 1e-5;
  double c_penalty = 50.0;

  // Throws std::invalid_argument when a field is out of range:
  // delta, t_threshold in (0,1]; top_n >= 1; gamma, c_penalty > 0.
  void validate() const;
};

struct FilterBankEntry {
  std::string tag;
  double score;  // averaged similarity D to the bank's category label
  bool operator==(const FilterBankEntry&) const = default;
};

// Tags semantically close (D >= delta) to one category label, sorted by
// descending score then ascending tag.
struct FilterBank {
  std::string category;
  double delta = 0.0;
  std::vector<FilterBankEntry> entries;
  bool operator==(const FilterBank&) const = default;
};

// Ordered, deduplicated concatenation of filter banks: the feature axes.
struct Codebook {
  std::vector<std::string> categories;    // bank order
  std::vector<FilterBank> banks;          // one per category, same order
  std::vector<std::string> filter_words;  // unique, first-occurrence order
  std::map<std::string, std::set<std::string>> provenance;  // word -> categories
  double delta = 0.0;

  std::size_t size() const { return filter_words.size(); }
  bool operator==(const Codebook&) const = default;
};

// The document's tags sorted by descending multiplicity (ties broken by
// ascending tag), truncated to top_n.
std::vector<std::string> candidate_tags(const TagDocument& doc, int top_n);

// Builds the bank for one category from its training documents: union of
// per-document candidate tags, kept iff the averaged similarity to the
// category label is present and >= delta. Throws InfeasibleError when the
// label is out of vocabulary in every table.
FilterBank build_filter_bank(const std::string& category,
                             std::span<const TagDocument> training_docs,
                             const EmbeddingEnsemble& ensemble, const PipelineConfig& config);

// Builds one bank per category, in order of first appearance in `docs`.
std::vector<FilterBank> build_filter_banks(std::span<const TagDocument> docs,
                                           const EmbeddingEnsemble& ensemble,
                                           const PipelineConfig& config);

// Concatenates banks in order, deduplicating filter words on first
// occurrence. Throws on empty input or mixed deltas.
Codebook build_codebook(std::span<const FilterBank> banks);

// JSON serialization; loaders reject unknown versions and files violating
// the Codebook invariants. save is atomic; round-trips field-for-field.
void save_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

}  // namespace tagsem

#endif  // TAGSEM_FILTERBANK_HPP

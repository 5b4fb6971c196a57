#ifndef TAGSEM_FEATURES_HPP
#define TAGSEM_FEATURES_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tagsem/corpus.hpp"
#include "tagsem/embeddings.hpp"
#include "tagsem/filterbank.hpp"

namespace tagsem {

// Histogram of a document over the codebook's filter words: counts[j] is
// the number of tag occurrences with similarity >= T to filter word j.
struct FeatureVector {
  std::string image_id;
  std::string category;  // may be empty at inference time
  Eigen::VectorXi counts;
};

// Lazy cache of per-token similarity rows against a fixed codebook.
// row(token)[j] = D(token, filter_words[j]), NaN where D is absent, so a
// `>= T` comparison is false exactly when the similarity does not exist.
// Safe for concurrent row() calls.
class SimilarityIndex {
 public:
  SimilarityIndex(const Codebook& cb, const EmbeddingEnsemble& ensemble);

  const Codebook& codebook() const { return *codebook_; }
  const Eigen::VectorXd& row(const std::string& token);

 private:
  const Codebook* codebook_;
  const EmbeddingEnsemble* ensemble_;
  std::unordered_map<std::string, Eigen::VectorXd> rows_;
  mutable std::shared_mutex mutex_;
};

// Extracts the histogram feature of one document. T must be in (0, 1].
FeatureVector extract(const TagDocument& doc, const Codebook& cb,
                      const EmbeddingEnsemble& ensemble, double t_threshold);

// Same, reusing a prebuilt similarity index (cheap across repeated calls
// and across different T values).
FeatureVector extract(const TagDocument& doc, SimilarityIndex& index, double t_threshold);

// Elementwise equal to mapping extract over docs, in input order.
std::vector<FeatureVector> extract_matrix(std::span<const TagDocument> docs, const Codebook& cb,
                                          const EmbeddingEnsemble& ensemble, double t_threshold);

// CSV with header image_id,category,f_0,...,f_{n-1}; one row per document.
void save_features(std::span<const FeatureVector> features, const std::filesystem::path& path);
std::vector<FeatureVector> load_features(const std::filesystem::path& path);

}  // namespace tagsem

#endif  // TAGSEM_FEATURES_HPP

#ifndef TAGSEM_EMBEDDINGS_HPP
#define TAGSEM_EMBEDDINGS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tagsem {

// Cosine similarity of two nonzero vectors, clamped to [-1, 1] against
// rounding. Accepts any dense Eigen expression.
template <typename DerivedA, typename DerivedB>
double cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("cosine: vector lengths differ (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero-norm input");
  const double c = a.dot(b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

// One pre-trained word-embedding model: token -> dense vector of fixed
// dimension. Immutable after load; zero vectors are rejected.
class EmbeddingTable {
 public:
  EmbeddingTable(std::string name, Eigen::Index dim);

  const std::string& name() const { return name_; }
  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }

  // Throws on dimension mismatch, zero vector, or duplicate token.
  void insert(const std::string& token, Eigen::VectorXd vec);

  // nullptr when the token is out of vocabulary.
  const Eigen::VectorXd* find(const std::string& token) const;
  bool contains(const std::string& token) const { return find(token) != nullptr; }

  // All tokens in lexicographic order.
  std::vector<std::string> tokens() const;

  // Mean vector of the phrase's in-vocabulary tokens (corpus tokenization
  // rules); absent when no token is covered.
  std::optional<Eigen::VectorXd> phrase_vector(const std::string& phrase) const;

 private:
  std::string name_;
  Eigen::Index dim_;
  std::unordered_map<std::string, Eigen::VectorXd> entries_;
};

// Loads a plain-text table: one token per line followed by d decimal
// floats, with an optional "vocab_size dim" header line.
EmbeddingTable load_table(const std::filesystem::path& path, const std::string& name);

// Writes the table in load_table's format (header included), atomically.
// Entries are emitted in lexicographic token order.
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);

// Ordered set of embedding tables with unique names. Similarity queries
// average the per-table cosines over the tables covering both phrases.
class EmbeddingEnsemble {
 public:
  explicit EmbeddingEnsemble(std::vector<std::shared_ptr<const EmbeddingTable>> tables);

  std::size_t table_count() const { return tables_.size(); }
  const EmbeddingTable& table(std::size_t i) const { return *tables_.at(i); }

  // Averaged semantic similarity D of two phrases; absent when no table
  // covers both.
  std::optional<double> averaged_similarity(const std::string& x, const std::string& y) const;

  // Sub-ensemble holding only the named table (shares storage).
  EmbeddingEnsemble restricted(std::size_t table_index) const;

 private:
  std::vector<std::shared_ptr<const EmbeddingTable>> tables_;
};

}  // namespace tagsem

#endif  // TAGSEM_EMBEDDINGS_HPP

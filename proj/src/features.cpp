#include "tagsem/features.hpp"

#include <charconv>
#include <limits>
#include <mutex>
#include <sstream>

#include "tagsem/errors.hpp"
#include "tagsem/io.hpp"

namespace tagsem {

SimilarityIndex::SimilarityIndex(const Codebook& cb, const EmbeddingEnsemble& ensemble)
    : codebook_(&cb), ensemble_(&ensemble) {}

const Eigen::VectorXd& SimilarityIndex::row(const std::string& token) {
  {
    std::shared_lock lock(mutex_);
    auto it = rows_.find(token);
    if (it != rows_.end()) return it->second;
  }
  const auto& words = codebook_->filter_words;
  Eigen::VectorXd sims(static_cast<Eigen::Index>(words.size()));
  for (std::size_t j = 0; j < words.size(); ++j) {
    const std::optional<double> d = ensemble_->averaged_similarity(token, words[j]);
    sims(static_cast<Eigen::Index>(j)) = d ? *d : std::numeric_limits<double>::quiet_NaN();
  }
  std::unique_lock lock(mutex_);
  // References into unordered_map stay valid across rehashes.
  return rows_.emplace(token, std::move(sims)).first->second;
}

FeatureVector extract(const TagDocument& doc, SimilarityIndex& index, double t_threshold) {
  if (!(t_threshold > 0.0 && t_threshold <= 1.0))
    throw std::invalid_argument("extract: T must be in (0, 1]");
  const Eigen::Index n = static_cast<Eigen::Index>(index.codebook().size());
  if (n == 0) throw std::invalid_argument("extract: empty codebook");

  FeatureVector fv;
  fv.image_id = doc.image_id;
  fv.category = doc.category;
  fv.counts = Eigen::VectorXi::Zero(n);
  for (const auto& [token, count] : doc.tags) {
    const Eigen::VectorXd& sims = index.row(token);
    // NaN >= T is false, so absent similarities contribute nothing.
    fv.counts += count * (sims.array() >= t_threshold).cast<int>().matrix();
  }
  return fv;
}

FeatureVector extract(const TagDocument& doc, const Codebook& cb,
                      const EmbeddingEnsemble& ensemble, double t_threshold) {
  SimilarityIndex index(cb, ensemble);
  return extract(doc, index, t_threshold);
}

std::vector<FeatureVector> extract_matrix(std::span<const TagDocument> docs, const Codebook& cb,
                                          const EmbeddingEnsemble& ensemble,
                                          double t_threshold) {
  SimilarityIndex index(cb, ensemble);
  std::vector<FeatureVector> features;
  features.reserve(docs.size());
  for (const TagDocument& doc : docs) features.push_back(extract(doc, index, t_threshold));
  return features;
}

void save_features(std::span<const FeatureVector> features, const std::filesystem::path& path) {
  std::ostringstream out;
  const Eigen::Index n = features.empty() ? 0 : features.front().counts.size();
  out << "image_id,category";
  for (Eigen::Index j = 0; j < n; ++j) out << ",f_" << j;
  out << '\n';
  for (const FeatureVector& fv : features) {
    if (fv.counts.size() != n)
      throw std::invalid_argument("save_features: inconsistent feature lengths");
    out << fv.image_id << ',' << fv.category;
    for (Eigen::Index j = 0; j < n; ++j) out << ',' << fv.counts(j);
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::vector<FeatureVector> load_features(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty feature file");

  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "image_id" || header[1] != "category")
    throw ParseError(path.string() + ": bad feature header");
  const std::size_t n = header.size() - 2;
  for (std::size_t j = 0; j < n; ++j)
    if (header[j + 2] != "f_" + std::to_string(j))
      throw ParseError(path.string() + ": bad feature header column " + header[j + 2]);

  std::vector<FeatureVector> features;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != n + 2)
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(n + 2) + " cells, got " + std::to_string(cells.size()));
    FeatureVector fv;
    fv.image_id = cells[0];
    fv.category = cells[1];
    fv.counts.resize(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      int value = 0;
      const std::string& cell = cells[j + 2];
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || p != cell.data() + cell.size())
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": non-integer count \"" + cell + "\"");
      fv.counts(static_cast<Eigen::Index>(j)) = value;
    }
    features.push_back(std::move(fv));
  }
  return features;
}

}  // namespace tagsem

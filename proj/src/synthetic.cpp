#include "tagsem/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "tagsem/detail/rng.hpp"

namespace tagsem {

namespace {

// Fixed-width base-26 spelling with letters a..z, so generated tokens
// survive corpus preprocessing (no digits, no punctuation) and never
// collide across widths.
std::string letters(int value, int width) {
  std::string out(static_cast<std::size_t>(width), 'a');
  for (int pos = width - 1; pos >= 0 && value > 0; --pos) {
    out[static_cast<std::size_t>(pos)] = static_cast<char>('a' + value % 26);
    value /= 26;
  }
  if (value > 0) throw std::invalid_argument("synthetic: id space exhausted, reduce counts");
  return out;
}

Eigen::VectorXd random_unit(detail::Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) v(i) = rng.gaussian();
    const double norm = v.norm();
    if (norm > 1e-9) return v / norm;
  }
}

// Unit vector at exactly the given cosine to the unit centroid.
Eigen::VectorXd vector_at_cosine(detail::Rng& rng, const Eigen::VectorXd& centroid,
                                 double cosine_to_centroid) {
  for (;;) {
    Eigen::VectorXd u = random_unit(rng, static_cast<int>(centroid.size()));
    u -= u.dot(centroid) * centroid;
    const double norm = u.norm();
    if (norm <= 1e-9) continue;
    u /= norm;
    return cosine_to_centroid * centroid +
           std::sqrt(1.0 - cosine_to_centroid * cosine_to_centroid) * u;
  }
}

}  // namespace

void SynthParams::validate() const {
  if (categories < 1) throw std::invalid_argument("synthetic: categories must be >= 1");
  if (docs_per_category < 1)
    throw std::invalid_argument("synthetic: docs_per_category must be >= 1");
  if (vocab_per_category < 1)
    throw std::invalid_argument("synthetic: vocab_per_category must be >= 1");
  if (dim < 2) throw std::invalid_argument("synthetic: dim must be >= 2");
  if (!(tightness > 0.0) || tightness >= 1.0)
    throw std::invalid_argument("synthetic: infeasible tightness (must be in (0, 1))");
  if (noise_rate < 0.0 || noise_rate >= 1.0)
    throw std::invalid_argument("synthetic: noise_rate must be in [0, 1)");
  if (tags_per_doc < 1) throw std::invalid_argument("synthetic: tags_per_doc must be >= 1");
  if (tables < 1) throw std::invalid_argument("synthetic: tables must be >= 1");
}

SynthCorpus generate_synthetic(const SynthParams& params) {
  params.validate();

  std::vector<std::string> category_names;
  for (int k = 0; k < params.categories; ++k) category_names.push_back("cat" + letters(k, 2));

  std::vector<std::vector<std::string>> vocab(static_cast<std::size_t>(params.categories));
  for (int k = 0; k < params.categories; ++k)
    for (int i = 0; i < params.vocab_per_category; ++i)
      vocab[static_cast<std::size_t>(k)].push_back("tag" + letters(k, 2) + letters(i, 4));

  const int noise_vocab =
      params.noise_rate > 0.0
          ? std::max(1, static_cast<int>(std::llround(params.noise_rate * params.categories *
                                                      params.vocab_per_category)))
          : 0;
  std::vector<std::string> noise_words;
  for (int i = 0; i < noise_vocab; ++i) noise_words.push_back("noise" + letters(i, 4));

  SynthCorpus corpus;
  for (int t = 0; t < params.tables; ++t) {
    detail::Rng rng(detail::mix_seed(params.seed, 0x7ab1e000ULL + static_cast<std::uint64_t>(t)));
    EmbeddingTable table("synth-" + letters(t, 1), params.dim);
    for (int k = 0; k < params.categories; ++k) {
      const Eigen::VectorXd centroid = random_unit(rng, params.dim);
      table.insert(category_names[static_cast<std::size_t>(k)], centroid);
      for (const std::string& word : vocab[static_cast<std::size_t>(k)])
        table.insert(word, vector_at_cosine(rng, centroid, params.tightness));
    }
    for (const std::string& word : noise_words) table.insert(word, random_unit(rng, params.dim));
    corpus.tables.push_back(std::move(table));
  }

  detail::Rng rng(detail::mix_seed(params.seed, 0xd0c5ULL));
  for (int k = 0; k < params.categories; ++k) {
    const auto& words = vocab[static_cast<std::size_t>(k)];
    for (int j = 0; j < params.docs_per_category; ++j) {
      RawTagRecord rec;
      rec.image_id = category_names[static_cast<std::size_t>(k)] + "-" + std::to_string(j);
      rec.category = category_names[static_cast<std::size_t>(k)];
      for (int i = 0; i < params.tags_per_doc; ++i) {
        const bool is_noise = noise_vocab > 0 && rng.unit() < params.noise_rate;
        if (is_noise)
          rec.tags.push_back(noise_words[rng.bounded(noise_words.size())]);
        else
          rec.tags.push_back(words[rng.bounded(words.size())]);
      }
      corpus.records.push_back(std::move(rec));
    }
  }
  return corpus;
}

}  // namespace tagsem

#ifndef TAGSEM_SYNTHETIC_HPP
#define TAGSEM_SYNTHETIC_HPP

#include <cstdint>
#include <vector>

#include "tagsem/corpus.hpp"
#include "tagsem/embeddings.hpp"

namespace tagsem {

// Parameters of the seeded synthetic-corpus generator that stands in for
// web-scraped tag corpora at desk scale.
struct SynthParams {
  int categories = 8;
  int docs_per_category = 130;
  int vocab_per_category = 50;
  int dim = 16;
  double tightness = 0.9;   // exact cosine of every vocab word to its centroid
  double noise_rate = 0.1;  // fraction of tag draws taken from the noise pool
  std::uint64_t seed = 0;
  int tags_per_doc = 40;
  int tables = 3;

  // Throws std::invalid_argument when infeasible (tightness >= 1, counts
  // not positive, noise_rate outside [0, 1)).
  void validate() const;
};

struct SynthCorpus {
  std::vector<RawTagRecord> records;
  std::vector<EmbeddingTable> tables;
};

// Per category, a letter-only tag vocabulary whose vectors sit at the
// given cosine around a random unit centroid in every table, with the
// category label placed exactly at the centroid; the noise pool holds
// random unit vectors near no centroid. Deterministic given the seed.
SynthCorpus generate_synthetic(const SynthParams& params);

}  // namespace tagsem

#endif  // TAGSEM_SYNTHETIC_HPP

#ifndef TAGSEM_CORPUS_HPP
#define TAGSEM_CORPUS_HPP

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tagsem {

// One image's raw annotation record: the tags pooled from its k most
// similar web images, before any preprocessing.
struct RawTagRecord {
  std::string image_id;
  std::string category;
  std::vector<std::string> tags;
  int k_similar = 50;
};

// Preprocessed tag multiset for one image. Tokens are lowercase, free of
// punctuation and digits; the ordered map keeps iteration deterministic.
struct TagDocument {
  std::string image_id;
  std::string category;
  std::map<std::string, int> tags;  // token -> count (>= 1)

  // Total tag count m, with multiplicity.
  int total_tags() const;

  bool operator==(const TagDocument&) const = default;
};

// Splits `text` into canonical tokens: ASCII letters are lowercased,
// any ASCII character that is not alphanumeric acts as a separator
// (so "wine-cellar" yields two tokens), bytes >= 0x80 are kept verbatim,
// and tokens containing a decimal digit are dropped entirely.
std::vector<std::string> tokenize(std::string_view text);

// Applies tokenize() to every raw tag and counts the surviving tokens.
TagDocument preprocess(const RawTagRecord& raw);

std::vector<TagDocument> preprocess_corpus(std::span<const RawTagRecord> records);

// Loads a line-delimited corpus file: one flat JSON object per line with
// keys image_id, category, tags and optional k_similar. Throws ParseError
// naming the offending line on malformed input or duplicate image ids.
std::vector<RawTagRecord> load_corpus(const std::filesystem::path& path);

// Inverse of load_corpus, written atomically.
void save_corpus(std::span<const RawTagRecord> records, const std::filesystem::path& path);

}  // namespace tagsem

#endif  // TAGSEM_CORPUS_HPP

#include "tagsem/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "tagsem/errors.hpp"
#include "tagsem/io.hpp"

namespace tagsem {

namespace {

bool is_ascii(char c) { return static_cast<unsigned char>(c) < 0x80; }

bool has_digit(const std::string& token) {
  for (char c : token)
    if (is_ascii(c) && std::isdigit(static_cast<unsigned char>(c))) return true;
  return false;
}

}  // namespace

int TagDocument::total_tags() const {
  int m = 0;
  for (const auto& [token, count] : tags) m += count;
  return m;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !has_digit(current)) tokens.push_back(current);
    current.clear();
  };
  for (char c : text) {
    if (!is_ascii(c)) {
      current += c;  // non-ASCII bytes pass through untouched
    } else if (std::isalnum(static_cast<unsigned char>(c))) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TagDocument preprocess(const RawTagRecord& raw) {
  TagDocument doc;
  doc.image_id = raw.image_id;
  doc.category = raw.category;
  for (const std::string& tag : raw.tags)
    for (const std::string& token : tokenize(tag)) ++doc.tags[token];
  return doc;
}

std::vector<TagDocument> preprocess_corpus(std::span<const RawTagRecord> records) {
  std::vector<TagDocument> docs;
  docs.reserve(records.size());
  for (const RawTagRecord& raw : records) docs.push_back(preprocess(raw));
  return docs;
}

std::vector<RawTagRecord> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path.string());

  std::vector<RawTagRecord> records;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(where + ": malformed JSON record");
    if (!j.is_object()) throw ParseError(where + ": record is not an object");

    RawTagRecord rec;
    if (!j.contains("image_id") || !j["image_id"].is_string())
      throw ParseError(where + ": missing or non-string \"image_id\"");
    if (!j.contains("category") || !j["category"].is_string())
      throw ParseError(where + ": missing or non-string \"category\"");
    if (!j.contains("tags") || !j["tags"].is_array())
      throw ParseError(where + ": missing or non-array \"tags\"");
    rec.image_id = j["image_id"].get<std::string>();
    rec.category = j["category"].get<std::string>();
    for (const auto& t : j["tags"]) {
      if (!t.is_string()) throw ParseError(where + ": non-string tag");
      rec.tags.push_back(t.get<std::string>());
    }
    if (j.contains("k_similar")) {
      if (!j["k_similar"].is_number_integer())
        throw ParseError(where + ": non-integer \"k_similar\"");
      rec.k_similar = j["k_similar"].get<int>();
      if (rec.k_similar <= 0) throw ParseError(where + ": \"k_similar\" must be positive");
    }

    if (rec.image_id.empty()) throw ParseError(where + ": empty image_id");
    if (rec.category.empty()) throw ParseError(where + ": empty category");
    if (!seen_ids.insert(rec.image_id).second)
      throw ParseError(where + ": duplicate image_id \"" + rec.image_id + "\"");
    records.push_back(std::move(rec));
  }
  return records;
}

void save_corpus(std::span<const RawTagRecord> records, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const RawTagRecord& rec : records) {
    nlohmann::ordered_json j;
    j["image_id"] = rec.image_id;
    j["category"] = rec.category;
    j["tags"] = rec.tags;
    j["k_similar"] = rec.k_similar;
    out << j.dump() << '\n';
  }
  atomic_write_text(path, out.str());
}

}  // namespace tagsem

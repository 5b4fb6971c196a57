#include "tagsem/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tagsem/errors.hpp"
#include "tagsem/io.hpp"

namespace tagsem {

namespace {

constexpr int kCodebookVersion = 1;

bool label_in_vocabulary(const std::string& category, const EmbeddingEnsemble& ensemble) {
  for (std::size_t i = 0; i < ensemble.table_count(); ++i)
    if (ensemble.table(i).phrase_vector(category)) return true;
  return false;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("delta must be in (0, 1], got " + std::to_string(delta));
  if (!(t_threshold > 0.0 && t_threshold <= 1.0))
    throw std::invalid_argument("t_threshold must be in (0, 1], got " +
                                std::to_string(t_threshold));
  if (top_n < 1) throw std::invalid_argument("top_n must be >= 1, got " + std::to_string(top_n));
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (!(c_penalty > 0.0)) throw std::invalid_argument("c_penalty must be > 0");
}

std::vector<std::string> candidate_tags(const TagDocument& doc, int top_n) {
  if (top_n < 1) throw std::invalid_argument("candidate_tags: top_n must be >= 1");
  std::vector<std::pair<std::string, int>> counted(doc.tags.begin(), doc.tags.end());
  std::sort(counted.begin(), counted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (counted.size() > static_cast<std::size_t>(top_n)) counted.resize(top_n);
  std::vector<std::string> tags;
  tags.reserve(counted.size());
  for (auto& [tag, count] : counted) tags.push_back(std::move(tag));
  return tags;
}

FilterBank build_filter_bank(const std::string& category,
                             std::span<const TagDocument> training_docs,
                             const EmbeddingEnsemble& ensemble, const PipelineConfig& config) {
  config.validate();
  for (const TagDocument& doc : training_docs)
    if (doc.category != category)
      throw std::invalid_argument("build_filter_bank: document " + doc.image_id +
                                  " has category \"" + doc.category + "\", expected \"" +
                                  category + "\"");
  if (!label_in_vocabulary(category, ensemble))
    throw InfeasibleError("category label \"" + category +
                          "\" is out of vocabulary in every embedding table");

  std::set<std::string> candidates;
  for (const TagDocument& doc : training_docs)
    for (std::string& tag : candidate_tags(doc, config.top_n)) candidates.insert(std::move(tag));

  FilterBank bank;
  bank.category = category;
  bank.delta = config.delta;
  for (const std::string& tag : candidates) {
    const std::optional<double> d = ensemble.averaged_similarity(tag, category);
    if (d && *d >= config.delta) bank.entries.push_back({tag, *d});
  }
  std::sort(bank.entries.begin(), bank.entries.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tag < b.tag;
  });
  return bank;
}

std::vector<FilterBank> build_filter_banks(std::span<const TagDocument> docs,
                                           const EmbeddingEnsemble& ensemble,
                                           const PipelineConfig& config) {
  std::vector<std::string> categories;
  std::map<std::string, std::vector<TagDocument>> grouped;
  for (const TagDocument& doc : docs) {
    if (!grouped.contains(doc.category)) categories.push_back(doc.category);
    grouped[doc.category].push_back(doc);
  }
  std::vector<FilterBank> banks;
  banks.reserve(categories.size());
  for (const std::string& category : categories)
    banks.push_back(build_filter_bank(category, grouped[category], ensemble, config));
  return banks;
}

Codebook build_codebook(std::span<const FilterBank> banks) {
  if (banks.empty()) throw std::invalid_argument("build_codebook: no banks");
  const double delta = banks.front().delta;
  for (const FilterBank& bank : banks)
    if (bank.delta != delta)
      throw std::invalid_argument("build_codebook: mixed deltas (" + std::to_string(delta) +
                                  " vs " + std::to_string(bank.delta) + " in bank \"" +
                                  bank.category + "\")");

  Codebook cb;
  cb.delta = delta;
  std::set<std::string> seen;
  for (const FilterBank& bank : banks) {
    cb.categories.push_back(bank.category);
    cb.banks.push_back(bank);
    for (const FilterBankEntry& entry : bank.entries) {
      if (seen.insert(entry.tag).second) cb.filter_words.push_back(entry.tag);
      cb.provenance[entry.tag].insert(bank.category);
    }
  }
  return cb;
}

void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["version"] = kCodebookVersion;
  j["delta"] = cb.delta;
  j["categories"] = cb.categories;
  nlohmann::ordered_json banks = nlohmann::ordered_json::object();
  for (const FilterBank& bank : cb.banks) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const FilterBankEntry& e : bank.entries) entries.push_back({e.tag, e.score});
    banks[bank.category] = std::move(entries);
  }
  j["banks"] = std::move(banks);
  j["filter_words"] = cb.filter_words;
  atomic_write_text(path, j.dump(2) + "\n");
}

Codebook load_codebook(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(path.string() + ": malformed codebook file");
  if (!j.is_object()) throw ParseError(path.string() + ": codebook is not an object");
  if (!j.contains("version") || !j["version"].is_number_integer())
    throw ParseError(path.string() + ": missing codebook version");
  if (j["version"].get<int>() != kCodebookVersion)
    throw ParseError(path.string() + ": unsupported codebook version " +
                     j["version"].dump());
  for (const char* key : {"delta", "categories", "banks", "filter_words"})
    if (!j.contains(key)) throw ParseError(path.string() + ": missing field \"" + key + "\"");

  Codebook cb;
  cb.delta = j["delta"].get<double>();
  cb.categories = j["categories"].get<std::vector<std::string>>();
  for (const std::string& category : cb.categories) {
    if (!j["banks"].contains(category))
      throw ParseError(path.string() + ": missing bank for category \"" + category + "\"");
    FilterBank bank;
    bank.category = category;
    bank.delta = cb.delta;
    for (const auto& pair : j["banks"][category]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
          !pair[1].is_number())
        throw ParseError(path.string() + ": malformed bank entry in \"" + category + "\"");
      bank.entries.push_back({pair[0].get<std::string>(), pair[1].get<double>()});
    }
    cb.banks.push_back(std::move(bank));
  }
  cb.filter_words = j["filter_words"].get<std::vector<std::string>>();

  // Invariant checks: unique filter words, each present in some bank.
  std::set<std::string> seen;
  for (const std::string& word : cb.filter_words)
    if (!seen.insert(word).second)
      throw ParseError(path.string() + ": duplicate filter word \"" + word + "\"");
  std::set<std::string> in_banks;
  for (const FilterBank& bank : cb.banks) {
    std::set<std::string> bank_tags;
    for (const FilterBankEntry& e : bank.entries) {
      if (!bank_tags.insert(e.tag).second)
        throw ParseError(path.string() + ": duplicate tag \"" + e.tag + "\" in bank \"" +
                         bank.category + "\"");
      if (e.score < cb.delta)
        throw ParseError(path.string() + ": bank entry \"" + e.tag + "\" scores below delta");
      in_banks.insert(e.tag);
      cb.provenance[e.tag].insert(bank.category);
    }
  }
  for (const std::string& word : cb.filter_words)
    if (!in_banks.contains(word))
      throw ParseError(path.string() + ": filter word \"" + word + "\" appears in no bank");
  if (seen != in_banks)
    throw ParseError(path.string() + ": filter words do not match bank contents");
  return cb;
}

}  // namespace tagsem

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "tagsem/corpus.hpp"
#include "tagsem/errors.hpp"

using namespace tagsem;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc);
  out << content;
  return path;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("load_corpus reads well-formed records in file order") {
  const auto path = write_temp(
      "corpus_ok.jsonl",
      R"({"image_id":"a","category":"library","tags":["books","library"]})"
      "\n"
      R"({"image_id":"b","category":"subway","tags":["metro"],"k_similar":25})"
      "\n"
      R"({"image_id":"c","category":"library","tags":[]})"
      "\n");
  const auto records = load_corpus(path);
  REQUIRE(records.size() == 3);
  CHECK(records[0].image_id == "a");
  CHECK(records[0].category == "library");
  CHECK(records[0].tags == std::vector<std::string>{"books", "library"});
  CHECK(records[0].k_similar == 50);
  CHECK(records[1].image_id == "b");
  CHECK(records[1].k_similar == 25);
  CHECK(records[2].tags.empty());
}

TEST_CASE("load_corpus of an empty file yields an empty list") {
  const auto path = write_temp("corpus_empty.jsonl", "");
  CHECK(load_corpus(path).empty());
}

TEST_CASE("load_corpus errors name the offending line") {
  SUBCASE("missing category") {
    const auto path = write_temp("corpus_nocat.jsonl",
                                 R"({"image_id":"a","category":"x","tags":[]})"
                                 "\n"
                                 R"({"image_id":"b","tags":["t"]})"
                                 "\n");
    CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains(":2"), ParseError);
  }
  SUBCASE("malformed JSON") {
    const auto path = write_temp("corpus_bad.jsonl", "{not json}\n");
    CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains(":1"), ParseError);
  }
  SUBCASE("duplicate image_id") {
    const auto path = write_temp("corpus_dup.jsonl",
                                 R"({"image_id":"a","category":"x","tags":[]})"
                                 "\n"
                                 R"({"image_id":"a","category":"y","tags":[]})"
                                 "\n");
    CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("duplicate image_id"), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), ParseError);
  }
}

TEST_CASE("preprocess applies the tokenization rules") {
  RawTagRecord raw{"img1", "winecellar", {"Wine-Cellar!", "2019", "wines"}, 50};
  const TagDocument doc = preprocess(raw);
  CHECK(doc.image_id == "img1");
  CHECK(doc.category == "winecellar");
  const std::map<std::string, int> expected{{"wine", 1}, {"cellar", 1}, {"wines", 1}};
  CHECK(doc.tags == expected);
  CHECK(doc.total_tags() == 3);
}

TEST_CASE("preprocess of an empty record yields an empty multiset") {
  RawTagRecord raw{"img1", "x", {}, 50};
  const TagDocument doc = preprocess(raw);
  CHECK(doc.tags.empty());
  CHECK(doc.total_tags() == 0);
}

TEST_CASE("preprocess preserves multiplicity") {
  RawTagRecord raw{"img1", "x", {"library", "library"}, 50};
  const TagDocument doc = preprocess(raw);
  CHECK(doc.tags.at("library") == 2);
  CHECK(doc.total_tags() == 2);
}

TEST_CASE("tokenize drops digit-bearing tokens entirely") {
  CHECK(tokenize("mp3 player") == std::vector<std::string>{"player"});
  CHECK(tokenize("2019") == std::vector<std::string>{});
  CHECK(tokenize("A-B_c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("preprocessing is idempotent on its own output tokens") {
  std::mt19937 gen(7);
  const std::string charset = "abcXYZ019-_.! \t";
  std::uniform_int_distribution<std::size_t> pick(0, charset.size() - 1);
  std::uniform_int_distribution<int> len(0, 12);
  for (int trial = 0; trial < 200; ++trial) {
    std::string raw;
    const int n = len(gen);
    for (int i = 0; i < n; ++i) raw += charset[pick(gen)];
    for (const std::string& token : tokenize(raw)) {
      const auto again = tokenize(token);
      REQUIRE(again.size() == 1);
      REQUIRE(again[0] == token);
    }
  }
}

TEST_CASE("preprocess is independent of raw tag order") {
  std::mt19937 gen(11);
  std::vector<std::string> tags = {"Wine!", "wine", "Cellar-Door", "grapes", "2020", "Tastings"};
  RawTagRecord a{"i", "c", tags, 50};
  for (int trial = 0; trial < 20; ++trial) {
    std::shuffle(tags.begin(), tags.end(), gen);
    RawTagRecord b{"i", "c", tags, 50};
    CHECK(preprocess(a).tags == preprocess(b).tags);
  }
}

TEST_CASE("total_tags counts surviving tokens with multiplicity") {
  std::mt19937 gen(13);
  std::uniform_int_distribution<int> n_tags(0, 30);
  const std::vector<std::string> pool = {"wine", "cellar", "Wine", "99", "a-b", "x!"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (int trial = 0; trial < 50; ++trial) {
    RawTagRecord raw{"i", "c", {}, 50};
    int expected = 0;
    const int n = n_tags(gen);
    for (int i = 0; i < n; ++i) {
      raw.tags.push_back(pool[pick(gen)]);
      expected += static_cast<int>(tokenize(raw.tags.back()).size());
    }
    CHECK(preprocess(raw).total_tags() == expected);
  }
}

TEST_CASE("save_corpus round-trips through load_corpus") {
  std::vector<RawTagRecord> records{{"a", "library", {"books", "Wine!"}, 50},
                                    {"b", "subway", {}, 25}};
  const auto path = std::filesystem::temp_directory_path() / "corpus_roundtrip.jsonl";
  save_corpus(records, path);
  const auto loaded = load_corpus(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].image_id == records[0].image_id);
  CHECK(loaded[0].tags == records[0].tags);
  CHECK(loaded[1].k_similar == 25);
}

}  // TEST_SUITE
